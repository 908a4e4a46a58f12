#pragma once

#include <array>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "rtinterp/poly.hpp"

namespace rtinterp {

/// A triangle or tetrahedron with ordered vertices.
class Simplex {
 public:
  /// Throws ValidationError on malformed input and DegenerateElementError when
  /// |det(edge matrix)| <= 1e-14 * diameter^dim.
  explicit Simplex(std::vector<Eigen::VectorXd> vertices);

  int dim() const { return dim_; }
  const Eigen::VectorXd& vertex(int i) const { return vertices_[static_cast<std::size_t>(i)]; }
  const std::vector<Eigen::VectorXd>& vertices() const { return vertices_; }

  /// Columns v_i - v_0, i = 1..dim.
  Eigen::MatrixXd edge_matrix() const;
  double signed_det() const { return det_; }
  double measure() const;
  double diameter() const { return diameter_; }
  Eigen::VectorXd centroid() const;

  /// Vertex indices of the facet opposite vertex i, ascending.
  std::vector<int> facet_vertices(int i) const;
  Eigen::VectorXd outward_normal(int i) const;
  double facet_measure(int i) const;
  Eigen::VectorXd facet_centroid(int i) const;

  /// Interior angle at vertex `at` of the triangle (at, b, c).
  double planar_angle(int at, int b, int c) const;

 private:
  int dim_;
  std::vector<Eigen::VectorXd> vertices_;
  double det_;
  double diameter_;
};

/// x = M x_hat + c.
class AffineMap {
 public:
  AffineMap(Eigen::MatrixXd M, Eigen::VectorXd c);
  static AffineMap identity(int dim);
  /// Map from the unit reference simplex onto `t` (M = edge matrix, c = v0).
  static AffineMap from_reference(const Simplex& t);

  int dim() const { return static_cast<int>(M_.rows()); }
  const Eigen::MatrixXd& matrix() const { return M_; }
  const Eigen::VectorXd& offset() const { return c_; }
  double det() const { return det_; }

  Eigen::VectorXd operator()(const Eigen::VectorXd& x_hat) const { return M_ * x_hat + c_; }
  Eigen::VectorXd apply_inverse(const Eigen::VectorXd& x) const;
  Eigen::MatrixXd inverse_matrix() const;
  AffineMap inverse() const;
  /// (*this)(other(x)).
  AffineMap compose(const AffineMap& other) const;

  double norm_inf() const;
  double inverse_norm_inf() const;

 private:
  Eigen::MatrixXd M_;
  Eigen::VectorXd c_;
  double det_;
};

/// Row-sum norm.
double matrix_norm_inf(const Eigen::MatrixXd& M);

enum class Family { F1, F2 };

struct FamilyTag {
  Family family = Family::F1;
  std::vector<double> h;
};

std::string to_string(Family f);

Simplex make_reference(int dim);
/// Vertices 0, h1 e1, h2 e2 [, h3 e3].
Simplex make_f1(const std::vector<double>& h);
/// Vertices 0, h1 e1 + h2 e2, h2 e2 [, h3 e3].
Simplex make_f2(const std::vector<double>& h);
Simplex make_family(const FamilyTag& tag);

struct RvpResult {
  int vertex = 0;
  double value = 0.0;
};

/// Vertex maximizing |det| of the unit edge directions leaving it. Values
/// within 1e-12 count as ties and resolve to the lowest index.
RvpResult rvp_constant(const Simplex& t);

/// Largest planar or dihedral angle (3D); largest interior angle (2D).
double mac_constant(const Simplex& t);

/// Dihedral angle along the edge shared by the facets opposite vertices i and j.
double dihedral_angle(const Simplex& t, int i, int j);

struct Decomposition {
  FamilyTag tag;
  Simplex reference;
  AffineMap map;
  /// map(reference.vertex(j)) == t.vertex(permutation[j]).
  std::vector<int> permutation;
};

/// MAC decomposition onto an F1 or F2 reference element.
Decomposition reference_decomposition(const Simplex& t);

/// RVP decomposition: F1 reference at the rvp vertex, columns the unit edge
/// directions l_j, lengths h_j along them.
Decomposition rvp_decomposition(const Simplex& t);

/// Largest |map(reference vertex j) - t.vertex(permutation[j])|.
double vertex_residual(const Decomposition& d, const Simplex& t);

/// u(x) = (1/det M) M u_hat(M^{-1}(x - c)).
VectorPoly piola_push(const AffineMap& map, const VectorPoly& u_hat);
/// Inverse transform: u_hat(x_hat) = det M M^{-1} u(M x_hat + c).
VectorPoly piola_pull(const AffineMap& map, const VectorPoly& u);

/// Record `dim v0x v0y [v0z] v1x ...`.
Simplex parse_simplex(const std::string& record);
std::string to_record(const Simplex& t);

}  // namespace rtinterp
