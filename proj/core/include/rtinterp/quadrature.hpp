#pragma once

#include <functional>

#include <Eigen/Dense>

#include "rtinterp/geometry.hpp"

namespace rtinterp {

/// Rule on the unit reference simplex in barycentric form.
struct QuadratureRule {
  int dim = 0;
  int degree = 0;
  /// One row per point, dim+1 barycentric coordinates (lambda_0 first).
  Eigen::MatrixXd barycentric;
  Eigen::VectorXd weights;

  int size() const { return static_cast<int>(weights.size()); }
  /// Cartesian reference coordinates, one column per point.
  Eigen::MatrixXd points() const;
};

/// Collapsed Gauss-Jacobi product rule, exact for total degree <= `degree`.
/// dim in {1, 2, 3}; degree in [0, 30].
QuadratureRule simplex_rule(int dim, int degree);

/// Rule with physical points (ambient coordinates, one column per point) and
/// weights that carry the Jacobian.
struct PhysicalRule {
  Eigen::MatrixXd points;
  Eigen::VectorXd weights;
  int size() const { return static_cast<int>(weights.size()); }
};

PhysicalRule element_rule(const Simplex& t, int degree);
/// Facet opposite vertex i (edge in 2D, face in 3D). Throws
/// DegenerateElementError when the facet measure is below 1e-14 diam^(dim-1).
PhysicalRule facet_rule(const Simplex& t, int facet, int degree);
/// Triangular face of a tetrahedron.
PhysicalRule face_rule(const Simplex& tet, int face, int degree);

inline constexpr int kWorkingDegree = 19;
inline constexpr int kVerificationDegree = 24;
inline constexpr double kDisagreementTolerance = 1e-8;

struct VerifiedIntegral {
  Eigen::VectorXd value;
  /// |I_19 - I_24|_inf / |integral of |f||_inf.
  double relative_gap = 0.0;
  bool flagged = false;
};

using VectorIntegrand = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;

/// Integrates with the rule produced by `make_rule(degree)` at the working
/// and verification degrees; the reported value is the degree-24 result.
VerifiedIntegral verified_integral(const std::function<PhysicalRule(int)>& make_rule,
                                   const VectorIntegrand& f);

}  // namespace rtinterp
