#pragma once

#include <functional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "rtinterp/field.hpp"
#include "rtinterp/geometry.hpp"
#include "rtinterp/poly.hpp"

namespace rtinterp {

/// (k+1)(k+3) in 2D, (k+1)(k+2)(k+4)/2 in 3D.
int rt_dimension(int k, int dim);
int rt_face_dof_count(int k, int dim);
int rt_interior_dof_count(int k, int dim);

/// RT_k on unit-reference coordinates: orthonormal P_k along each axis, then
/// x * m for the degree-k monomials m.
std::vector<VectorPoly> rt_reference_basis(int k, int dim);

/// Distance of v from P_k^d + x P~_k, measured on coefficients: the size of
/// the terms above degree k+1 plus the least-squares misfit of the degree
/// k+1 part to the form x q, relative to the largest coefficient.
double rt_membership_residual(int k, const VectorPoly& v);
bool in_rt_space(int k, const VectorPoly& v, double tol = 1e-10);

/// Field stored as a reference polynomial and an affine Piola map:
/// u(x) = (1/det M) M p(M^{-1}(x - c)).
class RTField {
 public:
  RTField(AffineMap map, VectorPoly reference);

  int dim() const { return map_.dim(); }
  const AffineMap& map() const { return map_; }
  const VectorPoly& reference() const { return reference_; }

  Eigen::VectorXd operator()(const Eigen::VectorXd& x) const;
  Eigen::MatrixXd jacobian(const Eigen::VectorXd& x) const;
  double divergence(const Eigen::VectorXd& x) const;
  /// Expanded monomial form in physical coordinates.
  VectorPoly expanded() const;

 private:
  AffineMap map_;
  AffineMap inverse_;
  VectorPoly reference_;
  std::vector<VectorPoly> reference_jacobian_;
};

struct RTSpace {
  int k = 0;
  Simplex element;
  /// Unit reference -> element.
  AffineMap map;
  /// Basis on unit-reference coordinates; element fields are their Piola images.
  std::vector<VectorPoly> reference_basis;

  int size() const { return static_cast<int>(reference_basis.size()); }
  RTField member(int j) const { return RTField(map, reference_basis[static_cast<std::size_t>(j)]); }
  std::vector<VectorPoly> expanded_basis() const;
};

RTSpace rt_basis(int k, const Simplex& element);

struct VerifiedDofs {
  Eigen::VectorXd values;
  double relative_gap = 0.0;
  bool flagged = false;
};

/// Ordered RT_k functionals: for each facet (opposite vertex 0, 1, ...) the
/// moments of u.n against an orthonormal P_k basis of the facet
/// parametrized from its lowest-index vertex; then, component by component,
/// the moments of u_i against an orthonormal P_{k-1} basis of the element.
class DofSet {
 public:
  using PointField = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;

  DofSet(int k, Simplex element);

  int k() const { return k_; }
  int size() const { return face_count() + interior_count(); }
  int face_count() const { return rt_face_dof_count(k_, element_.dim()); }
  int interior_count() const { return rt_interior_dof_count(k_, element_.dim()); }
  const Simplex& element() const { return element_; }
  /// "face f moment j" or "interior component c moment j".
  std::string describe(int i) const;

  /// Exact for polynomial integrands of total degree <= `degree`.
  Eigen::VectorXd evaluate(const PointField& u, int degree) const;
  Eigen::VectorXd apply(const VectorPoly& u) const;
  Eigen::VectorXd apply(const RTField& u) const;
  /// Degree-24 values with the degree-19 cross-check.
  VerifiedDofs apply(const AnalyticField& u) const;

 private:
  Eigen::VectorXd evaluate_impl(const PointField& u, int degree, Eigen::VectorXd* abs_mass) const;

  int k_;
  Simplex element_;
  AffineMap map_;
  std::vector<ScalarPoly> facet_basis_;
  std::vector<ScalarPoly> interior_basis_;
};

/// DOF matrix D(i, j) = dof_i(basis_j).
Eigen::MatrixXd dof_matrix(const RTSpace& space, const DofSet& dofs);

/// 2-norm condition number after row and column equilibration.
double scaled_condition(const Eigen::MatrixXd& D);

enum class InterpolationPath { Direct, Reference };

struct Interpolation {
  RTField field;
  double condition = 0.0;
  /// |D c - b|_inf / |b|_inf.
  double dof_residual = 0.0;
  double quadrature_gap = 0.0;
};

inline constexpr double kMaxCondition = 1e12;
inline constexpr double kMaxDofResidual = 1e-9;

/// Pi_k u. Throws QuadratureDisagreement when the DOF integrals disagree,
/// ConditioningError when the scaled DOF matrix condition exceeds 1e12 and
/// NumericalError when the DOF residual exceeds 1e-9.
Interpolation interpolate_field(int k, const Simplex& element, const AnalyticField& u,
                                InterpolationPath path = InterpolationPath::Reference);
Interpolation interpolate_field(int k, const Simplex& element, const VectorPoly& u,
                                InterpolationPath path = InterpolationPath::Reference);

/// Direct assembly on the element.
VectorPoly interpolate(int k, const Simplex& element, const AnalyticField& u);
VectorPoly interpolate(int k, const Simplex& element, const VectorPoly& u);
/// Pull back to the unit F1/F2 reference of the decomposition, interpolate
/// there, push forward.
VectorPoly interpolate_via_reference(int k, const Simplex& element, const AnalyticField& u);

/// L2 projection onto P_k(element), in physical coordinates.
ScalarPoly l2_project_pk(int k, const Simplex& element, const ScalarField& f);

/// Unit F1/F2 reference and the affine map onto `element` used by the
/// reference path.
struct ReferenceFrame {
  Family family;
  Simplex reference;
  AffineMap map;
};
ReferenceFrame reference_frame(const Simplex& element);

}  // namespace rtinterp
