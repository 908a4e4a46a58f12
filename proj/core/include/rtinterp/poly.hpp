#pragma once

#include <array>
#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace rtinterp {

/// Exponent multi-index. Entries past the polynomial's dimension stay zero.
using MultiIndex = std::array<int, 3>;

inline int total_degree(const MultiIndex& a) { return a[0] + a[1] + a[2]; }

/// All multi-indices in `dim` variables with total degree exactly `degree`,
/// in graded reverse-lexicographic order (x1 power descending first).
std::vector<MultiIndex> multi_indices_of_degree(int dim, int degree);

/// All multi-indices in `dim` variables with total degree <= `max_degree`,
/// grouped by increasing degree.
std::vector<MultiIndex> multi_indices_up_to(int dim, int max_degree);

/// Exact integral of x^alpha over the unit reference simplex in `dim`
/// variables: prod(alpha_i!) / (|alpha| + dim)!.
double monomial_integral_simplex(const MultiIndex& alpha, int dim);

/// Extended precision; orthonormal bases up to degree 6 carry monomial
/// coefficients near 1e6 and must stay orthonormal to 1e-12.
using Coefficient = long double;

/// Multivariate polynomial with real coefficients in canonical form
/// (no explicitly stored zero coefficients).
class ScalarPoly {
 public:
  using Terms = std::map<MultiIndex, Coefficient>;

  explicit ScalarPoly(int dim = 3);
  static ScalarPoly constant(int dim, double value);
  static ScalarPoly monomial(int dim, const MultiIndex& alpha, double coeff = 1.0);
  /// The coordinate function x_axis.
  static ScalarPoly coordinate(int dim, int axis);
  /// a0 + sum_i a[i] x_i.
  static ScalarPoly affine(double a0, std::span<const double> a);

  int dim() const { return dim_; }
  const Terms& terms() const { return terms_; }
  bool is_zero() const { return terms_.empty(); }
  /// Total degree; -1 for the zero polynomial.
  int degree() const;
  double coefficient(const MultiIndex& alpha) const;
  /// Largest coefficient magnitude (0 for the zero polynomial).
  double max_abs_coefficient() const;

  void add_term(const MultiIndex& alpha, Coefficient coeff);

  double operator()(std::span<const double> x) const;
  double operator()(const Eigen::VectorXd& x) const;
  Coefficient evaluate_extended(std::span<const double> x) const;

  ScalarPoly& operator+=(const ScalarPoly& other);
  ScalarPoly& operator-=(const ScalarPoly& other);
  ScalarPoly& operator*=(Coefficient s);

  friend ScalarPoly operator+(ScalarPoly a, const ScalarPoly& b) { return a += b; }
  friend ScalarPoly operator-(ScalarPoly a, const ScalarPoly& b) { return a -= b; }
  friend ScalarPoly operator*(ScalarPoly a, double s) { return a *= s; }
  friend ScalarPoly operator*(double s, ScalarPoly a) { return a *= s; }
  friend ScalarPoly operator*(ScalarPoly a, Coefficient s) { return a *= s; }
  friend ScalarPoly operator*(const ScalarPoly& a, const ScalarPoly& b);
  friend ScalarPoly operator-(ScalarPoly a) { return a *= -1.0; }

  /// Exact equality of canonical forms.
  friend bool operator==(const ScalarPoly& a, const ScalarPoly& b) {
    return a.dim_ == b.dim_ && a.terms_ == b.terms_;
  }

  /// Terms of total degree exactly `degree`.
  ScalarPoly homogeneous_part(int degree) const;
  /// Drops coefficients with |c| <= tol.
  ScalarPoly pruned(double tol) const;

  std::string to_string() const;

 private:
  int dim_;
  Terms terms_;
};

/// Exact partial derivative.
ScalarPoly poly_derive(const ScalarPoly& p, int axis);
/// Mixed partial derivative of multi-index order `alpha`.
ScalarPoly poly_derive(const ScalarPoly& p, const MultiIndex& alpha);

/// Exact integral over the unit reference simplex.
double integrate_reference(const ScalarPoly& p);
Coefficient integrate_reference_extended(const ScalarPoly& p);

/// p(A y + b) as a polynomial in y. A is dim(p) x n, b has dim(p) entries; the
/// result lives in n variables.
ScalarPoly compose_affine(const ScalarPoly& p, const Eigen::MatrixXd& A,
                          const Eigen::VectorXd& b);

/// L2(reference simplex) inner product, evaluated exactly.
double reference_inner_product(const ScalarPoly& a, const ScalarPoly& b);

/// Basis of P_k in `dim` variables, orthonormal in L2 of the unit reference
/// simplex. Two passes of Gram-Schmidt over the graded monomials with exact
/// inner products.
std::vector<ScalarPoly> pk_basis(int k, int dim);

/// Number of monomials of degree <= k in `dim` variables: C(k+dim, dim).
int pk_dimension(int k, int dim);

/// Vector of `dim` scalar polynomials sharing one dimension.
class VectorPoly {
 public:
  explicit VectorPoly(int dim = 3);
  explicit VectorPoly(std::vector<ScalarPoly> components);
  /// c * e_axis for a scalar polynomial c.
  static VectorPoly along(int axis, const ScalarPoly& c);

  int dim() const { return static_cast<int>(components_.size()); }
  const ScalarPoly& operator[](int i) const { return components_[static_cast<std::size_t>(i)]; }
  ScalarPoly& operator[](int i) { return components_[static_cast<std::size_t>(i)]; }
  const std::vector<ScalarPoly>& components() const { return components_; }

  int degree() const;
  double max_abs_coefficient() const;
  Eigen::VectorXd operator()(const Eigen::VectorXd& x) const;

  VectorPoly& operator+=(const VectorPoly& other);
  VectorPoly& operator-=(const VectorPoly& other);
  VectorPoly& operator*=(double s);
  friend VectorPoly operator+(VectorPoly a, const VectorPoly& b) { return a += b; }
  friend VectorPoly operator-(VectorPoly a, const VectorPoly& b) { return a -= b; }
  friend VectorPoly operator*(VectorPoly a, double s) { return a *= s; }
  friend VectorPoly operator*(double s, VectorPoly a) { return a *= s; }
  friend bool operator==(const VectorPoly& a, const VectorPoly& b) {
    return a.components_ == b.components_;
  }

  ScalarPoly divergence() const;
  VectorPoly pruned(double tol) const;
  std::string to_string() const;

 private:
  std::vector<ScalarPoly> components_;
};

/// x * p for scalar p: the vector (x_1 p, ..., x_dim p).
VectorPoly position_times(const ScalarPoly& p);

/// Applies the same affine substitution to every component.
VectorPoly compose_affine(const VectorPoly& v, const Eigen::MatrixXd& A,
                          const Eigen::VectorXd& b);

/// Returns M * v for a dim x dim matrix.
VectorPoly matrix_times(const Eigen::MatrixXd& M, const VectorPoly& v);

/// Largest coefficient difference, relative to the larger coefficient scale
/// of the two operands (absolute when both are zero).
double relative_coefficient_error(const VectorPoly& a, const VectorPoly& b);
double relative_coefficient_error(const ScalarPoly& a, const ScalarPoly& b);
double max_coefficient_difference(const ScalarPoly& a, const ScalarPoly& b);
double max_coefficient_difference(const VectorPoly& a, const VectorPoly& b);

}  // namespace rtinterp
