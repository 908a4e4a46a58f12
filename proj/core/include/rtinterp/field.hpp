#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "rtinterp/geometry.hpp"
#include "rtinterp/poly.hpp"

namespace rtinterp {

/// Derivative order reported for polynomial and closed-form entries.
inline constexpr int kUnlimitedOrder = 64;

/// Scalar function with exact partial derivatives up to `max_order`.
class ScalarField {
 public:
  using DerivativeFn = std::function<double(const MultiIndex&, const Eigen::VectorXd&)>;

  ScalarField(int dim, int max_order, DerivativeFn fn, std::string name = {});
  static ScalarField from_poly(const ScalarPoly& p, std::string name = {});

  int dim() const { return dim_; }
  int max_order() const { return max_order_; }
  const std::string& name() const { return name_; }

  double operator()(const Eigen::VectorXd& x) const { return fn_({0, 0, 0}, x); }
  /// Throws ValidationError past max_order.
  double derivative(const MultiIndex& alpha, const Eigen::VectorXd& x) const;

 private:
  int dim_;
  int max_order_;
  DerivativeFn fn_;
  std::string name_;
};

/// Vector field with exact partial derivatives up to `max_order`.
class AnalyticField {
 public:
  using DerivativeFn = std::function<Eigen::VectorXd(const MultiIndex&, const Eigen::VectorXd&)>;

  AnalyticField(int dim, int max_order, DerivativeFn fn, std::string name = {});
  static AnalyticField from_poly(const VectorPoly& p, std::string name = {});
  static AnalyticField from_components(const std::vector<ScalarField>& components, std::string name = {});

  int dim() const { return dim_; }
  int max_order() const { return max_order_; }
  const std::string& name() const { return name_; }
  AnalyticField renamed(std::string name) const;

  Eigen::VectorXd operator()(const Eigen::VectorXd& x) const { return fn_({0, 0, 0}, x); }
  Eigen::VectorXd derivative(const MultiIndex& alpha, const Eigen::VectorXd& x) const;
  Eigen::VectorXd partial(int axis, const Eigen::VectorXd& x) const;
  /// J(i, j) = du_i/dx_j.
  Eigen::MatrixXd jacobian(const Eigen::VectorXd& x) const;
  double divergence(const Eigen::VectorXd& x) const;

  ScalarField component(int i) const;
  ScalarField divergence_field() const;

 private:
  int dim_;
  int max_order_;
  DerivativeFn fn_;
  std::string name_;
};

/// u(x) = (1/det M) M u_hat(M^{-1}(x - c)), derivatives by the chain rule.
AnalyticField piola_push(const AffineMap& map, const AnalyticField& u_hat);
/// u_hat(x_hat) = det M M^{-1} u(M x_hat + c).
AnalyticField piola_pull(const AffineMap& map, const AnalyticField& u);
/// f(M x_hat + c) with the chain rule.
ScalarField compose_affine(const ScalarField& f, const AffineMap& map);

/// One summand poly(x) * g(w . x + phase).
struct Term {
  enum class Kind { One, Exp, Sin };
  ScalarPoly poly;
  Kind kind = Kind::One;
  Eigen::VectorXd w;
  double phase = 0.0;
};

/// Sum of terms, differentiated by the Leibniz rule.
ScalarField term_field(int dim, std::vector<Term> terms, std::string name = {});

Term poly_term(const ScalarPoly& p);
Term exp_term(const ScalarPoly& p, const Eigen::VectorXd& w);
Term sin_term(const ScalarPoly& p, const Eigen::VectorXd& w, double phase = 0.0);

}  // namespace rtinterp
