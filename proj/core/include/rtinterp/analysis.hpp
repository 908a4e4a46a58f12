#pragma once

#include <functional>
#include <limits>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "rtinterp/field.hpp"
#include "rtinterp/geometry.hpp"
#include "rtinterp/poly.hpp"
#include "rtinterp/quadrature.hpp"
#include "rtinterp/rt.hpp"

namespace rtinterp {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

struct NormSpec {
  double p = 2.0;
  /// Finite p: integrate |f|^p at this degree and cross-check at kWorkingDegree.
  int degree = kVerificationDegree;

  bool is_infinite() const { return p == kInfinity; }
};

struct NormValue {
  double value = 0.0;
  double relative_gap = 0.0;
  bool flagged = false;
};

using MagnitudeFn = std::function<double(const Eigen::VectorXd&)>;

/// Norm of a pointwise magnitude. p = inf samples the quadrature nodes, the
/// vertices and the facet centroids.
NormValue measure_norm(const Simplex& t, const MagnitudeFn& magnitude, const NormSpec& spec = {});

double lp_norm(const ScalarField& f, const Simplex& t, const NormSpec& spec = {});
double lp_norm(const AnalyticField& u, const Simplex& t, const NormSpec& spec = {});
double lp_norm(const ScalarPoly& f, const Simplex& t, const NormSpec& spec = {});
double lp_norm(const VectorPoly& u, const Simplex& t, const NormSpec& spec = {});
double lp_norm(const RTField& u, const Simplex& t, const NormSpec& spec = {});

/// du/dl = sum_j l_j du/dx_j. Throws ValidationError unless |l| = 1 within 1e-12.
AnalyticField directional_derivative(const AnalyticField& u, const Eigen::VectorXd& ell);
/// prod_j (d/dl_j)^{i_j} u with the directions l_j as columns of L.
AnalyticField directional_derivative(const AnalyticField& u, const Eigen::MatrixXd& L, const MultiIndex& i);

/// Sum over |alpha| = m of |D^alpha f(x)|.
double derivative_magnitude(const ScalarField& f, int m, const Eigen::VectorXd& x);
double derivative_magnitude(const AnalyticField& u, int m, const Eigen::VectorXd& x);

/// Q_m f(x) = (1/|D|) int_D sum_{|a|<=m} D^a f(y) (x - y)^a / a! dy.
ScalarPoly averaged_taylor(const ScalarField& f, int m, const Simplex& domain);

struct RatioReport {
  double lhs = 0.0;
  double rhs = 0.0;
  double ratio = 0.0;
  std::string element;
  std::string field;
  int k = 0;
  int m = -1;
  double p = 2.0;
  double h = 0.0;
  double condition = 0.0;
  /// Largest relative 19/24 quadrature gap among the norms and DOF integrals.
  double quadrature_gap = 0.0;
  bool flagged = false;
  /// sharpness_experiment only: |Pi_{k,i} u| / (|u_i| + sum_j h_j |du_i/dx_j| + h_2 |div u|)
  /// for i = 1 and i = 3. Logged, not asserted.
  double component_ratio_1 = 0.0;
  double component_ratio_3 = 0.0;
};

/// lhs = |Pi_k u|, rhs = |u| + sum_ij h_j |du_i/dl_j| + h_T |div u| with the
/// edges at the rvp vertex.
RatioReport stability_ratio_rvp(const Simplex& t, const AnalyticField& u, int k, double p);
/// lhs = |Pi_k u|, rhs = |u| + h_T |grad u|.
RatioReport stability_ratio_mac(const Simplex& t, const AnalyticField& u, int k, double p);
/// lhs = |u - Pi_k u|, rhs = sum_{|i|=m+1} h^i |d^{m+1}u/dl^i| + h_T^{m+1} |D^m div u|.
RatioReport error_ratio_rvp(const Simplex& t, const AnalyticField& u, int k, int m, double p);
/// lhs = |u - Pi_k u|, rhs = h_T^{m+1} |D^{m+1} u|.
RatioReport error_ratio_mac(const Simplex& t, const AnalyticField& u, int k, int m, double p);

/// (x1^{k+1}, 0, -(k+1) x1^k x3): divergence free, second component zero.
AnalyticField counterexample_field(int k);
VectorPoly counterexample_poly(int k);

/// Field used on F1 by the control run: the counterexample plus (0, x1 + x3, 0).
VectorPoly sharpness_control_poly(int k);

/// Element with (h1, h2, h3) = (h2^2, h2, h2^2) of the given family, field
/// Piola-pushed from the unit reference by diag(h). lhs = |Pi_{k,2} u|,
/// rhs = |u| + sum_ij h_j |du_i/dx_j| + h_T |div u|.
std::vector<RatioReport> sharpness_experiment(int k, double p, const std::vector<double>& h2_sequence,
                                              Family family = Family::F2);

/// Least-squares slope of log(err) against log(h).
double fit_rate(const std::vector<double>& h, const std::vector<double>& err);

std::string describe(const FamilyTag& tag);

}  // namespace rtinterp
