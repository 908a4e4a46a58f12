#include "rtinterp/analysis.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "rtinterp/errors.hpp"

namespace rtinterp {

namespace {

double factorial(int n) {
  double r = 1.0;
  for (int i = 2; i <= n; ++i) r *= i;
  return r;
}

double binomial(int n, int k) {
  double r = 1.0;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

MultiIndex plus(const MultiIndex& a, const MultiIndex& b) { return {a[0] + b[0], a[1] + b[1], a[2] + b[2]}; }

void check_p(double p) {
  if (!(p >= 1.0)) throw ValidationError(fmt::format("norm exponent p must be >= 1, got {}", p));
}

double sum_pow(const PhysicalRule& rule, const MagnitudeFn& g, double p) {
  // Neumaier summation.
  double s = 0.0;
  double c = 0.0;
  for (int q = 0; q < rule.size(); ++q) {
    const double a = std::abs(g(rule.points.col(q)));
    const double v = rule.weights[q] * (p == 2.0 ? a * a : p == 1.0 ? a : std::pow(a, p));
    const double t = s + v;
    c += std::abs(s) >= std::abs(v) ? (s - t) + v : (v - t) + s;
    s = t;
  }
  return s + c;
}

struct Accumulator {
  double gap = 0.0;
  bool flagged = false;

  double operator()(const NormValue& v) {
    gap = std::max(gap, v.relative_gap);
    flagged = flagged || v.flagged;
    return v.value;
  }
};

RatioReport finish(double lhs, double rhs) {
  RatioReport r;
  r.lhs = lhs;
  r.rhs = rhs;
  r.ratio = rhs > 0.0 ? lhs / rhs : (lhs == 0.0 ? 0.0 : kInfinity);
  return r;
}

/// prod_j (sum_k L(k, j) d_k)^{i_j} as a polynomial in the symbols d.
ScalarPoly directional_operator(const Eigen::MatrixXd& L, const MultiIndex& i) {
  const int d = static_cast<int>(L.rows());
  ScalarPoly op = ScalarPoly::constant(d, 1.0);
  for (int j = 0; j < d; ++j) {
    ScalarPoly form(d);
    for (int k = 0; k < d; ++k) {
      MultiIndex e{0, 0, 0};
      e[static_cast<std::size_t>(k)] = 1;
      form.add_term(e, L(k, j));
    }
    for (int r = 0; r < i[static_cast<std::size_t>(j)]; ++r) op = op * form;
  }
  return op;
}

Interpolation interpolate_checked(int k, const Simplex& t, const AnalyticField& u) {
  return interpolate_field(k, t, u, InterpolationPath::Reference);
}

}  // namespace

NormValue measure_norm(const Simplex& t, const MagnitudeFn& magnitude, const NormSpec& spec) {
  check_p(spec.p);
  NormValue out;
  if (spec.is_infinite()) {
    const PhysicalRule rule = element_rule(t, spec.degree);
    double m = 0.0;
    for (int q = 0; q < rule.size(); ++q) m = std::max(m, std::abs(magnitude(rule.points.col(q))));
    for (int i = 0; i <= t.dim(); ++i) {
      m = std::max(m, std::abs(magnitude(t.vertex(i))));
      m = std::max(m, std::abs(magnitude(t.facet_centroid(i))));
    }
    out.value = m;
    return out;
  }
  const double hi = sum_pow(element_rule(t, spec.degree), magnitude, spec.p);
  const double lo = sum_pow(element_rule(t, std::min(spec.degree, kWorkingDegree)), magnitude, spec.p);
  out.relative_gap = hi > 0.0 ? std::abs(hi - lo) / hi : (lo == 0.0 ? 0.0 : 1.0);
  out.flagged = out.relative_gap > kDisagreementTolerance;
  out.value = std::pow(std::max(hi, 0.0), 1.0 / spec.p);
  return out;
}

double lp_norm(const ScalarField& f, const Simplex& t, const NormSpec& spec) {
  return measure_norm(t, [&](const Eigen::VectorXd& x) { return f(x); }, spec).value;
}

double lp_norm(const AnalyticField& u, const Simplex& t, const NormSpec& spec) {
  return measure_norm(t, [&](const Eigen::VectorXd& x) { return u(x).norm(); }, spec).value;
}

double lp_norm(const ScalarPoly& f, const Simplex& t, const NormSpec& spec) {
  return measure_norm(t, [&](const Eigen::VectorXd& x) { return f(x); }, spec).value;
}

double lp_norm(const VectorPoly& u, const Simplex& t, const NormSpec& spec) {
  return measure_norm(t, [&](const Eigen::VectorXd& x) { return u(x).norm(); }, spec).value;
}

double lp_norm(const RTField& u, const Simplex& t, const NormSpec& spec) {
  return measure_norm(t, [&](const Eigen::VectorXd& x) { return u(x).norm(); }, spec).value;
}

AnalyticField directional_derivative(const AnalyticField& u, const Eigen::VectorXd& ell) {
  if (ell.size() != u.dim()) throw ValidationError("direction dimension differs from field dimension");
  if (std::abs(ell.norm() - 1.0) > 1e-12)
    throw ValidationError(fmt::format("direction must be a unit vector, |l| = {:.17g}", ell.norm()));
  MultiIndex i{0, 0, 0};
  i[0] = 1;
  Eigen::MatrixXd L = Eigen::MatrixXd::Identity(u.dim(), u.dim());
  L.col(0) = ell;
  return directional_derivative(u, L, i);
}

AnalyticField directional_derivative(const AnalyticField& u, const Eigen::MatrixXd& L, const MultiIndex& i) {
  if (L.rows() != u.dim() || L.cols() != u.dim()) throw ValidationError("direction matrix has wrong shape");
  const int order = total_degree(i);
  if (order > u.max_order())
    throw ValidationError(fmt::format("insufficient derivative catalog for field '{}': order {} requested, {} available",
                                      u.name(), order, u.max_order()));
  const auto op = std::make_shared<const ScalarPoly>(directional_operator(L, i));
  return AnalyticField(
      u.dim(), u.max_order() - order,
      [u, op](const MultiIndex& a, const Eigen::VectorXd& x) {
        Eigen::VectorXd s = Eigen::VectorXd::Zero(u.dim());
        for (const auto& [beta, c] : op->terms()) s += static_cast<double>(c) * u.derivative(plus(a, beta), x);
        return s;
      },
      u.name());
}

double derivative_magnitude(const ScalarField& f, int m, const Eigen::VectorXd& x) {
  double s = 0.0;
  for (const auto& a : multi_indices_of_degree(f.dim(), m)) s += std::abs(f.derivative(a, x));
  return s;
}

double derivative_magnitude(const AnalyticField& u, int m, const Eigen::VectorXd& x) {
  double s = 0.0;
  for (const auto& a : multi_indices_of_degree(u.dim(), m)) s += u.derivative(a, x).cwiseAbs().sum();
  return s;
}

ScalarPoly averaged_taylor(const ScalarField& f, int m, const Simplex& domain) {
  if (m < 0) throw ValidationError("Taylor order must be >= 0");
  if (f.dim() != domain.dim()) throw ValidationError("field and domain dimensions differ");
  if (m > f.max_order())
    throw ValidationError(fmt::format("insufficient derivative catalog for field '{}': order {} requested, {} available",
                                      f.name(), m, f.max_order()));
  const int d = f.dim();
  const PhysicalRule rule = element_rule(domain, kVerificationDegree);
  const double vol = domain.measure();
  const auto alphas = multi_indices_up_to(d, m);
  ScalarPoly out(d);
  std::vector<std::vector<double>> values(alphas.size(), std::vector<double>(static_cast<std::size_t>(rule.size())));
  for (std::size_t ai = 0; ai < alphas.size(); ++ai)
    for (int q = 0; q < rule.size(); ++q) values[ai][static_cast<std::size_t>(q)] = f.derivative(alphas[ai], rule.points.col(q));
  for (std::size_t ai = 0; ai < alphas.size(); ++ai) {
    const MultiIndex& a = alphas[ai];
    const double afact = factorial(a[0]) * factorial(a[1]) * factorial(a[2]);
    for (int b0 = 0; b0 <= a[0]; ++b0)
      for (int b1 = 0; b1 <= a[1]; ++b1)
        for (int b2 = 0; b2 <= a[2]; ++b2) {
          const MultiIndex beta{b0, b1, b2};
          const MultiIndex gamma{a[0] - b0, a[1] - b1, a[2] - b2};
          double integral = 0.0;
          for (int q = 0; q < rule.size(); ++q) {
            double mono = 1.0;
            for (int i = 0; i < d; ++i)
              mono *= std::pow(-rule.points(i, q), gamma[static_cast<std::size_t>(i)]);
            integral += rule.weights[q] * values[ai][static_cast<std::size_t>(q)] * mono;
          }
          const double c = binomial(a[0], b0) * binomial(a[1], b1) * binomial(a[2], b2) / afact;
          out.add_term(beta, c * integral / vol);
        }
  }
  return out;
}

RatioReport stability_ratio_rvp(const Simplex& t, const AnalyticField& u, int k, double p) {
  const NormSpec spec{p};
  const Decomposition dec = rvp_decomposition(t);
  const Eigen::MatrixXd L = dec.map.matrix();
  const int d = t.dim();
  const Interpolation pi = interpolate_checked(k, t, u);
  Accumulator acc;
  const double lhs = acc(measure_norm(t, [&](const Eigen::VectorXd& x) { return pi.field(x).norm(); }, spec));
  double rhs = acc(measure_norm(t, [&](const Eigen::VectorXd& x) { return u(x).norm(); }, spec));
  for (int j = 0; j < d; ++j) {
    const AnalyticField dj = directional_derivative(u, Eigen::VectorXd(L.col(j)));
    for (int i = 0; i < d; ++i)
      rhs += dec.tag.h[static_cast<std::size_t>(j)] *
             acc(measure_norm(t, [&](const Eigen::VectorXd& x) { return dj(x)[i]; }, spec));
  }
  rhs += t.diameter() * acc(measure_norm(t, [&](const Eigen::VectorXd& x) { return u.divergence(x); }, spec));
  RatioReport r = finish(lhs, rhs);
  r.element = to_record(t);
  r.field = u.name();
  r.k = k;
  r.p = p;
  r.h = t.diameter();
  r.condition = pi.condition;
  r.quadrature_gap = std::max(acc.gap, pi.quadrature_gap);
  r.flagged = acc.flagged;
  return r;
}

RatioReport stability_ratio_mac(const Simplex& t, const AnalyticField& u, int k, double p) {
  const NormSpec spec{p};
  const Interpolation pi = interpolate_checked(k, t, u);
  Accumulator acc;
  const double lhs = acc(measure_norm(t, [&](const Eigen::VectorXd& x) { return pi.field(x).norm(); }, spec));
  const double rhs = acc(measure_norm(t, [&](const Eigen::VectorXd& x) { return u(x).norm(); }, spec)) +
                     t.diameter() * acc(measure_norm(
                                        t, [&](const Eigen::VectorXd& x) { return u.jacobian(x).norm(); }, spec));
  RatioReport r = finish(lhs, rhs);
  r.element = to_record(t);
  r.field = u.name();
  r.k = k;
  r.p = p;
  r.h = t.diameter();
  r.condition = pi.condition;
  r.quadrature_gap = std::max(acc.gap, pi.quadrature_gap);
  r.flagged = acc.flagged;
  return r;
}

RatioReport error_ratio_rvp(const Simplex& t, const AnalyticField& u, int k, int m, double p) {
  if (m < 0 || m > k) throw ValidationError(fmt::format("need 0 <= m <= k, got m = {}, k = {}", m, k));
  const NormSpec spec{p};
  const Decomposition dec = rvp_decomposition(t);
  const Eigen::MatrixXd L = dec.map.matrix();
  const Interpolation pi = interpolate_checked(k, t, u);
  Accumulator acc;
  const double lhs =
      acc(measure_norm(t, [&](const Eigen::VectorXd& x) { return (u(x) - pi.field(x)).norm(); }, spec));
  double rhs = 0.0;
  for (const auto& i : multi_indices_of_degree(t.dim(), m + 1)) {
    double weight = 1.0;
    for (int j = 0; j < t.dim(); ++j) weight *= std::pow(dec.tag.h[static_cast<std::size_t>(j)], i[static_cast<std::size_t>(j)]);
    const AnalyticField di = directional_derivative(u, L, i);
    rhs += weight * acc(measure_norm(t, [&](const Eigen::VectorXd& x) { return di(x).norm(); }, spec));
  }
  const ScalarField div = u.divergence_field();
  rhs += std::pow(t.diameter(), m + 1) *
         acc(measure_norm(t, [&](const Eigen::VectorXd& x) { return derivative_magnitude(div, m, x); }, spec));
  RatioReport r = finish(lhs, rhs);
  r.element = to_record(t);
  r.field = u.name();
  r.k = k;
  r.m = m;
  r.p = p;
  r.h = t.diameter();
  r.condition = pi.condition;
  r.quadrature_gap = std::max(acc.gap, pi.quadrature_gap);
  r.flagged = acc.flagged;
  return r;
}

RatioReport error_ratio_mac(const Simplex& t, const AnalyticField& u, int k, int m, double p) {
  if (m < 0 || m > k) throw ValidationError(fmt::format("need 0 <= m <= k, got m = {}, k = {}", m, k));
  const NormSpec spec{p};
  const Interpolation pi = interpolate_checked(k, t, u);
  Accumulator acc;
  const double lhs =
      acc(measure_norm(t, [&](const Eigen::VectorXd& x) { return (u(x) - pi.field(x)).norm(); }, spec));
  const double rhs =
      std::pow(t.diameter(), m + 1) *
      acc(measure_norm(t, [&](const Eigen::VectorXd& x) { return derivative_magnitude(u, m + 1, x); }, spec));
  RatioReport r = finish(lhs, rhs);
  r.element = to_record(t);
  r.field = u.name();
  r.k = k;
  r.m = m;
  r.p = p;
  r.h = t.diameter();
  r.condition = pi.condition;
  r.quadrature_gap = std::max(acc.gap, pi.quadrature_gap);
  r.flagged = acc.flagged;
  return r;
}

VectorPoly counterexample_poly(int k) {
  if (k < 0) throw ValidationError("k must be >= 0");
  const auto x1 = ScalarPoly::coordinate(3, 0);
  const auto x3 = ScalarPoly::coordinate(3, 2);
  ScalarPoly x1k = ScalarPoly::constant(3, 1.0);
  for (int i = 0; i < k; ++i) x1k = x1k * x1;
  return VectorPoly(std::vector<ScalarPoly>{x1k * x1, ScalarPoly(3), -static_cast<double>(k + 1) * x1k * x3});
}

AnalyticField counterexample_field(int k) {
  return AnalyticField::from_poly(counterexample_poly(k), fmt::format("counterexample-k{}", k));
}

VectorPoly sharpness_control_poly(int k) {
  VectorPoly v = counterexample_poly(k);
  v[1] = ScalarPoly::coordinate(3, 0) + ScalarPoly::coordinate(3, 2);
  return v;
}

std::vector<RatioReport> sharpness_experiment(int k, double p, const std::vector<double>& h2_sequence,
                                              Family family) {
  if (k < 0) throw ValidationError("k must be >= 0");
  if (h2_sequence.empty()) throw ValidationError("h2 sequence is empty");
  for (std::size_t i = 0; i < h2_sequence.size(); ++i) {
    if (!(h2_sequence[i] > 0.0)) throw ValidationError("h2 values must be positive");
    if (i > 0 && !(h2_sequence[i] < h2_sequence[i - 1])) throw ValidationError("h2 sequence must be decreasing");
  }
  const NormSpec spec{p};
  const VectorPoly u_hat = family == Family::F2 ? counterexample_poly(k) : sharpness_control_poly(k);
  const std::string name =
      family == Family::F2 ? fmt::format("counterexample-k{}", k) : fmt::format("control-k{}", k);
  std::vector<RatioReport> out;
  for (double h2 : h2_sequence) {
    const FamilyTag tag{family, {h2 * h2, h2, h2 * h2}};
    const Simplex t = make_family(tag);
    const Eigen::MatrixXd B = Eigen::Vector3d(tag.h[0], tag.h[1], tag.h[2]).asDiagonal();
    const AffineMap map(B, Eigen::VectorXd::Zero(3));
    const AnalyticField u = AnalyticField::from_poly(piola_push(map, u_hat), name);
    const Interpolation pi = interpolate_checked(k, t, u);
    Accumulator acc;
    const double lhs = acc(measure_norm(t, [&](const Eigen::VectorXd& x) { return pi.field(x)[1]; }, spec));
    double rhs = acc(measure_norm(t, [&](const Eigen::VectorXd& x) { return u(x).norm(); }, spec));
    for (int j = 0; j < 3; ++j)
      for (int i = 0; i < 3; ++i)
        rhs += tag.h[static_cast<std::size_t>(j)] *
               acc(measure_norm(t, [&](const Eigen::VectorXd& x) { return u.partial(j, x)[i]; }, spec));
    const double div = acc(measure_norm(t, [&](const Eigen::VectorXd& x) { return u.divergence(x); }, spec));
    rhs += t.diameter() * div;
    RatioReport r = finish(lhs, rhs);
    for (int i : {0, 2}) {
      double own = acc(measure_norm(t, [&](const Eigen::VectorXd& x) { return pi.field(x)[i]; }, spec));
      double bound = acc(measure_norm(t, [&](const Eigen::VectorXd& x) { return u(x)[i]; }, spec)) + h2 * div;
      for (int j = 0; j < 3; ++j)
        bound += tag.h[static_cast<std::size_t>(j)] *
                 acc(measure_norm(t, [&](const Eigen::VectorXd& x) { return u.partial(j, x)[i]; }, spec));
      (i == 0 ? r.component_ratio_1 : r.component_ratio_3) = finish(own, bound).ratio;
    }
    r.element = describe(tag);
    r.field = name;
    r.k = k;
    r.p = p;
    r.h = h2;
    r.condition = pi.condition;
    r.quadrature_gap = std::max(acc.gap, pi.quadrature_gap);
    r.flagged = acc.flagged;
    out.push_back(r);
  }
  return out;
}

double fit_rate(const std::vector<double>& h, const std::vector<double>& err) {
  if (h.size() != err.size()) throw ValidationError("h and err lengths differ");
  if (h.size() < 3) throw ValidationError("fit_rate needs at least 3 pairs");
  const auto n = static_cast<double>(h.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < h.size(); ++i) {
    if (!(h[i] > 0.0) || !(err[i] > 0.0)) throw ValidationError("fit_rate needs positive entries");
    const double x = std::log(h[i]);
    const double y = std::log(err[i]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double den = n * sxx - sx * sx;
  if (den <= 0.0) throw ValidationError("fit_rate needs at least two distinct h values");
  return (n * sxy - sx * sy) / den;
}

std::string describe(const FamilyTag& tag) {
  std::string s = to_string(tag.family) + "(";
  for (std::size_t i = 0; i < tag.h.size(); ++i) s += fmt::format("{}{:.6g}", i ? "," : "", tag.h[i]);
  return s + ")";
}

}  // namespace rtinterp
