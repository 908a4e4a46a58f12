#include <doctest.h>

#include <cmath>
#include <random>

#include "oracle.hpp"
#include "rtinterp/analysis.hpp"
#include "rtinterp/catalog.hpp"
#include "rtinterp/errors.hpp"
#include "test_support.hpp"

using namespace rtinterp;

namespace {

AnalyticField trig3() { return catalog_lookup("smooth-trig").field; }

std::vector<double> halvings(int n) {
  std::vector<double> h;
  for (int i = 1; i <= n; ++i) h.push_back(std::ldexp(1.0, -i));
  return h;
}

double spread(const std::vector<double>& r) {
  return *std::max_element(r.begin(), r.end()) / *std::min_element(r.begin(), r.end());
}

}  // namespace

TEST_CASE("lp_norm examples") {
  const auto tet = make_reference(3);
  const auto tri = make_reference(2);
  CHECK(std::abs(lp_norm(ScalarPoly::constant(3, 1.0), tet) - std::sqrt(1.0 / 6.0)) < 1e-14);
  CHECK(lp_norm(ScalarPoly::coordinate(2, 0), tri, NormSpec{kInfinity}) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(std::abs(lp_norm(ScalarPoly::coordinate(3, 0), tet, NormSpec{1.0}) - 1.0 / 24.0) < 1e-15);
  CHECK_THROWS_AS(lp_norm(ScalarPoly::coordinate(3, 0), tet, NormSpec{0.5}), ValidationError);

  // p = 2 of a vector polynomial against the exact monomial integrals.
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 5; ++trial) {
    const VectorPoly v = random_vector_poly(3, 1 + trial, rng());
    double exact = 0.0;
    for (int i = 0; i < 3; ++i) exact += integrate_reference(v[i] * v[i]);
    CHECK(std::abs(lp_norm(v, tet) - std::sqrt(exact)) < 1e-12 * std::sqrt(exact));
  }

  // p = 3 on a physical element against the oracle.
  const auto t = test_support::random_tet(rng);
  const auto f = ScalarPoly::coordinate(3, 0) - ScalarPoly::coordinate(3, 2) * 0.3;
  const double o = oracle::integrate_simplex(
      t.vertices(), [&](const Eigen::VectorXd& x) { return std::pow(std::abs(f(x)), 3.0); }, 20);
  CHECK(lp_norm(f, t, NormSpec{3.0}) == doctest::Approx(std::cbrt(o)).epsilon(1e-8));
}

TEST_CASE("directional_derivative") {
  const auto x1 = ScalarPoly::coordinate(3, 0);
  const auto x2 = ScalarPoly::coordinate(3, 1);
  const AnalyticField a = AnalyticField::from_poly(VectorPoly::along(0, x1));
  const Eigen::Vector3d p(0.2, 0.3, 0.4);
  CHECK((directional_derivative(a, Eigen::Vector3d(1, 0, 0))(p) - Eigen::Vector3d(1, 0, 0)).norm() < 1e-15);
  const AnalyticField b = AnalyticField::from_poly(VectorPoly::along(0, x2));
  const Eigen::Vector3d diag = Eigen::Vector3d(1, 1, 0) / std::sqrt(2.0);
  CHECK((directional_derivative(b, diag)(p) - Eigen::Vector3d(1 / std::sqrt(2.0), 0, 0)).norm() < 1e-15);
  CHECK_THROWS_AS(directional_derivative(b, Eigen::Vector3d(1, 1, 0)), ValidationError);

  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (const auto& f : {AnalyticField::from_poly(random_vector_poly(3, 4, 99)), trig3(),
                        catalog_lookup("smooth-exp-layer", {3, 1, 0.5}).field}) {
    Eigen::Vector3d ell(u(rng), u(rng), u(rng));
    ell.normalize();
    const auto df = directional_derivative(f, ell);
    for (int s = 0; s < 10; ++s) {
      const Eigen::Vector3d x(u(rng), u(rng), u(rng));
      const Eigen::VectorXd fd = (f(x + 1e-5 * ell) - f(x - 1e-5 * ell)) / 2e-5;
      CHECK((df(x) - fd).norm() < 1e-6 * (1 + fd.norm()));
    }
  }

  // Mixed second derivative along two directions.
  Eigen::Matrix3d L = Eigen::Matrix3d::Identity();
  L.col(1) = diag;
  const auto f = AnalyticField::from_poly(VectorPoly::along(2, x1 * x2));
  CHECK(std::abs(directional_derivative(f, L, {1, 1, 0})(p)[2] - 1 / std::sqrt(2.0)) < 1e-15);
}

TEST_CASE("averaged_taylor") {
  const auto tri = make_reference(2);
  std::mt19937_64 rng(21);
  for (int m = 0; m <= 4; ++m)
    for (int dim = 2; dim <= 3; ++dim) {
      const Simplex d = dim == 3 ? test_support::random_tet(rng) : test_support::random_triangle(rng);
      const ScalarPoly f = random_vector_poly(dim, m, rng())[0];
      CHECK(max_coefficient_difference(averaged_taylor(ScalarField::from_poly(f), m, d), f) < 1e-10);
    }
  const auto x1 = ScalarPoly::coordinate(2, 0);
  const auto q0 = averaged_taylor(ScalarField::from_poly(x1), 0, tri);
  CHECK(std::abs(q0.coefficient({0, 0, 0}) - 1.0 / 3.0) < 1e-14);
  CHECK(q0.pruned(1e-14).degree() == 0);

  // Q_1 x1^2 by direct double quadrature: (1/|D|) int y1^2 + 2 y1 (x1 - y1) dy.
  const auto q1 = averaged_taylor(ScalarField::from_poly(x1 * x1), 1, tri);
  for (const auto& x : {Eigen::Vector2d(0.1, 0.2), Eigen::Vector2d(0.7, 0.1), Eigen::Vector2d(-1, 2)}) {
    const double o = oracle::integrate_reference(
                         2, [&](const Eigen::VectorXd& y) { return y[0] * y[0] + 2 * y[0] * (x[0] - y[0]); }, 6) /
                     0.5;
    CHECK(std::abs(q1(Eigen::VectorXd(x)) - o) < 1e-14);
  }

  const ScalarField low(3, 1, [](const MultiIndex&, const Eigen::VectorXd&) { return 0.0; }, "low");
  CHECK_THROWS_AS(averaged_taylor(low, 2, make_reference(3)), ValidationError);
}

TEST_CASE("counterexample_field") {
  const auto k0 = counterexample_poly(0);
  CHECK(k0[0].coefficient({1, 0, 0}) == 1.0);
  CHECK(k0[1].is_zero());
  CHECK(k0[2].coefficient({0, 0, 1}) == -1.0);
  const auto k1 = counterexample_poly(1);
  CHECK(k1[0].coefficient({2, 0, 0}) == 1.0);
  CHECK(k1[2].coefficient({1, 0, 1}) == -2.0);
  CHECK(k1[2].terms().size() == 1);
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int k = 0; k <= 4; ++k) {
    const auto f = counterexample_field(k);
    for (int s = 0; s < 20; ++s) {
      const Eigen::Vector3d x(u(rng), u(rng), u(rng));
      CHECK(std::abs(f.divergence(x)) < 1e-12);
      CHECK(f(x)[1] == 0.0);
    }
  }
}

TEST_CASE("stability_ratio_rvp") {
  const auto t = make_f1({0.5, 0.3, 0.01});
  const VectorPoly c = VectorPoly(std::vector<ScalarPoly>{ScalarPoly::constant(3, 1.0), ScalarPoly::constant(3, -2.0),
                                                          ScalarPoly::constant(3, 0.5)});
  const auto r = stability_ratio_rvp(t, AnalyticField::from_poly(c), 0, 2.0);
  CHECK(r.lhs == doctest::Approx(lp_norm(c, t)).epsilon(1e-12));
  CHECK(r.ratio <= 1.0 + 1e-12);
  const auto z = stability_ratio_rvp(t, AnalyticField::from_poly(VectorPoly(3)), 1, 2.0);
  CHECK(z.lhs == 0.0);
  CHECK(z.ratio == 0.0);

  for (int k = 0; k <= 2; ++k) {
    std::vector<double> ratios;
    for (double h : halvings(6)) ratios.push_back(stability_ratio_rvp(make_f1({h, h, h * h}), trig3(), k, 2.0).ratio);
    CHECK(spread(ratios) < 10.0);
  }
}

TEST_CASE("stability_ratio_mac") {
  const AnalyticField u = AnalyticField::from_poly(random_vector_poly(3, 3, 17));
  std::mt19937_64 rng(17);
  double worst = 0.0;
  for (int s = 0; s < 8; ++s) {
    const double h1 = std::pow(10.0, 3 * catalog_uniform(rng()));
    const double h2 = std::pow(10.0, 3 * catalog_uniform(rng()));
    const double h3 = std::pow(10.0, 3 * catalog_uniform(rng()));
    worst = std::max(worst, stability_ratio_mac(make_f2({h1, h2, h3}), u, 1, 2.0).ratio);
  }
  CHECK(worst < 2.0);
  CHECK(stability_ratio_mac(make_f2({1, 2, 3}), AnalyticField::from_poly(VectorPoly(3)), 0, 2.0).ratio == 0.0);
  const auto t = make_f2({0.3, 1, 0.01});
  const VectorPoly v = piola_push(reference_frame(t).map, rt_reference_basis(1, 3)[7] + rt_reference_basis(1, 3)[13]);
  CHECK(stability_ratio_mac(t, AnalyticField::from_poly(v), 1, 2.0).ratio <= 1.0 + 1e-9);
}

TEST_CASE("error ratios") {
  // P_m fields lie in RT_k for m <= k.
  const AnalyticField lin = AnalyticField::from_poly(random_vector_poly(3, 1, 8));
  CHECK(error_ratio_rvp(make_f1({1, 0.5, 0.1}), lin, 1, 1, 2.0).lhs < 1e-13);
  CHECK(error_ratio_mac(make_f2({1, 0.5, 0.1}), lin, 2, 1, 2.0).lhs < 1e-13);
  CHECK_THROWS_AS(error_ratio_rvp(make_f1({1, 1, 1}), lin, 1, 2, 2.0), ValidationError);

  std::vector<double> ratios;
  for (double h : halvings(6)) ratios.push_back(error_ratio_rvp(make_f1({h, h, h * h}), trig3(), 1, 1, 2.0).ratio);
  CHECK(spread(ratios) < 10.0);

  // m = 0, k = 2: first derivatives only, the error itself decays like h^(k+1).
  std::vector<double> hs = halvings(5);
  std::vector<double> errs;
  for (double h : hs) {
    const auto t = make_f1({h, h, h * h});
    errs.push_back(error_ratio_rvp(t, trig3(), 2, 0, 2.0).lhs / std::sqrt(t.measure()));
  }
  CHECK(fit_rate(hs, errs) > 0.9);

  // 2D thin triangles under the isotropic bound.
  const AnalyticField u2 = catalog_lookup("smooth-trig", {2}).field;
  const AnalyticField p2 = catalog_lookup("poly-deg3", {2, 3}).field;
  for (int k = 0; k <= 2; ++k) {
    std::vector<double> r;
    for (double h : halvings(6)) {
      r.push_back(error_ratio_mac(make_f2({h, h * h}), p2, k, k, 2.0).ratio);
      CHECK(error_ratio_mac(make_f2({h, h * h}), u2, k, k, 2.0).ratio < 1.0);
    }
    CHECK(spread(r) < 10.0);
  }
}

TEST_CASE("sharpness_experiment") {
  const auto hs = halvings(6);
  for (int k : {0, 2}) {
    const auto r = sharpness_experiment(k, 2.0, hs);
    for (std::size_t i = 1; i < r.size(); ++i) CHECK(r[i].ratio > r[i - 1].ratio);
    CHECK(r.back().ratio / r.front().ratio >= 5.0);
    std::vector<double> control;
    for (const auto& c : sharpness_experiment(k, 2.0, hs, Family::F1)) control.push_back(c.ratio);
    CHECK(spread(control) < 10.0);
  }
  CHECK_THROWS_AS(sharpness_experiment(0, 2.0, {0.25, 0.5}), ValidationError);
  CHECK_THROWS_AS(sharpness_experiment(0, 2.0, {0.5, -0.25}), ValidationError);
}

TEST_CASE("fit_rate") {
  const std::vector<double> h{0.5, 0.25, 0.125, 0.0625};
  std::vector<double> e1, e2, e3;
  for (double x : h) {
    e1.push_back(x);
    e2.push_back(x * x);
    e3.push_back(3 * std::pow(x, 1.5));
  }
  CHECK(std::abs(fit_rate(h, e1) - 1.0) < 1e-12);
  CHECK(std::abs(fit_rate(h, e2) - 2.0) < 1e-12);
  CHECK(std::abs(fit_rate(h, e3) - 1.5) < 1e-12);
  CHECK_THROWS_AS(fit_rate({0.5, 0.25}, {1, 2}), ValidationError);
  CHECK_THROWS_AS(fit_rate({0.5, 0.25, 0.1}, {1, 0, 2}), ValidationError);
}
