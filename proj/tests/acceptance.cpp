#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <iostream>
#include <random>
#include <set>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/core.h>

#include "oracle.hpp"
#include "rtinterp/analysis.hpp"
#include "rtinterp/catalog.hpp"
#include "rtinterp/rt.hpp"
#include "test_support.hpp"

using namespace rtinterp;

namespace {

// Pinned tolerances.
constexpr double kExampleTol = 1e-10;
constexpr double kProjectionTol = 1e-8;
constexpr double kCommutingTol = 1e-8;
constexpr double kPatternTol = 1e-9;
constexpr double kCounterexampleBound = 1e-3;
constexpr double kCounterexampleFrozenTol = 1e-10;
constexpr double kPointwiseTol = 1e-12;
constexpr double kSharpnessGrowth = 5.0;
constexpr double kSpreadLimit = 10.0;
constexpr double kLayerEps = 1.0;
constexpr double kMacConstant = 2.0;
constexpr double kRateSlack = 0.1;
constexpr double kDecompPsi = 2.6;
constexpr double kDecompMapNorm = 3.0;
constexpr double kDecompResidual = 1e-10;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::vector<double> halvings(int n) {
  std::vector<double> h;
  for (int i = 1; i <= n; ++i) h.push_back(std::ldexp(1.0, -i));
  return h;
}

double spread(const std::vector<double>& r) {
  const auto [lo, hi] = std::minmax_element(r.begin(), r.end());
  return *hi / *lo;
}

VectorPoly random_rt(std::mt19937_64& rng, int k, int dim) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  VectorPoly v(dim);
  for (const auto& b : rt_reference_basis(k, dim)) v += b * u(rng);
  return v;
}

Outcome two_d_example() {
  const auto x2 = ScalarPoly::coordinate(2, 1);
  const VectorPoly u(std::vector<ScalarPoly>{ScalarPoly(2), x2 * x2});
  const auto x1 = ScalarPoly::coordinate(2, 0);
  const VectorPoly want(std::vector<ScalarPoly>{x1 * (1.0 / 3.0), x2 * (1.0 / 3.0)});
  double err = 0.0;
  for (auto path : {InterpolationPath::Direct, InterpolationPath::Reference})
    err = std::max(err, max_coefficient_difference(interpolate_field(0, make_reference(2), u, path).field.expanded(), want));
  return {err < kExampleTol, fmt::format("max coefficient error {:.3g} (tol {:g})", err, kExampleTol)};
}

Outcome unisolvence() {
  int bad = 0;
  for (int dim = 2; dim <= 3; ++dim)
    for (int k = 0; k <= (dim == 2 ? 4 : 3); ++k) {
      const auto t = make_reference(dim);
      const int n = rt_dimension(k, dim);
      const int rank = oracle::numeric_rank(dof_matrix(rt_basis(k, t), DofSet(k, t)), 1e-12);
      if (n != rank || n != oracle::rt_span_rank(k, dim) ||
          n != rt_face_dof_count(k, dim) + rt_interior_dof_count(k, dim))
        ++bad;
    }
  return {bad == 0, fmt::format("{} mismatches over 2D k=0..4 and 3D k=0..3", bad)};
}

Outcome projection_commuting() {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  double proj = 0.0, comm = 0.0;
  for (int k = 0; k <= 3; ++k) {
    for (int trial = 0; trial < 200; ++trial) {
      const int dim = 2 + trial % 2;
      const auto t = dim == 3 ? test_support::random_tet(rng) : test_support::random_triangle(rng);
      const auto v = piola_push(AffineMap::from_reference(t), random_rt(rng, k, dim));
      proj = std::max(proj, relative_coefficient_error(interpolate(k, t, v), v));
    }
    for (int trial = 0; trial < 10; ++trial) {
      const int dim = 2 + trial % 2;
      const auto t = dim == 3 ? test_support::random_tet(rng) : test_support::random_triangle(rng);
      const auto f = random_vector_poly(dim, k + 2, rng());
      const auto div_pi = interpolate_field(k, t, f).field.expanded().divergence();
      const auto pk = l2_project_pk(k, t, ScalarField::from_poly(f.divergence()));
      // Coefficients in the element's barycentric frame.
      const AffineMap F = AffineMap::from_reference(t);
      comm = std::max(comm, relative_coefficient_error(compose_affine(div_pi, F.matrix(), F.offset()),
                                                       compose_affine(pk, F.matrix(), F.offset())));
    }
  }
  return {proj < kProjectionTol && comm < kCommutingTol,
          fmt::format("projection rel error {:.3g} (tol {:g}), commuting error {:.3g} (tol {:g})", proj,
                      kProjectionTol, comm, kCommutingTol)};
}

double l2(const Simplex& t, const ScalarPoly& p) { return lp_norm(p, t); }

Outcome structural_patterns() {
  double vanish = 0.0;
  double weakest = kInfinity;
  for (const auto& t : {make_f1({1, 1, 1}), make_f2({1, 1, 1})})
    for (int axis = 0; axis < 3; ++axis) {
      const int a = (axis + 1) % 3;
      const int b = (axis + 2) % 3;
      Eigen::Vector3d w = Eigen::Vector3d::Zero();
      w[a] = 1.3;
      w[b] = -0.7;
      const ScalarPoly xa = ScalarPoly::coordinate(3, a);
      const ScalarPoly xb = ScalarPoly::coordinate(3, b);
      const std::vector<ScalarField> fs{
          ScalarField::from_poly(xa * xa * xb - 2.0 * xb + ScalarPoly::constant(3, 0.5)),
          term_field(3, {sin_term(ScalarPoly::constant(3, 1.0), w, 0.3), poly_term(xa * xb)})};
      for (const auto& f : fs)
        for (int k = 0; k <= 3; ++k) {
          std::vector<ScalarField> comps(3, ScalarField::from_poly(ScalarPoly(3)));
          comps[static_cast<std::size_t>(axis)] = f;
          const auto pi = interpolate_field(k, t, AnalyticField::from_components(comps)).field.expanded();
          vanish = std::max({vanish, l2(t, pi[a]), l2(t, pi[b]), l2(t, poly_derive(pi[axis], axis))});
          weakest = std::min(weakest, l2(t, pi[axis]));
        }
    }
  return {vanish < kPatternTol && weakest > kPatternTol,
          fmt::format("largest vanishing norm {:.3g} (tol {:g}), smallest surviving norm {:.3g}", vanish, kPatternTol,
                      weakest)};
}

Outcome counterexample() {
  // Frozen from the dense raw-monomial assembly in oracle.hpp.
  const double frozen[3] = {0.13608276348795467, 0.031622776601683757, 0.0076360354832120001};
  const auto t = make_f2({1, 1, 1});
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  double smallest = kInfinity, drift = 0.0, pointwise = 0.0;
  for (int k = 0; k <= 2; ++k) {
    const auto u = counterexample_field(k);
    for (int s = 0; s < 50; ++s) {
      const Eigen::Vector3d x(unif(rng), unif(rng), unif(rng));
      pointwise = std::max({pointwise, std::abs(u.divergence(x)), std::abs(u(x)[1])});
    }
    const double n2 = l2(t, interpolate_field(k, t, u).field.expanded()[1]);
    smallest = std::min(smallest, n2);
    drift = std::max(drift, std::abs(n2 - frozen[k]));
  }
  return {smallest > kCounterexampleBound && drift < kCounterexampleFrozenTol && pointwise < kPointwiseTol,
          fmt::format("min |Pi_k2 u| {:.6g} (bound {:g}), drift from frozen {:.3g}, max |div u|,|u2| {:.3g}", smallest,
                      kCounterexampleBound, drift, pointwise)};
}

Outcome sharpness() {
  const auto hs = halvings(6);
  bool ok = true;
  std::string detail;
  for (int k = 0; k <= 2; ++k) {
    const auto r = sharpness_experiment(k, 2.0, hs);
    for (std::size_t i = 1; i < r.size(); ++i) ok = ok && r[i].ratio > r[i - 1].ratio;
    const double growth = r.back().ratio / r.front().ratio;
    std::vector<double> control;
    for (const auto& c : sharpness_experiment(k, 2.0, hs, Family::F1)) control.push_back(c.ratio);
    const double s = spread(control);
    ok = ok && growth >= kSharpnessGrowth && s < kSpreadLimit;
    detail += fmt::format("{}k={} growth {:.3g} control spread {:.3g}", detail.empty() ? "" : "; ", k, growth, s);
  }
  return {ok, detail + fmt::format(" (growth >= {:g}, spread < {:g})", kSharpnessGrowth, kSpreadLimit)};
}

double rvp_spread(const std::vector<AnalyticField>& fields, double* top) {
  double worst = 0.0;
  for (const auto& u : fields)
    for (int k = 0; k <= 2; ++k)
      for (double p : {1.0, 2.0, kInfinity}) {
        std::vector<double> r;
        for (double h : halvings(6)) r.push_back(stability_ratio_rvp(make_f1({h, h, h * h}), u, k, p).ratio);
        worst = std::max(worst, spread(r));
        *top = std::max(*top, *std::max_element(r.begin(), r.end()));
      }
  return worst;
}

Outcome rvp_stability() {
  double top = 0.0;
  const double worst = rvp_spread({catalog_lookup("smooth-trig").field, catalog_lookup("poly-deg3").field,
                                   catalog_lookup("smooth-exp-layer", {3, 1, kLayerEps}).field},
                                  &top);
  // Thinner layer, reported only: resolved on the coarse elements, so the low end drops.
  const double thin = rvp_spread({catalog_lookup("smooth-exp-layer").field}, &top);
  return {worst < kSpreadLimit,
          fmt::format("worst max/min {:.3g} (limit {:g}), largest ratio {:.3g}, eps=0.1 layer max/min {:.3g}", worst,
                      kSpreadLimit, top, thin)};
}

Outcome mac_stability() {
  std::mt19937_64 rng(8);
  const AnalyticField poly = catalog_lookup("poly-deg3").field;
  const AnalyticField trig = catalog_lookup("smooth-trig").field;
  double worst = 0.0;
  for (int s = 0; s < 25; ++s) {
    std::vector<double> h(3);
    for (auto& x : h) x = std::pow(10.0, 3.0 * catalog_uniform(rng()));
    const double top = *std::max_element(h.begin(), h.end());
    std::vector<double> unit(h);
    for (auto& x : unit) x /= top;
    for (int k = 0; k <= 2; ++k) {
      worst = std::max(worst, stability_ratio_mac(make_f2(h), poly, k, 2.0).ratio);
      worst = std::max(worst, stability_ratio_mac(make_f2(unit), trig, k, 2.0).ratio);
    }
  }
  return {worst < kMacConstant, fmt::format("max ratio {:.4g} (constant {:g})", worst, kMacConstant)};
}

Outcome convergence() {
  const auto hs = halvings(6);
  const AnalyticField u = catalog_lookup("smooth-trig").field;
  const int k = 2;
  bool ok = true;
  std::string detail;
  for (Family fam : {Family::F1, Family::F2})
    for (int m = 0; m <= k; ++m) {
      std::vector<double> errs, ratios;
      for (double h : hs) {
        const auto t = make_family({fam, {h, h, h * h}});
        const auto r = fam == Family::F1 ? error_ratio_rvp(t, u, k, m, 2.0) : error_ratio_mac(t, u, k, m, 2.0);
        errs.push_back(r.lhs / std::sqrt(t.measure()));
        ratios.push_back(r.ratio);
      }
      const double rate = fit_rate(hs, errs);
      const double s = spread(ratios);
      ok = ok && rate >= m + 1 - kRateSlack && s < kSpreadLimit;
      detail += fmt::format("{}{} m={} rate {:.3g} spread {:.3g}", detail.empty() ? "" : "; ", to_string(fam), m,
                            rate, s);
    }
  return {ok, detail + fmt::format(" (rate >= m+1-{:g}, spread < {:g})", kRateSlack, kSpreadLimit)};
}

Outcome decomposition() {
  const double m = std::min(std::sin((M_PI - kDecompPsi) / 2), std::sin(kDecompPsi));
  const double inv_bound = 6.0 / (m * m * m);
  std::mt19937_64 rng(10);
  double norm = 0.0, inv = 0.0, res = 0.0;
  for (int count = 0; count < 1000;) {
    const auto t = test_support::random_tet(rng);
    if (mac_constant(t) > kDecompPsi) continue;
    ++count;
    const auto d = reference_decomposition(t);
    norm = std::max(norm, d.map.norm_inf());
    inv = std::max(inv, d.map.inverse_norm_inf());
    res = std::max(res, vertex_residual(d, t) / t.diameter());
  }
  return {norm <= kDecompMapNorm && inv <= inv_bound && res < kDecompResidual,
          fmt::format("max |M| {:.4g} (<= {:g}), max |M^-1| {:.4g} (<= {:.4g}), residual/diam {:.3g}", norm,
                      kDecompMapNorm, inv, inv_bound, res)};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"acceptance criteria"};
  std::vector<int> known_red;
  std::vector<int> only;
  app.add_option("--known-red", known_red, "criteria reported but not counted in the exit status");
  app.add_option("--only", only, "run a subset");
  CLI11_PARSE(app, argc, argv);

  const std::vector<std::function<Outcome()>> criteria{two_d_example,  unisolvence,   projection_commuting,
                                                       structural_patterns, counterexample, sharpness,
                                                       rvp_stability, mac_stability, convergence,
                                                       decomposition};
  const std::set<int> red(known_red.begin(), known_red.end());
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int id = static_cast<int>(i) + 1;
    if (!only.empty() && std::find(only.begin(), only.end(), id) == only.end()) continue;
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[i]();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const bool tolerated = !o.pass && red.count(id);
    if (!o.pass && !tolerated) ++failed;
    std::cout << fmt::format("criterion {:2d}: {}{} {} [{:.1f}s]\n", id, o.pass ? "PASS" : "FAIL",
                             tolerated ? " (known red)" : "", o.detail, secs)
              << std::flush;
  }
  return failed == 0 ? 0 : 1;
}
