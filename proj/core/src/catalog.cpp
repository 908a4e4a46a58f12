#include "rtinterp/catalog.hpp"

#include <cmath>
#include <random>

#include <fmt/format.h>

#include "rtinterp/analysis.hpp"
#include "rtinterp/errors.hpp"

namespace rtinterp {

namespace {

int parse_suffix(const std::string& name, const std::string& prefix) {
  const std::string rest = name.substr(prefix.size());
  if (rest.empty() || rest.size() > 3 || rest.find_first_not_of("0123456789") != std::string::npos)
    throw ValidationError("unknown catalog field '" + name + "'");
  return std::stoi(rest);
}

Eigen::VectorXd direction(int dim, int axis, double scale = 1.0) {
  Eigen::VectorXd w = Eigen::VectorXd::Zero(dim);
  w[axis] = scale;
  return w;
}

AnalyticField smooth_trig(int dim) {
  const auto one = ScalarPoly::constant(dim, 1.0);
  const double half_pi = std::acos(0.0);
  if (dim == 2)
    return AnalyticField::from_components(
        {term_field(2, {sin_term(one, direction(2, 1))}), term_field(2, {sin_term(one, direction(2, 0), half_pi)})});
  return AnalyticField::from_components(
      {term_field(3, {sin_term(one, direction(3, 1))}),
       ScalarField::from_poly(ScalarPoly::coordinate(3, 0) * ScalarPoly::coordinate(3, 2)),
       term_field(3, {sin_term(one, direction(3, 0), half_pi)})});
}

AnalyticField exp_layer(int dim, double eps) {
  if (!(eps > 0.0)) throw ValidationError("smooth-exp-layer needs eps > 0");
  const Eigen::VectorXd w = direction(dim, dim - 1, -1.0 / eps);
  std::vector<ScalarField> c;
  c.push_back(term_field(dim, {exp_term(ScalarPoly::constant(dim, 1.0), w)}));
  for (int i = 0; i + 1 < dim; ++i) c.push_back(term_field(dim, {exp_term(ScalarPoly::coordinate(dim, i), w)}));
  return AnalyticField::from_components(c);
}

}  // namespace

double catalog_uniform(std::uint64_t raw) {
  return static_cast<double>(raw >> 11) * 0x1.0p-53 * 2.0 - 1.0;
}

VectorPoly random_vector_poly(int dim, int degree, std::uint64_t seed) {
  if (dim < 2 || dim > 3) throw ValidationError("dim must be 2 or 3");
  if (degree < 0) throw ValidationError("degree must be >= 0");
  std::mt19937_64 rng(seed);
  std::vector<ScalarPoly> comps;
  for (int i = 0; i < dim; ++i) {
    ScalarPoly p(dim);
    for (const auto& a : multi_indices_up_to(dim, degree)) p.add_term(a, catalog_uniform(rng()));
    comps.push_back(p);
  }
  return VectorPoly(comps);
}

double divergence_self_check(const AnalyticField& u) {
  const ScalarField div = u.divergence_field();
  double worst = 0.0;
  for (int s = 0; s < 8; ++s) {
    Eigen::VectorXd x(u.dim());
    for (int i = 0; i < u.dim(); ++i) x[i] = std::fmod(0.1 + 0.37 * (s + 1) * (i + 1), 1.0);
    const double a = div(x);
    const double b = u.jacobian(x).trace();
    worst = std::max(worst, std::abs(a - b) / (1.0 + std::abs(b)));
  }
  return worst;
}

std::vector<std::string> catalog_names() {
  return {"paper-2d-example", "counterexample-k<K>", "poly-deg<D>", "smooth-trig", "smooth-exp-layer"};
}

CatalogEntry catalog_lookup(const std::string& name, const CatalogOptions& options) {
  const int dim = options.dim;
  if (dim < 2 || dim > 3) throw ValidationError("dim must be 2 or 3");
  CatalogEntry e{name, dim, AnalyticField::from_poly(VectorPoly(dim)), kUnlimitedOrder, ""};
  if (name == "paper-2d-example") {
    if (dim != 2) throw ValidationError("paper-2d-example is a 2D field");
    const auto x2 = ScalarPoly::coordinate(2, 1);
    e.field = AnalyticField::from_poly(VectorPoly(std::vector<ScalarPoly>{ScalarPoly(2), x2 * x2}), name);
    e.smoothness = "polynomial, degree 2";
  } else if (name.rfind("counterexample-k", 0) == 0) {
    if (dim != 3) throw ValidationError("counterexample fields are 3D");
    const int k = parse_suffix(name, "counterexample-k");
    e.field = counterexample_field(k).renamed(name);
    e.smoothness = fmt::format("polynomial, degree {}, divergence free", k + 1);
  } else if (name.rfind("poly-deg", 0) == 0) {
    const int d = parse_suffix(name, "poly-deg");
    e.field = AnalyticField::from_poly(random_vector_poly(dim, d, options.seed), name);
    e.smoothness = fmt::format("polynomial, degree {}, seed {}", d, options.seed);
  } else if (name == "smooth-trig") {
    e.field = smooth_trig(dim).renamed(name);
    e.smoothness = "entire, trigonometric";
  } else if (name == "smooth-exp-layer") {
    e.field = exp_layer(dim, options.eps).renamed(name);
    e.smoothness = fmt::format("entire, exponential layer of width {}", options.eps);
  } else {
    throw ValidationError("unknown catalog field '" + name + "'");
  }
  e.max_order = e.field.max_order();
  const double err = divergence_self_check(e.field);
  if (err > 1e-9) throw ValidationError(fmt::format("field '{}' fails the divergence self-check ({:.3g})", name, err));
  return e;
}

}  // namespace rtinterp
