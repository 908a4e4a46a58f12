#include "rtinterp/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <json.hpp>

#include "rtinterp/analysis.hpp"
#include "rtinterp/catalog.hpp"
#include "rtinterp/errors.hpp"
#include "rtinterp/geometry.hpp"
#include "rtinterp/quadrature.hpp"
#include "rtinterp/rt.hpp"

namespace rtinterp {

namespace {

using json = nlohmann::json;

constexpr const char* kVersion = "0.1.0";

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<json>> rows;
  json meta = json::object();
};

std::string csv_cell(const json& v) {
  if (v.is_null()) return "";
  if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
  if (v.is_number_integer()) return fmt::format("{}", v.get<long long>());
  if (v.is_number_unsigned()) return fmt::format("{}", v.get<unsigned long long>());
  if (v.is_number_float()) return fmt::format("{:.17g}", v.get<double>());
  std::string s = v.get<std::string>();
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string q = "\"";
  for (char c : s) q += c == '"' ? std::string("\"\"") : std::string(1, c);
  return q + "\"";
}

json number(double x) {
  if (!std::isfinite(x)) return json(x > 0 ? "inf" : "nan");
  return json(x == 0.0 ? 0.0 : x);
}

void write_csv(const Table& t, std::ostream& os) {
  for (std::size_t i = 0; i < t.columns.size(); ++i) os << (i ? "," : "") << t.columns[i];
  os << '\n';
  for (const auto& row : t.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) os << (i ? "," : "") << csv_cell(row[i]);
    os << '\n';
  }
}

void write_json(const Table& t, const ExperimentConfig& cfg, std::ostream& os) {
  json doc;
  doc["subcommand"] = cfg.subcommand;
  json meta = t.meta;
  meta["version"] = kVersion;
  meta["seed"] = cfg.seed;
  meta["quadrature_degrees"] = {kWorkingDegree, kVerificationDegree};
  meta["disagreement_tolerance"] = kDisagreementTolerance;
  doc["metadata"] = meta;
  doc["columns"] = t.columns;
  json rows = json::array();
  for (const auto& row : t.rows) {
    json r = json::object();
    for (std::size_t i = 0; i < row.size(); ++i) r[t.columns[i]] = row[i];
    rows.push_back(r);
  }
  doc["rows"] = rows;
  os << doc.dump(2) << '\n';
}

void emit(const Table& t, const ExperimentConfig& cfg, std::ostream& out) {
  std::string path = cfg.output;
  if (path.empty()) {
    if (const char* dir = std::getenv("RTINTERP_OUTPUT_DIR"); dir && *dir)
      path = (std::filesystem::path(dir) / (cfg.subcommand + "." + cfg.format)).string();
  }
  std::ostringstream buf;
  if (cfg.format == "json")
    write_json(t, cfg, buf);
  else
    write_csv(t, buf);
  if (path.empty()) {
    out << buf.str();
    return;
  }
  const std::filesystem::path p(path);
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
  std::ofstream f(p, std::ios::binary);
  if (!f) throw ValidationError("cannot open output file '" + path + "'");
  f << buf.str();
}

std::vector<double> h_sequence(const ExperimentConfig& cfg) {
  if (!cfg.h.empty()) {
    for (double h : cfg.h)
      if (!(h > 0.0)) throw ValidationError("h values must be positive");
    return cfg.h;
  }
  if (cfg.levels < 1 || cfg.levels > 30) throw ValidationError("levels must be in [1, 30]");
  std::vector<double> out;
  for (int i = 1; i <= cfg.levels; ++i) out.push_back(std::ldexp(1.0, -i));
  return out;
}

Family parse_family(const std::string& s) {
  if (s == "F1" || s == "f1") return Family::F1;
  if (s == "F2" || s == "f2") return Family::F2;
  throw ValidationError("family must be F1 or F2, got '" + s + "'");
}

/// (h, h, h^2) in 3D, (h, h^2) in 2D.
FamilyTag sweep_tag(Family f, int dim, double h) {
  return dim == 3 ? FamilyTag{f, {h, h, h * h}} : FamilyTag{f, {h, h * h}};
}

void check_k(int k) {
  if (k < 0 || k > 8) throw ValidationError("k must be in [0, 8]");
}

void check_dim(int dim) {
  if (dim != 2 && dim != 3) throw ValidationError("dim must be 2 or 3");
}

CatalogEntry field_for(const ExperimentConfig& cfg) {
  return catalog_lookup(cfg.field, CatalogOptions{cfg.dim, cfg.seed, cfg.eps});
}

std::vector<Simplex> read_records(const ExperimentConfig& cfg) {
  std::ifstream file;
  std::istream* in = &std::cin;
  if (!cfg.input.empty() && cfg.input != "-") {
    file.open(cfg.input);
    if (!file) throw ValidationError("cannot open input file '" + cfg.input + "'");
    in = &file;
  }
  std::vector<Simplex> out;
  std::string line;
  while (std::getline(*in, line)) {
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    out.push_back(parse_simplex(line));
  }
  return out;
}

int matrix_rank(const Eigen::MatrixXd& D) {
  const Eigen::JacobiSVD<Eigen::MatrixXd> svd(D);
  const auto s = svd.singularValues();
  int r = 0;
  for (int i = 0; i < s.size(); ++i)
    if (s[i] > 1e-12 * s[0]) ++r;
  return r;
}

Table dof_table(const ExperimentConfig& cfg) {
  check_dim(cfg.dim);
  if (cfg.kmax < 0 || cfg.kmax > 6) throw ValidationError("kmax must be in [0, 6]");
  Table t;
  t.columns = {"k", "dim_rt", "face_dofs", "interior_dofs", "dof_rank", "condition"};
  const Simplex ref = make_reference(cfg.dim);
  for (int k = 0; k <= cfg.kmax; ++k) {
    const Eigen::MatrixXd D = dof_matrix(rt_basis(k, ref), DofSet(k, ref));
    t.rows.push_back({k, rt_dimension(k, cfg.dim), rt_face_dof_count(k, cfg.dim), rt_interior_dof_count(k, cfg.dim),
                      matrix_rank(D), number(scaled_condition(D))});
  }
  t.meta["dim"] = cfg.dim;
  return t;
}

Simplex element_for(const ExperimentConfig& cfg) {
  if (cfg.element == "reference") return make_reference(cfg.dim);
  if (cfg.element == "f1" || cfg.element == "f2") {
    if (static_cast<int>(cfg.h.size()) != cfg.dim) throw ValidationError("--h needs one length per dimension");
    return cfg.element == "f1" ? make_f1(cfg.h) : make_f2(cfg.h);
  }
  if (cfg.element == "record") return parse_simplex(cfg.record);
  throw ValidationError("element must be reference, f1, f2 or record");
}

Table interpolate_cmd(const ExperimentConfig& cfg) {
  check_k(cfg.k);
  const Simplex el = element_for(cfg);
  ExperimentConfig c = cfg;
  c.dim = el.dim();
  const CatalogEntry entry = field_for(c);
  InterpolationPath path;
  if (cfg.path == "reference")
    path = InterpolationPath::Reference;
  else if (cfg.path == "direct")
    path = InterpolationPath::Direct;
  else
    throw ValidationError("path must be direct or reference");
  const Interpolation pi = interpolate_field(cfg.k, el, entry.field, path);
  const VectorPoly v = pi.field.expanded();
  const VectorPoly pruned = v.pruned(1e-13 * std::max(v.max_abs_coefficient(), 1e-300));
  Table t;
  t.columns = {"component", "alpha1", "alpha2", "alpha3", "coefficient"};
  for (int i = 0; i < pruned.dim(); ++i)
    for (const auto& [a, coef] : pruned[i].terms())
      t.rows.push_back({i + 1, a[0], a[1], a[2], number(static_cast<double>(coef))});
  t.meta["element"] = to_record(el);
  t.meta["field"] = entry.name;
  t.meta["k"] = cfg.k;
  t.meta["path"] = cfg.path;
  t.meta["condition"] = number(pi.condition);
  t.meta["dof_residual"] = number(pi.dof_residual);
  t.meta["quadrature_gap"] = number(pi.quadrature_gap);
  return t;
}

Table classify_cmd(const ExperimentConfig& cfg) {
  Table t;
  t.columns = {"index", "dim", "rvp_vertex", "rvp_value", "mac_angle", "diameter", "measure"};
  int i = 0;
  for (const auto& s : read_records(cfg)) {
    const RvpResult r = rvp_constant(s);
    t.rows.push_back({i++, s.dim(), r.vertex, number(r.value), number(mac_constant(s)), number(s.diameter()),
                      number(s.measure())});
  }
  return t;
}

Table decompose_cmd(const ExperimentConfig& cfg) {
  Table t;
  t.columns = {"index", "family", "h1", "h2", "h3", "m11", "m12", "m13", "m21", "m22", "m23", "m31", "m32", "m33",
               "c1", "c2", "c3", "permutation", "norm_m", "norm_m_inv", "residual"};
  int idx = 0;
  for (const auto& s : read_records(cfg)) {
    const Decomposition d = reference_decomposition(s);
    std::vector<json> row{idx++, to_string(d.tag.family)};
    for (int i = 0; i < 3; ++i) row.push_back(i < s.dim() ? number(d.tag.h[static_cast<std::size_t>(i)]) : json());
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j)
        row.push_back(i < s.dim() && j < s.dim() ? number(d.map.matrix()(i, j)) : json());
    for (int i = 0; i < 3; ++i) row.push_back(i < s.dim() ? number(d.map.offset()[i]) : json());
    std::string perm;
    for (std::size_t i = 0; i < d.permutation.size(); ++i) perm += fmt::format("{}{}", i ? " " : "", d.permutation[i]);
    row.push_back(perm);
    row.push_back(number(d.map.norm_inf()));
    row.push_back(number(d.map.inverse_norm_inf()));
    row.push_back(number(vertex_residual(d, s)));
    t.rows.push_back(row);
  }
  return t;
}

void add_ratio_meta(Table& t, const std::vector<RatioReport>& reports) {
  double lo = kInfinity;
  double hi = 0.0;
  for (const auto& r : reports) {
    lo = std::min(lo, r.ratio);
    hi = std::max(hi, r.ratio);
  }
  t.meta["ratio_min"] = number(lo);
  t.meta["ratio_max"] = number(hi);
  t.meta["ratio_spread"] = number(lo > 0.0 ? hi / lo : kInfinity);
}

Table convergence_cmd(const ExperimentConfig& cfg) {
  check_dim(cfg.dim);
  check_k(cfg.k);
  const Family fam = parse_family(cfg.family);
  const std::string bound = cfg.bound.empty() ? (fam == Family::F1 ? "rvp" : "mac") : cfg.bound;
  if (bound != "rvp" && bound != "mac") throw ValidationError("bound must be rvp or mac");
  const CatalogEntry entry = field_for(cfg);
  const auto hs = h_sequence(cfg);
  std::vector<RatioReport> reports;
  std::vector<double> normalized;
  std::vector<double> raw;
  for (double h : hs) {
    const Simplex el = make_family(sweep_tag(fam, cfg.dim, h));
    reports.push_back(bound == "rvp" ? error_ratio_rvp(el, entry.field, cfg.k, cfg.m, cfg.p)
                                     : error_ratio_mac(el, entry.field, cfg.k, cfg.m, cfg.p));
    raw.push_back(reports.back().lhs);
    normalized.push_back(std::isinf(cfg.p) ? raw.back() : raw.back() / std::pow(el.measure(), 1.0 / cfg.p));
  }
  double rate = std::nan("");
  double raw_rate = std::nan("");
  if (hs.size() >= 3 && std::all_of(raw.begin(), raw.end(), [](double e) { return e > 0.0; })) {
    rate = fit_rate(hs, normalized);
    raw_rate = fit_rate(hs, raw);
  }
  Table t;
  t.columns = {"h", "lhs", "lhs_normalized", "rhs", "ratio", "fitted_rate", "condition", "quadrature_gap", "flagged"};
  for (std::size_t i = 0; i < hs.size(); ++i) {
    const auto& r = reports[i];
    t.rows.push_back({number(hs[i]), number(r.lhs), number(normalized[i]), number(r.rhs), number(r.ratio),
                      number(rate), number(r.condition), number(r.quadrature_gap), r.flagged});
  }
  t.meta["family"] = to_string(fam);
  t.meta["bound"] = bound;
  t.meta["field"] = entry.name;
  t.meta["k"] = cfg.k;
  t.meta["m"] = cfg.m;
  t.meta["p"] = number(cfg.p);
  t.meta["fitted_rate"] = number(rate);
  t.meta["fitted_rate_unnormalized"] = number(raw_rate);
  add_ratio_meta(t, reports);
  return t;
}

Table sharpness_cmd(const ExperimentConfig& cfg) {
  check_k(cfg.k);
  const Family fam = cfg.family.empty() ? Family::F2 : parse_family(cfg.family);
  const auto hs = h_sequence(cfg);
  const auto reports = sharpness_experiment(cfg.k, cfg.p, hs, fam);
  Table t;
  t.columns = {"h2",        "h1",        "h3",          "lhs",          "rhs",           "ratio",
               "component_ratio_1", "component_ratio_3", "condition", "quadrature_gap", "flagged"};
  for (const auto& r : reports)
    t.rows.push_back({number(r.h), number(r.h * r.h), number(r.h * r.h), number(r.lhs), number(r.rhs), number(r.ratio),
                      number(r.component_ratio_1), number(r.component_ratio_3), number(r.condition),
                      number(r.quadrature_gap), r.flagged});
  t.meta["family"] = to_string(fam);
  t.meta["field"] = reports.front().field;
  t.meta["k"] = cfg.k;
  t.meta["p"] = number(cfg.p);
  t.meta["growth"] = number(reports.front().ratio > 0.0 ? reports.back().ratio / reports.front().ratio : kInfinity);
  add_ratio_meta(t, reports);
  return t;
}

Table stability_cmd(const ExperimentConfig& cfg) {
  check_dim(cfg.dim);
  check_k(cfg.k);
  const Family fam = parse_family(cfg.family);
  const std::string bound = cfg.bound.empty() ? (fam == Family::F1 ? "rvp" : "mac") : cfg.bound;
  if (bound != "rvp" && bound != "mac") throw ValidationError("bound must be rvp or mac");
  const CatalogEntry entry = field_for(cfg);
  const auto hs = h_sequence(cfg);
  std::vector<RatioReport> reports;
  Table t;
  t.columns = {"h", "lhs", "rhs", "ratio", "condition", "quadrature_gap", "flagged"};
  for (double h : hs) {
    const Simplex el = make_family(sweep_tag(fam, cfg.dim, h));
    reports.push_back(bound == "rvp" ? stability_ratio_rvp(el, entry.field, cfg.k, cfg.p)
                                     : stability_ratio_mac(el, entry.field, cfg.k, cfg.p));
    const auto& r = reports.back();
    t.rows.push_back({number(h), number(r.lhs), number(r.rhs), number(r.ratio), number(r.condition),
                      number(r.quadrature_gap), r.flagged});
  }
  t.meta["family"] = to_string(fam);
  t.meta["bound"] = bound;
  t.meta["field"] = entry.name;
  t.meta["k"] = cfg.k;
  t.meta["p"] = number(cfg.p);
  add_ratio_meta(t, reports);
  return t;
}

Table verify_cmd(const ExperimentConfig& cfg, bool& all_passed) {
  const auto checks = run_verify_suite(cfg.seed);
  Table t;
  t.columns = {"check", "value", "tolerance", "status"};
  all_passed = true;
  for (const auto& c : checks) {
    t.rows.push_back({c.name, number(c.value), number(c.tolerance), c.passed ? "pass" : "FAIL"});
    all_passed = all_passed && c.passed;
  }
  return t;
}

double parse_p(const std::string& s) {
  if (s == "inf" || s == "infinity") return kInfinity;
  std::size_t used = 0;
  double p = 0.0;
  try {
    p = std::stod(s, &used);
  } catch (const std::exception&) {
    throw ValidationError("bad value for --p: '" + s + "'");
  }
  if (used != s.size()) throw ValidationError("bad value for --p: '" + s + "'");
  if (!(p >= 1.0)) throw ValidationError("--p must be >= 1");
  return p;
}

// ---- verify suite helpers ----

Simplex random_tet(std::mt19937_64& rng) {
  for (;;) {
    std::vector<Eigen::VectorXd> v;
    for (int i = 0; i < 4; ++i) v.push_back(Eigen::Vector3d(catalog_uniform(rng()), catalog_uniform(rng()),
                                                            catalog_uniform(rng())) * 0.5 + Eigen::Vector3d::Constant(0.5));
    Eigen::Matrix3d E;
    for (int j = 0; j < 3; ++j) E.col(j) = v[static_cast<std::size_t>(j + 1)] - v[0];
    if (std::abs(E.determinant()) > 1e-3) return Simplex(v);
  }
}

VectorPoly random_rt_field(std::mt19937_64& rng, int k, int dim) {
  VectorPoly v(dim);
  for (const auto& b : rt_reference_basis(k, dim)) v += b * catalog_uniform(rng());
  return v;
}

}  // namespace

std::vector<VerifyCheck> run_verify_suite(std::uint64_t seed) {
  std::vector<VerifyCheck> out;
  auto below = [&](const std::string& name, double value, double tol) { out.push_back({name, value, tol, value < tol}); };
  auto above = [&](const std::string& name, double value, double tol) { out.push_back({name, value, tol, value > tol}); };
  std::mt19937_64 rng(seed);

  {
    double worst = 0.0;
    for (int dim = 2; dim <= 3; ++dim)
      for (int deg = 0; deg <= 20; deg += 4) {
        const QuadratureRule rule = simplex_rule(dim, deg);
        const Eigen::MatrixXd pts = rule.points();
        for (const auto& a : multi_indices_up_to(dim, deg)) {
          double s = 0.0;
          for (int q = 0; q < rule.size(); ++q) {
            double mono = 1.0;
            for (int i = 0; i < dim; ++i) mono *= std::pow(pts(i, q), a[static_cast<std::size_t>(i)]);
            s += rule.weights[q] * mono;
          }
          const double exact = monomial_integral_simplex(a, dim);
          worst = std::max(worst, std::abs(s - exact) / exact);
        }
      }
    below("quadrature exactness (relative)", worst, 1e-12);
  }
  {
    double worst = 0.0;
    for (int dim = 2; dim <= 3; ++dim)
      for (int k = 0; k <= 4; ++k) {
        const auto b = pk_basis(k, dim);
        for (std::size_t i = 0; i < b.size(); ++i)
          for (std::size_t j = 0; j <= i; ++j)
            worst = std::max(worst, std::abs(reference_inner_product(b[i], b[j]) - (i == j ? 1.0 : 0.0)));
      }
    below("pk_basis Gram identity", worst, 1e-12);
  }
  {
    int mismatches = 0;
    double cond = 0.0;
    for (int dim = 2; dim <= 3; ++dim)
      for (int k = 0; k <= (dim == 2 ? 4 : 3); ++k) {
        const Simplex ref = make_reference(dim);
        const Eigen::MatrixXd D = dof_matrix(rt_basis(k, ref), DofSet(k, ref));
        if (matrix_rank(D) != rt_dimension(k, dim) || DofSet(k, ref).size() != rt_dimension(k, dim)) ++mismatches;
        cond = std::max(cond, scaled_condition(D));
      }
    below("rt dimension/rank mismatches", mismatches, 0.5);
    below("reference DOF condition", cond, 1e6);
  }
  {
    const auto x2 = ScalarPoly::coordinate(2, 1);
    const VectorPoly u(std::vector<ScalarPoly>{ScalarPoly(2), x2 * x2});
    const VectorPoly pi = interpolate_field(0, make_reference(2), u).field.expanded();
    VectorPoly expect(2);
    expect[0] = ScalarPoly::coordinate(2, 0) * (1.0 / 3.0);
    expect[1] = x2 * (1.0 / 3.0);
    below("2D example", max_coefficient_difference(pi, expect), 1e-10);
  }
  {
    double worst = 0.0;
    for (int trial = 0; trial < 12; ++trial) {
      const int k = trial % 4;
      const Simplex t = random_tet(rng);
      const VectorPoly v = piola_push(AffineMap::from_reference(t), random_rt_field(rng, k, 3));
      worst = std::max(worst, relative_coefficient_error(interpolate(k, t, v), v));
    }
    below("projection property", worst, 1e-8);
  }
  {
    double worst = 0.0;
    for (int k = 0; k <= 3; ++k) {
      const Simplex t = random_tet(rng);
      const VectorPoly u = random_vector_poly(3, k + 2, rng());
      const VectorPoly pi = interpolate(k, t, u);
      worst = std::max(worst, relative_coefficient_error(pi.divergence(),
                                                         l2_project_pk(k, t, ScalarField::from_poly(u.divergence()))));
    }
    below("commuting diagram", worst, 1e-8);
  }
  {
    const double psi = 2.6;
    const double m = std::min(std::sin((M_PI - psi) / 2.0), std::sin(psi));
    double worst = 0.0;
    int n = 0;
    while (n < 200) {
      const Simplex t = random_tet(rng);
      if (mac_constant(t) > psi) continue;
      ++n;
      const Decomposition d = reference_decomposition(t);
      worst = std::max({worst, d.map.norm_inf() / 3.0, d.map.inverse_norm_inf() * m * m * m / 6.0,
                        vertex_residual(d, t) / (1e-10 * t.diameter())});
    }
    below("decomposition bounds (scaled)", worst, 1.0 + 1e-12);
  }
  {
    double lo = kInfinity;
    const Simplex ref = make_f2({1, 1, 1});
    for (int k = 0; k <= 2; ++k) {
      const Interpolation pi = interpolate_field(k, ref, counterexample_field(k));
      lo = std::min(lo, measure_norm(ref, [&](const Eigen::VectorXd& x) { return pi.field(x)[1]; }).value);
    }
    above("counterexample |Pi_2 u|", lo, 1e-3);
  }
  {
    const auto r = sharpness_experiment(0, 2.0, {0.5, 0.25, 0.125, 0.0625, 0.03125, 0.015625});
    bool increasing = true;
    for (std::size_t i = 1; i < r.size(); ++i) increasing = increasing && r[i].ratio > r[i - 1].ratio;
    above("sharpness growth k=0", increasing ? r.back().ratio / r.front().ratio : 0.0, 5.0);
  }
  {
    double worst = 0.0;
    const Simplex t = random_tet(rng);
    for (int m = 0; m <= 4; ++m) {
      const ScalarPoly f = random_vector_poly(3, m, rng())[0];
      worst = std::max(worst, max_coefficient_difference(averaged_taylor(ScalarField::from_poly(f), m, t), f));
    }
    below("averaged Taylor reproduction", worst, 1e-10);
  }
  {
    const VectorPoly v = random_vector_poly(3, 3, rng());
    const AnalyticField u = AnalyticField::from_poly(v);
    Eigen::Vector3d ell(catalog_uniform(rng()), catalog_uniform(rng()), catalog_uniform(rng()));
    ell.normalize();
    const AnalyticField du = directional_derivative(u, ell);
    double worst = 0.0;
    for (int s = 0; s < 10; ++s) {
      const Eigen::Vector3d x(catalog_uniform(rng()), catalog_uniform(rng()), catalog_uniform(rng()));
      const Eigen::VectorXd fd = (u(x + 1e-5 * ell) - u(x - 1e-5 * ell)) / 2e-5;
      worst = std::max(worst, (du(x) - fd).norm() / (1.0 + fd.norm()));
    }
    below("directional derivative vs finite differences", worst, 1e-6);
  }
  {
    const Simplex ref = make_reference(3);
    const VectorPoly v = random_vector_poly(3, 3, rng());
    double exact = 0.0;
    for (int i = 0; i < 3; ++i) exact += integrate_reference(v[i] * v[i]);
    below("lp_norm p=2 vs exact", std::abs(lp_norm(v, ref) - std::sqrt(exact)) / std::sqrt(exact), 1e-12);
  }
  {
    const std::vector<double> h{0.5, 0.25, 0.125, 0.0625};
    std::vector<double> e;
    for (double x : h) e.push_back(3.0 * std::pow(x, 1.5));
    below("fit_rate exactness", std::abs(fit_rate(h, e) - 1.5), 1e-12);
  }
  return out;
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  std::vector<const char*> argv;
  argv.reserve(args.size() + 1);
  argv.push_back("rtinterp");
  for (const auto& a : args) argv.push_back(a.c_str());
  return run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  ExperimentConfig cfg;
  std::string p_text = "2";
  CLI::App app{"Raviart-Thomas interpolation on triangles and tetrahedra"};
  app.set_help_flag("--help", "Print this help message and exit");
  app.require_subcommand(1);

  auto output_opts = [&](CLI::App* s) {
    s->add_option("--output,-o", cfg.output, "Output file (default: stdout or $RTINTERP_OUTPUT_DIR)");
    s->add_option("--format", cfg.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
  };
  auto field_opts = [&](CLI::App* s) {
    s->add_option("--field", cfg.field, "Catalog field name");
    s->add_option("--seed", cfg.seed, "Seed for poly-deg<D> fields");
    s->add_option("--eps", cfg.eps, "Layer width for smooth-exp-layer");
  };
  auto sweep_opts = [&](CLI::App* s) {
    s->add_option("--h", cfg.h, "Comma-separated h values")->delimiter(',');
    s->add_option("--levels", cfg.levels, "Use h = 2^-1 .. 2^-levels");
    s->add_option("--p", p_text, "Norm exponent (number >= 1 or inf)");
  };

  auto* dof = app.add_subcommand("dof-table", "RT_k dimensions, DOF counts and DOF-matrix rank");
  dof->add_option("--dim", cfg.dim, "2 or 3");
  dof->add_option("--kmax", cfg.kmax, "Largest k");
  output_opts(dof);

  auto* interp = app.add_subcommand("interpolate", "Coefficients of Pi_k u");
  interp->add_option("--dim", cfg.dim, "2 or 3");
  interp->add_option("--k", cfg.k, "Order");
  interp->add_option("--element", cfg.element, "reference, f1, f2 or record");
  interp->add_option("--h", cfg.h, "Lengths for f1/f2")->delimiter(',');
  interp->add_option("--record", cfg.record, "Simplex record for --element record");
  interp->add_option("--path", cfg.path, "direct or reference");
  field_opts(interp);
  output_opts(interp);

  auto* classify = app.add_subcommand("classify", "RVP and MAC constants of simplex records");
  classify->add_option("--input,-i", cfg.input, "Record file (default stdin)");
  output_opts(classify);

  auto* decompose = app.add_subcommand("decompose", "MAC reference decomposition of simplex records");
  decompose->add_option("--input,-i", cfg.input, "Record file (default stdin)");
  output_opts(decompose);

  auto* conv = app.add_subcommand("convergence", "Interpolation error against the order-(m+1) bound");
  conv->add_option("--dim", cfg.dim, "2 or 3");
  conv->add_option("--k", cfg.k, "Order");
  conv->add_option("--m", cfg.m, "Regularity index, 0 <= m <= k");
  conv->add_option("--family", cfg.family, "F1 or F2");
  conv->add_option("--bound", cfg.bound, "rvp or mac (default by family)");
  field_opts(conv);
  sweep_opts(conv);
  output_opts(conv);

  auto* sharp = app.add_subcommand("sharpness", "Counterexample ratio on (h2^2, h2, h2^2)");
  sharp->add_option("--k", cfg.k, "Order");
  sharp->add_option("--family", cfg.family, "F2, or F1 for the control run");
  sharp->add_option("--h2", cfg.h, "Comma-separated decreasing h2 values")->delimiter(',');
  sharp->add_option("--levels", cfg.levels, "Use h2 = 2^-1 .. 2^-levels");
  sharp->add_option("--p", p_text, "Norm exponent (number >= 1 or inf)");
  output_opts(sharp);

  auto* stab = app.add_subcommand("stability", "Stability ratio |Pi_k u| / rhs");
  stab->add_option("--dim", cfg.dim, "2 or 3");
  stab->add_option("--k", cfg.k, "Order");
  stab->add_option("--family", cfg.family, "F1 or F2");
  stab->add_option("--bound", cfg.bound, "rvp or mac (default by family)");
  field_opts(stab);
  sweep_opts(stab);
  output_opts(stab);

  auto* verify = app.add_subcommand("verify", "Invariant suite; exit 3 on any failure");
  verify->add_option("--seed", cfg.seed, "Seed for random elements and fields");
  output_opts(verify);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n" << app.help();
    return kExitValidation;
  }

  CLI::App* chosen = app.get_subcommands().front();
  cfg.subcommand = chosen->get_name();
  if (cfg.subcommand == "sharpness" && chosen->count("--family") == 0) cfg.family = "F2";
  try {
    cfg.p = parse_p(p_text);
    Table t;
    bool ok = true;
    if (cfg.subcommand == "dof-table")
      t = dof_table(cfg);
    else if (cfg.subcommand == "interpolate")
      t = interpolate_cmd(cfg);
    else if (cfg.subcommand == "classify")
      t = classify_cmd(cfg);
    else if (cfg.subcommand == "decompose")
      t = decompose_cmd(cfg);
    else if (cfg.subcommand == "convergence")
      t = convergence_cmd(cfg);
    else if (cfg.subcommand == "sharpness")
      t = sharpness_cmd(cfg);
    else if (cfg.subcommand == "stability")
      t = stability_cmd(cfg);
    else
      t = verify_cmd(cfg, ok);
    emit(t, cfg, out);
    return ok ? kExitOk : kExitNumerical;
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const DegenerateElementError& e) {
    err << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const ConditioningError& e) {
    err << "numerical failure: " << e.what() << " (condition " << e.condition_estimate() << ")\n";
    return kExitNumerical;
  } catch (const QuadratureDisagreement& e) {
    err << "numerical failure: " << e.what() << " (relative gap " << e.relative_gap() << ")\n";
    return kExitNumerical;
  } catch (const NumericalError& e) {
    err << "numerical failure: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "error: " << e.what() << "\n";
    return kExitValidation;
  }
}

}  // namespace rtinterp
