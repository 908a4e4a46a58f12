#include "rtinterp/poly.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>
#include <sstream>

#include <boost/multiprecision/cpp_bin_float.hpp>

#include "rtinterp/errors.hpp"

namespace rtinterp {

namespace {

Coefficient factorial(int n) {
  Coefficient f = 1.0L;
  for (int i = 2; i <= n; ++i) f *= i;
  return f;
}

void check_dim(int dim) {
  if (dim < 1 || dim > 3) throw ValidationError("polynomial dimension must be 1, 2 or 3");
}

}  // namespace

std::vector<MultiIndex> multi_indices_of_degree(int dim, int degree) {
  check_dim(dim);
  std::vector<MultiIndex> out;
  if (degree < 0) return out;
  if (dim == 1) {
    out.push_back({degree, 0, 0});
  } else if (dim == 2) {
    for (int a = degree; a >= 0; --a) out.push_back({a, degree - a, 0});
  } else {
    for (int a = degree; a >= 0; --a)
      for (int b = degree - a; b >= 0; --b) out.push_back({a, b, degree - a - b});
  }
  return out;
}

std::vector<MultiIndex> multi_indices_up_to(int dim, int max_degree) {
  std::vector<MultiIndex> out;
  for (int d = 0; d <= max_degree; ++d) {
    auto level = multi_indices_of_degree(dim, d);
    out.insert(out.end(), level.begin(), level.end());
  }
  return out;
}

namespace {

Coefficient monomial_integral_extended(const MultiIndex& alpha, int dim) {
  Coefficient num = 1.0L;
  for (int i = 0; i < dim; ++i) {
    if (alpha[i] < 0) throw ValidationError("negative exponent");
    num *= factorial(alpha[i]);
  }
  return num / factorial(total_degree(alpha) + dim);
}

}  // namespace

double monomial_integral_simplex(const MultiIndex& alpha, int dim) {
  check_dim(dim);
  return static_cast<double>(monomial_integral_extended(alpha, dim));
}

int pk_dimension(int k, int dim) {
  if (k < 0) return 0;
  long num = 1, den = 1;
  for (int i = 1; i <= dim; ++i) {
    num *= k + i;
    den *= i;
  }
  return static_cast<int>(num / den);
}

// ---------------------------------------------------------------------------
// ScalarPoly

ScalarPoly::ScalarPoly(int dim) : dim_(dim) { check_dim(dim); }

ScalarPoly ScalarPoly::constant(int dim, double value) {
  ScalarPoly p(dim);
  p.add_term({0, 0, 0}, value);
  return p;
}

ScalarPoly ScalarPoly::monomial(int dim, const MultiIndex& alpha, double coeff) {
  ScalarPoly p(dim);
  for (int i = dim; i < 3; ++i)
    if (alpha[i] != 0) throw ValidationError("multi-index longer than polynomial dimension");
  p.add_term(alpha, coeff);
  return p;
}

ScalarPoly ScalarPoly::coordinate(int dim, int axis) {
  MultiIndex a{0, 0, 0};
  a[axis] = 1;
  return monomial(dim, a);
}

ScalarPoly ScalarPoly::affine(double a0, std::span<const double> a) {
  ScalarPoly p(static_cast<int>(a.size()));
  p.add_term({0, 0, 0}, a0);
  for (std::size_t i = 0; i < a.size(); ++i) {
    MultiIndex e{0, 0, 0};
    e[i] = 1;
    p.add_term(e, a[i]);
  }
  return p;
}

int ScalarPoly::degree() const {
  int d = -1;
  for (const auto& [a, c] : terms_) d = std::max(d, total_degree(a));
  return d;
}

double ScalarPoly::coefficient(const MultiIndex& alpha) const {
  auto it = terms_.find(alpha);
  return it == terms_.end() ? 0.0 : static_cast<double>(it->second);
}

double ScalarPoly::max_abs_coefficient() const {
  double m = 0.0;
  for (const auto& [a, c] : terms_) m = std::max(m, static_cast<double>(std::abs(c)));
  return m;
}

void ScalarPoly::add_term(const MultiIndex& alpha, Coefficient coeff) {
  if (coeff == 0.0L) return;
  auto [it, inserted] = terms_.try_emplace(alpha, coeff);
  if (!inserted) {
    it->second += coeff;
    if (it->second == 0.0L) terms_.erase(it);
  }
}

Coefficient ScalarPoly::evaluate_extended(std::span<const double> x) const {
  // Powers are tabulated once per variable up to the largest exponent.
  int max_exp = 0;
  for (const auto& [a, c] : terms_) max_exp = std::max({max_exp, a[0], a[1], a[2]});
  std::array<std::array<Coefficient, 32>, 3> pw{};
  if (max_exp >= 32) throw ValidationError("polynomial degree too large to evaluate");
  for (int i = 0; i < dim_; ++i) {
    pw[i][0] = 1.0L;
    for (int e = 1; e <= max_exp; ++e) pw[i][e] = pw[i][e - 1] * x[i];
  }
  Coefficient s = 0.0L;
  for (const auto& [a, c] : terms_) {
    Coefficient t = c;
    for (int i = 0; i < dim_; ++i) t *= pw[i][a[i]];
    s += t;
  }
  return s;
}

double ScalarPoly::operator()(std::span<const double> x) const {
  return static_cast<double>(evaluate_extended(x));
}

double ScalarPoly::operator()(const Eigen::VectorXd& x) const {
  return (*this)(std::span<const double>(x.data(), static_cast<std::size_t>(x.size())));
}

ScalarPoly& ScalarPoly::operator+=(const ScalarPoly& other) {
  if (other.dim_ != dim_) throw ValidationError("dimension mismatch in polynomial sum");
  for (const auto& [a, c] : other.terms_) add_term(a, c);
  return *this;
}

ScalarPoly& ScalarPoly::operator-=(const ScalarPoly& other) {
  if (other.dim_ != dim_) throw ValidationError("dimension mismatch in polynomial difference");
  for (const auto& [a, c] : other.terms_) add_term(a, -c);
  return *this;
}

ScalarPoly& ScalarPoly::operator*=(Coefficient s) {
  if (s == 0.0L) {
    terms_.clear();
    return *this;
  }
  for (auto& [a, c] : terms_) c *= s;
  return *this;
}

ScalarPoly operator*(const ScalarPoly& a, const ScalarPoly& b) {
  if (a.dim_ != b.dim_) throw ValidationError("dimension mismatch in polynomial product");
  ScalarPoly r(a.dim_);
  for (const auto& [ea, ca] : a.terms_)
    for (const auto& [eb, cb] : b.terms_)
      r.add_term({ea[0] + eb[0], ea[1] + eb[1], ea[2] + eb[2]}, ca * cb);
  return r;
}

ScalarPoly ScalarPoly::homogeneous_part(int degree) const {
  ScalarPoly r(dim_);
  for (const auto& [a, c] : terms_)
    if (total_degree(a) == degree) r.terms_.emplace(a, c);
  return r;
}

ScalarPoly ScalarPoly::pruned(double tol) const {
  ScalarPoly r(dim_);
  for (const auto& [a, c] : terms_)
    if (std::abs(c) > static_cast<Coefficient>(tol)) r.terms_.emplace(a, c);
  return r;
}

std::string ScalarPoly::to_string() const {
  if (terms_.empty()) return "0";
  std::ostringstream os;
  os.precision(17);
  bool first = true;
  for (const auto& [a, c] : terms_) {
    if (!first) os << (c < 0 ? " - " : " + ");
    else if (c < 0) os << "-";
    first = false;
    os << std::abs(c);
    for (int i = 0; i < dim_; ++i) {
      if (a[i] == 0) continue;
      os << "*x" << (i + 1);
      if (a[i] > 1) os << "^" << a[i];
    }
  }
  return os.str();
}

ScalarPoly poly_derive(const ScalarPoly& p, int axis) {
  if (axis < 0 || axis >= p.dim()) throw ValidationError("derivative axis out of range");
  ScalarPoly r(p.dim());
  for (const auto& [a, c] : p.terms()) {
    if (a[axis] == 0) continue;
    MultiIndex b = a;
    b[axis] -= 1;
    r.add_term(b, c * a[axis]);
  }
  return r;
}

ScalarPoly poly_derive(const ScalarPoly& p, const MultiIndex& alpha) {
  ScalarPoly r = p;
  for (int i = 0; i < 3; ++i)
    for (int n = 0; n < alpha[i]; ++n) r = poly_derive(r, i);
  return r;
}

Coefficient integrate_reference_extended(const ScalarPoly& p) {
  Coefficient s = 0.0L;
  for (const auto& [a, c] : p.terms()) s += c * monomial_integral_extended(a, p.dim());
  return s;
}

double integrate_reference(const ScalarPoly& p) {
  return static_cast<double>(integrate_reference_extended(p));
}

double reference_inner_product(const ScalarPoly& a, const ScalarPoly& b) {
  if (a.dim() != b.dim()) throw ValidationError("dimension mismatch in inner product");
  // Neumaier-compensated sum over term pairs; orthonormal bases of high degree
  // cancel heavily here.
  Coefficient sum = 0.0L, comp = 0.0L;
  for (const auto& [ea, ca] : a.terms())
    for (const auto& [eb, cb] : b.terms()) {
      const Coefficient term =
          ca * cb * monomial_integral_extended({ea[0] + eb[0], ea[1] + eb[1], ea[2] + eb[2]}, a.dim());
      const Coefficient t = sum + term;
      comp += std::abs(sum) >= std::abs(term) ? (sum - t) + term : (term - t) + sum;
      sum = t;
    }
  return static_cast<double>(sum + comp);
}

ScalarPoly compose_affine(const ScalarPoly& p, const Eigen::MatrixXd& A, const Eigen::VectorXd& b) {
  const int n_in = p.dim();
  const int n_out = static_cast<int>(A.cols());
  if (A.rows() != n_in || b.size() != n_in)
    throw ValidationError("affine substitution has wrong shape");
  // Linear forms ell_i(y) = b_i + sum_j A_ij y_j, with cached powers.
  std::vector<std::vector<ScalarPoly>> powers(static_cast<std::size_t>(n_in));
  int max_exp = 0;
  for (const auto& [a, c] : p.terms()) max_exp = std::max({max_exp, a[0], a[1], a[2]});
  for (int i = 0; i < n_in; ++i) {
    std::vector<double> row(static_cast<std::size_t>(n_out));
    for (int j = 0; j < n_out; ++j) row[j] = A(i, j);
    ScalarPoly ell = ScalarPoly::affine(b[i], row);
    auto& pw = powers[i];
    pw.push_back(ScalarPoly::constant(n_out, 1.0));
    for (int e = 1; e <= max_exp; ++e) pw.push_back(pw.back() * ell);
  }
  ScalarPoly r(n_out);
  for (const auto& [a, c] : p.terms()) {
    ScalarPoly t(n_out);
    t.add_term({0, 0, 0}, c);
    for (int i = 0; i < n_in; ++i)
      if (a[i] > 0) t = t * powers[i][a[i]];
    r += t;
  }
  return r;
}

namespace {

std::vector<ScalarPoly> build_pk_basis(int k, int dim) {
  // Coefficient vectors over the monomials of degree <= k, orthonormalized in
  // 128-bit arithmetic against the exact monomial Gram matrix.
  using Real = boost::multiprecision::cpp_bin_float_quad;
  const auto monos = multi_indices_up_to(dim, k);
  const std::size_t n = monos.size();
  std::vector<Real> fact(static_cast<std::size_t>(2 * k + dim + 1), Real(1));
  for (std::size_t i = 1; i < fact.size(); ++i) fact[i] = fact[i - 1] * static_cast<int>(i);
  std::vector<Real> gram(n * n);
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = 0; b < n; ++b) {
      Real num = 1;
      int total = 0;
      for (int i = 0; i < dim; ++i) {
        const int e = monos[a][i] + monos[b][i];
        num *= fact[e];
        total += e;
      }
      gram[a * n + b] = num / fact[total + dim];
    }
  auto gram_times = [&](const std::vector<Real>& x) {
    std::vector<Real> y(n, Real(0));
    for (std::size_t a = 0; a < n; ++a)
      for (std::size_t b = 0; b < n; ++b) y[a] += gram[a * n + b] * x[b];
    return y;
  };
  auto dot = [&](const std::vector<Real>& x, const std::vector<Real>& y) {
    Real s = 0;
    for (std::size_t a = 0; a < n; ++a) s += x[a] * y[a];
    return s;
  };
  std::vector<std::vector<Real>> coeffs, gram_coeffs;
  for (std::size_t j = 0; j < n; ++j) {
    std::vector<Real> v(n, Real(0));
    v[j] = 1;
    for (int pass = 0; pass < 2; ++pass)
      for (std::size_t q = 0; q < coeffs.size(); ++q) {
        const Real c = dot(v, gram_coeffs[q]);
        for (std::size_t a = 0; a < n; ++a) v[a] -= c * coeffs[q][a];
      }
    std::vector<Real> gv = gram_times(v);
    const Real norm = sqrt(dot(v, gv));
    for (auto& x : v) x /= norm;
    for (auto& x : gv) x /= norm;
    coeffs.push_back(std::move(v));
    gram_coeffs.push_back(std::move(gv));
  }
  std::vector<ScalarPoly> basis;
  for (const auto& c : coeffs) {
    ScalarPoly p(dim);
    for (std::size_t a = 0; a < n; ++a) p.add_term(monos[a], static_cast<Coefficient>(c[a]));
    basis.push_back(std::move(p));
  }
  return basis;
}

}  // namespace

std::vector<ScalarPoly> pk_basis(int k, int dim) {
  check_dim(dim);
  if (k < 0) throw ValidationError("polynomial order must be nonnegative");
  static std::mutex mutex;
  static std::map<std::pair<int, int>, std::vector<ScalarPoly>> cache;
  std::lock_guard lock(mutex);
  auto it = cache.find({k, dim});
  if (it == cache.end()) it = cache.emplace(std::pair{k, dim}, build_pk_basis(k, dim)).first;
  return it->second;
}

// ---------------------------------------------------------------------------
// VectorPoly

VectorPoly::VectorPoly(int dim) {
  check_dim(dim);
  components_.assign(static_cast<std::size_t>(dim), ScalarPoly(dim));
}

VectorPoly::VectorPoly(std::vector<ScalarPoly> components) : components_(std::move(components)) {
  if (components_.empty()) throw ValidationError("vector polynomial needs components");
  for (const auto& c : components_)
    if (c.dim() != dim()) throw ValidationError("vector polynomial components must share dim");
}

VectorPoly VectorPoly::along(int axis, const ScalarPoly& c) {
  VectorPoly v(c.dim());
  v[axis] = c;
  return v;
}

int VectorPoly::degree() const {
  int d = -1;
  for (const auto& c : components_) d = std::max(d, c.degree());
  return d;
}

double VectorPoly::max_abs_coefficient() const {
  double m = 0.0;
  for (const auto& c : components_) m = std::max(m, c.max_abs_coefficient());
  return m;
}

Eigen::VectorXd VectorPoly::operator()(const Eigen::VectorXd& x) const {
  Eigen::VectorXd r(dim());
  for (int i = 0; i < dim(); ++i) r[i] = components_[i](x);
  return r;
}

VectorPoly& VectorPoly::operator+=(const VectorPoly& other) {
  if (other.dim() != dim()) throw ValidationError("dimension mismatch in vector sum");
  for (int i = 0; i < dim(); ++i) components_[i] += other.components_[i];
  return *this;
}

VectorPoly& VectorPoly::operator-=(const VectorPoly& other) {
  if (other.dim() != dim()) throw ValidationError("dimension mismatch in vector difference");
  for (int i = 0; i < dim(); ++i) components_[i] -= other.components_[i];
  return *this;
}

VectorPoly& VectorPoly::operator*=(double s) {
  for (auto& c : components_) c *= s;
  return *this;
}

ScalarPoly VectorPoly::divergence() const {
  ScalarPoly d(dim());
  for (int i = 0; i < dim(); ++i) d += poly_derive(components_[i], i);
  return d;
}

VectorPoly VectorPoly::pruned(double tol) const {
  std::vector<ScalarPoly> c;
  for (const auto& p : components_) c.push_back(p.pruned(tol));
  return VectorPoly(std::move(c));
}

std::string VectorPoly::to_string() const {
  std::string s = "(";
  for (int i = 0; i < dim(); ++i) {
    if (i) s += ", ";
    s += components_[i].to_string();
  }
  return s + ")";
}

VectorPoly position_times(const ScalarPoly& p) {
  std::vector<ScalarPoly> c;
  for (int i = 0; i < p.dim(); ++i) c.push_back(ScalarPoly::coordinate(p.dim(), i) * p);
  return VectorPoly(std::move(c));
}

VectorPoly compose_affine(const VectorPoly& v, const Eigen::MatrixXd& A, const Eigen::VectorXd& b) {
  std::vector<ScalarPoly> c;
  for (const auto& p : v.components()) c.push_back(compose_affine(p, A, b));
  return VectorPoly(std::move(c));
}

VectorPoly matrix_times(const Eigen::MatrixXd& M, const VectorPoly& v) {
  const int n = v.dim();
  if (M.rows() != n || M.cols() != n) throw ValidationError("matrix/vector shape mismatch");
  VectorPoly r(n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (M(i, j) != 0.0) r[i] += v[j] * M(i, j);
  return r;
}

double max_coefficient_difference(const ScalarPoly& a, const ScalarPoly& b) {
  return (a - b).max_abs_coefficient();
}

double max_coefficient_difference(const VectorPoly& a, const VectorPoly& b) {
  return (a - b).max_abs_coefficient();
}

double relative_coefficient_error(const ScalarPoly& a, const ScalarPoly& b) {
  const double scale = std::max(a.max_abs_coefficient(), b.max_abs_coefficient());
  const double diff = max_coefficient_difference(a, b);
  return scale > 0.0 ? diff / scale : diff;
}

double relative_coefficient_error(const VectorPoly& a, const VectorPoly& b) {
  const double scale = std::max(a.max_abs_coefficient(), b.max_abs_coefficient());
  const double diff = max_coefficient_difference(a, b);
  return scale > 0.0 ? diff / scale : diff;
}

}  // namespace rtinterp
