#include "rtinterp/field.hpp"

#include <cmath>
#include <map>
#include <numbers>

#include "rtinterp/errors.hpp"

namespace rtinterp {

namespace {

double binomial(int n, int k) {
  double r = 1.0;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

/// D^alpha in the variables x expressed through derivatives in x_hat when
/// x_hat = A x + b: prod_i (sum_j A_ji d_j)^alpha_i, as a polynomial in the
/// symbols d_j.
ScalarPoly chain_operator(const Eigen::MatrixXd& A, const MultiIndex& alpha) {
  const int d = static_cast<int>(A.rows());
  ScalarPoly op = ScalarPoly::constant(d, 1.0);
  for (int i = 0; i < d; ++i) {
    ScalarPoly form(d);
    for (int j = 0; j < d; ++j) {
      MultiIndex e{0, 0, 0};
      e[static_cast<std::size_t>(j)] = 1;
      form.add_term(e, A(j, i));
    }
    for (int r = 0; r < alpha[static_cast<std::size_t>(i)]; ++r) op = op * form;
  }
  return op;
}

/// Precomputed chain operators for low orders, built on demand past them.
class ChainTable {
 public:
  ChainTable(Eigen::MatrixXd A, int max_order) : A_(std::move(A)) {
    const int d = static_cast<int>(A_.rows());
    for (const auto& a : multi_indices_up_to(d, std::min(max_order, 4))) table_.emplace(a, chain_operator(A_, a));
  }
  ScalarPoly get(const MultiIndex& alpha) const {
    const auto it = table_.find(alpha);
    return it != table_.end() ? it->second : chain_operator(A_, alpha);
  }

 private:
  Eigen::MatrixXd A_;
  std::map<MultiIndex, ScalarPoly> table_;
};

void check_order(const MultiIndex& alpha, int max_order, const std::string& name) {
  for (int a : alpha)
    if (a < 0) throw ValidationError("negative derivative order");
  if (total_degree(alpha) > max_order)
    throw ValidationError("insufficient derivative catalog for field '" + name + "': order " +
                          std::to_string(total_degree(alpha)) + " requested, " + std::to_string(max_order) +
                          " available");
}

}  // namespace

ScalarField::ScalarField(int dim, int max_order, DerivativeFn fn, std::string name)
    : dim_(dim), max_order_(max_order), fn_(std::move(fn)), name_(std::move(name)) {
  if (dim < 1 || dim > 3) throw ValidationError("field dimension must be 1, 2 or 3");
}

ScalarField ScalarField::from_poly(const ScalarPoly& p, std::string name) {
  return ScalarField(
      p.dim(), kUnlimitedOrder,
      [p](const MultiIndex& a, const Eigen::VectorXd& x) {
        return total_degree(a) == 0 ? p(x) : poly_derive(p, a)(x);
      },
      std::move(name));
}

double ScalarField::derivative(const MultiIndex& alpha, const Eigen::VectorXd& x) const {
  check_order(alpha, max_order_, name_);
  return fn_(alpha, x);
}

AnalyticField::AnalyticField(int dim, int max_order, DerivativeFn fn, std::string name)
    : dim_(dim), max_order_(max_order), fn_(std::move(fn)), name_(std::move(name)) {
  if (dim < 2 || dim > 3) throw ValidationError("vector field dimension must be 2 or 3");
}

AnalyticField AnalyticField::from_poly(const VectorPoly& p, std::string name) {
  // Derivative polynomials are cached per multi-index on first use.
  auto cache = std::make_shared<std::map<MultiIndex, VectorPoly>>();
  for (const auto& a : multi_indices_up_to(p.dim(), std::max(0, std::min(p.degree(), 3)))) {
    std::vector<ScalarPoly> c;
    for (const auto& s : p.components()) c.push_back(poly_derive(s, a));
    cache->emplace(a, VectorPoly(std::move(c)));
  }
  return AnalyticField(
      p.dim(), kUnlimitedOrder,
      [p, cache](const MultiIndex& a, const Eigen::VectorXd& x) -> Eigen::VectorXd {
        const auto it = cache->find(a);
        if (it != cache->end()) return it->second(x);
        Eigen::VectorXd v(p.dim());
        for (int i = 0; i < p.dim(); ++i) v[i] = poly_derive(p[i], a)(x);
        return v;
      },
      std::move(name));
}

AnalyticField AnalyticField::from_components(const std::vector<ScalarField>& components, std::string name) {
  int order = kUnlimitedOrder;
  for (const auto& c : components) order = std::min(order, c.max_order());
  const int d = static_cast<int>(components.size());
  return AnalyticField(
      d, order,
      [components, d](const MultiIndex& a, const Eigen::VectorXd& x) {
        Eigen::VectorXd v(d);
        for (int i = 0; i < d; ++i) v[i] = components[static_cast<std::size_t>(i)].derivative(a, x);
        return v;
      },
      std::move(name));
}

AnalyticField AnalyticField::renamed(std::string name) const {
  AnalyticField f = *this;
  f.name_ = std::move(name);
  return f;
}

Eigen::VectorXd AnalyticField::derivative(const MultiIndex& alpha, const Eigen::VectorXd& x) const {
  check_order(alpha, max_order_, name_);
  return fn_(alpha, x);
}

Eigen::VectorXd AnalyticField::partial(int axis, const Eigen::VectorXd& x) const {
  if (axis < 0 || axis >= dim_) throw ValidationError("axis out of range");
  MultiIndex a{0, 0, 0};
  a[static_cast<std::size_t>(axis)] = 1;
  return derivative(a, x);
}

Eigen::MatrixXd AnalyticField::jacobian(const Eigen::VectorXd& x) const {
  Eigen::MatrixXd J(dim_, dim_);
  for (int j = 0; j < dim_; ++j) J.col(j) = partial(j, x);
  return J;
}

double AnalyticField::divergence(const Eigen::VectorXd& x) const { return jacobian(x).trace(); }

ScalarField AnalyticField::component(int i) const {
  if (i < 0 || i >= dim_) throw ValidationError("component out of range");
  auto fn = fn_;
  return ScalarField(
      dim_, max_order_, [fn, i](const MultiIndex& a, const Eigen::VectorXd& x) { return fn(a, x)[i]; },
      name_ + "[" + std::to_string(i) + "]");
}

ScalarField AnalyticField::divergence_field() const {
  if (max_order_ < 1) throw ValidationError("insufficient derivative catalog for divergence of '" + name_ + "'");
  auto fn = fn_;
  const int d = dim_;
  return ScalarField(
      d, max_order_ - 1,
      [fn, d](const MultiIndex& a, const Eigen::VectorXd& x) {
        double s = 0.0;
        for (int i = 0; i < d; ++i) {
          MultiIndex b = a;
          b[static_cast<std::size_t>(i)] += 1;
          s += fn(b, x)[i];
        }
        return s;
      },
      "div " + name_);
}

AnalyticField piola_push(const AffineMap& map, const AnalyticField& u_hat) {
  if (u_hat.dim() != map.dim()) throw ValidationError("field and map dimensions differ");
  const Eigen::MatrixXd A = map.inverse_matrix();
  const Eigen::VectorXd b = -A * map.offset();
  const Eigen::MatrixXd P = map.matrix() / map.det();
  auto table = std::make_shared<const ChainTable>(A, u_hat.max_order());
  return AnalyticField(
      u_hat.dim(), u_hat.max_order(),
      [u_hat, A, b, P, table](const MultiIndex& alpha, const Eigen::VectorXd& x) -> Eigen::VectorXd {
        const Eigen::VectorXd xh = A * x + b;
        if (total_degree(alpha) == 0) return P * u_hat(xh);
        Eigen::VectorXd s = Eigen::VectorXd::Zero(u_hat.dim());
        const ScalarPoly op = table->get(alpha);
        for (const auto& [beta, c] : op.terms())
          s += static_cast<double>(c) * u_hat.derivative(beta, xh);
        return P * s;
      },
      u_hat.name());
}

AnalyticField piola_pull(const AffineMap& map, const AnalyticField& u) {
  return piola_push(map.inverse(), u);
}

ScalarField compose_affine(const ScalarField& f, const AffineMap& map) {
  const Eigen::MatrixXd M = map.matrix();
  const Eigen::VectorXd c = map.offset();
  auto table = std::make_shared<const ChainTable>(M, f.max_order());
  return ScalarField(
      f.dim(), f.max_order(),
      [f, M, c, table](const MultiIndex& alpha, const Eigen::VectorXd& xh) {
        const Eigen::VectorXd x = M * xh + c;
        if (total_degree(alpha) == 0) return f(x);
        double s = 0.0;
        const ScalarPoly op = table->get(alpha);
        for (const auto& [beta, coef] : op.terms())
          s += static_cast<double>(coef) * f.derivative(beta, x);
        return s;
      },
      f.name());
}

Term poly_term(const ScalarPoly& p) { return Term{p, Term::Kind::One, Eigen::VectorXd::Zero(p.dim()), 0.0}; }
Term exp_term(const ScalarPoly& p, const Eigen::VectorXd& w) { return Term{p, Term::Kind::Exp, w, 0.0}; }
Term sin_term(const ScalarPoly& p, const Eigen::VectorXd& w, double phase) {
  return Term{p, Term::Kind::Sin, w, phase};
}

ScalarField term_field(int dim, std::vector<Term> terms, std::string name) {
  for (const auto& t : terms)
    if (t.poly.dim() != dim || t.w.size() != dim) throw ValidationError("term dimension mismatch");
  // Polynomial derivatives cached per term and multi-index.
  struct Cached {
    Term term;
    std::map<MultiIndex, ScalarPoly> derivs;
  };
  auto cached = std::make_shared<std::vector<Cached>>();
  for (auto& t : terms) {
    Cached c{t, {}};
    for (const auto& a : multi_indices_up_to(dim, 4)) c.derivs.emplace(a, poly_derive(t.poly, a));
    cached->push_back(std::move(c));
  }
  return ScalarField(
      dim, kUnlimitedOrder,
      [cached, dim](const MultiIndex& alpha, const Eigen::VectorXd& x) {
        double total = 0.0;
        for (const auto& c : *cached) {
          const Term& t = c.term;
          const double arg = t.w.dot(x) + t.phase;
          // All beta <= alpha.
          for (int b0 = 0; b0 <= alpha[0]; ++b0)
            for (int b1 = 0; b1 <= (dim > 1 ? alpha[1] : 0); ++b1)
              for (int b2 = 0; b2 <= (dim > 2 ? alpha[2] : 0); ++b2) {
                const MultiIndex beta{b0, b1, b2};
                const auto it = c.derivs.find(beta);
                const ScalarPoly dp = it != c.derivs.end() ? it->second : poly_derive(t.poly, beta);
                if (dp.is_zero()) continue;
                const MultiIndex gamma{alpha[0] - b0, alpha[1] - b1, alpha[2] - b2};
                const int n = total_degree(gamma);
                double g = 1.0;
                if (t.kind == Term::Kind::One) {
                  if (n > 0) continue;
                } else {
                  for (int i = 0; i < dim; ++i) g *= std::pow(t.w[i], gamma[static_cast<std::size_t>(i)]);
                  g *= t.kind == Term::Kind::Exp ? std::exp(arg)
                                                 : std::sin(arg + n * std::numbers::pi / 2.0);
                }
                const double mult = binomial(alpha[0], b0) * binomial(alpha[1], b1) * binomial(alpha[2], b2);
                total += mult * dp(x) * g;
              }
        }
        return total;
      },
      std::move(name));
}

}  // namespace rtinterp
