#include "rtinterp/quadrature.hpp"

#include <cmath>
#include <map>
#include <mutex>

#include "rtinterp/errors.hpp"

namespace rtinterp {

namespace {

struct Rule1D {
  Eigen::VectorXd x, w;
};

/// n-point Gauss rule on [0,1] for the weight (1-u)^a, by Golub-Welsch on
/// the Jacobi matrix of P^(a,0) followed by Newton polishing.
Rule1D gauss_jacobi(int n, int a) {
  Eigen::MatrixXd J = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    const double s = 2.0 * i + a;
    J(i, i) = (s == 0.0) ? 0.0 : -static_cast<double>(a * a) / (s * (s + 2.0));
    if (i + 1 < n) {
      const double m = i + 1.0;
      const double t = 2.0 * m + a;
      const double b2 = 4.0 * m * (m + a) * m * (m + a) / (t * t * (t + 1.0) * (t - 1.0));
      J(i, i + 1) = J(i + 1, i) = std::sqrt(b2);
    }
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(J);
  const double mu0 = std::pow(2.0, a + 1) / (a + 1.0);

  // Newton polish on P_n^(a,0) via its three-term recurrence.
  auto jacobi = [&](double z) {
    double p0 = 1.0, p1 = 0.5 * (a + 2.0) * z + 0.5 * a;
    double d0 = 0.0, d1 = 0.5 * (a + 2.0);
    if (n == 0) return std::pair{p0, d0};
    for (int m = 2; m <= n; ++m) {
      const double c = 2.0 * m + a;
      const double a1 = 2.0 * m * (m + a) * (c - 2.0);
      const double a2 = (c - 1.0) * a * a;
      const double a3 = (c - 2.0) * (c - 1.0) * c;
      const double a4 = 2.0 * (m + a - 1.0) * (m - 1.0) * c;
      const double p2 = ((a2 + a3 * z) * p1 - a4 * p0) / a1;
      const double d2 = ((a2 + a3 * z) * d1 + a3 * p1 - a4 * d0) / a1;
      p0 = p1;
      p1 = p2;
      d0 = d1;
      d1 = d2;
    }
    return std::pair{p1, d1};
  };

  Rule1D r;
  r.x.resize(n);
  r.w.resize(n);
  for (int i = 0; i < n; ++i) {
    double z = es.eigenvalues()[i];
    for (int it = 0; it < 3; ++it) {
      const auto [p, dp] = jacobi(z);
      if (dp == 0.0) break;
      z -= p / dp;
    }
    const double v0 = es.eigenvectors()(0, i);
    r.x[i] = 0.5 * (1.0 + z);
    r.w[i] = mu0 * v0 * v0 / std::pow(2.0, a + 1);
  }
  return r;
}

QuadratureRule build_rule(int dim, int degree) {
  const int n = degree / 2 + 1;
  QuadratureRule rule;
  rule.dim = dim;
  rule.degree = degree;
  const Rule1D g0 = gauss_jacobi(n, 0);
  if (dim == 1) {
    rule.barycentric.resize(n, 2);
    rule.weights = g0.w;
    for (int i = 0; i < n; ++i) rule.barycentric.row(i) << 1.0 - g0.x[i], g0.x[i];
    return rule;
  }
  if (dim == 2) {
    const Rule1D g1 = gauss_jacobi(n, 1);
    rule.barycentric.resize(n * n, 3);
    rule.weights.resize(n * n);
    int q = 0;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j, ++q) {
        const double x1 = g1.x[i];
        const double x2 = (1.0 - g1.x[i]) * g0.x[j];
        rule.barycentric.row(q) << (1.0 - g1.x[i]) * (1.0 - g0.x[j]), x1, x2;
        rule.weights[q] = g1.w[i] * g0.w[j];
      }
    return rule;
  }
  const Rule1D g1 = gauss_jacobi(n, 1);
  const Rule1D g2 = gauss_jacobi(n, 2);
  rule.barycentric.resize(n * n * n, 4);
  rule.weights.resize(n * n * n);
  int q = 0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int l = 0; l < n; ++l, ++q) {
        const double u = g2.x[i], v = g1.x[j], w = g0.x[l];
        const double x1 = u;
        const double x2 = (1.0 - u) * v;
        const double x3 = (1.0 - u) * (1.0 - v) * w;
        rule.barycentric.row(q) << (1.0 - u) * (1.0 - v) * (1.0 - w), x1, x2, x3;
        rule.weights[q] = g2.w[i] * g1.w[j] * g0.w[l];
      }
  return rule;
}

PhysicalRule emit(const QuadratureRule& ref, const std::vector<Eigen::VectorXd>& verts, double jacobian) {
  PhysicalRule r;
  const int ambient = static_cast<int>(verts[0].size());
  r.points = Eigen::MatrixXd::Zero(ambient, ref.size());
  for (int q = 0; q < ref.size(); ++q)
    for (std::size_t v = 0; v < verts.size(); ++v)
      r.points.col(q) += ref.barycentric(q, static_cast<Eigen::Index>(v)) * verts[v];
  r.weights = ref.weights * jacobian;
  return r;
}

}  // namespace

Eigen::MatrixXd QuadratureRule::points() const {
  return barycentric.rightCols(dim).transpose();
}

QuadratureRule simplex_rule(int dim, int degree) {
  if (dim < 1 || dim > 3) throw ValidationError("quadrature dimension must be 1, 2 or 3");
  if (degree < 0 || degree > 30) throw ValidationError("unsupported degree");
  static std::mutex mutex;
  static std::map<std::pair<int, int>, QuadratureRule> cache;
  std::lock_guard lock(mutex);
  auto it = cache.find({dim, degree});
  if (it == cache.end()) it = cache.emplace(std::pair{dim, degree}, build_rule(dim, degree)).first;
  return it->second;
}

PhysicalRule element_rule(const Simplex& t, int degree) {
  return emit(simplex_rule(t.dim(), degree), t.vertices(), std::abs(t.signed_det()));
}

PhysicalRule facet_rule(const Simplex& t, int facet, int degree) {
  const auto fv = t.facet_vertices(facet);
  const double meas = t.facet_measure(facet);
  const int d = t.dim();
  if (!(meas >= 1e-14 * std::pow(t.diameter(), d - 1)))
    throw DegenerateElementError("degenerate facet");
  std::vector<Eigen::VectorXd> verts;
  for (int v : fv) verts.push_back(t.vertex(v));
  // Reference facet measure is 1 (edge) or 1/2 (triangle).
  return emit(simplex_rule(d - 1, degree), verts, d == 2 ? meas : 2.0 * meas);
}

PhysicalRule face_rule(const Simplex& tet, int face, int degree) {
  if (tet.dim() != 3) throw ValidationError("face_rule needs a tetrahedron");
  return facet_rule(tet, face, degree);
}

VerifiedIntegral verified_integral(const std::function<PhysicalRule(int)>& make_rule,
                                   const VectorIntegrand& f) {
  auto run = [&](int degree, Eigen::VectorXd* abs_mass) {
    const PhysicalRule r = make_rule(degree);
    Eigen::VectorXd s;
    for (int q = 0; q < r.size(); ++q) {
      const Eigen::VectorXd v = f(r.points.col(q));
      if (q == 0) {
        s = Eigen::VectorXd::Zero(v.size());
        if (abs_mass) *abs_mass = Eigen::VectorXd::Zero(v.size());
      }
      s += r.weights[q] * v;
      if (abs_mass) *abs_mass += std::abs(r.weights[q]) * v.cwiseAbs();
    }
    return s;
  };
  Eigen::VectorXd mass;
  const Eigen::VectorXd lo = run(kWorkingDegree, nullptr);
  VerifiedIntegral out;
  out.value = run(kVerificationDegree, &mass);
  const double scale = mass.size() ? mass.cwiseAbs().maxCoeff() : 0.0;
  const double diff = out.value.size() ? (out.value - lo).cwiseAbs().maxCoeff() : 0.0;
  out.relative_gap = scale > 0.0 ? diff / scale : 0.0;
  out.flagged = out.relative_gap > kDisagreementTolerance;
  return out;
}

}  // namespace rtinterp
