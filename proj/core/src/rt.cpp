#include "rtinterp/rt.hpp"

#include <cmath>
#include <map>
#include <mutex>

#include <fmt/format.h>

#include "rtinterp/errors.hpp"
#include "rtinterp/quadrature.hpp"

namespace rtinterp {

namespace {

void check_order(int k) {
  if (k < 0) throw ValidationError("RT order must be nonnegative");
}

void check_dim(int dim) {
  if (dim != 2 && dim != 3) throw ValidationError("RT spaces need dim 2 or 3");
}

struct Solved {
  Eigen::VectorXd c;
  double condition;
  double residual;
};

/// Row- and column-equilibrated dense solve.
Solved solve_scaled(const Eigen::MatrixXd& D, const Eigen::VectorXd& b) {
  const Eigen::Index n = D.rows();
  Eigen::VectorXd col(n), row(n);
  for (Eigen::Index j = 0; j < n; ++j) {
    const double m = D.col(j).cwiseAbs().maxCoeff();
    col[j] = m > 0.0 ? 1.0 / m : 1.0;
  }
  const Eigen::MatrixXd Dc = D * col.asDiagonal();
  for (Eigen::Index i = 0; i < n; ++i) {
    const double m = Dc.row(i).cwiseAbs().maxCoeff();
    row[i] = m > 0.0 ? 1.0 / m : 1.0;
  }
  const Eigen::MatrixXd S = row.asDiagonal() * Dc;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(S);
  const auto& sv = svd.singularValues();
  const double cond = sv[n - 1] > 0.0 ? sv[0] / sv[n - 1] : std::numeric_limits<double>::infinity();
  if (!(cond <= kMaxCondition))
    throw ConditioningError(fmt::format("DOF matrix condition estimate {:.3e} exceeds {:.0e}", cond, kMaxCondition),
                            cond);
  const Eigen::VectorXd y = S.fullPivLu().solve(row.asDiagonal() * b);
  Solved s;
  s.c = col.asDiagonal() * y;
  s.condition = cond;
  const double bn = b.cwiseAbs().maxCoeff();
  const double rn = (D * s.c - b).cwiseAbs().maxCoeff();
  s.residual = bn > 0.0 ? rn / bn : rn;
  return s;
}

/// Dual basis of RT_k on a unit F1/F2 reference element, cached.
struct ReferenceSystem {
  DofSet dofs;
  std::vector<VectorPoly> dual;
  double condition;
};

const ReferenceSystem& reference_system(int k, const Simplex& reference, Family family) {
  static std::mutex mutex;
  static std::map<std::tuple<int, int, int>, std::unique_ptr<ReferenceSystem>> cache;
  std::lock_guard lock(mutex);
  const auto key = std::make_tuple(k, reference.dim(), static_cast<int>(family));
  auto it = cache.find(key);
  if (it != cache.end()) return *it->second;

  const RTSpace space = rt_basis(k, reference);
  DofSet dofs(k, reference);
  const Eigen::MatrixXd D = dof_matrix(space, dofs);
  const double cond = scaled_condition(D);
  if (!(cond <= kMaxCondition)) throw ConditioningError("reference DOF matrix is singular", cond);
  const Eigen::MatrixXd Dinv = D.fullPivLu().inverse();
  const auto basis = space.expanded_basis();
  std::vector<VectorPoly> dual;
  for (int i = 0; i < D.rows(); ++i) {
    VectorPoly psi(reference.dim());
    for (int j = 0; j < D.cols(); ++j) {
      const double w = Dinv(j, i);
      if (w != 0.0) psi += basis[static_cast<std::size_t>(j)] * w;
    }
    dual.push_back(std::move(psi));
  }
  auto sys = std::make_unique<ReferenceSystem>(ReferenceSystem{std::move(dofs), std::move(dual), cond});
  return *cache.emplace(key, std::move(sys)).first->second;
}

Interpolation finish(const AffineMap& map, const VectorPoly& reference, double cond, double residual, double gap) {
  if (!(residual <= kMaxDofResidual))
    throw NumericalError(fmt::format("DOF residual {:.3e} exceeds {:.0e}", residual, kMaxDofResidual));
  return Interpolation{RTField(map, reference), cond, residual, gap};
}

Interpolation interpolate_direct(int k, const Simplex& t, const Eigen::VectorXd& b, double gap) {
  const RTSpace space = rt_basis(k, t);
  const DofSet dofs(k, t);
  const Eigen::MatrixXd D = dof_matrix(space, dofs);
  const Solved s = solve_scaled(D, b);
  VectorPoly ref(t.dim());
  for (int j = 0; j < space.size(); ++j)
    if (s.c[j] != 0.0) ref += space.reference_basis[static_cast<std::size_t>(j)] * s.c[j];
  return finish(space.map, ref, s.condition, s.residual, gap);
}

Interpolation interpolate_reference(int k, const Simplex& t, const AnalyticField& u) {
  const ReferenceFrame frame = reference_frame(t);
  const ReferenceSystem& sys = reference_system(k, frame.reference, frame.family);
  const AnalyticField u_hat = piola_pull(frame.map, u);
  const VerifiedDofs b = sys.dofs.apply(u_hat);
  if (b.flagged)
    throw QuadratureDisagreement(fmt::format("DOF integrals disagree between degrees {} and {} (gap {:.3e})",
                                             kWorkingDegree, kVerificationDegree, b.relative_gap),
                                 b.relative_gap);
  VectorPoly ref(t.dim());
  for (int i = 0; i < b.values.size(); ++i)
    if (b.values[i] != 0.0) ref += sys.dual[static_cast<std::size_t>(i)] * b.values[i];
  const Eigen::VectorXd back = sys.dofs.apply(ref);
  const double bn = b.values.cwiseAbs().maxCoeff();
  const double rn = (back - b.values).cwiseAbs().maxCoeff();
  return finish(frame.map, ref, sys.condition, bn > 0.0 ? rn / bn : rn, b.relative_gap);
}

}  // namespace

int rt_dimension(int k, int dim) {
  check_order(k);
  check_dim(dim);
  return dim == 2 ? (k + 1) * (k + 3) : (k + 1) * (k + 2) * (k + 4) / 2;
}

int rt_face_dof_count(int k, int dim) {
  check_order(k);
  check_dim(dim);
  return (dim + 1) * pk_dimension(k, dim - 1);
}

int rt_interior_dof_count(int k, int dim) {
  check_order(k);
  check_dim(dim);
  return k == 0 ? 0 : dim * pk_dimension(k - 1, dim);
}

std::vector<VectorPoly> rt_reference_basis(int k, int dim) {
  check_order(k);
  check_dim(dim);
  std::vector<VectorPoly> basis;
  const auto pk = pk_basis(k, dim);
  for (int axis = 0; axis < dim; ++axis)
    for (const auto& p : pk) basis.push_back(VectorPoly::along(axis, p));
  for (const auto& a : multi_indices_of_degree(dim, k)) basis.push_back(position_times(ScalarPoly::monomial(dim, a)));
  return basis;
}

double rt_membership_residual(int k, const VectorPoly& v) {
  const int d = v.dim();
  const double scale = v.max_abs_coefficient();
  if (scale == 0.0) return 0.0;
  double excess = 0.0;
  for (const auto& c : v.components())
    for (const auto& [a, coef] : c.terms())
      if (total_degree(a) > k + 1) excess = std::max(excess, std::abs(static_cast<double>(coef)));
  // Fit the degree k+1 part H to x q with q homogeneous of degree k.
  const auto qmon = multi_indices_of_degree(d, k);
  const auto hmon = multi_indices_of_degree(d, k + 1);
  std::map<MultiIndex, int> row_of;
  for (std::size_t r = 0; r < hmon.size(); ++r) row_of[hmon[r]] = static_cast<int>(r);
  const Eigen::Index rows = static_cast<Eigen::Index>(d * hmon.size());
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(rows, static_cast<Eigen::Index>(qmon.size()));
  Eigen::VectorXd h(rows);
  for (int i = 0; i < d; ++i) {
    for (std::size_t r = 0; r < hmon.size(); ++r)
      h[static_cast<Eigen::Index>(i * hmon.size() + r)] = v[i].coefficient(hmon[r]);
    for (std::size_t j = 0; j < qmon.size(); ++j) {
      MultiIndex e = qmon[j];
      e[static_cast<std::size_t>(i)] += 1;
      A(static_cast<Eigen::Index>(i * hmon.size()) + row_of[e], static_cast<Eigen::Index>(j)) = 1.0;
    }
  }
  const Eigen::VectorXd q = A.colPivHouseholderQr().solve(h);
  const double misfit = (A * q - h).cwiseAbs().maxCoeff();
  return std::max(excess, misfit) / scale;
}

bool in_rt_space(int k, const VectorPoly& v, double tol) { return rt_membership_residual(k, v) <= tol; }

RTField::RTField(AffineMap map, VectorPoly reference)
    : map_(std::move(map)), inverse_(map_.inverse()), reference_(std::move(reference)) {
  if (reference_.dim() != map_.dim()) throw ValidationError("field and map dimensions differ");
  for (int j = 0; j < dim(); ++j) {
    std::vector<ScalarPoly> col;
    for (const auto& c : reference_.components()) col.push_back(poly_derive(c, j));
    reference_jacobian_.emplace_back(std::move(col));
  }
}

Eigen::VectorXd RTField::operator()(const Eigen::VectorXd& x) const {
  return map_.matrix() * reference_(inverse_(x)) / map_.det();
}

Eigen::MatrixXd RTField::jacobian(const Eigen::VectorXd& x) const {
  const Eigen::VectorXd xh = inverse_(x);
  Eigen::MatrixXd Jh(dim(), dim());
  for (int j = 0; j < dim(); ++j) Jh.col(j) = reference_jacobian_[static_cast<std::size_t>(j)](xh);
  return map_.matrix() * Jh * inverse_.matrix() / map_.det();
}

double RTField::divergence(const Eigen::VectorXd& x) const {
  const Eigen::VectorXd xh = inverse_(x);
  double s = 0.0;
  for (int j = 0; j < dim(); ++j) s += reference_jacobian_[static_cast<std::size_t>(j)][j](xh);
  return s / map_.det();
}

VectorPoly RTField::expanded() const { return piola_push(map_, reference_); }

std::vector<VectorPoly> RTSpace::expanded_basis() const {
  std::vector<VectorPoly> out;
  for (const auto& b : reference_basis) out.push_back(piola_push(map, b));
  return out;
}

RTSpace rt_basis(int k, const Simplex& element) {
  return RTSpace{k, element, AffineMap::from_reference(element), rt_reference_basis(k, element.dim())};
}

DofSet::DofSet(int k, Simplex element)
    : k_(k), element_(std::move(element)), map_(AffineMap::from_reference(element_)) {
  check_order(k);
  facet_basis_ = pk_basis(k, element_.dim() - 1);
  if (k > 0) interior_basis_ = pk_basis(k - 1, element_.dim());
}

std::string DofSet::describe(int i) const {
  const int per_face = static_cast<int>(facet_basis_.size());
  if (i < face_count()) return fmt::format("face {} moment {}", i / per_face, i % per_face);
  const int j = i - face_count();
  const int per_comp = static_cast<int>(interior_basis_.size());
  return fmt::format("interior component {} moment {}", j / per_comp, j % per_comp);
}

Eigen::VectorXd DofSet::evaluate_impl(const PointField& u, int degree, Eigen::VectorXd* abs_mass) const {
  const int d = element_.dim();
  Eigen::VectorXd out = Eigen::VectorXd::Zero(size());
  if (abs_mass) *abs_mass = Eigen::VectorXd::Zero(size());
  const QuadratureRule frule = simplex_rule(d - 1, degree);
  const Eigen::MatrixXd fpts = frule.points();
  const int nf = static_cast<int>(facet_basis_.size());

  // Facet test functions tabulated at the rule points.
  Eigen::MatrixXd ftab(nf, frule.size());
  for (int q = 0; q < frule.size(); ++q)
    for (int j = 0; j < nf; ++j) ftab(j, q) = facet_basis_[static_cast<std::size_t>(j)](Eigen::VectorXd(fpts.col(q)));

  for (int f = 0; f <= d; ++f) {
    const auto fv = element_.facet_vertices(f);
    const Eigen::VectorXd a = element_.vertex(fv[0]);
    Eigen::MatrixXd E(d, d - 1);
    for (int j = 1; j < d; ++j) E.col(j - 1) = element_.vertex(fv[static_cast<std::size_t>(j)]) - a;
    const double meas = element_.facet_measure(f);
    if (!(meas >= 1e-14 * std::pow(element_.diameter(), d - 1))) throw DegenerateElementError("degenerate facet");
    const double jac = d == 2 ? meas : 2.0 * meas;
    const Eigen::VectorXd n = element_.outward_normal(f);
    for (int q = 0; q < frule.size(); ++q) {
      const Eigen::VectorXd x = a + E * fpts.col(q);
      const double un = u(x).dot(n);
      const double w = frule.weights[q] * jac;
      for (int j = 0; j < nf; ++j) {
        out[f * nf + j] += w * un * ftab(j, q);
        if (abs_mass) (*abs_mass)[f * nf + j] += std::abs(w * un * ftab(j, q));
      }
    }
  }

  if (k_ > 0) {
    const QuadratureRule rule = simplex_rule(d, degree);
    const Eigen::MatrixXd pts = rule.points();
    const int ni = static_cast<int>(interior_basis_.size());
    const double jac = std::abs(map_.det());
    const int base = face_count();
    for (int q = 0; q < rule.size(); ++q) {
      const Eigen::VectorXd xh = pts.col(q);
      const Eigen::VectorXd ux = u(map_(xh));
      const double w = rule.weights[q] * jac;
      for (int j = 0; j < ni; ++j) {
        const double pj = interior_basis_[static_cast<std::size_t>(j)](xh);
        for (int c = 0; c < d; ++c) {
          const double v = w * ux[c] * pj;
          out[base + c * ni + j] += v;
          if (abs_mass) (*abs_mass)[base + c * ni + j] += std::abs(v);
        }
      }
    }
  }
  return out;
}

Eigen::VectorXd DofSet::evaluate(const PointField& u, int degree) const { return evaluate_impl(u, degree, nullptr); }

Eigen::VectorXd DofSet::apply(const VectorPoly& u) const {
  const int deg = std::max(0, u.degree()) + k_;
  if (deg > 30) throw ValidationError("polynomial degree too high for exact DOF evaluation");
  return evaluate([&](const Eigen::VectorXd& x) { return u(x); }, deg);
}

Eigen::VectorXd DofSet::apply(const RTField& u) const {
  const int deg = std::max(0, u.reference().degree()) + k_;
  if (deg > 30) throw ValidationError("polynomial degree too high for exact DOF evaluation");
  return evaluate([&](const Eigen::VectorXd& x) { return u(x); }, deg);
}

VerifiedDofs DofSet::apply(const AnalyticField& u) const {
  if (u.dim() != element_.dim()) throw ValidationError("field and element dimensions differ");
  auto f = [&](const Eigen::VectorXd& x) { return u(x); };
  Eigen::VectorXd mass;
  const Eigen::VectorXd lo = evaluate_impl(f, kWorkingDegree, nullptr);
  VerifiedDofs out;
  out.values = evaluate_impl(f, kVerificationDegree, &mass);
  const double scale = mass.size() ? mass.maxCoeff() : 0.0;
  const double diff = out.values.size() ? (out.values - lo).cwiseAbs().maxCoeff() : 0.0;
  out.relative_gap = scale > 0.0 ? diff / scale : 0.0;
  out.flagged = out.relative_gap > kDisagreementTolerance;
  return out;
}

Eigen::MatrixXd dof_matrix(const RTSpace& space, const DofSet& dofs) {
  if (space.size() != dofs.size()) throw ValidationError("basis size does not match DOF count");
  Eigen::MatrixXd D(dofs.size(), space.size());
  for (int j = 0; j < space.size(); ++j) D.col(j) = dofs.apply(space.member(j));
  return D;
}

double scaled_condition(const Eigen::MatrixXd& D) {
  Eigen::MatrixXd S = D;
  for (Eigen::Index j = 0; j < S.cols(); ++j) {
    const double m = S.col(j).cwiseAbs().maxCoeff();
    if (m > 0.0) S.col(j) /= m;
  }
  for (Eigen::Index i = 0; i < S.rows(); ++i) {
    const double m = S.row(i).cwiseAbs().maxCoeff();
    if (m > 0.0) S.row(i) /= m;
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(S);
  const auto& sv = svd.singularValues();
  const double lo = sv[sv.size() - 1];
  return lo > 0.0 ? sv[0] / lo : std::numeric_limits<double>::infinity();
}

ReferenceFrame reference_frame(const Simplex& element) {
  const Decomposition d = reference_decomposition(element);
  const Simplex unit = d.tag.family == Family::F1
                           ? make_f1(std::vector<double>(static_cast<std::size_t>(element.dim()), 1.0))
                           : make_f2(std::vector<double>(static_cast<std::size_t>(element.dim()), 1.0));
  const Eigen::VectorXd h = Eigen::Map<const Eigen::VectorXd>(d.tag.h.data(), static_cast<Eigen::Index>(d.tag.h.size()));
  const AffineMap scale(h.asDiagonal(), Eigen::VectorXd::Zero(element.dim()));
  return ReferenceFrame{d.tag.family, unit, d.map.compose(scale)};
}

Interpolation interpolate_field(int k, const Simplex& element, const AnalyticField& u, InterpolationPath path) {
  check_order(k);
  if (u.dim() != element.dim()) throw ValidationError("field and element dimensions differ");
  if (path == InterpolationPath::Reference) return interpolate_reference(k, element, u);
  const DofSet dofs(k, element);
  const VerifiedDofs b = dofs.apply(u);
  if (b.flagged)
    throw QuadratureDisagreement(fmt::format("DOF integrals disagree between degrees {} and {} (gap {:.3e})",
                                             kWorkingDegree, kVerificationDegree, b.relative_gap),
                                 b.relative_gap);
  return interpolate_direct(k, element, b.values, b.relative_gap);
}

Interpolation interpolate_field(int k, const Simplex& element, const VectorPoly& u, InterpolationPath path) {
  check_order(k);
  if (u.dim() != element.dim()) throw ValidationError("field and element dimensions differ");
  if (path == InterpolationPath::Reference) return interpolate_reference(k, element, AnalyticField::from_poly(u));
  const DofSet dofs(k, element);
  return interpolate_direct(k, element, dofs.apply(u), 0.0);
}

VectorPoly interpolate(int k, const Simplex& element, const AnalyticField& u) {
  return interpolate_field(k, element, u, InterpolationPath::Direct).field.expanded();
}

VectorPoly interpolate(int k, const Simplex& element, const VectorPoly& u) {
  return interpolate_field(k, element, u, InterpolationPath::Direct).field.expanded();
}

VectorPoly interpolate_via_reference(int k, const Simplex& element, const AnalyticField& u) {
  return interpolate_field(k, element, u, InterpolationPath::Reference).field.expanded();
}

ScalarPoly l2_project_pk(int k, const Simplex& element, const ScalarField& f) {
  check_order(k);
  if (f.dim() != element.dim()) throw ValidationError("field and element dimensions differ");
  const AffineMap map = AffineMap::from_reference(element);
  const auto basis = pk_basis(k, element.dim());
  const double jac = std::abs(map.det());
  // With q_i = b_i o F^{-1} / sqrt(jac) orthonormal on the element, the
  // projection is sum_i (int f b_i o F^{-1}) b_i o F^{-1} / jac.
  const VerifiedIntegral vi = verified_integral(
      [&](int degree) {
        PhysicalRule r;
        const QuadratureRule ref = simplex_rule(element.dim(), degree);
        r.points = ref.points();
        r.weights = ref.weights * jac;
        return r;
      },
      [&](const Eigen::VectorXd& xh) {
        Eigen::VectorXd v(static_cast<Eigen::Index>(basis.size()));
        const double fx = f(map(xh));
        for (std::size_t i = 0; i < basis.size(); ++i) v[static_cast<Eigen::Index>(i)] = fx * basis[i](xh);
        return v;
      });
  if (vi.flagged) throw QuadratureDisagreement("projection integrals disagree", vi.relative_gap);
  const AffineMap inv = map.inverse();
  ScalarPoly out(element.dim());
  for (std::size_t i = 0; i < basis.size(); ++i)
    out += compose_affine(basis[i], inv.matrix(), inv.offset()) * (vi.value[static_cast<Eigen::Index>(i)] / jac);
  return out;
}

}  // namespace rtinterp
