#include "rtinterp/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include <fmt/format.h>

#include "rtinterp/errors.hpp"

namespace rtinterp {

namespace {

double factorial(int n) {
  double f = 1.0;
  for (int i = 2; i <= n; ++i) f *= i;
  return f;
}

double angle_between(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  double cross;
  if (a.size() == 3) {
    cross = Eigen::Vector3d(a).cross(Eigen::Vector3d(b)).norm();
  } else {
    cross = std::abs(a[0] * b[1] - a[1] * b[0]);
  }
  return std::atan2(cross, a.dot(b));
}

std::vector<double> checked_lengths(const std::vector<double>& h) {
  if (h.size() != 2 && h.size() != 3) throw ValidationError("family needs 2 or 3 lengths");
  for (double v : h)
    if (!(v > 0.0) || !std::isfinite(v)) throw ValidationError("family lengths must be positive");
  return h;
}

Eigen::VectorXd unit(const Eigen::VectorXd& v) { return v / v.norm(); }

}  // namespace

Simplex::Simplex(std::vector<Eigen::VectorXd> vertices) : vertices_(std::move(vertices)) {
  dim_ = static_cast<int>(vertices_.size()) - 1;
  if (dim_ != 2 && dim_ != 3) throw ValidationError("simplex needs 3 or 4 vertices");
  for (const auto& v : vertices_) {
    if (v.size() != dim_) throw ValidationError("vertex dimension does not match simplex");
    if (!v.allFinite()) throw ValidationError("vertex coordinates must be finite");
  }
  diameter_ = 0.0;
  for (int i = 0; i <= dim_; ++i)
    for (int j = i + 1; j <= dim_; ++j)
      diameter_ = std::max(diameter_, (vertex(i) - vertex(j)).norm());
  det_ = edge_matrix().determinant();
  if (!(std::abs(det_) > 1e-14 * std::pow(diameter_, dim_)))
    throw DegenerateElementError("degenerate simplex");
}

Eigen::MatrixXd Simplex::edge_matrix() const {
  Eigen::MatrixXd E(dim_, dim_);
  for (int j = 0; j < dim_; ++j) E.col(j) = vertex(j + 1) - vertex(0);
  return E;
}

double Simplex::measure() const { return std::abs(det_) / factorial(dim_); }

Eigen::VectorXd Simplex::centroid() const {
  Eigen::VectorXd c = Eigen::VectorXd::Zero(dim_);
  for (const auto& v : vertices_) c += v;
  return c / (dim_ + 1);
}

std::vector<int> Simplex::facet_vertices(int i) const {
  if (i < 0 || i > dim_) throw ValidationError("facet index out of range");
  std::vector<int> f;
  for (int j = 0; j <= dim_; ++j)
    if (j != i) f.push_back(j);
  return f;
}

Eigen::VectorXd Simplex::outward_normal(int i) const {
  const auto f = facet_vertices(i);
  Eigen::VectorXd n(dim_);
  if (dim_ == 2) {
    const Eigen::VectorXd e = vertex(f[1]) - vertex(f[0]);
    n << e[1], -e[0];
  } else {
    const Eigen::Vector3d a = vertex(f[1]) - vertex(f[0]);
    const Eigen::Vector3d b = vertex(f[2]) - vertex(f[0]);
    n = a.cross(b);
  }
  n.normalize();
  if (n.dot(vertex(i) - vertex(f[0])) > 0.0) n = -n;
  return n;
}

double Simplex::facet_measure(int i) const {
  const auto f = facet_vertices(i);
  if (dim_ == 2) return (vertex(f[1]) - vertex(f[0])).norm();
  const Eigen::Vector3d a = vertex(f[1]) - vertex(f[0]);
  const Eigen::Vector3d b = vertex(f[2]) - vertex(f[0]);
  return 0.5 * a.cross(b).norm();
}

Eigen::VectorXd Simplex::facet_centroid(int i) const {
  Eigen::VectorXd c = Eigen::VectorXd::Zero(dim_);
  for (int j : facet_vertices(i)) c += vertex(j);
  return c / dim_;
}

double Simplex::planar_angle(int at, int b, int c) const {
  return angle_between(vertex(b) - vertex(at), vertex(c) - vertex(at));
}

AffineMap::AffineMap(Eigen::MatrixXd M, Eigen::VectorXd c) : M_(std::move(M)), c_(std::move(c)) {
  if (M_.rows() != M_.cols() || M_.rows() != c_.size())
    throw ValidationError("affine map shape mismatch");
  det_ = M_.determinant();
  if (det_ == 0.0 || !std::isfinite(det_)) throw DegenerateElementError("singular affine map");
}

AffineMap AffineMap::identity(int dim) {
  return AffineMap(Eigen::MatrixXd::Identity(dim, dim), Eigen::VectorXd::Zero(dim));
}

AffineMap AffineMap::from_reference(const Simplex& t) {
  return AffineMap(t.edge_matrix(), t.vertex(0));
}

Eigen::VectorXd AffineMap::apply_inverse(const Eigen::VectorXd& x) const {
  return M_.partialPivLu().solve(x - c_);
}

Eigen::MatrixXd AffineMap::inverse_matrix() const { return M_.inverse(); }

AffineMap AffineMap::inverse() const {
  const Eigen::MatrixXd Mi = inverse_matrix();
  return AffineMap(Mi, -Mi * c_);
}

AffineMap AffineMap::compose(const AffineMap& other) const {
  return AffineMap(M_ * other.M_, M_ * other.c_ + c_);
}

double AffineMap::norm_inf() const { return matrix_norm_inf(M_); }
double AffineMap::inverse_norm_inf() const { return matrix_norm_inf(inverse_matrix()); }

double matrix_norm_inf(const Eigen::MatrixXd& M) {
  return M.cwiseAbs().rowwise().sum().maxCoeff();
}

std::string to_string(Family f) { return f == Family::F1 ? "F1" : "F2"; }

Simplex make_reference(int dim) { return make_f1(std::vector<double>(static_cast<std::size_t>(dim), 1.0)); }

Simplex make_f1(const std::vector<double>& h) {
  const auto l = checked_lengths(h);
  const int d = static_cast<int>(l.size());
  std::vector<Eigen::VectorXd> v(static_cast<std::size_t>(d + 1), Eigen::VectorXd::Zero(d));
  for (int i = 0; i < d; ++i) v[static_cast<std::size_t>(i + 1)][i] = l[static_cast<std::size_t>(i)];
  return Simplex(std::move(v));
}

Simplex make_f2(const std::vector<double>& h) {
  const auto l = checked_lengths(h);
  const int d = static_cast<int>(l.size());
  std::vector<Eigen::VectorXd> v(static_cast<std::size_t>(d + 1), Eigen::VectorXd::Zero(d));
  v[1][0] = l[0];
  v[1][1] = l[1];
  v[2][1] = l[1];
  if (d == 3) v[3][2] = l[2];
  return Simplex(std::move(v));
}

Simplex make_family(const FamilyTag& tag) {
  return tag.family == Family::F1 ? make_f1(tag.h) : make_f2(tag.h);
}

RvpResult rvp_constant(const Simplex& t) {
  RvpResult best{0, -1.0};
  const int d = t.dim();
  for (int p = 0; p <= d; ++p) {
    Eigen::MatrixXd L(d, d);
    int col = 0;
    for (int q = 0; q <= d; ++q)
      if (q != p) L.col(col++) = unit(t.vertex(q) - t.vertex(p));
    const double value = std::abs(L.determinant());
    if (value > best.value + 1e-12) best = {p, value};
  }
  return best;
}

double dihedral_angle(const Simplex& t, int i, int j) {
  if (t.dim() != 3) throw ValidationError("dihedral angles need a tetrahedron");
  return std::numbers::pi - angle_between(t.outward_normal(i), t.outward_normal(j));
}

double mac_constant(const Simplex& t) {
  const int d = t.dim();
  double worst = 0.0;
  for (int f = 0; f <= d; ++f) {
    const auto fv = t.facet_vertices(f);
    if (d == 2) {
      // The "facet" here is an edge; angles come from the opposite corner.
      worst = std::max(worst, t.planar_angle(f, fv[0], fv[1]));
      continue;
    }
    for (int a = 0; a < 3; ++a)
      worst = std::max(worst, t.planar_angle(fv[static_cast<std::size_t>(a)], fv[static_cast<std::size_t>((a + 1) % 3)],
                                             fv[static_cast<std::size_t>((a + 2) % 3)]));
  }
  if (d == 3)
    for (int i = 0; i < 4; ++i)
      for (int j = i + 1; j < 4; ++j) worst = std::max(worst, dihedral_angle(t, i, j));
  return worst;
}

namespace {

Decomposition decompose_2d(const Simplex& t) {
  int p0 = 0;
  double best = -1.0;
  for (int a = 0; a < 3; ++a) {
    const auto o = t.facet_vertices(a);
    const double ang = t.planar_angle(a, o[0], o[1]);
    if (ang > best + 1e-12) {
      best = ang;
      p0 = a;
    }
  }
  const auto o = t.facet_vertices(p0);
  const Eigen::VectorXd e1 = t.vertex(o[0]) - t.vertex(p0);
  const Eigen::VectorXd e2 = t.vertex(o[1]) - t.vertex(p0);
  Eigen::MatrixXd M(2, 2);
  M.col(0) = unit(e1);
  M.col(1) = unit(e2);
  FamilyTag tag{Family::F1, {e1.norm(), e2.norm()}};
  return {tag, make_f1(tag.h), AffineMap(M, t.vertex(p0)), {p0, o[0], o[1]}};
}

}  // namespace

Decomposition reference_decomposition(const Simplex& t) {
  if (t.dim() == 2) return decompose_2d(t);

  // Face (0,1,2); p0 at its largest angle.
  std::array<int, 3> face{0, 1, 2};
  int i0 = 0;
  double gamma = -1.0;
  for (int a = 0; a < 3; ++a) {
    const double ang = t.planar_angle(face[a], face[(a + 1) % 3], face[(a + 2) % 3]);
    if (ang > gamma + 1e-12) {
      gamma = ang;
      i0 = a;
    }
  }
  const int p0 = face[static_cast<std::size_t>(i0)];
  int p1 = face[static_cast<std::size_t>((i0 + 1) % 3)];
  int p2 = face[static_cast<std::size_t>((i0 + 2) % 3)];
  if (p1 > p2) std::swap(p1, p2);
  const int p3 = 3;

  // Dihedral along p0p1 is between faces opposite p3 and p2; along p0p2
  // between faces opposite p3 and p1.
  const double omega1 = dihedral_angle(t, p3, p2);
  const double omega2 = dihedral_angle(t, p3, p1);
  if (omega2 > omega1 + 1e-12) std::swap(p1, p2);

  const double xi0 = t.planar_angle(p0, p1, p3);
  const double xi1 = t.planar_angle(p1, p0, p3);
  const int k = xi1 > xi0 + 1e-12 ? 1 : 0;
  const int pk = k == 0 ? p0 : p1;

  const Eigen::VectorXd t1 = unit(t.vertex(p1) - t.vertex(p0));
  const Eigen::VectorXd t2 = unit(t.vertex(p2) - t.vertex(p0));
  const Eigen::VectorXd t3 = unit(t.vertex(p3) - t.vertex(pk));
  const double l01 = (t.vertex(p1) - t.vertex(p0)).norm();
  const double l02 = (t.vertex(p2) - t.vertex(p0)).norm();
  const double lk3 = (t.vertex(p3) - t.vertex(pk)).norm();

  Eigen::MatrixXd M(3, 3);
  if (k == 0) {
    M << t1, t2, t3;
    FamilyTag tag{Family::F1, {l01, l02, lk3}};
    return {tag, make_f1(tag.h), AffineMap(M, t.vertex(p0)), {p0, p1, p2, p3}};
  }
  M << t2, -t1, t3;
  FamilyTag tag{Family::F2, {l02, l01, lk3}};
  return {tag, make_f2(tag.h), AffineMap(M, t.vertex(p1)), {p1, p2, p0, p3}};
}

Decomposition rvp_decomposition(const Simplex& t) {
  const int d = t.dim();
  const int p0 = rvp_constant(t).vertex;
  Eigen::MatrixXd M(d, d);
  std::vector<double> h;
  std::vector<int> perm{p0};
  for (int q = 0; q <= d; ++q) {
    if (q == p0) continue;
    const Eigen::VectorXd e = t.vertex(q) - t.vertex(p0);
    M.col(static_cast<Eigen::Index>(h.size())) = unit(e);
    h.push_back(e.norm());
    perm.push_back(q);
  }
  FamilyTag tag{Family::F1, h};
  return {tag, make_f1(h), AffineMap(M, t.vertex(p0)), perm};
}

double vertex_residual(const Decomposition& d, const Simplex& t) {
  double r = 0.0;
  for (int j = 0; j <= t.dim(); ++j)
    r = std::max(r, (d.map(d.reference.vertex(j)) - t.vertex(d.permutation[static_cast<std::size_t>(j)])).norm());
  return r;
}

VectorPoly piola_push(const AffineMap& map, const VectorPoly& u_hat) {
  if (u_hat.dim() != map.dim()) throw ValidationError("field and map dimensions differ");
  const Eigen::MatrixXd Mi = map.inverse_matrix();
  const VectorPoly pulled = compose_affine(u_hat, Mi, -Mi * map.offset());
  return matrix_times(map.matrix() / map.det(), pulled);
}

VectorPoly piola_pull(const AffineMap& map, const VectorPoly& u) {
  if (u.dim() != map.dim()) throw ValidationError("field and map dimensions differ");
  const VectorPoly composed = compose_affine(u, map.matrix(), map.offset());
  return matrix_times(map.det() * map.inverse_matrix(), composed);
}

Simplex parse_simplex(const std::string& record) {
  std::istringstream in(record);
  int dim = 0;
  if (!(in >> dim) || (dim != 2 && dim != 3))
    throw ValidationError("element record must start with dimension 2 or 3");
  std::vector<Eigen::VectorXd> v;
  for (int i = 0; i <= dim; ++i) {
    Eigen::VectorXd p(dim);
    for (int j = 0; j < dim; ++j)
      if (!(in >> p[j])) throw ValidationError("element record has too few coordinates");
    v.push_back(p);
  }
  std::string extra;
  if (in >> extra) throw ValidationError("element record has trailing fields");
  return Simplex(std::move(v));
}

std::string to_record(const Simplex& t) {
  std::string s = std::to_string(t.dim());
  for (const auto& v : t.vertices())
    for (int j = 0; j < t.dim(); ++j) s += fmt::format(" {:.17g}", v[j]);
  return s;
}

}  // namespace rtinterp
