#include "chb/mms.hpp"

#include <Eigen/SparseLU>
#include <cmath>

#include "chb/errors.hpp"

namespace chb {

namespace {

constexpr double kPi = M_PI;
using Triplet = Eigen::Triplet<double>;

Eigen::VectorXd bulk_load_of_position(const BulkMesh& mesh,
                                      const std::function<double(const Vec2&)>& f) {
  const TriQuad& quad = tri_quad_deg6();
  Eigen::VectorXd L = Eigen::VectorXd::Zero(mesh.num_nodes());
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    const auto& tri = mesh.triangles[t];
    const double A = mesh.element_areas[t];
    for (int q = 0; q < quad.n; ++q) {
      const auto& p = quad.pts[q];
      const Vec2 x = p.l0 * mesh.nodes[tri[0]] + p.l1 * mesh.nodes[tri[1]] +
                     p.l2 * mesh.nodes[tri[2]];
      const double fv = p.w * A * f(x);
      L[tri[0]] += fv * p.l0;
      L[tri[1]] += fv * p.l1;
      L[tri[2]] += fv * p.l2;
    }
  }
  return L;
}

Eigen::VectorXd surface_load_of_arclength(const Geometry& geom,
                                          const std::function<double(double)>& g) {
  const SurfaceMesh& surf = geom.surface;
  const int S = surf.num_nodes();
  const SegQuad quad = seg_gauss(5);
  Eigen::VectorXd L = Eigen::VectorXd::Zero(S);
  for (int k = 0; k < S; ++k) {
    const double h = surf.segment_length[k];
    for (int q = 0; q < quad.n; ++q) {
      const double xi = quad.pts[q].x;
      const double gv = quad.pts[q].w * h * g(surf.arclength[k] + xi * h);
      L[k] += gv * (1.0 - xi);
      L[(k + 1) % S] += gv * xi;
    }
  }
  return L;
}

}  // namespace

// ---------------------------------------------------------------------------
// Brinkman manufactured solution
// ---------------------------------------------------------------------------

Vec2 BrinkmanManufactured::velocity(const Vec2& x) const {
  return Vec2(-std::sin(kPi * x.x()) * std::cos(kPi * x.y()),
              std::cos(kPi * x.x()) * std::sin(kPi * x.y()));
}

double BrinkmanManufactured::pressure(const Vec2& x) const {
  return std::cos(kPi * x.x()) * std::cos(kPi * x.y());
}

Vec2 BrinkmanManufactured::body_force(const Vec2& x) const {
  const Vec2 v = velocity(x);
  const Vec2 grad_p(-kPi * std::sin(kPi * x.x()) * std::cos(kPi * x.y()),
                    -kPi * std::cos(kPi * x.x()) * std::sin(kPi * x.y()));
  return (2.0 * nu * kPi * kPi + lambda) * v + grad_p;
}

Vec2 BrinkmanManufactured::boundary_force(const Vec2& x) const {
  // Dv* n is purely normal on every edge of the square, so the tangential
  // slip data reduce to gamma v*.
  return gamma * velocity(x);
}

double brinkman_velocity_l2_error(const Discretization& disc, const FlowSolution& flow,
                                  const BrinkmanManufactured& mms) {
  const BulkMesh& mesh = disc.geom.bulk;
  const TriQuad& quad = tri_quad_deg6();
  double err2 = 0.0;
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    const auto& tri = mesh.triangles[t];
    const double A = mesh.element_areas[t];
    for (int q = 0; q < quad.n; ++q) {
      const auto& p = quad.pts[q];
      const Vec2 x = p.l0 * mesh.nodes[tri[0]] + p.l1 * mesh.nodes[tri[1]] +
                     p.l2 * mesh.nodes[tri[2]];
      const Vec2 vh = p2_vector_eval(disc.velocity, flow.velocity, t, p.l0, p.l1, p.l2);
      err2 += p.w * A * (vh - mms.velocity(x)).squaredNorm();
    }
  }
  return std::sqrt(err2);
}

double pressure_l2_error(const Discretization& disc, const FlowSolution& flow,
                         const BrinkmanManufactured& mms) {
  const BulkMesh& mesh = disc.geom.bulk;
  const TriQuad& quad = tri_quad_deg6();
  double err2 = 0.0;
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    const auto& tri = mesh.triangles[t];
    const double A = mesh.element_areas[t];
    for (int q = 0; q < quad.n; ++q) {
      const auto& p = quad.pts[q];
      const Vec2 x = p.l0 * mesh.nodes[tri[0]] + p.l1 * mesh.nodes[tri[1]] +
                     p.l2 * mesh.nodes[tri[2]];
      const double ph = p.l0 * flow.pressure[tri[0]] + p.l1 * flow.pressure[tri[1]] +
                        p.l2 * flow.pressure[tri[2]];
      err2 += p.w * A * (ph - mms.pressure(x)) * (ph - mms.pressure(x));
    }
  }
  return std::sqrt(err2);
}

// ---------------------------------------------------------------------------
// Elliptic bulk-surface manufactured solution
// ---------------------------------------------------------------------------

double EllipticManufactured::phi(const Vec2& x) const {
  const double sx = std::sin(kPi * x.x());
  return std::cos(kPi * x.x()) * std::cos(kPi * x.y()) + sx * sx * std::sin(kPi * x.y());
}

Vec2 EllipticManufactured::grad_phi(const Vec2& x) const {
  const double cx = std::cos(kPi * x.x()), sx = std::sin(kPi * x.x());
  const double cy = std::cos(kPi * x.y()), sy = std::sin(kPi * x.y());
  return Vec2(-kPi * sx * cy + kPi * std::sin(2.0 * kPi * x.x()) * sy,
              -kPi * cx * sy + kPi * sx * sx * cy);
}

double EllipticManufactured::f(const Vec2& x) const {
  const double cx = std::cos(kPi * x.x()), sx = std::sin(kPi * x.x());
  const double cy = std::cos(kPi * x.y()), sy = std::sin(kPi * x.y());
  const double lap = -2.0 * kPi * kPi * cx * cy +
                     2.0 * kPi * kPi * std::cos(2.0 * kPi * x.x()) * sy -
                     kPi * kPi * sx * sx * sy;
  return -lap;
}

namespace {
// Edge-local decomposition of the square boundary: 0 bottom, 1 right, 2 top,
// 3 left; u is the running coordinate (x or y) on the edge.
inline void edge_of(double s, int& edge, double& u) {
  s = std::fmod(s, 4.0);
  if (s < 0) s += 4.0;
  edge = static_cast<int>(std::floor(s));
  if (edge > 3) edge = 3;
  const double t = s - edge;
  switch (edge) {
    case 0: u = t; break;        // x on bottom
    case 1: u = t; break;        // y on right
    case 2: u = 1.0 - t; break;  // x on top (s runs against x)
    default: u = 1.0 - t; break; // y on left
  }
}
}  // namespace

double EllipticManufactured::dn_phi(double s) const {
  int edge;
  double u;
  edge_of(s, edge, u);
  const double su = std::sin(kPi * u);
  switch (edge) {
    case 0: return -kPi * su * su;  // bottom, n = (0,-1)
    case 1: return 0.0;             // right
    case 2: return -kPi * su * su;  // top
    default: return 0.0;            // left
  }
}

double EllipticManufactured::psi(double s) const {
  int edge;
  double u;
  edge_of(s, edge, u);
  const double cu = std::cos(kPi * u), su = std::sin(kPi * u);
  // psi* = phi*|_G + K dn phi* (Robin coupling K dn phi = psi - phi).
  switch (edge) {
    case 0: return cu - K * kPi * su * su;
    case 1: return -cu;
    case 2: return -cu - K * kPi * su * su;
    default: return cu;
  }
}

double EllipticManufactured::gsurf(double s) const {
  int edge;
  double u;
  edge_of(s, edge, u);
  const double cu = std::cos(kPi * u), su = std::sin(kPi * u);
  const double c2u = std::cos(2.0 * kPi * u);
  // -psi'' in arclength (second derivatives are orientation-invariant) plus
  // the normal-derivative source.
  switch (edge) {
    case 0: return kPi * kPi * cu + 2.0 * K * kPi * kPi * kPi * c2u - kPi * su * su;
    case 1: return -kPi * kPi * cu;
    case 2: return -kPi * kPi * cu + 2.0 * K * kPi * kPi * kPi * c2u - kPi * su * su;
    default: return kPi * kPi * cu;
  }
}

double EllipticManufactured::combined_mean() const { return 1.0 / kPi - K * kPi; }

EllipticSolution solve_elliptic_block(const Discretization& disc, double K,
                                      const std::function<double(const Vec2&)>& f,
                                      const std::function<double(double)>& g,
                                      double mean_value,
                                      const std::vector<std::pair<int, double>>& point_loads) {
  const int N = disc.n_bulk();
  const int S = disc.n_surf();
  const SpMat& T = disc.trace;
  const double sig = K > 0.0 ? 1.0 / K : 0.0;

  Eigen::VectorXd Fb = bulk_load_of_position(disc.geom.bulk, f);
  Eigen::VectorXd Gs = surface_load_of_arclength(disc.geom, g);
  for (const auto& [node, w] : point_loads) Gs[node] += w;

  EllipticSolution out;
  if (K > 0.0) {
    const SpMat TtMs = SpMat(T.transpose() * disc.mass_s);
    const int n_tot = N + S + 1;
    std::vector<Triplet> trip;
    auto add = [&trip](const SpMat& M, int r0, int c0, double sc) {
      for (int k = 0; k < M.outerSize(); ++k)
        for (SpMat::InnerIterator it(M, k); it; ++it)
          trip.emplace_back(r0 + static_cast<int>(it.row()), c0 + static_cast<int>(it.col()),
                            sc * it.value());
    };
    add(disc.stiff_b, 0, 0, 1.0);
    add(SpMat(TtMs * T), 0, 0, sig);
    add(TtMs, 0, N, -sig);
    add(SpMat(disc.mass_s * T), N, 0, -sig);
    add(disc.stiff_s, N, N, 1.0);
    add(disc.mass_s, N, N, sig);
    const Eigen::VectorXd cb = disc.mass_b * Eigen::VectorXd::Ones(N);
    const Eigen::VectorXd cs = disc.mass_s * Eigen::VectorXd::Ones(S);
    for (int i = 0; i < N; ++i) {
      trip.emplace_back(i, N + S, cb[i]);
      trip.emplace_back(N + S, i, cb[i]);
    }
    for (int k = 0; k < S; ++k) {
      trip.emplace_back(N + k, N + S, cs[k]);
      trip.emplace_back(N + S, N + k, cs[k]);
    }
    SpMat A(n_tot, n_tot);
    A.setFromTriplets(trip.begin(), trip.end());
    Eigen::VectorXd rhs(n_tot);
    rhs.head(N) = Fb;
    rhs.segment(N, S) = Gs;
    rhs[N + S] = mean_value;
    Eigen::SparseLU<SpMat> lu(A);
    if (lu.info() != Eigen::Success)
      throw SolverError("elliptic block: factorization failed");
    const Eigen::VectorXd sol = lu.solve(rhs);
    out.phi = sol.head(N);
    out.psi = sol.segment(N, S);
  } else {
    const int n_tot = N + 1;
    std::vector<Triplet> trip;
    const SpMat A0 = SpMat(disc.stiff_b + SpMat(T.transpose() * (disc.stiff_s * T)));
    for (int k = 0; k < A0.outerSize(); ++k)
      for (SpMat::InnerIterator it(A0, k); it; ++it)
        trip.emplace_back(static_cast<int>(it.row()), static_cast<int>(it.col()), it.value());
    const Eigen::VectorXd c =
        disc.mass_b * Eigen::VectorXd::Ones(N) +
        T.transpose() * (disc.mass_s * Eigen::VectorXd::Ones(S));
    for (int i = 0; i < N; ++i) {
      trip.emplace_back(i, N, c[i]);
      trip.emplace_back(N, i, c[i]);
    }
    SpMat A(n_tot, n_tot);
    A.setFromTriplets(trip.begin(), trip.end());
    Eigen::VectorXd rhs(n_tot);
    rhs.head(N) = Fb + T.transpose() * Gs;
    rhs[N] = mean_value;
    Eigen::SparseLU<SpMat> lu(A);
    if (lu.info() != Eigen::Success)
      throw SolverError("elliptic block: factorization failed");
    const Eigen::VectorXd sol = lu.solve(rhs);
    out.phi = sol.head(N);
    out.psi = T * out.phi;
  }
  return out;
}

EllipticSolution elliptic_mms_solve(const Discretization& disc,
                                    const EllipticManufactured& mms) {
  EllipticSolution sol = solve_elliptic_block(
      disc, mms.K, [&](const Vec2& x) { return mms.f(x); },
      [&](double s) { return mms.gsurf(s); }, mms.combined_mean());

  // L2 errors by high-order quadrature against the smooth solution.
  const BulkMesh& mesh = disc.geom.bulk;
  const TriQuad& quad = tri_quad_deg6();
  double err2 = 0.0;
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    const auto& tri = mesh.triangles[t];
    const double A = mesh.element_areas[t];
    for (int q = 0; q < quad.n; ++q) {
      const auto& p = quad.pts[q];
      const Vec2 x = p.l0 * mesh.nodes[tri[0]] + p.l1 * mesh.nodes[tri[1]] +
                     p.l2 * mesh.nodes[tri[2]];
      const double vh = p1_eval(sol.phi, tri, p.l0, p.l1, p.l2);
      err2 += p.w * A * (vh - mms.phi(x)) * (vh - mms.phi(x));
    }
  }
  sol.bulk_l2_error = std::sqrt(err2);

  const SurfaceMesh& surf = disc.geom.surface;
  const SegQuad squad = seg_gauss(5);
  double serr2 = 0.0;
  for (int k = 0; k < surf.num_nodes(); ++k) {
    const double h = surf.segment_length[k];
    const int kn = (k + 1) % surf.num_nodes();
    for (int q = 0; q < squad.n; ++q) {
      const double xi = squad.pts[q].x;
      const double vh = (1.0 - xi) * sol.psi[k] + xi * sol.psi[kn];
      const double vs = mms.psi(surf.arclength[k] + xi * h);
      serr2 += squad.pts[q].w * h * (vh - vs) * (vh - vs);
    }
  }
  sol.surf_l2_error = std::sqrt(serr2);
  return sol;
}

}  // namespace chb
