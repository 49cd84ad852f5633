#include "chb/brinkman.hpp"

#include <unsupported/Eigen/IterativeSolvers>

#include <cmath>
#include <sstream>

#include "chb/errors.hpp"

namespace chb {

namespace {
using Triplet = Eigen::Triplet<double>;

inline double p1_at(const Eigen::VectorXd& v, const std::array<int, 3>& tri,
                    double l0, double l1, double l2) {
  if (v.size() == 0) return 0.0;
  return l0 * v[tri[0]] + l1 * v[tri[1]] + l2 * v[tri[2]];
}
}  // namespace

BrinkmanSolver::BrinkmanSolver(const Discretization& disc, Coefficients coeffs,
                               FlowSolverOptions solver)
    : disc_(disc), coeffs_(std::move(coeffs)), solver_(solver) {
  coeffs_.validate();
  build_constraints();
  n_pressure_ = disc_.geom.bulk.num_nodes();
}

void BrinkmanSolver::build_constraints() {
  const P2Space& sp = disc_.velocity;
  const auto& geom = disc_.geom;
  const int n_scalar = sp.num_scalar_dofs();
  // constrained[2*node+comp] — impermeability v.n = 0 imposed strongly: on an
  // axis-aligned boundary segment the normal component of all three segment
  // nodes is zeroed; nodes where segments with different normals meet
  // (corners) lose both components.
  std::vector<bool> constrained(static_cast<size_t>(2) * n_scalar, false);
  const int S = geom.surface.num_nodes();
  for (int k = 0; k < S; ++k) {
    const Vec2 n = geom.normals.edge_normal[k];
    const auto dofs = sp.segment_dofs(k, geom.trace_map);
    for (int d = 0; d < 2; ++d) {
      if (std::abs(n[d]) > 1e-12) {
        for (int a = 0; a < 3; ++a) constrained[2 * dofs[a] + d] = true;
      }
    }
  }
  red_index_.assign(static_cast<size_t>(2) * n_scalar, -1);
  n_red_ = 0;
  for (size_t i = 0; i < red_index_.size(); ++i)
    if (!constrained[i]) red_index_[i] = n_red_++;
}

void BrinkmanSolver::assemble(const Eigen::VectorXd& phi, const Eigen::VectorXd& psi) {
  const P2Space& sp = disc_.velocity;
  const BulkMesh& mesh = disc_.geom.bulk;
  const auto& geom = disc_.geom;
  const TriQuad& quad = tri_quad_deg4();

  std::vector<Triplet> ta, tb;
  ta.reserve(mesh.triangles.size() * 100);
  tb.reserve(mesh.triangles.size() * 40);

  for (int t = 0; t < mesh.num_triangles(); ++t) {
    const auto dofs = sp.tri_dofs(t);
    const auto& tri = mesh.triangles[t];
    const auto g = barycentric_gradients(mesh, t);
    const double A = mesh.element_areas[t];
    double loc[12][12] = {};
    double locb[3][12] = {};
    for (int q = 0; q < quad.n; ++q) {
      const auto& p = quad.pts[q];
      const double w = p.w * A;
      const double phiq = p1_at(phi, tri, p.l0, p.l1, p.l2);
      const double nu = coeffs_.nu.eval_checked(phiq);
      const double lam = coeffs_.lambda.eval_checked(phiq);
      const auto N = P2Space::shape(p.l0, p.l1, p.l2);
      const auto dN = P2Space::shape_grad(p.l0, p.l1, p.l2, g);
      for (int a = 0; a < 6; ++a) {
        for (int b = 0; b < 6; ++b) {
          const double grad_dot = dN[a].dot(dN[b]);
          const double mass = N[a] * N[b];
          for (int d = 0; d < 2; ++d) {
            for (int c = 0; c < 2; ++c) {
              // 2 nu D(u):D(w) + lambda u.w for u = e_d N_a, w = e_c N_b
              double v = (d == c) ? nu * grad_dot + lam * mass : 0.0;
              v += nu * dN[a][c] * dN[b][d];
              loc[2 * b + c][2 * a + d] += w * v;
            }
          }
        }
      }
      // b(v, q) = -\int q div v
      const double lq[3] = {p.l0, p.l1, p.l2};
      for (int m = 0; m < 3; ++m)
        for (int a = 0; a < 6; ++a)
          for (int d = 0; d < 2; ++d) locb[m][2 * a + d] -= w * lq[m] * dN[a][d];
    }
    for (int i = 0; i < 12; ++i) {
      const int gi = red_index_[2 * dofs[i / 2] + (i % 2)];
      if (gi < 0) continue;
      for (int j = 0; j < 12; ++j) {
        const int gj = red_index_[2 * dofs[j / 2] + (j % 2)];
        if (gj >= 0 && loc[i][j] != 0.0) ta.emplace_back(gi, gj, loc[i][j]);
      }
    }
    for (int m = 0; m < 3; ++m)
      for (int j = 0; j < 12; ++j) {
        const int gj = red_index_[2 * dofs[j / 2] + (j % 2)];
        if (gj >= 0 && locb[m][j] != 0.0) tb.emplace_back(tri[m], gj, locb[m][j]);
      }
  }

  // Navier-slip friction \int_G gamma(psi) v.w over boundary segments.
  const SegQuad squad = seg_gauss(3);
  const int S = geom.surface.num_nodes();
  for (int k = 0; k < S; ++k) {
    const auto dofs = sp.segment_dofs(k, geom.trace_map);
    const double h = geom.surface.segment_length[k];
    double loc[3][3] = {};
    for (int q = 0; q < squad.n; ++q) {
      const double xi = squad.pts[q].x;
      const double psiq =
          psi.size() ? (1.0 - xi) * psi[k] + xi * psi[(k + 1) % S] : 0.0;
      const double gam = coeffs_.gamma.eval_checked(psiq);
      const double N[3] = {(1.0 - xi) * (1.0 - 2.0 * xi), xi * (2.0 * xi - 1.0),
                           4.0 * xi * (1.0 - xi)};
      for (int a = 0; a < 3; ++a)
        for (int b = 0; b < 3; ++b) loc[a][b] += squad.pts[q].w * h * gam * N[a] * N[b];
    }
    for (int a = 0; a < 3; ++a)
      for (int b = 0; b < 3; ++b)
        for (int d = 0; d < 2; ++d) {
          const int gi = red_index_[2 * dofs[a] + d];
          const int gj = red_index_[2 * dofs[b] + d];
          if (gi >= 0 && gj >= 0 && loc[a][b] != 0.0) ta.emplace_back(gi, gj, loc[a][b]);
        }
  }

  A_.resize(n_red_, n_red_);
  A_.setFromTriplets(ta.begin(), ta.end());
  B_.resize(n_pressure_, n_red_);
  B_.setFromTriplets(tb.begin(), tb.end());

  // Zero-mean pressure via a scalar multiplier; the weights are \int chi_m.
  pressure_mean_weights_ = disc_.mass_b * Eigen::VectorXd::Ones(n_pressure_);

  const int n_total = n_red_ + n_pressure_ + 1;
  std::vector<Triplet> ts;
  ts.reserve(static_cast<size_t>(A_.nonZeros()) + 2 * B_.nonZeros() + 2 * n_pressure_);
  for (int kcol = 0; kcol < A_.outerSize(); ++kcol)
    for (SpMat::InnerIterator it(A_, kcol); it; ++it)
      ts.emplace_back(static_cast<int>(it.row()), static_cast<int>(it.col()), it.value());
  for (int kcol = 0; kcol < B_.outerSize(); ++kcol)
    for (SpMat::InnerIterator it(B_, kcol); it; ++it) {
      const int m = static_cast<int>(it.row());
      const int j = static_cast<int>(it.col());
      ts.emplace_back(n_red_ + m, j, it.value());      // continuity rows
      ts.emplace_back(j, n_red_ + m, it.value());      // pressure gradient block
    }
  for (int m = 0; m < n_pressure_; ++m) {
    ts.emplace_back(n_red_ + m, n_red_ + n_pressure_, pressure_mean_weights_[m]);
    ts.emplace_back(n_red_ + n_pressure_, n_red_ + m, pressure_mean_weights_[m]);
  }
  system_.resize(n_total, n_total);
  system_.setFromTriplets(ts.begin(), ts.end());
  assembled_ = true;
  factorized_ = false;
}

Eigen::VectorXd BrinkmanSolver::assemble_rhs(const BrinkmanForcing& f) const {
  const P2Space& sp = disc_.velocity;
  const BulkMesh& mesh = disc_.geom.bulk;
  const auto& geom = disc_.geom;
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n_red_ + n_pressure_ + 1);

  const bool has_capillary = f.phi.size() > 0 && f.mu.size() > 0;
  if (has_capillary || f.body_force) {
    const TriQuad& quad = tri_quad_deg4();
    for (int t = 0; t < mesh.num_triangles(); ++t) {
      const auto dofs = sp.tri_dofs(t);
      const auto& tri = mesh.triangles[t];
      const double A = mesh.element_areas[t];
      const Vec2 grad_mu = has_capillary ? p1_gradient(mesh, f.mu, t) : Vec2(0, 0);
      for (int q = 0; q < quad.n; ++q) {
        const auto& p = quad.pts[q];
        const double w = p.w * A;
        Vec2 force(0, 0);
        if (has_capillary) {
          const double phiq = p1_at(f.phi, tri, p.l0, p.l1, p.l2);
          force -= phiq * grad_mu;  // -phi grad(mu)
        }
        if (f.body_force) {
          const Vec2 x = p.l0 * mesh.nodes[tri[0]] + p.l1 * mesh.nodes[tri[1]] +
                         p.l2 * mesh.nodes[tri[2]];
          force += f.body_force(x);
        }
        const auto N = P2Space::shape(p.l0, p.l1, p.l2);
        for (int a = 0; a < 6; ++a)
          for (int d = 0; d < 2; ++d) {
            const int gi = red_index_[2 * dofs[a] + d];
            if (gi >= 0) rhs[gi] += w * N[a] * force[d];
          }
      }
    }
  }

  const bool has_surface = f.psi.size() > 0 && f.theta.size() > 0;
  if (has_surface || f.boundary_force) {
    const SegQuad squad = seg_gauss(3);
    const int S = geom.surface.num_nodes();
    for (int k = 0; k < S; ++k) {
      const auto dofs = sp.segment_dofs(k, geom.trace_map);
      const double h = geom.surface.segment_length[k];
      const int kn = (k + 1) % S;
      const Vec2 a = geom.bulk.nodes[geom.trace_map.to_bulk[k]];
      const Vec2 b = geom.bulk.nodes[geom.trace_map.to_bulk[kn]];
      const Vec2 tau = (b - a) / h;
      // dtheta/ds is constant on the segment; psi grad_G theta is tangential,
      // so the tangential projection in the slip condition acts as identity.
      const double dtheta = has_surface ? (f.theta[kn] - f.theta[k]) / h : 0.0;
      for (int q = 0; q < squad.n; ++q) {
        const double xi = squad.pts[q].x;
        const double w = squad.pts[q].w * h;
        Vec2 force(0, 0);
        if (has_surface) {
          const double psiq = (1.0 - xi) * f.psi[k] + xi * f.psi[kn];
          force -= psiq * dtheta * tau;  // -[psi grad_G theta]_tau
        }
        if (f.boundary_force) {
          const Vec2 x = a + xi * (b - a);
          const Vec2 gf = f.boundary_force(x);
          force += gf - gf.dot(geom.normals.edge_normal[k]) * geom.normals.edge_normal[k];
        }
        const double N[3] = {(1.0 - xi) * (1.0 - 2.0 * xi), xi * (2.0 * xi - 1.0),
                             4.0 * xi * (1.0 - xi)};
        for (int m = 0; m < 3; ++m)
          for (int d = 0; d < 2; ++d) {
            const int gi = red_index_[2 * dofs[m] + d];
            if (gi >= 0) rhs[gi] += w * N[m] * force[d];
          }
      }
    }
  }
  return rhs;
}

const SpMat& BrinkmanSolver::velocity_block(const Eigen::VectorXd& phi,
                                            const Eigen::VectorXd& psi) {
  assemble(phi, psi);
  return A_;
}

const SpMat& BrinkmanSolver::divergence_block() {
  if (!assembled_) assemble(Eigen::VectorXd(), Eigen::VectorXd());
  return B_;
}

Eigen::VectorXd BrinkmanSolver::constrain(const Eigen::VectorXd& full) const {
  Eigen::VectorXd out = full;
  for (size_t i = 0; i < red_index_.size(); ++i)
    if (red_index_[i] < 0) out[static_cast<Eigen::Index>(i)] = 0.0;
  return out;
}

FlowSolution BrinkmanSolver::solve(const BrinkmanForcing& forcing) {
  const bool reuse = coeffs_.flow_coeffs_constant() && factorized_;
  if (!reuse) {
    assemble(forcing.phi, forcing.psi);
    if (!solver_.iterative) {
      lu_ = std::make_unique<Eigen::SparseLU<SpMat>>();
      lu_->compute(system_);
      if (lu_->info() != Eigen::Success)
        throw SolverError("brinkman: sparse factorization failed");
    }
    factorized_ = true;
  }
  const Eigen::VectorXd rhs = assemble_rhs(forcing);
  Eigen::VectorXd sol;
  if (solver_.iterative) {
    // GMRES with an incomplete-LU preconditioner on the bordered saddle
    // point; robustness knob for problems too large to factorize directly.
    Eigen::GMRES<SpMat, Eigen::IncompleteLUT<double>> krylov;
    krylov.setTolerance(solver_.tol);
    krylov.setMaxIterations(solver_.max_iter);
    krylov.preconditioner().setFillfactor(20);
    krylov.compute(system_);
    if (krylov.info() != Eigen::Success)
      throw SolverError("brinkman: iterative setup (ILU) failed");
    sol = krylov.solve(rhs);
    if (krylov.info() != Eigen::Success) {
      std::ostringstream os;
      os << "brinkman: Krylov solve did not converge: relative residual "
         << krylov.error() << " after " << krylov.iterations() << " iterations (tol "
         << solver_.tol << ")";
      throw SolverError(os.str());
    }
  } else {
    sol = lu_->solve(rhs);
    if (lu_->info() != Eigen::Success)
      throw SolverError("brinkman: back-substitution failed");
  }

  FlowSolution out;
  out.velocity = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(red_index_.size()));
  for (size_t i = 0; i < red_index_.size(); ++i)
    if (red_index_[i] >= 0) out.velocity[static_cast<Eigen::Index>(i)] = sol[red_index_[i]];
  out.pressure = sol.segment(n_red_, n_pressure_);

  const Eigen::VectorXd u_red = sol.head(n_red_);
  const Eigen::VectorXd div = B_ * u_red;
  // Dual-norm of the divergence residual: sqrt(div^T M^{-1} div) with the
  // pressure mass matrix; a lumped inverse is accurate enough here.
  double dual = 0.0;
  const Eigen::VectorXd lump = disc_.mass_b * Eigen::VectorXd::Ones(n_pressure_);
  for (int m = 0; m < n_pressure_; ++m) dual += div[m] * div[m] / lump[m];
  out.div_residual = std::sqrt(dual);

  out.energy_lhs = u_red.dot(A_ * u_red);
  out.energy_rhs = u_red.dot(rhs.head(n_red_));
  out.energy_residual =
      std::abs(out.energy_lhs - out.energy_rhs) / std::max(std::abs(out.energy_lhs), 1e-30);
  out.mean_pressure = pressure_mean_weights_.dot(out.pressure) /
                      pressure_mean_weights_.sum();
  return out;
}

KornReport verify_korn(const Discretization& disc, int num_samples,
                       unsigned long long seed) {
  BrinkmanSolver solver(disc, Coefficients{});
  const SpMat Kgrad = p2_vector_grad_stiffness(disc.velocity);
  SpMat Ksym = p2_vector_sym_stiffness(disc.velocity);
  Ksym *= 0.5;  // assembled form is 2 D(u):D(w)
  const SpMat Mb = p2_vector_boundary_mass(disc.velocity, disc.geom);

  // Deterministic uniform doubles from a xorshift64 stream.
  unsigned long long s = seed ? seed : 0x9e3779b97f4a7c15ULL;
  auto next_uniform = [&s]() {
    s ^= s << 13;
    s ^= s >> 7;
    s ^= s << 17;
    return static_cast<double>(s >> 11) * 0x1.0p-53 * 2.0 - 1.0;
  };

  KornReport rep;
  rep.samples = num_samples;
  const Eigen::Index n = Kgrad.rows();
  for (int k = 0; k < num_samples; ++k) {
    Eigen::VectorXd v(n);
    for (Eigen::Index i = 0; i < n; ++i) v[i] = next_uniform();
    v = solver.constrain(v);
    const double grad = std::sqrt(std::max(0.0, v.dot(Kgrad * v)));
    const double sym = std::sqrt(std::max(0.0, v.dot(Ksym * v)));
    const double bnd = std::sqrt(std::max(0.0, v.dot(Mb * v)));
    if (sym + bnd > 1e-14)
      rep.max_ratio_boundary = std::max(rep.max_ratio_boundary, grad / (sym + bnd));
    if (sym > 1e-14) rep.max_ratio_full = std::max(rep.max_ratio_full, grad / sym);
  }
  return rep;
}

}  // namespace chb
