#include "chb/cahnhilliard.hpp"

#include <Eigen/SparseCholesky>
#include <Eigen/SparseLU>
#include <cmath>
#include <sstream>

#include "chb/errors.hpp"

namespace chb {

namespace {

using Triplet = Eigen::Triplet<double>;

void append_block(std::vector<Triplet>& trip, const SpMat& M, int row_off,
                  int col_off, double scale = 1.0) {
  for (int k = 0; k < M.outerSize(); ++k)
    for (SpMat::InnerIterator it(M, k); it; ++it)
      trip.emplace_back(row_off + static_cast<int>(it.row()),
                        col_off + static_cast<int>(it.col()), scale * it.value());
}

// Convection matrix C[i][j] = \int chi_j v . grad(chi_i) with a P2 velocity.
SpMat bulk_convection(const Discretization& disc, const Eigen::VectorXd& vel) {
  const BulkMesh& mesh = disc.geom.bulk;
  const int N = mesh.num_nodes();
  SpMat C(N, N);
  if (vel.size() == 0) return C;
  const TriQuad& quad = tri_quad_deg4();
  std::vector<Triplet> trip;
  trip.reserve(mesh.triangles.size() * 9);
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    const auto& tri = mesh.triangles[t];
    const auto g = barycentric_gradients(mesh, t);
    const double A = mesh.element_areas[t];
    double loc[3][3] = {};
    for (int q = 0; q < quad.n; ++q) {
      const auto& p = quad.pts[q];
      const Vec2 v = p2_vector_eval(disc.velocity, vel, t, p.l0, p.l1, p.l2);
      const double l[3] = {p.l0, p.l1, p.l2};
      for (int i = 0; i < 3; ++i) {
        const double vg = v.dot(g[i]);
        for (int j = 0; j < 3; ++j) loc[i][j] += p.w * A * l[j] * vg;
      }
    }
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) trip.emplace_back(tri[i], tri[j], loc[i][j]);
  }
  C.setFromTriplets(trip.begin(), trip.end());
  return C;
}

// Surface convection C[i][j] = \int_G chi_j (v . tau) ds(chi_i).
SpMat surface_convection(const Discretization& disc, const Eigen::VectorXd& vel) {
  const int S = disc.geom.surface.num_nodes();
  SpMat C(S, S);
  if (vel.size() == 0) return C;
  const SegQuad quad = seg_gauss(3);
  std::vector<Triplet> trip;
  trip.reserve(static_cast<size_t>(4) * S);
  const auto& geom = disc.geom;
  for (int k = 0; k < S; ++k) {
    const int kn = (k + 1) % S;
    const double h = geom.surface.segment_length[k];
    const Vec2 a = geom.bulk.nodes[geom.trace_map.to_bulk[k]];
    const Vec2 b = geom.bulk.nodes[geom.trace_map.to_bulk[kn]];
    const Vec2 tau = (b - a) / h;
    const double ds[2] = {-1.0 / h, 1.0 / h};  // arclength derivative of chi_k, chi_kn
    double loc[2][2] = {};
    for (int q = 0; q < quad.n; ++q) {
      const double xi = quad.pts[q].x;
      const double vt =
          p2_vector_eval_segment(disc.velocity, geom.trace_map, vel, k, xi).dot(tau);
      const double l[2] = {1.0 - xi, xi};
      for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) loc[i][j] += quad.pts[q].w * h * l[j] * vt * ds[i];
    }
    const int idx[2] = {k, kn};
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) trip.emplace_back(idx[i], idx[j], loc[i][j]);
  }
  C.setFromTriplets(trip.begin(), trip.end());
  return C;
}

}  // namespace

double ModelConfig::sigma() const { return sigma_of(K); }

void ModelConfig::validate() const {
  if (K < 0.0) throw ValidationError("model: K must be nonnegative");
  if (!(dt > 0.0)) throw ValidationError("time: dt must be positive");
  if (t_final < 0.0) throw ValidationError("time: T must be nonnegative");
  if (t_final > 0.0 && t_final < dt - 1e-15)
    throw ValidationError("time: T must be zero (snapshot only) or at least dt");
  coeffs.validate();

  const bool bulk_sing = potentials.bulk.is_singular();
  const bool surf_sing = potentials.surface.is_singular();
  if (!potentials.singular_mode && (bulk_sing || surf_sing)) {
    if (potentials.bulk.kind == PotentialKind::DoubleObstacle ||
        potentials.surface.kind == PotentialKind::DoubleObstacle)
      throw ValidationError(
          "potential mode: the double-obstacle potential requires singular mode");
  }
  if (potentials.singular_mode) {
    if (!(potentials.yosida_eps > 0.0 && potentials.yosida_eps < 1.0))
      throw ValidationError("potential: the regularization parameter must lie in (0,1)");
    // The boundary graph must dominate the bulk graph: sample the minimal
    // sections over D(beta_G) and the transferred inequality on a wider range.
    const MonotoneGraph gb = potentials.bulk.convex_graph();
    const MonotoneGraph gs = potentials.surface.convex_graph();
    if (gs.dom_lo < gb.dom_lo || gs.dom_hi > gb.dom_hi)
      throw ValidationError(
          "potential pairing: the boundary graph must dominate the bulk graph "
          "(D(beta_G) must be contained in D(beta))");
    const double lo = std::max(gs.dom_lo, -8.0), hi = std::min(gs.dom_hi, 8.0);
    std::vector<double> samples;
    const double margin = std::isfinite(gs.dom_lo) ? 1e-3 * (hi - lo) : 0.0;
    for (int i = 0; i <= 400; ++i)
      samples.push_back(lo + margin + (hi - lo - 2 * margin) * i / 400.0);
    const DominationReport rep =
        check_domination(gb, gs, potentials.kappa1, potentials.kappa2, samples);
    if (!rep.pass) {
      std::ostringstream os;
      os << "potential pairing: the boundary graph must dominate the bulk graph: "
            "|beta(r)| <= kappa1 |beta_G(r)| + kappa2 fails at r = "
         << rep.worst_r << " (excess " << rep.worst_excess << ") for kappa1 = "
         << potentials.kappa1 << ", kappa2 = " << potentials.kappa2;
      throw ValidationError(os.str());
    }
  }
  if (K == 0.0 && psi0_offset != 0.0)
    throw ValidationError("initial data: K = 0 requires psi0 = trace(phi0) (zero offset)");
}

CahnHilliardSystem::CahnHilliardSystem(const Discretization& disc, const ModelConfig& cfg)
    : disc_(disc), cfg_(cfg) {
  cfg_.validate();
  cfg_.potentials.normalize_nonnegative();
  split_b_ = make_convex_split(cfg_.potentials.bulk, cfg_.potentials.singular_mode,
                               cfg_.potentials.yosida_eps, cfg_.potentials.shift_bulk);
  split_s_ = make_convex_split(cfg_.potentials.surface, cfg_.potentials.singular_mode,
                               cfg_.potentials.yosida_eps, cfg_.potentials.shift_surf);
  if (cfg_.flow_enabled)
    flow_ = std::make_unique<BrinkmanSolver>(disc_, cfg_.coeffs, cfg_.flow_solver);
}

Eigen::VectorXd CahnHilliardSystem::interpolate_bulk(const InitialCondition& ic) const {
  const BulkMesh& mesh = disc_.geom.bulk;
  Eigen::VectorXd phi(mesh.num_nodes());
  // Deterministic per-node noise stream (xorshift64), independent of node
  // iteration order changes.
  unsigned long long s = cfg_.seed * 0x9e3779b97f4a7c15ULL + 0x2545f4914f6cdd1dULL;
  auto uniform = [&s]() {
    s ^= s << 13;
    s ^= s >> 7;
    s ^= s << 17;
    return static_cast<double>(s >> 11) * 0x1.0p-53 * 2.0 - 1.0;
  };
  const double pi = M_PI;
  for (int i = 0; i < mesh.num_nodes(); ++i) {
    const Vec2& x = mesh.nodes[i];
    double v = ic.mean;
    switch (ic.kind) {
      case InitialCondition::Kind::Constant: break;
      case InitialCondition::Kind::CosProduct:
        v += ic.amplitude * std::cos(ic.kx * pi * x.x()) * std::cos(ic.ky * pi * x.y());
        break;
      case InitialCondition::Kind::CosX:
        v += ic.amplitude * std::cos(ic.kx * pi * x.x());
        break;
      case InitialCondition::Kind::Random:
        v += ic.amplitude * uniform();
        break;
      case InitialCondition::Kind::TanhX:
        v += ic.amplitude * std::tanh(ic.steepness * (x.x() - 0.5));
        break;
    }
    phi[i] = v;
  }
  return phi;
}

FlowSolution CahnHilliardSystem::solve_flow(const Eigen::VectorXd& phi,
                                            const Eigen::VectorXd& mu,
                                            const Eigen::VectorXd& psi,
                                            const Eigen::VectorXd& theta) const {
  if (!cfg_.flow_enabled) return FlowSolution{};
  BrinkmanForcing f;
  f.phi = phi;
  f.mu = mu;
  f.psi = psi;
  f.theta = theta;
  return flow_->solve(f);
}

FieldState CahnHilliardSystem::initial_state(const Eigen::VectorXd* phi_perturbation) const {
  FieldState st;
  st.t = 0.0;
  st.phi = interpolate_bulk(cfg_.phi0);
  if (phi_perturbation) {
    if (phi_perturbation->size() != st.phi.size())
      throw DomainError("initial_state: perturbation length mismatch");
    st.phi += *phi_perturbation;
  }
  st.psi = trace(st.phi, disc_.geom.trace_map);
  if (cfg_.psi0_offset != 0.0)
    st.psi.array() += cfg_.psi0_offset;

  m0_ = bulk_mass(disc_, st.phi) / disc_.geom.bulk.area();
  m_gamma0_ = surface_mass(disc_, st.psi) / disc_.geom.surface.length();
  means_set_ = true;

  if (cfg_.potentials.singular_mode) {
    const MonotoneGraph gb = cfg_.potentials.bulk.convex_graph();
    const MonotoneGraph gs = cfg_.potentials.surface.convex_graph();
    if (!gb.in_interior(m0_)) {
      std::ostringstream os;
      os << "initial data: singular runs require the bulk mean in the interior of "
            "D(beta); got mean "
         << m0_ << " with D(beta) = [" << gb.dom_lo << ", " << gb.dom_hi << "]";
      throw ValidationError(os.str());
    }
    if (!gs.in_interior(m_gamma0_)) {
      std::ostringstream os;
      os << "initial data: singular runs require the surface mean in the interior of "
            "D(beta_G); got mean "
         << m_gamma0_ << " with D(beta_G) = [" << gs.dom_lo << ", " << gs.dom_hi << "]";
      throw ValidationError(os.str());
    }
  }

  // Consistent chemical potentials: mu = M^{-1}(K phi + F'(phi) terms -
  // sigma-coupling). For K = 0 the normal-derivative measure is omitted; this
  // only seeds the initial flow solve.
  const double sig = cfg_.sigma();
  const TriQuad& q2 = tri_quad_deg2();
  const SegQuad s2 = seg_gauss(2);
  auto fullF = [this](double r) { return split_b_.beta(r) + split_b_.pi(r); };
  auto fullG = [this](double r) { return split_s_.beta(r) + split_s_.pi(r); };
  const Eigen::VectorXd mismatch = st.psi - disc_.trace * st.phi;
  Eigen::VectorXd rb = disc_.stiff_b * st.phi +
                       p1_nonlinear_load(disc_.geom.bulk, st.phi, fullF, q2) -
                       sig * (disc_.trace.transpose() * (disc_.mass_s * mismatch));
  Eigen::VectorXd rs = disc_.stiff_s * st.psi +
                       surf_nonlinear_load(disc_.geom.surface, st.psi, fullG, s2) +
                       sig * (disc_.mass_s * mismatch);
  Eigen::SimplicialLDLT<SpMat> mb(disc_.mass_b), ms(disc_.mass_s);
  st.mu = mb.solve(rb);
  st.theta = ms.solve(rs);
  st.flow = solve_flow(st.phi, st.mu, st.psi, st.theta);
  return st;
}

CahnHilliardSystem::StepResult CahnHilliardSystem::step(
    const FieldState& prev, std::optional<double> dt_override) const {
  if (!prev.all_finite())
    throw StepRejected("step: non-finite fields in the input state");
  const double dt = dt_override.value_or(cfg_.dt);
  const int N = disc_.n_bulk();
  const int S = disc_.n_surf();
  const bool dirichlet = (cfg_.K == 0.0);
  const double sig = cfg_.sigma();
  const int nx = dirichlet ? 2 * N + S : 2 * N + 2 * S;

  const Eigen::VectorXd vel =
      (cfg_.flow_enabled && !prev.flow.is_zero()) ? prev.flow.velocity : Eigen::VectorXd();
  const SpMat Cb = bulk_convection(disc_, vel);
  const SpMat Cs = surface_convection(disc_, vel);
  const SpMat& T = disc_.trace;
  const SpMat TtMs = SpMat(T.transpose() * disc_.mass_s);
  const SpMat TtMsT = SpMat(TtMs * T);

  const TriQuad& q2 = tri_quad_deg2();
  const SegQuad s2 = seg_gauss(2);

  // Explicit (concave) loads, frozen at the previous time level.
  const Eigen::VectorXd Pb =
      p1_nonlinear_load(disc_.geom.bulk, prev.phi, split_b_.pi, q2);
  const Eigen::VectorXd Ps =
      surf_nonlinear_load(disc_.geom.surface, prev.psi, split_s_.pi, s2);

  // Unknown layout: [phi; mu; psi; theta] (K > 0) or [phi; mu; theta] (K = 0).
  auto get_phi = [&](const Eigen::VectorXd& x) { return x.head(N); };
  auto get_mu = [&](const Eigen::VectorXd& x) { return x.segment(N, N); };
  auto get_psi = [&](const Eigen::VectorXd& x) {
    return dirichlet ? Eigen::VectorXd(T * x.head(N))
                     : Eigen::VectorXd(x.segment(2 * N, S));
  };
  auto get_theta = [&](const Eigen::VectorXd& x) {
    return dirichlet ? Eigen::VectorXd(x.segment(2 * N, S))
                     : Eigen::VectorXd(x.segment(2 * N + S, S));
  };

  auto residual = [&](const Eigen::VectorXd& x) {
    const Eigen::VectorXd phi = get_phi(x);
    const Eigen::VectorXd mu = get_mu(x);
    const Eigen::VectorXd psi = get_psi(x);
    const Eigen::VectorXd theta = get_theta(x);
    const SpMat Amob = p1_weighted_stiffness(
        disc_.geom.bulk, phi, [this](double r) { return cfg_.coeffs.mob_bulk.eval_checked(r); },
        tri_quad_deg4());
    const SpMat AmobS = surf_weighted_stiffness(
        disc_.geom.surface, psi,
        [this](double r) { return cfg_.coeffs.mob_surf.eval_checked(r); }, seg_gauss(3));
    const Eigen::VectorXd Nb =
        p1_nonlinear_load(disc_.geom.bulk, phi, split_b_.beta, q2);
    const Eigen::VectorXd Ns =
        surf_nonlinear_load(disc_.geom.surface, psi, split_s_.beta, s2);

    Eigen::VectorXd F(nx);
    // Bulk evolution: <d_t phi, z> - \int phi v.grad z + \int M grad mu.grad z
    F.head(N) = disc_.mass_b * (phi - prev.phi) / dt - Cb * phi + Amob * mu;
    const Eigen::VectorXd mism = psi - T * phi;
    if (!dirichlet) {
      // Surface evolution and the two chemical-potential equations.
      F.segment(2 * N, S) = disc_.mass_s * (psi - prev.psi) / dt - Cs * psi + AmobS * theta;
      F.segment(N, N) = disc_.mass_b * mu - disc_.stiff_b * phi - Nb - Pb +
                        sig * (TtMs * mism);
      F.segment(2 * N + S, S) = disc_.mass_s * theta - disc_.stiff_s * psi - Ns - Ps -
                                sig * (disc_.mass_s * mism);
    } else {
      // Reduced space: psi = trace(phi); chemical-potential equations tested
      // with coupled pairs (eta, trace eta).
      F.segment(2 * N, S) =
          disc_.mass_s * (psi - prev.psi) / dt - Cs * psi + AmobS * theta;
      F.segment(N, N) = disc_.mass_b * mu + TtMs * theta - disc_.stiff_b * phi - Nb -
                        Pb - T.transpose() * (disc_.stiff_s * psi + Ns + Ps);
    }
    return F;
  };

  auto jacobian = [&](const Eigen::VectorXd& x) {
    const Eigen::VectorXd phi = get_phi(x);
    const Eigen::VectorXd psi = get_psi(x);
    const SpMat Amob = p1_weighted_stiffness(
        disc_.geom.bulk, phi, [this](double r) { return cfg_.coeffs.mob_bulk(r); },
        tri_quad_deg4());
    const SpMat AmobS = surf_weighted_stiffness(
        disc_.geom.surface, psi, [this](double r) { return cfg_.coeffs.mob_surf(r); },
        seg_gauss(3));
    const SpMat DNb = p1_weighted_mass(disc_.geom.bulk, phi, split_b_.dbeta, q2);
    // Surface nonlinearity Jacobian: weighted mass on segments.
    SpMat DNs_mass;
    {
      const int Sn = S;
      std::vector<Triplet> trip;
      trip.reserve(static_cast<size_t>(4) * Sn);
      for (int k = 0; k < Sn; ++k) {
        const int a = k, b = (k + 1) % Sn;
        const double h = disc_.geom.surface.segment_length[k];
        double loc[2][2] = {};
        for (int q = 0; q < s2.n; ++q) {
          const double xi = s2.pts[q].x;
          const double w = s2.pts[q].w * h *
                           split_s_.dbeta((1.0 - xi) * psi[a] + xi * psi[b]);
          const double l[2] = {1.0 - xi, xi};
          for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j) loc[i][j] += w * l[i] * l[j];
        }
        trip.emplace_back(a, a, loc[0][0]);
        trip.emplace_back(a, b, loc[0][1]);
        trip.emplace_back(b, a, loc[1][0]);
        trip.emplace_back(b, b, loc[1][1]);
      }
      DNs_mass.resize(Sn, Sn);
      DNs_mass.setFromTriplets(trip.begin(), trip.end());
    }

    std::vector<Triplet> trip;
    // Row 0: bulk evolution.
    append_block(trip, disc_.mass_b, 0, 0, 1.0 / dt);
    append_block(trip, Cb, 0, 0, -1.0);
    append_block(trip, Amob, 0, N, 1.0);
    if (!dirichlet) {
      // Row 1: bulk chemical potential.
      append_block(trip, disc_.stiff_b, N, 0, -1.0);
      append_block(trip, DNb, N, 0, -1.0);
      append_block(trip, TtMsT, N, 0, -sig);
      append_block(trip, disc_.mass_b, N, N, 1.0);
      append_block(trip, TtMs, N, 2 * N, sig);
      // Row 2: surface evolution.
      append_block(trip, disc_.mass_s, 2 * N, 2 * N, 1.0 / dt);
      append_block(trip, Cs, 2 * N, 2 * N, -1.0);
      append_block(trip, AmobS, 2 * N, 2 * N + S, 1.0);
      // Row 3: surface chemical potential.
      append_block(trip, SpMat(disc_.mass_s * T), 2 * N + S, 0, sig);
      append_block(trip, disc_.stiff_s, 2 * N + S, 2 * N, -1.0);
      append_block(trip, DNs_mass, 2 * N + S, 2 * N, -1.0);
      append_block(trip, disc_.mass_s, 2 * N + S, 2 * N, -sig);
      append_block(trip, disc_.mass_s, 2 * N + S, 2 * N + S, 1.0);
    } else {
      // Row 1: coupled chemical potential on the reduced space.
      append_block(trip, disc_.stiff_b, N, 0, -1.0);
      append_block(trip, DNb, N, 0, -1.0);
      append_block(trip, SpMat(T.transpose() * (disc_.stiff_s * T)), N, 0, -1.0);
      append_block(trip, SpMat(T.transpose() * (DNs_mass * T)), N, 0, -1.0);
      append_block(trip, disc_.mass_b, N, N, 1.0);
      append_block(trip, TtMs, N, 2 * N, 1.0);
      // Row 2: surface evolution driven by the trace.
      append_block(trip, SpMat((disc_.mass_s / dt - Cs) * T), 2 * N, 0, 1.0);
      append_block(trip, AmobS, 2 * N, 2 * N, 1.0);
    }
    SpMat J(nx, nx);
    J.setFromTriplets(trip.begin(), trip.end());
    return J;
  };

  // Warm start from the previous fields.
  Eigen::VectorXd x(nx);
  x.head(N) = prev.phi;
  x.segment(N, N) = prev.mu;
  if (!dirichlet) {
    x.segment(2 * N, S) = prev.psi;
    x.segment(2 * N + S, S) = prev.theta;
  } else {
    x.segment(2 * N, S) = prev.theta;
  }

  Eigen::VectorXd F = residual(x);
  double res = F.lpNorm<Eigen::Infinity>();
  int iters = 0;
  bool converged = res <= cfg_.newton.tol;
  while (!converged && iters < cfg_.newton.max_iter) {
    const SpMat J = jacobian(x);
    Eigen::SparseLU<SpMat> lu(J);
    if (lu.info() != Eigen::Success)
      throw StepRejected("step: Newton linearization is singular; consider halving dt");
    const Eigen::VectorXd delta = lu.solve(-F);
    if (!delta.allFinite())
      throw StepRejected("step: non-finite Newton update; consider halving dt");
    // Damped update: backtrack until the residual decreases.
    double s = 1.0;
    Eigen::VectorXd xn, Fn;
    double resn = res;
    bool improved = false;
    for (int h = 0; h <= cfg_.newton.max_line_halvings; ++h) {
      xn = x + s * delta;
      Fn = residual(xn);
      resn = Fn.lpNorm<Eigen::Infinity>();
      if (resn <= (1.0 - 0.25 * s) * res || resn <= cfg_.newton.tol) {
        improved = true;
        break;
      }
      s *= 0.5;
    }
    if (!improved && resn >= res)
      throw StepRejected("step: Newton line search found no descent; consider halving dt");
    x = xn;
    F = Fn;
    res = resn;
    ++iters;
    converged = res <= cfg_.newton.tol;
  }
  if (!converged) {
    std::ostringstream os;
    os << "step: Newton stalled at residual " << res << " after " << iters
       << " iterations; consider halving dt";
    throw StepRejected(os.str());
  }

  StepResult out;
  out.state.t = prev.t + dt;
  out.state.phi = get_phi(x);
  out.state.mu = get_mu(x);
  out.state.psi = get_psi(x);  // exact trace sharing for K = 0
  out.state.theta = get_theta(x);
  if (!out.state.all_finite())
    throw StepRejected("step: non-finite fields after Newton solve");
  out.state.flow =
      solve_flow(out.state.phi, out.state.mu, out.state.psi, out.state.theta);
  out.record = make_record(prev, out.state, dt, iters, res);
  return out;
}

DiagnosticsRecord CahnHilliardSystem::make_record(const FieldState& prev,
                                                  const FieldState& next, double dt,
                                                  int iters, double res) const {
  DiagnosticsRecord rec;
  rec.t = next.t;
  rec.energy = energy(disc_, next.phi, next.psi, cfg_.potentials, cfg_.K);
  rec.mass_bulk = bulk_mass(disc_, next.phi);
  rec.mass_surf = surface_mass(disc_, next.psi);
  const DissipationRates flow_part = dissipation_rates(disc_, prev, cfg_.coeffs);
  const DissipationRates mob_part = dissipation_rates(disc_, next, cfg_.coeffs);
  rec.dissipation.viscous = flow_part.viscous;
  rec.dissipation.permeability = flow_part.permeability;
  rec.dissipation.friction = flow_part.friction;
  rec.dissipation.mob_bulk = mob_part.mob_bulk;
  rec.dissipation.mob_surf = mob_part.mob_surf;
  rec.mismatch = boundary_mismatch(disc_, next);
  rec.newton_iters = iters;
  rec.newton_residual = res;
  if (!next.flow.is_zero()) {
    rec.brinkman_div_residual = next.flow.div_residual;
    rec.brinkman_energy_residual = next.flow.energy_residual;
  }
  rec.energy_balance_residual =
      dissipation_check(disc_, prev, next, dt, cfg_.potentials, cfg_.K, cfg_.coeffs);
  rec.dt_used = dt;
  return rec;
}

double CahnHilliardSystem::wf4_residual_norm(const FieldState& s) const {
  const double sig = cfg_.sigma();
  const SpMat& T = disc_.trace;
  auto fullF = [this](double r) { return split_b_.beta(r) + split_b_.pi(r); };
  auto fullG = [this](double r) { return split_s_.beta(r) + split_s_.pi(r); };
  const Eigen::VectorXd mism = s.psi - T * s.phi;
  const Eigen::VectorXd rb =
      disc_.mass_b * s.mu - disc_.stiff_b * s.phi -
      p1_nonlinear_load(disc_.geom.bulk, s.phi, fullF, tri_quad_deg4()) +
      sig * (T.transpose() * (disc_.mass_s * mism));
  const Eigen::VectorXd rs =
      disc_.mass_s * s.theta - disc_.stiff_s * s.psi -
      surf_nonlinear_load(disc_.geom.surface, s.psi, fullG, seg_gauss(3)) -
      sig * (disc_.mass_s * mism);
  // The residual is a functional on the H^1-type test space; measure it in
  // the matching discrete dual norm, sqrt(r^T (K + M)^{-1} r).
  Eigen::SimplicialLDLT<SpMat> hb(SpMat(disc_.stiff_b + disc_.mass_b));
  Eigen::SimplicialLDLT<SpMat> hs(SpMat(disc_.stiff_s + disc_.mass_s));
  const double nb = rb.dot(hb.solve(rb));
  const double ns = rs.dot(hs.solve(rs));
  return std::sqrt(std::max(0.0, nb + ns));
}

RunResult run_simulation(const Discretization& disc, const ModelConfig& cfg,
                         const StepCallback& on_step) {
  CahnHilliardSystem sys(disc, cfg);
  RunResult out;
  FieldState state = sys.initial_state();
  {
    DiagnosticsRecord rec;
    rec.t = 0.0;
    rec.energy = energy(disc, state.phi, state.psi, cfg.potentials, cfg.K);
    rec.mass_bulk = bulk_mass(disc, state.phi);
    rec.mass_surf = surface_mass(disc, state.psi);
    rec.mismatch = boundary_mismatch(disc, state);
    if (!state.flow.is_zero()) {
      rec.brinkman_div_residual = state.flow.div_residual;
      rec.brinkman_energy_residual = state.flow.energy_residual;
    }
    out.records.push_back(rec);
    if (on_step) on_step(state, rec);
  }
  if (cfg.t_final <= 0.0) {
    out.final_state = std::move(state);
    return out;
  }

  const long nsteps = std::lround(cfg.t_final / cfg.dt);
  // Reject-and-halve rescue: a failing step is replaced by two half steps,
  // recursively up to max_step_halvings; the configured dt resumes afterwards.
  std::function<FieldState(const FieldState&, double, int)> advance =
      [&](const FieldState& from, double dt, int depth) -> FieldState {
    try {
      auto res = sys.step(from, dt);
      out.records.push_back(res.record);
      if (on_step) on_step(res.state, res.record);
      return std::move(res.state);
    } catch (const StepRejected&) {
      ++out.rejected_steps;
      if (depth >= cfg.max_step_halvings) throw;
      FieldState half = advance(from, 0.5 * dt, depth + 1);
      return advance(half, 0.5 * dt, depth + 1);
    }
  };
  for (long k = 0; k < nsteps; ++k) state = advance(state, cfg.dt, 0);
  out.final_state = std::move(state);
  return out;
}

}  // namespace chb
