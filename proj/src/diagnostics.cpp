#include "chb/diagnostics.hpp"

#include <cmath>

#include "chb/errors.hpp"

namespace chb {

double sigma_of(double K) { return K > 0.0 ? 1.0 / K : 0.0; }

bool FieldState::all_finite() const {
  auto ok = [](const Eigen::VectorXd& v) { return v.size() == 0 || v.allFinite(); };
  return ok(phi) && ok(mu) && ok(psi) && ok(theta) &&
         (flow.is_zero() || (flow.velocity.allFinite() && flow.pressure.allFinite()));
}

EnergyReport energy(const Discretization& disc, const Eigen::VectorXd& phi,
                    const Eigen::VectorXd& psi, const PotentialPair& pots,
                    double K) {
  EnergyReport rep;
  rep.bulk_dirichlet = 0.5 * phi.dot(disc.stiff_b * phi);
  rep.surf_dirichlet = 0.5 * psi.dot(disc.stiff_s * psi);

  int violations = 0;
  auto value_of = [&](const SplitPotential& pot, double shift) {
    const ConvexSplit split =
        make_convex_split(pot, pots.singular_mode, pots.yosida_eps, shift);
    const bool clamp = !pots.singular_mode && pot.kind == PotentialKind::Logarithmic;
    return ScalarFn([split, clamp, &violations](double r) {
      double rr = r;
      if (clamp && std::abs(rr) >= 1.0) {
        rr = std::copysign(1.0 - 1e-12, rr);
        ++violations;
      }
      return split.beta_hat(rr) + split.pi_hat(rr) + split.shift;
    });
  };

  rep.bulk_potential = p1_integrate(disc.geom.bulk, phi,
                                    value_of(pots.bulk, pots.shift_bulk), tri_quad_deg2());
  rep.surf_potential = surf_integrate(disc.geom.surface, psi,
                                      value_of(pots.surface, pots.shift_surf),
                                      seg_gauss(2));
  const Eigen::VectorXd d = psi - disc.trace * phi;
  rep.robin = 0.5 * sigma_of(K) * d.dot(disc.mass_s * d);
  rep.total = rep.bulk_dirichlet + rep.bulk_potential + rep.surf_dirichlet +
              rep.surf_potential + rep.robin;
  rep.clamp_violations = violations;
  return rep;
}

DissipationRates dissipation_rates(const Discretization& disc, const FieldState& state,
                                   const Coefficients& coeffs) {
  DissipationRates d;
  const BulkMesh& mesh = disc.geom.bulk;

  if (!state.flow.is_zero()) {
    const P2Space& sp = disc.velocity;
    const TriQuad& quad = tri_quad_deg4();
    for (int t = 0; t < mesh.num_triangles(); ++t) {
      const auto dofs = sp.tri_dofs(t);
      const auto& tri = mesh.triangles[t];
      const auto g = barycentric_gradients(mesh, t);
      const double A = mesh.element_areas[t];
      for (int q = 0; q < quad.n; ++q) {
        const auto& p = quad.pts[q];
        const double w = p.w * A;
        const double phiq = p1_eval(state.phi, tri, p.l0, p.l1, p.l2);
        const auto N = P2Space::shape(p.l0, p.l1, p.l2);
        const auto dN = P2Space::shape_grad(p.l0, p.l1, p.l2, g);
        Eigen::Matrix2d grad = Eigen::Matrix2d::Zero();
        Vec2 v(0, 0);
        for (int a = 0; a < 6; ++a) {
          const Vec2 ua(state.flow.velocity[2 * dofs[a]],
                        state.flow.velocity[2 * dofs[a] + 1]);
          v += N[a] * ua;
          grad += ua * dN[a].transpose();  // grad_ij = du_i/dx_j
        }
        const Eigen::Matrix2d D = 0.5 * (grad + grad.transpose());
        d.viscous += w * 2.0 * coeffs.nu(phiq) * D.squaredNorm();
        d.permeability += w * coeffs.lambda(phiq) * v.squaredNorm();
      }
    }
    const SegQuad squad = seg_gauss(3);
    const int S = disc.geom.surface.num_nodes();
    for (int k = 0; k < S; ++k) {
      const double h = disc.geom.surface.segment_length[k];
      for (int q = 0; q < squad.n; ++q) {
        const double xi = squad.pts[q].x;
        const double psiq = (1.0 - xi) * state.psi[k] + xi * state.psi[(k + 1) % S];
        const Vec2 v = p2_vector_eval_segment(disc.velocity, disc.geom.trace_map,
                                              state.flow.velocity, k, xi);
        d.friction += squad.pts[q].w * h * coeffs.gamma(psiq) * v.squaredNorm();
      }
    }
  }

  // Mobility terms: P1 gradients are piecewise constant.
  const TriQuad& quad = tri_quad_deg4();
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    const auto& tri = mesh.triangles[t];
    const double A = mesh.element_areas[t];
    const double g2 = p1_gradient(mesh, state.mu, t).squaredNorm();
    for (int q = 0; q < quad.n; ++q) {
      const auto& p = quad.pts[q];
      d.mob_bulk += p.w * A * coeffs.mob_bulk(p1_eval(state.phi, tri, p.l0, p.l1, p.l2)) * g2;
    }
  }
  const SegQuad squad = seg_gauss(2);
  const int S = disc.geom.surface.num_nodes();
  for (int k = 0; k < S; ++k) {
    const double h = disc.geom.surface.segment_length[k];
    const double dth = (state.theta[(k + 1) % S] - state.theta[k]) / h;
    for (int q = 0; q < squad.n; ++q) {
      const double xi = squad.pts[q].x;
      const double psiq = (1.0 - xi) * state.psi[k] + xi * state.psi[(k + 1) % S];
      d.mob_surf += squad.pts[q].w * h * coeffs.mob_surf(psiq) * dth * dth;
    }
  }
  return d;
}

double dissipation_check(const Discretization& disc, const FieldState& prev,
                         const FieldState& next, double dt,
                         const PotentialPair& pots, double K,
                         const Coefficients& coeffs) {
  const EnergyReport e0 = energy(disc, prev.phi, prev.psi, pots, K);
  const EnergyReport e1 = energy(disc, next.phi, next.psi, pots, K);
  // Flow dissipation with the velocity that advanced the step (prev.flow),
  // mobility dissipation at the new chemical potentials.
  DissipationRates flow_part = dissipation_rates(disc, prev, coeffs);
  DissipationRates mob_part = dissipation_rates(disc, next, coeffs);
  const double diss = flow_part.viscous + flow_part.permeability + flow_part.friction +
                      mob_part.mob_bulk + mob_part.mob_surf;
  return e1.total - e0.total + dt * diss;
}

double boundary_mismatch(const Discretization& disc, const FieldState& state) {
  const Eigen::VectorXd d = state.psi - disc.trace * state.phi;
  return std::sqrt(std::max(0.0, d.dot(disc.mass_s * d)));
}

StabilityNorms stability_norms(const Discretization& disc, const FieldState& a,
                               const FieldState& b) {
  if (a.phi.size() != b.phi.size() || a.psi.size() != b.psi.size())
    throw DomainError("stability_norms: states live on different meshes");
  StabilityNorms out;
  auto h1_bulk = [&](const Eigen::VectorXd& d) {
    return std::sqrt(std::max(0.0, d.dot(disc.mass_b * d) + d.dot(disc.stiff_b * d)));
  };
  auto h1_surf = [&](const Eigen::VectorXd& d) {
    return std::sqrt(std::max(0.0, d.dot(disc.mass_s * d) + d.dot(disc.stiff_s * d)));
  };
  out.phi_h1 = h1_bulk(a.phi - b.phi);
  out.psi_h1 = h1_surf(a.psi - b.psi);
  out.mu_h1 = h1_bulk(a.mu - b.mu);
  out.theta_h1 = h1_surf(a.theta - b.theta);
  if (!a.flow.is_zero() && !b.flow.is_zero()) {
    const Eigen::VectorXd dv = a.flow.velocity - b.flow.velocity;
    static thread_local const Discretization* cached_disc = nullptr;
    static thread_local SpMat Mv, Kv;
    if (cached_disc != &disc) {
      Mv = p2_vector_mass(disc.velocity);
      Kv = p2_vector_grad_stiffness(disc.velocity);
      cached_disc = &disc;
    }
    out.velocity_h1 = std::sqrt(std::max(0.0, dv.dot(Mv * dv) + dv.dot(Kv * dv)));
  }
  return out;
}

std::vector<ContactPoint> contact_angles(const Discretization& disc,
                                         const Eigen::VectorXd& phi) {
  std::vector<ContactPoint> out;
  const auto& geom = disc.geom;
  const int S = geom.surface.num_nodes();
  for (int k = 0; k < S; ++k) {
    const int a = geom.trace_map.to_bulk[k];
    const int b = geom.trace_map.to_bulk[(k + 1) % S];
    const double fa = phi[a], fb = phi[b];
    if (!(fa * fb < 0.0)) continue;  // strict sign change on this segment
    const double xi = fa / (fa - fb);
    const int t = disc.velocity.boundary_segment_triangle[k];
    const Vec2 grad = p1_gradient(geom.bulk, phi, t);
    if (grad.norm() < 1e-300) continue;
    Vec2 dir(-grad.y(), grad.x());  // level-set tangent
    const Vec2 inward = -geom.normals.edge_normal[k];
    if (dir.dot(inward) < 0.0) dir = -dir;
    const Vec2 pa = geom.bulk.nodes[a];
    const Vec2 pb = geom.bulk.nodes[b];
    const Vec2 tau = (pb - pa).normalized();
    const double c = std::clamp(dir.normalized().dot(tau), -1.0, 1.0);
    ContactPoint cp;
    cp.arclength = geom.surface.arclength[k] + xi * geom.surface.segment_length[k];
    cp.angle_deg = std::acos(c) * 180.0 / M_PI;
    out.push_back(cp);
  }
  return out;
}

double bulk_mass(const Discretization& disc, const Eigen::VectorXd& phi) {
  return Eigen::VectorXd::Ones(phi.size()).dot(disc.mass_b * phi);
}

double surface_mass(const Discretization& disc, const Eigen::VectorXd& psi) {
  return Eigen::VectorXd::Ones(psi.size()).dot(disc.mass_s * psi);
}

}  // namespace chb
