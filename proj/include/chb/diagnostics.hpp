#pragma once

// Paper-level functionals as pure functions of field states: the free energy
// E_K and its components, dissipation rates, dual masses, boundary mismatch,
// stability norms and the contact-angle extraction.

#include <vector>

#include "chb/brinkman.hpp"
#include "chb/fem.hpp"
#include "chb/potentials.hpp"

namespace chb {

struct FieldState {
  double t = 0.0;
  Eigen::VectorXd phi, mu;     // bulk P1
  Eigen::VectorXd psi, theta;  // surface P1
  FlowSolution flow;           // quasi-stationary velocity of these fields

  bool all_finite() const;
};

struct EnergyReport {
  double bulk_dirichlet = 0.0;   // 1/2 \int |grad phi|^2
  double bulk_potential = 0.0;   // \int F(phi)
  double surf_dirichlet = 0.0;   // 1/2 \int_G |grad_G psi|^2
  double surf_potential = 0.0;   // \int_G G(psi)
  double robin = 0.0;            // sigma(K)/2 \int_G (psi - phi)^2
  double total = 0.0;
  int clamp_violations = 0;      // logarithmic evaluations clamped at +-1
};

struct DissipationRates {
  double viscous = 0.0;     // 2 \int nu(phi) |Dv|^2
  double permeability = 0.0;  // \int lambda(phi) |v|^2
  double friction = 0.0;    // \int_G gamma(psi) |v|^2
  double mob_bulk = 0.0;    // \int M_Omega(phi) |grad mu|^2
  double mob_surf = 0.0;    // \int_G M_Gamma(psi) |grad_G theta|^2
  double total() const {
    return viscous + permeability + friction + mob_bulk + mob_surf;
  }
};

struct DiagnosticsRecord {
  double t = 0.0;
  EnergyReport energy;
  double mass_bulk = 0.0;   // \int phi
  double mass_surf = 0.0;   // \int_G psi
  DissipationRates dissipation;
  double mismatch = 0.0;    // ||psi - phi|_G|| in L^2(Gamma)
  int newton_iters = 0;
  double newton_residual = 0.0;
  double brinkman_div_residual = 0.0;
  double brinkman_energy_residual = 0.0;
  double energy_balance_residual = 0.0;  // dissipation_check vs previous state
  double dt_used = 0.0;
};

// sigma(K) = 1/K for K > 0 and 0 for K = 0.
double sigma_of(double K);

// Free energy with epsilon = epsilon_Gamma = 1: gradient terms exact for P1,
// potential terms by the midedge triangle rule / 2-point Gauss on segments.
// Logarithmic potentials evaluated at |r| >= 1 are clamped to 1 - 1e-12 and
// counted; this never happens inside the solver, which uses the Yosida
// graphs.
EnergyReport energy(const Discretization& disc, const Eigen::VectorXd& phi,
                    const Eigen::VectorXd& psi, const PotentialPair& pots,
                    double K);

// Dissipation rates of a state: flow terms from state.flow with coefficients
// at (state.phi, state.psi), mobility terms from (grad mu, grad theta).
DissipationRates dissipation_rates(const Discretization& disc,
                                   const FieldState& state,
                                   const Coefficients& coeffs);

// Residual of the discrete energy balance over one accepted step:
//   E(next) - E(prev) + dt * [flow dissipation at prev, mobility at next].
// Compliant steps give a residual <= 0 up to tolerance.
double dissipation_check(const Discretization& disc, const FieldState& prev,
                         const FieldState& next, double dt,
                         const PotentialPair& pots, double K,
                         const Coefficients& coeffs);

// ||psi - phi|_G||_{L^2(Gamma)} by exact P1 quadrature.
double boundary_mismatch(const Discretization& disc, const FieldState& state);

struct StabilityNorms {
  double phi_h1 = 0.0;    // H^1(Omega)
  double psi_h1 = 0.0;    // H^1(Gamma)
  double mu_h1 = 0.0;
  double theta_h1 = 0.0;
  double velocity_h1 = 0.0;  // H^1(Omega)^2
  double sum() const { return phi_h1 + psi_h1 + mu_h1 + theta_h1 + velocity_h1; }
};

// Discrete analogues of the continuous-dependence norms; both states must
// live on the same discretization. Throws DomainError on size mismatch.
StabilityNorms stability_norms(const Discretization& disc, const FieldState& a,
                               const FieldState& b);

struct ContactPoint {
  double arclength = 0.0;
  double angle_deg = 0.0;  // between the into-domain interface direction and
                           // the CCW boundary tangent, in (0, 180)
};

// Zero-level-set intersections of phi with the boundary; empty when phi does
// not change sign along the boundary.
std::vector<ContactPoint> contact_angles(const Discretization& disc,
                                         const Eigen::VectorXd& phi);

// Masses \int phi and \int_G psi (consistent P1 quadrature).
double bulk_mass(const Discretization& disc, const Eigen::VectorXd& phi);
double surface_mass(const Discretization& disc, const Eigen::VectorXd& psi);

}  // namespace chb
