#pragma once

// Manufactured solutions: a smooth divergence-free velocity with v.n = 0 on
// the unit square for the Brinkman solver, and a smooth bulk/surface pair for
// the stationary coupled elliptic block (Robin coupling for K > 0, trace
// identification for K = 0).

#include "chb/brinkman.hpp"
#include "chb/fem.hpp"

namespace chb {

// v* = (-sin(pi x) cos(pi y), cos(pi x) sin(pi y)), p* = cos(pi x) cos(pi y).
// For constant nu, lambda, gamma the matching data are
//   f = (2 nu pi^2 + lambda) v* + grad p*  (body)
//   g_tau = gamma v*                        (Navier-slip, [2 nu Dv* n]_tau = 0)
struct BrinkmanManufactured {
  double nu = 1.0, lambda = 1.0, gamma = 1.0;
  Vec2 velocity(const Vec2& x) const;
  double pressure(const Vec2& x) const;
  Vec2 body_force(const Vec2& x) const;
  Vec2 boundary_force(const Vec2& x) const;
};

// L^2 velocity error against v* by high-order quadrature.
double brinkman_velocity_l2_error(const Discretization& disc,
                                  const FlowSolution& flow,
                                  const BrinkmanManufactured& mms);
double pressure_l2_error(const Discretization& disc, const FlowSolution& flow,
                         const BrinkmanManufactured& mms);

// Stationary bulk-surface elliptic block
//   -Lap phi = f                  in Omega
//   -Lap_G psi + dn phi = g       on Gamma
//    K dn phi = psi - phi         on Gamma
// with manufactured phi* = cos(pi x) cos(pi y) + sin^2(pi x) sin(pi y) (zero
// gradient at the corners, so psi* = phi*|_G + K dn phi* is C^1 through them)
// and data f, g derived analytically. The solution is unique up to a constant
// pair; the discrete system pins the combined mean to the manufactured one.
struct EllipticManufactured {
  double K = 1.0;
  double phi(const Vec2& x) const;
  Vec2 grad_phi(const Vec2& x) const;
  double f(const Vec2& x) const;       // -Lap phi*
  double dn_phi(double s) const;       // outward normal derivative at arclength s
  double psi(double s) const;          // phi*|_G + K dn phi*
  double gsurf(double s) const;        // -psi*'' + dn phi*
  double combined_mean() const;        // \int phi* + \int_G psi*
};

struct EllipticSolution {
  Eigen::VectorXd phi;  // bulk nodal
  Eigen::VectorXd psi;  // surface nodal (equals trace for K = 0)
  double bulk_l2_error = 0.0;
  double surf_l2_error = 0.0;
};

// Galerkin solve of the elliptic block with P1 elements. For K = 0 the system
// is assembled on the reduced space psi = phi|_G. Optional surface point
// loads (pairs of surface node index and weight) let exact piecewise-linear
// solutions with corner kinks be reproduced to machine precision.
EllipticSolution solve_elliptic_block(
    const Discretization& disc, double K, const std::function<double(const Vec2&)>& f,
    const std::function<double(double)>& g, double mean_value,
    const std::vector<std::pair<int, double>>& point_loads = {});

// Convenience wrapper: manufactured data, solve, errors.
EllipticSolution elliptic_mms_solve(const Discretization& disc,
                                    const EllipticManufactured& mms);

}  // namespace chb
