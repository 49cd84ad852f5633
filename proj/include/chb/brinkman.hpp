#pragma once

// Quasi-stationary Brinkman/Stokes subsystem as a Taylor-Hood (P2/P1) saddle
// point problem with strong impermeability v.n = 0, Navier-slip friction on
// the boundary, and capillary forcing from (phi, grad mu) bulk and
// (psi, grad_G theta) surface terms.

#include <Eigen/SparseLU>
#include <functional>
#include <memory>
#include <optional>

#include "chb/coefficients.hpp"
#include "chb/fem.hpp"

namespace chb {

struct FlowSolution {
  Eigen::VectorXd velocity;  // full P2 vector layout, constrained dofs zero
  Eigen::VectorXd pressure;  // P1 vertices, zero mean
  double div_residual = 0.0;      // ||B v|| in the pressure-space dual norm
  double energy_lhs = 0.0;        // a(v, v)
  double energy_rhs = 0.0;        // F(v)
  double energy_residual = 0.0;   // |lhs - rhs| / max(|lhs|, tiny)
  double mean_pressure = 0.0;

  bool is_zero() const { return velocity.size() == 0; }
};

// Forcing data of a Brinkman solve. The capillary fields follow the weak
// form: rhs(w) = -\int phi grad(mu).w - \int_G psi dtheta/ds (tau.w), plus the
// optional manufactured body/boundary forces used by the convergence battery.
struct BrinkmanForcing {
  Eigen::VectorXd phi, mu;     // bulk P1 (may be empty)
  Eigen::VectorXd psi, theta;  // surface P1 (may be empty)
  std::function<Vec2(const Vec2&)> body_force;                    // f(x)
  std::function<Vec2(const Vec2&)> boundary_force;                // g_tau(x)
};

struct FlowSolverOptions {
  bool iterative = false;   // default: sparse direct factorization
  double tol = 1e-10;       // relative residual for the Krylov option
  int max_iter = 4000;
};

class BrinkmanSolver {
 public:
  BrinkmanSolver(const Discretization& disc, Coefficients coeffs,
                 FlowSolverOptions solver = {});

  // Assembles (reusing the factorization when the flow coefficients are
  // constant) and solves. phi/psi are the phase fields the coefficients are
  // evaluated at; pass empty vectors for zero fields.
  FlowSolution solve(const BrinkmanForcing& forcing);

  // Assembled velocity block (reduced by the v.n = 0 constraints); symmetric.
  const SpMat& velocity_block(const Eigen::VectorXd& phi,
                              const Eigen::VectorXd& psi);
  // Divergence block B (pressure x reduced velocity).
  const SpMat& divergence_block();

  int num_reduced_velocity_dofs() const { return n_red_; }
  // Scalar dof component constraint map: entry (2*node + comp) is -1 when the
  // component is fixed to zero, otherwise the reduced index.
  const std::vector<int>& reduced_index() const { return red_index_; }

  // Applies the v.n = 0 constraints to a full-layout field (zeroing
  // constrained components); used by the Korn diagnostics.
  Eigen::VectorXd constrain(const Eigen::VectorXd& full) const;

 private:
  void build_constraints();
  void assemble(const Eigen::VectorXd& phi, const Eigen::VectorXd& psi);
  Eigen::VectorXd assemble_rhs(const BrinkmanForcing& f) const;

  const Discretization& disc_;
  Coefficients coeffs_;
  FlowSolverOptions solver_;
  std::vector<int> red_index_;
  int n_red_ = 0;
  int n_pressure_ = 0;
  SpMat A_;       // reduced velocity block
  SpMat B_;       // divergence block
  Eigen::VectorXd pressure_mean_weights_;
  SpMat system_;  // bordered saddle-point matrix
  std::unique_ptr<Eigen::SparseLU<SpMat>> lu_;
  bool factorized_ = false;
  bool assembled_ = false;
};

struct KornReport {
  // max over samples of |grad v| / (|Dv| + |v|_Gamma) and |grad v| / |Dv|
  double max_ratio_boundary = 0.0;
  double max_ratio_full = 0.0;
  int samples = 0;
};

// Empirical Korn constants over random constrained velocity fields.
KornReport verify_korn(const Discretization& disc, int num_samples,
                       unsigned long long seed);

}  // namespace chb
