#pragma once

// Convective bulk-surface Cahn-Hilliard subsystem coupled to the Brinkman
// solve: backward Euler in time with convex-implicit / concave-explicit
// potential splitting and the velocity lagged one sub-step. K > 0 uses the
// Robin coupling sigma(K) = 1/K; K = 0 identifies the surface unknowns with
// the boundary traces (reduced space).

#include <functional>
#include <optional>
#include <string>

#include "chb/diagnostics.hpp"

namespace chb {

struct InitialCondition {
  enum class Kind {
    Constant,    // mean
    CosProduct,  // mean + amplitude * cos(kx pi x) cos(ky pi y)
    CosX,        // mean + amplitude * cos(kx pi x)
    Random,      // mean + iid uniform in [-amplitude, amplitude] per node
    TanhX,       // mean + amplitude * tanh(steepness * (x - 1/2))
  };
  Kind kind = Kind::Constant;
  double mean = 0.0;
  double amplitude = 0.0;
  double kx = 1.0, ky = 1.0;
  double steepness = 10.0;
};

struct NewtonOptions {
  double tol = 1e-10;   // max-norm of the nonlinear residual
  int max_iter = 30;
  int max_line_halvings = 12;
};

struct ModelConfig {
  double K = 0.0;
  PotentialPair potentials;
  Coefficients coeffs;
  double dt = 1e-4;
  double t_final = 1e-2;
  NewtonOptions newton;
  bool flow_enabled = true;
  FlowSolverOptions flow_solver;
  InitialCondition phi0;
  // psi0 defaults to the trace of phi0 (mandatory for K = 0); for K > 0 a
  // constant offset may be added on top of the trace.
  double psi0_offset = 0.0;
  unsigned long long seed = 0;
  int max_step_halvings = 8;  // reject-and-halve rescue attempts per step

  double sigma() const;
  // Structural checks (positivity of dt, K >= 0, coefficient bounds,
  // potential mode admissibility incl. graph domination for singular runs).
  void validate() const;
};

class CahnHilliardSystem {
 public:
  CahnHilliardSystem(const Discretization& disc, const ModelConfig& cfg);

  // Nodal interpolation of the initial descriptors, consistent chemical
  // potentials, and the initial Brinkman solve. Validates the interior-mean
  // condition for singular potentials. An optional nodal perturbation is
  // added to phi0 before the trace is taken (doubling experiments).
  FieldState initial_state(const Eigen::VectorXd* phi_perturbation = nullptr) const;

  struct StepResult {
    FieldState state;
    DiagnosticsRecord record;
  };

  // One backward-Euler step of size dt (default cfg.dt). Throws StepRejected
  // on Newton breakdown or non-finite values.
  StepResult step(const FieldState& prev, std::optional<double> dt_override = {}) const;

  // Reported means of the initial data.
  double initial_mean_bulk() const { return m0_; }
  double initial_mean_surf() const { return m_gamma0_; }

  // Residual of the chemical-potential equation at a given state with the
  // full (unsplit) derivatives F', G'; measured in the mass-weighted dual
  // norm. Used by the consistency studies.
  double wf4_residual_norm(const FieldState& s) const;

  const ModelConfig& config() const { return cfg_; }
  const Discretization& disc() const { return disc_; }

  FlowSolution solve_flow(const Eigen::VectorXd& phi, const Eigen::VectorXd& mu,
                          const Eigen::VectorXd& psi,
                          const Eigen::VectorXd& theta) const;

 private:
  Eigen::VectorXd interpolate_bulk(const InitialCondition& ic) const;
  DiagnosticsRecord make_record(const FieldState& prev, const FieldState& next,
                                double dt, int iters, double res) const;

  const Discretization& disc_;
  ModelConfig cfg_;
  ConvexSplit split_b_, split_s_;
  mutable std::unique_ptr<BrinkmanSolver> flow_;
  mutable double m0_ = 0.0, m_gamma0_ = 0.0;
  mutable bool means_set_ = false;
};

// Called after every accepted step (and once for the initial state).
using StepCallback =
    std::function<void(const FieldState& state, const DiagnosticsRecord& rec)>;

struct RunResult {
  std::vector<DiagnosticsRecord> records;
  FieldState final_state;
  int rejected_steps = 0;
};

// Advances from t = 0 to t_final. A rejected step is retried with halved dt
// (up to cfg.max_step_halvings times); the configured dt is restored
// afterwards. t_final = 0 produces the initial snapshot only.
RunResult run_simulation(const Discretization& disc, const ModelConfig& cfg,
                         const StepCallback& on_step = {});

}  // namespace chb
