#pragma once

// The paper-facing experiment campaigns: the K -> 0 coupling sweep, the
// eps -> 0 singular-potential sweep, the continuous-dependence doubling
// experiment, the manufactured-solution convergence battery and the spinodal
// dispersion check. Sweeps fan runs out across a worker pool (CHB_WORKERS);
// results are keyed by parameter value, so aggregation is order-independent.

#include <optional>

#include "chb/config.hpp"
#include "chb/mms.hpp"

namespace chb {

struct RunSummary {
  double param = 0.0;
  double sup_mismatch = 0.0;       // sup over recorded times of ||psi - phi|_G||
  double final_energy = 0.0;
  double final_mass_bulk = 0.0;
  double final_mass_surf = 0.0;
  double max_excess = 0.0;         // max over time of max_j (|phi_j| - 1)_+
  double max_abs_phi = 0.0;
  double max_hat_beta_integral = 0.0;  // max over time of \int beta_hat_eps(phi)
  int steps = 0;
};

struct SweepResult {
  std::vector<RunSummary> runs;    // sorted by parameter
  double slope = 0.0;              // least-squares log-log fit
  double intercept = 0.0;
  double fit_residual = 0.0;
  int fit_points = 0;
};

// Least-squares slope of log(y) against log(x); requires >= 4 strictly
// positive, non-identical abscissae (ValidationError otherwise).
void fit_loglog(const std::vector<double>& x, const std::vector<double>& y,
                SweepResult& out);

// K-coupling sweep. K = 0 entries are run but excluded from the fit; the
// positive entries must provide >= 4 distinct values. Initial data are forced
// into the compatible class psi0 = phi0|_G.
SweepResult sweep_k(const Discretization& disc, const RunConfig& base,
                    const std::vector<double>& k_values,
                    const std::string& out_dir = "");

// Yosida-parameter sweep for singular potentials (descending eps in (0,1)).
SweepResult sweep_eps(const Discretization& disc, const RunConfig& base,
                      const std::vector<double>& eps_values,
                      const std::string& out_dir = "");

struct StabilityPoint {
  double delta = 0.0;
  double initial_distance = 0.0;  // ||d phi0||_V + ||d psi0||_VG
  double response = 0.0;          // combined trajectory norm of the difference
  double ratio = 0.0;             // response / initial_distance
};

struct StabilityResult {
  std::vector<StabilityPoint> points;
  bool bounded_ratio = false;  // R(delta/2) <= 1.5 R(delta) down the list
};

// Doubling experiment for continuous dependence; requires constant nu and
// mobilities (ValidationError otherwise). The perturbation is
// delta * cos(pi x) cos(pi y) added to phi0 (psi0 follows the trace).
StabilityResult stability_experiment(const Discretization& disc,
                                     const RunConfig& base,
                                     const std::vector<double>& deltas);

struct MmsCase {
  std::string name;
  std::vector<int> levels;
  std::vector<double> errors;
  double order = 0.0;
  double worst_energy_residual = 0.0;  // Brinkman cases only
};

struct MmsResult {
  std::vector<MmsCase> cases;
  bool velocity_orders_ok = false;  // every Brinkman case >= 1.7
  bool elliptic_orders_ok = false;  // elliptic cases within [1.7, 2.3]
};

// Brinkman velocity convergence for (lambda>0, gamma>0), (lambda=0, gamma>0),
// (lambda=0, gamma=0) and the coupled elliptic block for K = 1 and K = 0.
MmsResult mms_battery(const std::vector<int>& levels);

struct SpinodalMode {
  double wavenumber_k = 1.0;  // phi0 = mean + delta cos(k pi x)
  double rate_predicted = 0.0;
  double rate_measured = 0.0;
  double relative_error = 0.0;
};

struct SpinodalResult {
  std::vector<SpinodalMode> modes;
  bool within_tolerance = false;  // every mode within 5%
};

// Single-mode growth/decay rates against -M k^2 (k^2 + F''(0)) with k the
// continuous wavenumber k_mode * pi. Uses weak coupling (large K) so the
// bulk linearization governs.
SpinodalResult spinodal_experiment(int n, double alpha,
                                   const std::vector<double>& modes,
                                   double dt, int steps);

// Worker pool over an index range; worker count from CHB_WORKERS (defaults to
// hardware concurrency), capped by the task count.
void parallel_for_each(int count, const std::function<void(int)>& task);

}  // namespace chb
