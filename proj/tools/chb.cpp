// Command-line front end: single runs, the K->0 / eps->0 / stability
// campaigns, the manufactured-solution battery, the spinodal dispersion check
// and config validation.
//
// Exit codes: 0 success, 64 usage error, 65 validation error, 66 unreadable
// config, 70 solver failure.

#include <CLI11.hpp>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "chb/errors.hpp"
#include "chb/experiments.hpp"
#include "chb/io.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 64;
constexpr int kExitValidation = 65;
constexpr int kExitConfig = 66;
constexpr int kExitSolver = 70;

struct CliOptions {
  std::string config_path;
  std::string out_dir;
  long seed = -1;  // -1: keep the config's seed
};

chb::RunConfig load_and_validate(const CliOptions& opt) {
  chb::RunConfig rc = chb::load_config(opt.config_path);
  if (opt.seed >= 0) rc.model.seed = static_cast<unsigned long long>(opt.seed);
  if (!opt.out_dir.empty()) rc.output.dir = opt.out_dir;
  rc.validate();
  return rc;
}

int run_single(const CliOptions& opt) {
  const chb::RunConfig rc = load_and_validate(opt);
  const chb::Discretization disc(rc.n);
  std::filesystem::create_directories(rc.output.dir);
  std::ofstream csv(rc.output.dir + "/timeseries.csv");
  csv << chb::timeseries_csv_header();
  int step = 0;
  chb::run_simulation(disc, rc.model,
                      [&](const chb::FieldState& state, const chb::DiagnosticsRecord& rec) {
                        csv << chb::timeseries_csv_row(rec);
                        if (rc.output.fields_every > 0 &&
                            step % rc.output.fields_every == 0) {
                          std::map<std::string, Eigen::VectorXd> fields{
                              {"phi", state.phi}, {"mu", state.mu}};
                          chb::write_vtk_bulk(
                              rc.output.dir + "/fields_" + std::to_string(step) + ".vtk",
                              disc, fields,
                              state.flow.is_zero() ? nullptr : &state.flow);
                          chb::write_vtk_surface(rc.output.dir + "/fields_" +
                                                     std::to_string(step) + "_surface.vtk",
                                                 disc,
                                                 {{"psi", state.psi}, {"theta", state.theta}});
                        }
                        ++step;
                      });
  std::cout << "run: " << (step - 1) << " steps written to " << rc.output.dir << "\n";
  return kExitOk;
}

int run_sweep_k(const CliOptions& opt) {
  const chb::RunConfig rc = load_and_validate(opt);
  const chb::Discretization disc(rc.n);
  const chb::SweepResult res = chb::sweep_k(disc, rc, rc.k_list, rc.output.dir);
  std::cout << "sweep-k: fitted slope " << res.slope << " over " << res.fit_points
            << " points (residual " << res.fit_residual << ")\n";
  for (const auto& r : res.runs)
    std::cout << "  K=" << r.param << "  sup||psi - phi|| = " << r.sup_mismatch << "\n";
  return kExitOk;
}

int run_sweep_eps(const CliOptions& opt) {
  const chb::RunConfig rc = load_and_validate(opt);
  const chb::Discretization disc(rc.n);
  const chb::SweepResult res = chb::sweep_eps(disc, rc, rc.eps_list, rc.output.dir);
  for (const auto& r : res.runs)
    std::cout << "  eps=" << r.param << "  max(|phi|-1)_+ = " << r.max_excess
              << "  max|phi| = " << r.max_abs_phi << "\n";
  return kExitOk;
}

int run_stability(const CliOptions& opt) {
  const chb::RunConfig rc = load_and_validate(opt);
  const chb::Discretization disc(rc.n);
  const chb::StabilityResult res = chb::stability_experiment(disc, rc, rc.delta_list);
  for (const auto& p : res.points)
    std::cout << "  delta=" << p.delta << "  R = " << p.ratio << "\n";
  std::cout << (res.bounded_ratio ? "bounded-ratio check passed\n"
                                  : "bounded-ratio check FAILED\n");
  return res.bounded_ratio ? kExitOk : kExitSolver;
}

int run_mms(const std::vector<int>& levels) {
  const chb::MmsResult res = chb::mms_battery(levels);
  bool ok = true;
  for (const auto& c : res.cases) {
    std::cout << "  " << c.name << ": order " << c.order << " | errors";
    for (double e : c.errors) std::cout << " " << e;
    std::cout << "\n";
  }
  ok = res.velocity_orders_ok && res.elliptic_orders_ok;
  std::cout << (ok ? "convergence orders OK\n" : "convergence orders BELOW threshold\n");
  return ok ? kExitOk : kExitSolver;
}

int run_spinodal(int n, double alpha, double dt, int steps) {
  const chb::SpinodalResult res =
      chb::spinodal_experiment(n, alpha, {1.0, 2.0}, dt, steps);
  for (const auto& m : res.modes)
    std::cout << "  k=" << m.wavenumber_k << "  measured " << m.rate_measured
              << "  predicted " << m.rate_predicted << "  rel.err "
              << m.relative_error << "\n";
  return res.within_tolerance ? kExitOk : kExitSolver;
}

int run_validate(const CliOptions& opt) {
  const chb::RunConfig rc = load_and_validate(opt);
  std::cout << "configuration OK: " << rc.source_path << " (hash "
            << rc.source_hash << ")\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"chb - bulk-surface Cahn-Hilliard-Brinkman simulator"};
  app.require_subcommand(1);

  CliOptions opt;
  std::vector<int> mms_levels{4, 8, 16, 32};
  int spin_n = 32;
  double spin_alpha = 20.0;
  double spin_dt = 1e-5;
  int spin_steps = 12;

  auto add_common = [&](CLI::App* sub, bool needs_config) {
    auto* copt = sub->add_option("--config", opt.config_path, "run configuration file");
    if (needs_config) copt->required();
    sub->add_option("--out", opt.out_dir, "output directory (overrides output.dir)");
    sub->add_option("--seed", opt.seed, "random seed (overrides the config)");
  };

  add_common(app.add_subcommand("run", "advance a single simulation"), true);
  add_common(app.add_subcommand("sweep-k", "coupling-parameter sweep K -> 0"), true);
  add_common(app.add_subcommand("sweep-eps", "regularization sweep eps -> 0"), true);
  add_common(app.add_subcommand("stability", "continuous-dependence doubling experiment"),
             true);
  auto* mms = app.add_subcommand("mms", "manufactured-solution convergence battery");
  mms->add_option("--levels", mms_levels, "refinement levels");
  auto* spin = app.add_subcommand("spinodal", "single-mode dispersion check");
  spin->add_option("--n", spin_n, "mesh subdivisions");
  spin->add_option("--alpha", spin_alpha, "polynomial potential strength");
  spin->add_option("--dt", spin_dt, "time step");
  spin->add_option("--steps", spin_steps, "number of steps");
  add_common(app.add_subcommand("validate", "validate a configuration file"), true);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return e.get_exit_code() == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (app.got_subcommand("run")) return run_single(opt);
    if (app.got_subcommand("sweep-k")) return run_sweep_k(opt);
    if (app.got_subcommand("sweep-eps")) return run_sweep_eps(opt);
    if (app.got_subcommand("stability")) return run_stability(opt);
    if (app.got_subcommand("mms")) return run_mms(mms_levels);
    if (app.got_subcommand("spinodal"))
      return run_spinodal(spin_n, spin_alpha, spin_dt, spin_steps);
    if (app.got_subcommand("validate")) return run_validate(opt);
  } catch (const chb::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const chb::ValidationError& e) {
    std::cerr << "validation error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const chb::SolverError& e) {
    std::cerr << "solver error: " << e.what() << "\n";
    return kExitSolver;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  }
  return kExitUsage;
}
