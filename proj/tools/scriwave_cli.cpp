// Command-line driver: verify / flow / evolve / mms / report subcommands.

#include "scriwave/config.hpp"
#include "scriwave/diagnostics.hpp"
#include "scriwave/initial_data.hpp"
#include "scriwave/report.hpp"

#include "CLI11.hpp"

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

namespace fs = std::filesystem;
using namespace scriwave;

namespace {

std::string num(double v) {
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

struct CommonArgs {
  std::string config_path;
  std::string out_dir = "run";
  std::uint64_t seed = 0;  // 0: take from config
  std::string mode;        // optional override: spherical | full
};

config::RunConfig load(const CommonArgs& args) {
  config::RunConfig cfg =
      args.config_path.empty() ? config::RunConfig{} : config::load_config(args.config_path);
  if (args.config_path.empty()) {
    cfg.grid.rho_lo = cfg.domain.torus_lo();
    cfg.grid.rho_hi = cfg.domain.torus_hi();
  }
  if (args.seed != 0) cfg.seed = args.seed;
  if (args.mode == "spherical")
    cfg.grid.mode = evol::Grid::Mode::spherical;
  else if (args.mode == "full")
    cfg.grid.mode = evol::Grid::Mode::full;
  else if (!args.mode.empty())
    throw ConfigError("--mode must be spherical or full");
  fs::create_directories(args.out_dir);
  return cfg;
}

std::string path_in(const CommonArgs& args, const std::string& name) {
  return (fs::path(args.out_dir) / name).string();
}

int run_verify(const CommonArgs& args) {
  config::RunConfig cfg = load(args);
  Rng rng(cfg.seed);
  auto rows = report::run_identity_suite(cfg, rng);
  report::write_identity_report(path_in(args, "identity_report.csv"), rows);
  bool all = true;
  for (const auto& r : rows) {
    std::cout << (r.pass ? "[PASS] " : "[FAIL] ") << r.name << "  residual=" << r.max_residual
              << " tol=" << r.tolerance << "\n";
    all = all && r.pass;
  }
  std::cout << (all ? "verify: all identities hold" : "verify: FAILURES present")
            << " (seed " << cfg.seed << ")\n";
  return all ? 0 : 1;
}

int run_flow(const CommonArgs& args) {
  config::RunConfig cfg = load(args);
  sym::RunConstants rc = cfg.make_constants();
  Rng rng(cfg.seed);
  coeffs::NullForm nf(cfg.coefficients);
  const double rho_mid = 0.5 * (cfg.domain.rho0 + cfg.domain.rho1);
  flow::FlowParams p = flow::make_params(nf, rho_mid, M_PI / 2.0, 0.0, 1.0, cfg.domain.m, rc.t0);

  flow::ClassifyResult cls = flow::classify_bounded(p, 0.5, 24, cfg.domain.t_min, rng);
  double t_star = 0.0;
  if (cls.verdict == flow::Verdict::blowup) {
    // locate a representative blow-up time on the worst probed direction
    flow::FlowTrajectory tr =
        flow::integrate_flow(p, Eigen::VectorXd::Constant(cfg.n_unknowns, 0.5), 1e-6);
    if (tr.verdict == flow::Verdict::blowup) t_star = tr.t_star;
  }
  flow::IntegrateOptions io;
  io.with_jacobian = true;
  io.record_stride = 10;
  flow::FlowTrajectory sample = flow::integrate_flow(
      p, Eigen::VectorXd::Constant(cfg.n_unknowns, -0.25), cfg.domain.t_min, io);
  report::write_flow_trajectories_csv(path_in(args, "flow_trajectories.csv"), sample);
  report::write_flow_verdict_json(path_in(args, "flow_verdict.json"), cls, t_star, cfg.seed);
  std::cout << "flow: verdict "
            << (cls.verdict == flow::Verdict::bounded
                    ? "bounded"
                    : cls.verdict == flow::Verdict::blowup ? "blowup" : "inconclusive")
            << ", C = " << cls.C << ", R0 = " << cls.R0 << "\n";
  return 0;
}

int run_evolve(const CommonArgs& args) {
  config::RunConfig cfg = load(args);
  sym::RunConstants rc = cfg.make_constants();
  evol::Grid g = config::make_grid(cfg);

  evol::EvolveContext ctx;
  ctx.constants = rc;
  ctx.source = evol::make_source_context(cfg.coefficients, g);
  ctx.n_unknowns = cfg.n_unknowns;

  evol::StateField initial = [&] {
    if (!cfg.data_csv.empty())
      return idata::build_initial_state_gridded(
          idata::load_gridded_csv(cfg.data_csv, cfg.n_unknowns), g, rc, cfg.data_variant);
    idata::DataSet data = cfg.data;
    for (auto* fields : {&data.vbar, &data.wbar, &data.zbar}) fields->resize(cfg.n_unknowns);
    return idata::build_initial_state(data, g, rc, cfg.data_variant);
  }();
  idata::ConstraintReport cons = idata::constraint_residual(initial, rc);

  evol::EvolveResult run = evolve(initial, cfg.solver, ctx);

  // composite energies at snapshot times
  auto fctx = diag::make_flow_context(ctx, g);
  diag::EnergyMonitor monitor;
  std::vector<diag::EnergyRecord> energies;
  for (const auto& snap : run.snapshots) {
    diag::EnergyRecord rec = diag::energies(diag::composite(snap, ctx, fctx), g);
    energies.push_back(monitor.push(rec));
  }
  report::write_energy_csv(path_in(args, "energy.csv"), run.records, energies);
  if (run.snapshots.size() >= 3 && cfg.grid.mode == evol::Grid::Mode::spherical) {
    const size_t i = run.snapshots.size() / 2;
    std::vector<std::pair<int, diag::ResidualNorms>> rows;
    rows.push_back({g.n_rho, diag::system_residuals(run.snapshots[i - 1], run.snapshots[i],
                                                    run.snapshots[i + 1], ctx, fctx)});
    report::write_residuals_csv(path_in(args, "residuals.csv"), rows);
  }
  if (cfg.output.write_states)
    for (const auto& snap : run.snapshots) {
      std::ostringstream name;
      name << "state_t=" << snap.t << ".csv";
      report::write_state_csv(path_in(args, name.str()), snap, cfg.domain.m);
    }
  if (cfg.output.svg) {
    std::vector<std::pair<double, double>> pv, dv;
    for (const auto& r : run.records) {
      pv.push_back({r.t, r.pv_l2});
      dv.push_back({r.t, r.dv_l2});
    }
    report::svg_line_chart(path_in(args, "energy.svg"), {{"|PV|", pv}, {"|DV|", dv}});
  }

  std::vector<std::string> lines;
  lines.push_back("seed " + std::to_string(cfg.seed));
  lines.push_back("verdict " +
                  std::string(run.verdict == evol::RunVerdict::completed ? "completed" : "blowup"));
  lines.push_back("t_end " + num(run.t_end));
  lines.push_back("constraint res1 displayed " + num(cons.res1_displayed) + " chain " +
                  num(cons.res1_chain));
  double ce = 0.0;
  const double z0 = energies.empty() ? 0.0 : energies.front().z_norm2;
  for (const auto& e : energies)
    if (z0 > 0.0) ce = std::max(ce, std::sqrt((e.z_norm2 + e.pi_integral) / z0));
  lines.push_back("energy constant C_E " + num(ce));
  if (run.records.size() >= 10) {
    diag::DecayFit fit = diag::decay_fit(run.records, cfg.exponents);
    lines.push_back("slope |PV| " + num(fit.slope_pv) + " pass " + std::to_string(fit.pass_pv));
    lines.push_back("slope |DV| " + num(fit.slope_dv) + " pass " + std::to_string(fit.pass_dv));
    report::write_theorem_bounds_csv(path_in(args, "theorem_bounds.csv"), run.records, fit);
  }
  report::write_summary(path_in(args, "summary.txt"), lines);
  for (const auto& l : lines) std::cout << l << "\n";
  return run.verdict == evol::RunVerdict::completed ? 0 : 3;
}

int run_mms(const CommonArgs& args) {
  config::RunConfig cfg = load(args);
  sym::RunConstants rc = cfg.make_constants();
  std::vector<int> levels = {64, 128, 256};
  std::vector<double> errs;
  for (int n : levels) {
    evol::Grid g = config::make_grid(cfg);
    g.mode = evol::Grid::Mode::spherical;
    g.n_rho = n;
    evol::EvolveContext ctx;
    ctx.constants = rc;
    ctx.source = evol::make_source_context(cfg.coefficients, g);
    ctx.n_unknowns = cfg.n_unknowns;
    evol::Manufactured mu(g, cfg.domain, 1e-3);
    evol::SolverConfig sc = cfg.solver;
    sc.ds = 2.5e-4;
    sc.t_min = rc.t0 * std::exp(-0.5);
    sc.forcing = &mu;
    sc.snapshot_stride = 1 << 20;
    sc.record_stride = 1 << 20;
    evol::EvolveResult run = evolve(mu.state(rc.t0, g, cfg.domain.m, cfg.n_unknowns), sc, ctx);
    if (run.verdict != evol::RunVerdict::completed) throw NumericalError("mms run blew up");
    evol::StateField exact = mu.state(run.t_end, g, cfg.domain.m, cfg.n_unknowns);
    errs.push_back(evol::l2_norm(run.snapshots.back().comps - exact.comps, g) /
                   std::max(1e-300, evol::l2_norm(exact.comps, g)));
  }
  std::vector<std::string> lines;
  bool pass = true;
  for (size_t i = 0; i < levels.size(); ++i) {
    std::ostringstream os;
    os << "n=" << levels[i] << " relative_error=" << errs[i];
    if (i > 0) {
      const double order = std::log2(errs[i - 1] / errs[i]);
      os << " observed_order=" << order;
      pass = pass && order >= 1.8;
    }
    lines.push_back(os.str());
  }
  lines.push_back(pass ? "mms: PASS (order >= 1.8)" : "mms: FAIL");
  report::write_summary(path_in(args, "mms_report.txt"), lines);
  for (const auto& l : lines) std::cout << l << "\n";
  return pass ? 0 : 1;
}

int run_report(const CommonArgs& args, bool svg) {
  config::RunConfig cfg = load(args);
  // post-process an existing run directory from its energy.csv
  std::ifstream f(path_in(args, "energy.csv"));
  if (!f) throw ConfigError("report: no energy.csv in " + args.out_dir);
  std::string header;
  std::getline(f, header);
  std::vector<evol::StepRecord> records;
  std::string line;
  while (std::getline(f, line)) {
    evol::StepRecord r{};
    double z2, pi2, piint;
    if (std::sscanf(line.c_str(), "%lf,%lf,%lf,%lf,%lf,%lf,%lf,%lf,%lf", &r.t, &z2, &pi2, &piint,
                    &r.pv_l2, &r.dv_l2, &r.v0_sup, &r.pv_h2, &r.dv_h2) == 9)
      records.push_back(r);
  }
  if (records.size() < 10) throw NumericalError("report: not enough samples in energy.csv");
  diag::DecayFit fit = diag::decay_fit(records, cfg.exponents);
  report::write_theorem_bounds_csv(path_in(args, "theorem_bounds.csv"), records, fit);
  std::vector<std::string> lines;
  lines.push_back("slope |PV| " + num(fit.slope_pv) + " (threshold " +
                  num(cfg.exponents.nu - 0.2) + ") pass " + std::to_string(fit.pass_pv));
  lines.push_back("slope |DV| " + num(fit.slope_dv) + " (threshold " +
                  num(-cfg.exponents.kappa - 0.2) + ") pass " + std::to_string(fit.pass_dv));
  report::write_summary(path_in(args, "report_summary.txt"), lines);
  if (svg) {
    std::vector<std::pair<double, double>> pv, dv;
    for (const auto& r : records) {
      pv.push_back({r.t, r.pv_l2});
      dv.push_back({r.t, r.dv_l2});
    }
    report::svg_line_chart(path_in(args, "energy.svg"), {{"|PV|", pv}, {"|DV|", dv}});
  }
  for (const auto& l : lines) std::cout << l << "\n";
  return fit.pass_pv && fit.pass_dv ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Conformal-Fuchsian evolution toolkit for semilinear waves near null infinity"};
  app.require_subcommand(1);
  app.fallthrough();
  CommonArgs args;
  app.add_option("--config", args.config_path, "run configuration file");
  app.add_option("--out", args.out_dir, "output directory");
  app.add_option("--seed", args.seed, "override the sampling seed");
  app.add_option("--mode", args.mode, "grid mode override: spherical|full");
  bool svg = false;

  auto* verify = app.add_subcommand("verify", "run the identity suite");
  auto* flow_cmd = app.add_subcommand("flow", "asymptotic flow scenarios");
  auto* evolve_cmd = app.add_subcommand("evolve", "initial data -> evolution -> diagnostics");
  auto* mms = app.add_subcommand("mms", "manufactured-solution convergence harness");
  auto* rep = app.add_subcommand("report", "post-process an existing run directory");
  rep->add_flag("--svg", svg, "also write an SVG chart");

  CLI11_PARSE(app, argc, argv);
  try {
    if (verify->parsed()) return run_verify(args);
    if (flow_cmd->parsed()) return run_flow(args);
    if (evolve_cmd->parsed()) return run_evolve(args);
    if (mms->parsed()) return run_mms(args);
    if (rep->parsed()) return run_report(args, svg);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 3;
  } catch (const DomainError& e) {
    std::cerr << "domain error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
