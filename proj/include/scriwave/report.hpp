#pragma once

// Run artifacts: the identity suite behind the verify subcommand, CSV/JSON
// writers, and a minimal SVG line chart for energy histories.

#include "scriwave/config.hpp"
#include "scriwave/diagnostics.hpp"
#include "scriwave/flow.hpp"

#include <string>
#include <vector>

namespace scriwave::report {

struct CheckRow {
  std::string name;
  double max_residual = 0;
  double tolerance = 0;
  bool pass = false;
};

/// Geometry + coefficients + symmetrizer identity checks (criterion-style
/// rows); deterministic under the supplied generator.
std::vector<CheckRow> run_identity_suite(const config::RunConfig& cfg, Rng& rng);

void write_identity_report(const std::string& path, const std::vector<CheckRow>& rows);

void write_energy_csv(const std::string& path, const std::vector<evol::StepRecord>& records,
                      const std::vector<diag::EnergyRecord>& energies);

void write_state_csv(const std::string& path, const evol::StateField& V, int m);

void write_flow_trajectories_csv(const std::string& path, const flow::FlowTrajectory& tr);

void write_flow_verdict_json(const std::string& path, const flow::ClassifyResult& res,
                             double t_star, std::uint64_t seed);

void write_theorem_bounds_csv(const std::string& path,
                              const std::vector<evol::StepRecord>& records,
                              const diag::DecayFit& fit);

void write_residuals_csv(const std::string& path,
                         const std::vector<std::pair<int, diag::ResidualNorms>>& rows);

void write_summary(const std::string& path, const std::vector<std::string>& lines);

/// Minimal static SVG line chart of (t, value) series on log-log axes.
void svg_line_chart(const std::string& path,
                    const std::vector<std::pair<std::string, std::vector<std::pair<double, double>>>>&
                        series);

}  // namespace scriwave::report
