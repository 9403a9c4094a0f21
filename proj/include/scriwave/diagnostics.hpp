#pragma once

// Fuchsian composite variables (W, X, Y), energy functionals and theorem-bound
// monitors, decay-exponent fits, residuals of the differentiated / projected /
// flow-regularized systems, and reconstruction of u and ubar.

#include "scriwave/evolution.hpp"
#include "scriwave/flow.hpp"

#include <vector>

namespace scriwave::diag {

using Eigen::ArrayXXd;

/// Per-point flow parameters for the Y-inversion (exact coefficient mode).
std::vector<flow::FlowParams> make_flow_context(const evol::EvolveContext& ctx,
                                                const evol::Grid& g);

struct CompositeState {
  double t = 0;
  ArrayXXd W;         // t^kappa d_rho V (5N x npts)
  ArrayXXd Wth, Wph;  // full mode only
  ArrayXXd X;         // t^-nu P V
  ArrayXXd Y;         // N x npts
};

/// Builds (W, X, Y); Y needs one flow inversion per grid point.
CompositeState composite(const evol::StateField& V, const evol::EvolveContext& ctx,
                         const std::vector<flow::FlowParams>& flow_ctx);

struct EnergyRecord {
  double t = 0;
  double z_norm2 = 0;      // h-energy of Z = (W, X, Y)
  double pi_norm2 = 0;     // h-energy of Pi Z = (W, X, 0)
  double pi_integral = 0;  // running integral of pi_norm2 d(ln tau)
  double v0_sup = 0;
  double pv_hk = 0, dv_hk = 0;
};

EnergyRecord energies(const CompositeState& z, const evol::Grid& g);

/// Accumulates the running Pi-integral by the trapezoid rule in ln tau.
class EnergyMonitor {
 public:
  EnergyRecord push(EnergyRecord rec);

 private:
  bool have_prev_ = false;
  double prev_t_ = 0, prev_pi_ = 0, total_ = 0;
};

struct DecayFit {
  double slope_pv = 0, slope_dv = 0;
  bool pass_pv = false, pass_dv = false;
  double slope_pv_hk = 0, slope_dv_hk = 0;
  int samples_used = 0;
};

/// Least-squares slopes of log norms against log t over the final decade of
/// the history; pass when slope >= theorem exponent - 0.2 (one-sided bounds).
DecayFit decay_fit(const std::vector<evol::StepRecord>& records, const sym::ExponentParams& exps);

/// Synthetic-fit helper used by tests: slope of a pure power law.
double fit_decay_exponent(const std::vector<double>& times, const std::vector<double>& norms);

struct ResidualNorms {
  double w_eq = 0;  // differentiated system
  double x_eq = 0;  // projected system
  double y_eq = 0;  // flow-regularized scalar system
};

/// Evaluates the three derived evolution equations on consecutive snapshots
/// (spherical mode); snapshots must be equally spaced in ln t.
ResidualNorms system_residuals(const evol::StateField& prev, const evol::StateField& mid,
                               const evol::StateField& next, const evol::EvolveContext& ctx,
                               const std::vector<flow::FlowParams>& flow_ctx);

/// The bounded source remainder G = F - (1/t) Q e0 at one grid column.
Eigen::VectorXd split_remainder(const Eigen::VectorXd& v_point, double t, double rho, int angle,
                                const evol::EvolveContext& ctx);

/// Time-interpolating view of a snapshot history (decreasing t).
class History {
 public:
  explicit History(std::vector<evol::StateField> snaps);
  /// V4 at (t, rho), interpolated bilinearly in (ln t, rho); angle 0.
  double v4(int K, double t, double rho) const;
  const std::vector<evol::StateField>& snapshots() const { return snaps_; }

 private:
  std::vector<evol::StateField> snaps_;  // decreasing t
};

/// u on the compact slab (from the stored V4) and ubar at a physical point.
double reconstruct_u_at(const History& h, int K, double t, double rho, int m);
double reconstruct_ubar_at(const History& h, int K, double tbar, double rbar, int m);

/// Theorem item 3 monitor: sup over sampled ray points of
/// |ubar| / ((tbar-rbar)/(1+tbar-rbar) (1+tbar-rbar)^{1/2-nu-kappa+zeta}).
double pointwise_bound_constant(const History& h, int K, const sym::RunConstants& rc);

// Z-system block assembly (property tests of the complete Fuchsian system).
struct ZBlocks {
  Eigen::MatrixXd A0, A1, Acal, Pi;    // (11N)x(11N), spherical-layout (W_rho, X, Y)
  Eigen::VectorXd h_weight;            // diagonal weight of the Z inner product
};
ZBlocks assemble_z_blocks(double t, double rho, double theta, const evol::EvolveContext& ctx);

}  // namespace scriwave::diag
