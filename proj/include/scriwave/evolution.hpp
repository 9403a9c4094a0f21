#pragma once

// Backward log-time integration of the extended first-order system on the
// torus slab, the exact nonlinear source, a second-order reference solver,
// and the manufactured-solution harness.

#include "scriwave/coefficients.hpp"
#include "scriwave/state.hpp"
#include "scriwave/symmetrizer.hpp"

#include <optional>
#include <vector>

namespace scriwave::evol {

/// Angle-cached coefficient data for the nonlinear source.
struct SourceContext {
  int n_unknowns = 1;
  bool zero = true;
  std::vector<coeffs::CdeSample> cde;        // one per grid angle
  std::vector<std::vector<double>> b;        // per angle, N^3 values
  double bval(int angle, int K, int I, int J) const {
    const int n = n_unknowns;
    return b[angle][(size_t(K) * n + I) * n + J];
  }
};

SourceContext make_source_context(const coeffs::CartesianCoeffs& a, const Grid& g);

struct EvolveContext {
  sym::RunConstants constants;
  SourceContext source;
  sym::AssemblyOptions opts;
  int n_unknowns = 1;
};

struct PointSource {
  Eigen::VectorXd f;  // N values of the conformal source
  Eigen::VectorXd q;  // N values of the singular closed form -r^3 b V0 V0 / (2D), no cutoff
  Eigen::VectorXd F;  // 5N rows; only rows 0 and 1 of each unknown are nonzero
};

/// Source at one grid point from the state value alone (no cutoff applied).
PointSource source_f(const Eigen::VectorXd& v_point, double t, double r, int angle,
                     const SourceContext& ctx, const sym::AssemblyOptions& opts);

/// d_t V of the extended system; optional forcing is added as a d_t term.
StateField rhs_extended(const StateField& V, const EvolveContext& ctx,
                        const Eigen::ArrayXXd* forcing = nullptr);

// --- manufactured solutions -------------------------------------------------

/// Separable manufactured profile u = amp (1 + k_scale K) T(t) R(rho) with
/// analytic derivatives; the V-transcription is cut off before the torus seam.
struct Manufactured {
  double amp = 1e-3;
  double k_scale = 0.5;
  int waves = 2;
  double phase = 0.3;
  sym::Cutoff chi_mms;
  double rho_lo = 0.0, length = 1.0;

  Manufactured() = default;
  Manufactured(const Grid& g, const sym::DomainParams& dom, double amplitude);

  double radial(double rho) const;       // R
  double radial_d(double rho) const;     // R'
  double radial_dd(double rho) const;    // R''
  static double temporal(double t) { return t; }
  static double temporal_d(double) { return 1.0; }
  static double temporal_dd(double) { return 0.0; }

  double u(int K, double t, double rho) const;
  double u_t(int K, double t, double rho) const;
  double u_tt(int K, double t, double rho) const;
  double u_rho(int K, double t, double rho) const;
  double u_trho(int K, double t, double rho) const;
  double u_rhorho(int K, double t, double rho) const;

  /// V_mms and its analytic t- and rho-derivatives at one grid column.
  void v_columns(double t, double rho, int m, int n_unknowns, Eigen::VectorXd& v,
                 Eigen::VectorXd& v_t, Eigen::VectorXd& v_rho) const;

  StateField state(double t, const Grid& g, int m, int n_unknowns) const;
};

/// Analytic d_t-forcing that makes the manufactured state an exact solution
/// of the continuous extended system (spherical mode).
Eigen::ArrayXXd mms_forcing(const Manufactured& mu, double t, const Grid& g,
                            const EvolveContext& ctx);

// --- first-order evolution ---------------------------------------------------

struct SolverConfig {
  double ds = 2.5e-3;
  double t_min = 1e-3;
  double cfl_safety = 0.8;
  int snapshot_stride = 200;
  int record_stride = 1;
  const Manufactured* forcing = nullptr;
};

struct StepRecord {
  double t;
  double v_l2, v0_sup;
  double pv_l2, dv_l2;  // |P V|, |t^kappa d_rho V| in L2
  double pv_h2, dv_h2;  // discrete H^2 versions
};

enum class RunVerdict { completed, blowup };

struct EvolveResult {
  RunVerdict verdict = RunVerdict::completed;
  double t_end = 0.0;
  double ds_used = 0.0;
  std::vector<StateField> snapshots;
  std::vector<StepRecord> records;
};

EvolveResult evolve(const StateField& initial, const SolverConfig& cfg, const EvolveContext& ctx);

// --- second-order reference solver (spherical mode, raw equation) -----------

struct SecondOrderField {
  int n_unknowns = 1;
  Grid grid;
  double t = 0.0;
  Eigen::ArrayXXd u, w;  // N x n_points; w = t d_t u

  SecondOrderField() = default;
  SecondOrderField(int n, const Grid& g, double time)
      : n_unknowns(n),
        grid(g),
        t(time),
        u(Eigen::ArrayXXd::Zero(n, g.n_points())),
        w(Eigen::ArrayXXd::Zero(n, g.n_points())) {}
};

struct SecondOrderResult {
  RunVerdict verdict = RunVerdict::completed;
  std::vector<SecondOrderField> snapshots;
};

/// Integrates the raw conformal wave equation in (u, w = t d_t u) variables
/// with Dirichlet-by-extension edges; an oracle for the causal interior.
SecondOrderResult evolve_second_order(const SecondOrderField& initial, const SolverConfig& cfg,
                                      const EvolveContext& ctx);

/// Reconstruction u = (1-r) V4 / sqrt(t) on the grid.
Eigen::ArrayXXd reconstruct_u(const StateField& V, int m);

}  // namespace scriwave::evol
