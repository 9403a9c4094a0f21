#pragma once

// The asymptotic flow: log-time integration of d_t xi = Q(xi)/t, blow-up
// detection, the flow Jacobian and its co-integrated inverse, boundedness
// classification, and the V0 <-> Y change of variables.

#include "scriwave/coefficients.hpp"
#include "scriwave/numerics.hpp"

#include <vector>

namespace scriwave::flow {

using Eigen::MatrixXd;
using Eigen::VectorXd;

enum class CoefficientMode { exact, frozen };

struct FlowParams {
  int n = 1;
  std::vector<MatrixXd> b;  // b[K](I,J), evaluated at the spatial point
  double rho = 0.987;
  int m = 1;
  double chi = 1.0;
  double t0 = consts::default_t0();
  CoefficientMode mode = CoefficientMode::exact;
};

/// Flow parameters at a spatial point y = (rho, theta, phi).
FlowParams make_params(const coeffs::NullForm& nf, double rho, double theta, double phi,
                       double chi_value, int m, double t0,
                       CoefficientMode mode = CoefficientMode::exact);

/// Scalar frozen-coefficient parameters with rho^m b chi / 2 == c0.
FlowParams scalar_frozen(double c0, double t0);

/// -rho^{3m} chi / (2 (rho^{2m} - (1-rho^m)^2 t)), or its t->0 limit in frozen mode.
double q_prefactor(double t, const FlowParams& p);

/// Q^K(xi) = prefactor * b^K_{IJ} xi^I xi^J.
VectorXd q_rhs(double t, const VectorXd& xi, const FlowParams& p);

/// Linearization L^K_M = prefactor * (b^K_{MI} + b^K_{IM}) xi^I.
MatrixXd q_linearization(double t, const VectorXd& xi, const FlowParams& p);

enum class Verdict { bounded, blowup, inconclusive };

struct FlowTrajectory {
  std::vector<double> times;     // decreasing, first entry t0
  std::vector<VectorXd> xi;
  std::vector<MatrixXd> jac;      // D_xi0 xi, present when requested
  std::vector<MatrixXd> jac_inv;  // co-integrated inverse
  Verdict verdict = Verdict::inconclusive;
  double t_star = 0.0;  // blow-up time when verdict == blowup
  double bound_C = 0.0; // sup |xi| over the run
};

struct IntegrateOptions {
  double ds = 1e-3;             // log-time step
  bool with_jacobian = false;
  double blowup_threshold = 1e8;
  int record_stride = 1;        // store every k-th accepted step
};

/// Integrates backward from t0 to t_min in s = ln t with fixed-step RK4;
/// near blow-up the step is clamped so the pole location is resolved, and
/// the reported t_star is accurate to ~|xi|^{-1} in s.
FlowTrajectory integrate_flow(const FlowParams& p, const VectorXd& xi0, double t_min,
                              const IntegrateOptions& opts = {});

/// Richardson error estimate: re-integrates with ds/2 and returns the max
/// relative deviation over matching times.
double step_halving_error(const FlowParams& p, const VectorXd& xi0, double t_min, double ds);

struct ClassifyResult {
  Verdict verdict = Verdict::inconclusive;
  double C = 0.0;        // sup |xi| over all probed trajectories
  double R0 = 0.0;       // largest probed radius with all trajectories bounded
  double linearity = 0.0;  // regression slope of sup|xi| against R (C/R0 estimate)
};

/// Probes initial spheres of radius R, R/2, R/4 with n_samples directions each.
ClassifyResult classify_bounded(const FlowParams& p, double R, int n_samples, double t_min,
                                Rng& rng, const IntegrateOptions& opts = {});

enum class Direction { to_Y, to_V0 };

/// Solves V0 = F(t, t0, y, Y) for Y (to_Y, Newton) or evaluates the flow (to_V0).
VectorXd y_transform(const VectorXd& value, double t, const FlowParams& p, Direction dir,
                     double ds = 1e-3);

/// (D_Y F)^{-1} at the given Y, by co-integration down to t.
MatrixXd flow_map_inverse_jacobian(const VectorXd& Y, double t, const FlowParams& p,
                                   double ds = 1e-3);

}  // namespace scriwave::flow
