#pragma once

// Change-of-variables matrices, the 5x5 blocks of the symmetric hyperbolic
// system, their cutoff extensions, the inner product h, boundary quadratic
// forms, and all derived run constants.
//
// Component order of the 5-vector is (0, 1, theta, phi, 4).

#include "scriwave/geometry.hpp"
#include "scriwave/numerics.hpp"

namespace scriwave::sym {

/// Smooth time weights of the symmetrizing change of variables:
/// a0 = (3+sqrt5)/(2+(3+sqrt5)t), a1 = -(1+sqrt5)/(2+(3+sqrt5)t),
/// p = sqrt(1+t(3+t)), q = (1+sqrt5)t/(3+sqrt5+2t).
template <class S>
struct TimeWeights {
  S a0, a1, p, q;
  S dp;  // dp/dt
};

template <class S>
TimeWeights<S> time_weights(S t) {
  const S s5 = S(consts::sqrt5);
  const S den = S(2) + (S(3) + s5) * t;
  TimeWeights<S> w;
  w.a0 = (S(3) + s5) / den;
  w.a1 = -(S(1) + s5) / den;
  w.p = sqrt(S(1) + t * (S(3) + t));
  w.q = (S(1) + s5) * t / (S(3) + s5 + S(2) * t);
  w.dp = (S(3) + S(2) * t) / (S(2) * w.p);
  return w;
}

/// M of V = M U; requires the region quantity to be nonzero.
Mat5 mixing_matrix(double t, double r);
Mat5 mixing_matrix_inv(double t, double r);
Mat5 mixing_matrix_dt(double t, double r);

/// Bcal's displayed Lambda-row couples V_Lambda to V0, V1 through Ccal entries
/// that a direct re-derivation does not produce, and the displayed F row 1
/// carries (1-r)^2 where the derivation gives (1-r). Both forms are available;
/// defaults follow the canonical choices recorded in the project history.
struct AssemblyOptions {
  bool lambda_row_sources = true;  // Ccal (Lambda,0/1) entries as displayed
  bool displayed_f_row1 = false;   // F row 1 with the displayed (1-r)^2
};

struct BlockSet {
  Mat5 B0 = Mat5::Identity();
  Mat5 B1 = Mat5::Zero();
  Mat5 Btheta = Mat5::Zero();
  Mat5 Bphi = Mat5::Zero();
  Mat5 Bcal = Mat5::Zero();
  Mat5 Ccal = Mat5::Zero();
};

/// Interior blocks at (t, r, theta); r is the plain radial coordinate.
BlockSet assemble(double t, double r, double theta, const AssemblyOptions& opts = {});

/// Radial block alone (depends on t only).
Mat5 radial_block(double t);

/// Starred blocks: the interior Bcal, Ccal evaluated at r = 1.
Mat5 bcal_star(double t);
Mat5 ccal_star(double t);

/// Projection onto components (1, theta, phi, 4).
inline Mat5 projector() {
  Mat5 P = Mat5::Identity();
  P(0, 0) = 0.0;
  return P;
}

/// Diagonal weight of the inner product h at colatitude theta.
Vec5 h_weight(double theta);

double inner_product_h(const Vec5& Y, const Vec5& X, double theta);

/// Smooth bump: 1 on [rho0, rho1], 0 outside (rho0-alpha, rho1+alpha).
class Cutoff {
 public:
  Cutoff() = default;
  Cutoff(double rho0, double rho1, double alpha);
  double operator()(double rho) const;
  double derivative(double rho) const;
  double rho0() const { return rho0_; }
  double rho1() const { return rho1_; }
  double alpha() const { return alpha_; }

 private:
  double rho0_ = 0, rho1_ = 0, alpha_ = 0;
};

struct ExtendedBlocks {
  double chi = 0;      // cutoff value
  double advect = 0;   // chi (1-rho^m) rho / m, coefficient of (1/t) B1 d_rho
  Mat5 B1 = Mat5::Zero();
  Mat5 Btilde = Mat5::Zero();
  Mat5 Ctilde = Mat5::Zero();
  Mat5 Btheta = Mat5::Zero();  // already multiplied by chi
  Mat5 Bphi = Mat5::Zero();
};

/// Extended blocks at (t, rho, theta) on the torus coordinate; interior
/// matrices are only evaluated where chi > 0, so the result is globally smooth.
ExtendedBlocks extend(double t, double rho, double theta, int m, const Cutoff& chi,
                      const AssemblyOptions& opts = {});

/// Boundary quadratic forms (weak-spacelikeness checks).
inline Mat5 gamma_plus_form() { return Mat5::Zero(); }
Mat5 gamma_minus_form(double t, double rho0, int m);
Mat5 gamma_parabola_form(double t);

struct DomainParams {
  int m = 1;
  double rho0 = 0.982;
  double rho1 = 0.992;
  double alpha = 0.002;
  double t0_override = 0.0;  // 0: use the closed form
  double t_min = 1e-3;
  double torus_lo() const { return rho0 - 2.0 * alpha; }
  double torus_hi() const { return rho1 + 2.0 * alpha; }
};

struct ExponentParams {
  double kappa = 0.01;
  double nu = 0.01;
  double epsilon = 0.004;
  double zeta = 0.005;
};

struct RunConstants {
  DomainParams domain;
  ExponentParams exps;
  Cutoff chi;
  double t0{}, gamma1{}, beta0{}, beta1{}, beta2{};
  double sigma{};    // sampled sup |Bcal - Bcal*| over supp chi x (0,t0)
  double sigma_C{};  // sampled sup |Ccal - Ccal*|
  double sigma1{};   // sup_t max(|B0|, |B1|)
  double sigma2{};   // sampled sup |d_rho(chi (1-rho^m) rho/m B1)|
  double coercivity_margin() const { return gamma1 - 1.1 * sigma; }
};

/// Computes t0, gamma1, the beta weights and the sampled sigma bounds, then
/// validates every inequality constraint; throws ConfigError listing all
/// violations. Sampling is deterministic through the supplied generator.
RunConstants compute_constants(const DomainParams& dom, const ExponentParams& exps, Rng& rng,
                               int n_samples = 10000);

}  // namespace scriwave::sym
