#pragma once

// Closed-form maps between the physical Minkowski chart and the compactified
// (t, r) chart, the conformal factor and metric, and a finite-difference
// check of the conformal wave-operator identity.
//
// Convention: r always denotes the un-reparametrized radial coordinate of the
// compact chart; evolution code working in the torus coordinate rho passes
// r = rho^m at entry.

#include "scriwave/numerics.hpp"

#include <functional>

namespace scriwave::geometry {

inline constexpr double kRegionTol = 1e-12;  // admissibility margin off the parabola
inline constexpr double kPoleTol = 1e-12;

struct PhysicalPoint {
  double tbar{}, rbar{}, theta{}, phi{};
};

struct CompactPoint {
  double t{}, r{}, theta{}, phi{};
};

struct MetricSample {
  Mat4 g_dd = Mat4::Zero();
  Mat4 g_uu = Mat4::Zero();
  double omega{};
};

template <class S>
S r_from_rho(S rho, int m) {
  S r = S(1);
  for (int i = 0; i < m; ++i) r *= rho;
  return r;
}

inline double rho_from_r(double r, int m) { return std::pow(r, 1.0 / m); }

/// r^2 - (1-r)^2 t; positive inside the region, zero on the parabola.
template <class S>
S region_quantity(S t, S r) {
  return r * r - (1 - r) * (1 - r) * t;
}

/// The parabola t = (r/(1-r))^2 bounding the region from above.
inline double parabola_t(double r) { return sq(r / (1.0 - r)); }

inline void require_region(double t, double r, const char* who) {
  if (!(t > 0.0) || !(r > 0.0) || !(r < 1.0) || region_quantity(t, r) < kRegionTol)
    throw DomainError(std::string(who) + ": point outside the compact region");
}

inline void require_nonpole(double theta, const char* who) {
  if (std::abs(std::sin(theta)) < kPoleTol)
    throw DomainError(std::string(who) + ": coordinate pole");
}

template <class S>
S map_forward_t(S tbar, S rbar) {
  return S(1) / (tbar * tbar - rbar * rbar);
}

template <class S>
S map_forward_r(S tbar, S rbar) {
  return S(1) / (S(1) + tbar - rbar);
}

inline CompactPoint map_forward(const PhysicalPoint& p) {
  if (!(p.tbar > 0.0) || sq(p.tbar) - sq(p.rbar) <= 0.0)
    throw DomainError("map_forward: tbar^2 - rbar^2 <= 0");
  return {map_forward_t(p.tbar, p.rbar), map_forward_r(p.tbar, p.rbar), p.theta, p.phi};
}

inline PhysicalPoint map_inverse(const CompactPoint& c) {
  require_region(c.t, c.r, "map_inverse");
  const double den = 2.0 * c.r * (1.0 - c.r) * c.t;
  const double tp = sq(c.r) + c.t * sq(1.0 - c.r);
  const double tm = region_quantity(c.t, c.r);
  return {tp / den, tm / den, c.theta, c.phi};
}

/// Jacobian J^mu_alpha = d x^mu / d xbar^alpha of the compactifying map,
/// expressed in the compact chart; angular block is the identity.
inline Mat4 jacobian_compact(const CompactPoint& c) {
  require_region(c.t, c.r, "jacobian_compact");
  const double t = c.t, r = c.r;
  Mat4 J = Mat4::Identity();
  J(0, 0) = (-t * r * r - sq(1.0 - r) * t * t) / (r * (1.0 - r));
  J(0, 1) = (t * r * r - sq(1.0 - r) * t * t) / (r * (1.0 - r));
  J(1, 0) = -r * r;
  J(1, 1) = r * r;
  return J;
}

/// Jacobian Jbar^alpha_mu of Cartesian -> spherical, rows (tbar,rbar,theta,phi).
inline Mat4 jacobian_spherical(const PhysicalPoint& p) {
  require_nonpole(p.theta, "jacobian_spherical");
  if (!(p.rbar > 0.0)) throw DomainError("jacobian_spherical: rbar <= 0");
  const double st = std::sin(p.theta), ct = std::cos(p.theta);
  const double sp = std::sin(p.phi), cp = std::cos(p.phi);
  const double rb = p.rbar;
  Mat4 J = Mat4::Zero();
  J(0, 0) = 1.0;
  J(1, 1) = st * cp;
  J(1, 2) = st * sp;
  J(1, 3) = ct;
  J(2, 1) = ct * cp / rb;
  J(2, 2) = ct * sp / rb;
  J(2, 3) = -st / rb;
  J(3, 1) = -sp / (st * rb);
  J(3, 2) = cp / (st * rb);
  return J;
}

/// Jacobian d xhat^mu / d xbar^alpha of spherical -> Cartesian (inverse of the above).
inline Mat4 jacobian_spherical_inverse(const PhysicalPoint& p) {
  const double st = std::sin(p.theta), ct = std::cos(p.theta);
  const double sp = std::sin(p.phi), cp = std::cos(p.phi);
  const double rb = p.rbar;
  Mat4 J = Mat4::Zero();
  J(0, 0) = 1.0;
  // columns: d/d rbar, d/d theta, d/d phi of (x, y, z) = rbar * nhat
  J(1, 1) = st * cp;
  J(1, 2) = rb * ct * cp;
  J(1, 3) = -rb * st * sp;
  J(2, 1) = st * sp;
  J(2, 2) = rb * ct * sp;
  J(2, 3) = rb * st * cp;
  J(3, 1) = ct;
  J(3, 2) = -rb * st;
  J(3, 3) = 0.0;
  return J;
}

template <class S>
S conformal_factor_tr(S t, S r) {
  return region_quantity(t, r) / (2 * r * (1 - r) * t);
}

inline double conformal_factor(const CompactPoint& c) {
  require_region(c.t, c.r, "conformal_factor");
  return conformal_factor_tr(c.t, c.r);
}

/// Analytic partials of the conformal factor; d_Lambda Omega = 0.
inline double conformal_factor_dt(double t, double r) { return -r / (2.0 * (1.0 - r) * t * t); }

inline double conformal_factor_dr(double t, double r) {
  return (r * r + t * sq(1.0 - r)) / (2.0 * r * r * sq(1.0 - r) * t);
}

/// Round metric on S^2 and its inverse at colatitude theta.
inline Mat2 round_metric(double theta) {
  Mat2 g;
  g << 1.0, 0.0, 0.0, sq(std::sin(theta));
  return g;
}

inline Mat2 round_metric_inv(double theta) {
  require_nonpole(theta, "round_metric_inv");
  Mat2 g;
  g << 1.0, 0.0, 0.0, 1.0 / sq(std::sin(theta));
  return g;
}

/// Compact-chart metric, its inverse, and the conformal factor at a point.
inline MetricSample metric_sample(const CompactPoint& c) {
  require_region(c.t, c.r, "metric_sample");
  const double t = c.t, r = c.r;
  const double D = region_quantity(t, r);
  MetricSample s;
  s.omega = conformal_factor_tr(t, r);
  s.g_dd(0, 1) = s.g_dd(1, 0) = -2.0 * r * (1.0 - r) / sq(D);
  s.g_dd(1, 1) = 4.0 * t / sq(D);
  s.g_dd.block<2, 2>(2, 2) = round_metric(c.theta);
  s.g_uu(0, 0) = -sq(D) * t / (sq(1.0 - r) * r * r);
  s.g_uu(0, 1) = s.g_uu(1, 0) = -sq(D) / (2.0 * (1.0 - r) * r);
  s.g_uu.block<2, 2>(2, 2) = round_metric_inv(c.theta);
  return s;
}

// ---------------------------------------------------------------------------
// Conformal wave-operator identity (finite-difference diagnostic)
// ---------------------------------------------------------------------------

/// Axis-aligned box in an abstract 4d Cartesian chart with a flat background.
struct ChartBox {
  Vec4 lo, hi;
  int samples_per_axis = 3;  // interior residual sample lattice
};

using ScalarField = std::function<double(const Vec4&)>;

/// Ricci scalar of a metric field by nested central differences.
double ricci_scalar_fd(const std::function<Mat4(const Vec4&)>& metric, const Vec4& x, double h);

struct WaveIdentityResult {
  double max_residual{};        // conformal wave-operator identity
  double max_source_residual{}; // quadratic-source identity against Omega^{1+n/2} scaling
};

/// Evaluates both sides of the conformal transformation law for the wave
/// operator (flat background, conformal metric Omega^2 eta, dimension n = 4)
/// and of the quadratic-source law, by finite differences over the box.
/// Returns max pointwise residuals; step is (box width)/64 per axis.
WaveIdentityResult conformal_wave_identity_check(const ScalarField& u_tilde,
                                                 const ScalarField& omega, const ChartBox& box);

}  // namespace scriwave::geometry
