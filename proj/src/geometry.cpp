#include "scriwave/geometry.hpp"

#include <array>

namespace scriwave::geometry {

namespace {

Vec4 shifted(const Vec4& x, int axis, double d) {
  Vec4 y = x;
  y[axis] += d;
  return y;
}

double d1(const ScalarField& f, const Vec4& x, int axis, double h) {
  return (-f(shifted(x, axis, 2 * h)) + 8.0 * f(shifted(x, axis, h)) -
          8.0 * f(shifted(x, axis, -h)) + f(shifted(x, axis, -2 * h))) /
         (12.0 * h);
}

double d2(const ScalarField& f, const Vec4& x, int axis, double h) {
  return (-f(shifted(x, axis, 2 * h)) + 16.0 * f(shifted(x, axis, h)) - 30.0 * f(x) +
          16.0 * f(shifted(x, axis, -h)) - f(shifted(x, axis, -2 * h))) /
         (12.0 * h * h);
}

Mat4 minkowski() {
  Mat4 eta = Mat4::Identity();
  eta(0, 0) = -1.0;
  return eta;
}

}  // namespace

double ricci_scalar_fd(const std::function<Mat4(const Vec4&)>& metric, const Vec4& x, double h) {
  using Christoffel = std::array<Mat4, 4>;  // Gamma[l](m,n) = Gamma^l_{mn}
  auto christoffel = [&](const Vec4& y) {
    Mat4 g = metric(y);
    Mat4 ginv = g.inverse();
    std::array<Mat4, 4> dg;  // dg[k] = d_k g
    for (int k = 0; k < 4; ++k)
      dg[k] = (-metric(shifted(y, k, 2 * h)) + 8.0 * metric(shifted(y, k, h)) -
               8.0 * metric(shifted(y, k, -h)) + metric(shifted(y, k, -2 * h))) /
              (12.0 * h);
    Christoffel G;
    for (int l = 0; l < 4; ++l) {
      G[l].setZero();
      for (int m = 0; m < 4; ++m)
        for (int n = 0; n < 4; ++n) {
          double s = 0;
          for (int k = 0; k < 4; ++k) s += ginv(l, k) * (dg[m](k, n) + dg[n](k, m) - dg[k](m, n));
          G[l](m, n) = 0.5 * s;
        }
    }
    return G;
  };

  Christoffel G = christoffel(x);
  std::array<Christoffel, 4> dG;  // dG[k] = d_k Gamma
  for (int k = 0; k < 4; ++k) {
    Christoffel p2 = christoffel(shifted(x, k, 2 * h)), p1 = christoffel(shifted(x, k, h));
    Christoffel m1 = christoffel(shifted(x, k, -h)), m2 = christoffel(shifted(x, k, -2 * h));
    for (int l = 0; l < 4; ++l) dG[k][l] = (-p2[l] + 8.0 * p1[l] - 8.0 * m1[l] + m2[l]) / (12.0 * h);
  }

  Mat4 ricci = Mat4::Zero();  // R_{sn} = d_m Gamma^m_{ns} - d_n Gamma^m_{ms} + ...
  for (int s = 0; s < 4; ++s)
    for (int n = 0; n < 4; ++n) {
      double v = 0;
      for (int m = 0; m < 4; ++m) {
        v += dG[m][m](n, s) - dG[n][m](m, s);
        for (int l = 0; l < 4; ++l) v += G[m](m, l) * G[l](n, s) - G[m](n, l) * G[l](m, s);
      }
      ricci(s, n) = v;
    }
  return (metric(x).inverse() * ricci).trace();
}

WaveIdentityResult conformal_wave_identity_check(const ScalarField& u_tilde,
                                                 const ScalarField& omega, const ChartBox& box) {
  const int n = 4;
  const Mat4 eta_inv = minkowski();  // diag(-1,1,1,1) is its own inverse
  const double h = (box.hi - box.lo).maxCoeff() / 64.0;

  // u_tilde = Omega^{1-n/2} u, i.e. u = Omega^{n/2-1} u_tilde
  ScalarField u = [&](const Vec4& x) {
    return std::pow(omega(x), 0.5 * n - 1.0) * u_tilde(x);
  };
  ScalarField omega_inv = [&](const Vec4& x) { return 1.0 / omega(x); };
  auto metric_conf = [&](const Vec4& x) { return Mat4(sq(omega(x)) * minkowski()); };

  WaveIdentityResult res;
  const int ns = box.samples_per_axis;
  Vec4 span = box.hi - box.lo;
  // keep the widest FD stencil (nested, radius 4h) inside the box
  Vec4 margin = Vec4::Constant(5.0 * h);

  Mat4 ahat;  // fixed generic constant coefficients for the source identity
  ahat << 1.0, 0.5, -0.25, 0.0, 0.5, -1.0, 0.75, 0.125, -0.25, 0.75, 2.0, -0.5, 0.0, 0.125, -0.5,
      0.25;

  for (int i0 = 0; i0 < ns; ++i0)
    for (int i1 = 0; i1 < ns; ++i1)
      for (int i2 = 0; i2 < ns; ++i2)
        for (int i3 = 0; i3 < ns; ++i3) {
          Vec4 f((i0 + 0.5) / ns, (i1 + 0.5) / ns, (i2 + 0.5) / ns, (i3 + 0.5) / ns);
          Vec4 x = box.lo + margin + f.cwiseProduct(Vec4(span - 2.0 * margin));
          const double om = omega(x), ut = u_tilde(x);

          Vec4 domega, dut, du;
          for (int a = 0; a < 4; ++a) {
            domega[a] = d1(omega, x, a, h);
            dut[a] = d1(u_tilde, x, a, h);
            du[a] = d1(u, x, a, h);
          }
          double box_ut = 0, box_u = 0, cross = 0;
          for (int a = 0; a < 4; ++a) {
            box_ut += eta_inv(a, a) * d2(u_tilde, x, a, h);
            box_u += eta_inv(a, a) * d2(u, x, a, h);
            cross += eta_inv(a, a) * domega[a] * dut[a];
          }
          // box_gtilde u_tilde = Omega^{-2} box_eta u_tilde + 2 Omega^{-3} eta^{ab} dOmega du_tilde
          const double wave_conf = box_ut / sq(om) + 2.0 * cross / (om * om * om);
          const double ricci_conf = ricci_scalar_fd(metric_conf, x, h);
          const double lhs =
              wave_conf - (n - 2.0) / (4.0 * (n - 1.0)) * ricci_conf * ut;
          const double rhs = std::pow(om, -1.0 - 0.5 * n) * box_u;  // flat background, R = 0
          res.max_residual = std::max(res.max_residual, std::abs(lhs - rhs));

          // quadratic source: Omega^{1+n/2} ahat du_tilde du_tilde vs the expanded law
          Vec4 dominv;
          for (int a = 0; a < 4; ++a) dominv[a] = d1(omega_inv, x, a, h);
          const double uu = u(x);
          double f_direct = 0, f_formula = 0;
          for (int a = 0; a < 4; ++a)
            for (int b = 0; b < 4; ++b) {
              f_direct += std::pow(om, 1.0 + 0.5 * n) * ahat(a, b) * dut[a] * dut[b];
              f_formula +=
                  ahat(a, b) *
                  (std::pow(om, 3.0 - 0.5 * n) * du[a] * du[b] +
                   (0.5 * n - 1.0) * std::pow(om, 4.0 - 0.5 * n) *
                       (dominv[a] * uu * du[b] + du[a] * dominv[b] * uu) +
                   sq(1.0 - 0.5 * n) * std::pow(om, 5.0 - 0.5 * n) * dominv[a] * dominv[b] * uu *
                       uu);
            }
          res.max_source_residual =
              std::max(res.max_source_residual, std::abs(f_direct - f_formula));
        }
  return res;
}

}  // namespace scriwave::geometry
