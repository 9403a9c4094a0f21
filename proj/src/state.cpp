#include "scriwave/state.hpp"

namespace scriwave::evol {

Eigen::ArrayXXd d_rho_periodic(const Eigen::ArrayXXd& f, const Grid& g) {
  const int na = g.n_angles(), n = g.n_rho;
  Eigen::ArrayXXd out(f.rows(), f.cols());
  const double inv12h = 1.0 / (12.0 * g.drho());
  for (int j = 0; j < n; ++j) {
    const int jm2 = (j - 2 + n) % n, jm1 = (j - 1 + n) % n;
    const int jp1 = (j + 1) % n, jp2 = (j + 2) % n;
    for (int a = 0; a < na; ++a)
      out.col(j * na + a) = (-f.col(jp2 * na + a) + 8.0 * f.col(jp1 * na + a) -
                             8.0 * f.col(jm1 * na + a) + f.col(jm2 * na + a)) *
                            inv12h;
  }
  return out;
}

Eigen::ArrayXXd d_theta(const Eigen::ArrayXXd& f, const Grid& g) {
  Eigen::ArrayXXd out = Eigen::ArrayXXd::Zero(f.rows(), f.cols());
  if (g.mode != Grid::Mode::full) return out;
  const int nt = g.n_theta, np = g.n_phi;
  const double h = g.dtheta();
  for (int j = 0; j < g.n_rho; ++j)
    for (int p = 0; p < np; ++p) {
      auto col = [&](int it) { return f.col(g.point(j, it * np + p)); };
      for (int it = 0; it < nt; ++it) {
        auto dst = out.col(g.point(j, it * np + p));
        if (it >= 2 && it <= nt - 3)
          dst = (-col(it + 2) + 8.0 * col(it + 1) - 8.0 * col(it - 1) + col(it - 2)) / (12.0 * h);
        else if (it >= 1 && it <= nt - 2)
          dst = (col(it + 1) - col(it - 1)) / (2.0 * h);
        else if (it == 0)
          dst = (-3.0 * col(0) + 4.0 * col(1) - col(2)) / (2.0 * h);
        else
          dst = (3.0 * col(nt - 1) - 4.0 * col(nt - 2) + col(nt - 3)) / (2.0 * h);
      }
    }
  return out;
}

Eigen::ArrayXXd d_phi(const Eigen::ArrayXXd& f, const Grid& g) {
  Eigen::ArrayXXd out = Eigen::ArrayXXd::Zero(f.rows(), f.cols());
  if (g.mode != Grid::Mode::full) return out;
  const int nt = g.n_theta, np = g.n_phi;
  const double inv12h = 1.0 / (12.0 * g.dphi());
  for (int j = 0; j < g.n_rho; ++j)
    for (int it = 0; it < nt; ++it) {
      auto col = [&](int p) { return f.col(g.point(j, it * np + ((p % np) + np) % np)); };
      for (int p = 0; p < np; ++p)
        out.col(g.point(j, it * np + p)) =
            (-col(p + 2) + 8.0 * col(p + 1) - 8.0 * col(p - 1) + col(p - 2)) * inv12h;
    }
  return out;
}

double l2_norm(const Eigen::ArrayXXd& f, const Grid& g) {
  return std::sqrt((f * f).sum() * g.drho() / g.n_angles());
}

double sobolev_norm(const Eigen::ArrayXXd& f, const Grid& g, int k) {
  double sum = sq(l2_norm(f, g));
  Eigen::ArrayXXd d = f;
  for (int j = 1; j <= k; ++j) {
    d = d_rho_periodic(d, g);
    sum += sq(l2_norm(d, g));
  }
  return std::sqrt(sum);
}

}  // namespace scriwave::evol
