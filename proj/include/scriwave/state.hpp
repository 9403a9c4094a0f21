#pragma once

// Grid and state storage for the first-order evolution on the torus slab.
// The 5-component order per unknown is (0, 1, theta, phi, 4).

#include "scriwave/numerics.hpp"

namespace scriwave::evol {

struct Grid {
  enum class Mode { spherical, full };
  Mode mode = Mode::spherical;
  int n_rho = 256;
  double rho_lo = 0.978, rho_hi = 0.996;  // periodic torus coordinate [lo, hi)
  int n_theta = 8, n_phi = 16;            // full mode only
  double theta_min = 1e-3;

  double drho() const { return (rho_hi - rho_lo) / n_rho; }
  double rho(int j) const { return rho_lo + j * drho(); }
  int n_angles() const { return mode == Mode::full ? n_theta * n_phi : 1; }
  int n_points() const { return n_rho * n_angles(); }
  int point(int j, int a = 0) const { return j * n_angles() + a; }

  double dtheta() const { return (M_PI - 2.0 * theta_min) / (n_theta - 1); }
  double dphi() const { return 2.0 * M_PI / n_phi; }
  double theta(int a) const {
    return mode == Mode::full ? theta_min + (a / n_phi) * dtheta() : M_PI / 2.0;
  }
  double phi(int a) const { return mode == Mode::full ? (a % n_phi) * dphi() : 0.0; }

  bool validate(std::string* why = nullptr) const {
    if (n_rho < 16) {
      if (why) *why = "n_rho >= 16 required";
      return false;
    }
    if (mode == Mode::full && (n_theta < 5 || n_phi < 8)) {
      if (why) *why = "full mode needs n_theta >= 5, n_phi >= 8";
      return false;
    }
    return true;
  }
};

/// 5N components per grid point, stored as a (5N) x n_points array.
struct StateField {
  int n_unknowns = 1;
  Grid grid;
  double t = 0.0;
  Eigen::ArrayXXd comps;

  StateField() = default;
  StateField(int n, const Grid& g, double time)
      : n_unknowns(n), grid(g), t(time), comps(Eigen::ArrayXXd::Zero(5 * n, g.n_points())) {}

  int rows() const { return 5 * n_unknowns; }
  double& at(int K, int comp, int pt) { return comps(5 * K + comp, pt); }
  double at(int K, int comp, int pt) const { return comps(5 * K + comp, pt); }

  Vec5 block(int K, int pt) const { return comps.col(pt).segment(5 * K, 5).matrix(); }
  void set_block(int K, int pt, const Vec5& v) { comps.col(pt).segment(5 * K, 5) = v.array(); }

  double max_abs() const { return comps.size() ? comps.cwiseAbs().maxCoeff() : 0.0; }
  bool finite() const { return comps.allFinite(); }
};

/// 4th-order periodic first derivative in rho of every row, all angles.
Eigen::ArrayXXd d_rho_periodic(const Eigen::ArrayXXd& f, const Grid& g);

/// Angular first derivatives (full mode): centered in theta (one-sided at the
/// pole-avoiding edges), periodic in phi.
Eigen::ArrayXXd d_theta(const Eigen::ArrayXXd& f, const Grid& g);
Eigen::ArrayXXd d_phi(const Eigen::ArrayXXd& f, const Grid& g);

/// Discrete L2 norm over the slab: sqrt(sum f^2 * drho) (unit sphere factor).
double l2_norm(const Eigen::ArrayXXd& f, const Grid& g);

/// Discrete H^k seminorm-sum sqrt(sum_{j<=k} |d^j f|^2) with rho-derivatives.
double sobolev_norm(const Eigen::ArrayXXd& f, const Grid& g, int k);

}  // namespace scriwave::evol
