#pragma once

// Constant Cartesian quadratic-form coefficients ahat^{K mu nu}_{IJ}, their
// spherical expansion in powers of 1/rbar (c, d, e families), the null-form
// scalar b, and the compactified components with an independent tensor
// pushforward oracle.

#include "scriwave/geometry.hpp"
#include "scriwave/numerics.hpp"

#include <iosfwd>
#include <vector>

namespace scriwave::coeffs {

/// Dense storage of ahat^{K mu nu}_{IJ}; one 4x4 (mu,nu) block per (K,I,J).
/// K,I,J are 0-based internally, 1-based in the text interchange format.
class CartesianCoeffs {
 public:
  CartesianCoeffs() = default;
  explicit CartesianCoeffs(int n_unknowns)
      : n_(n_unknowns), blocks_(size_t(n_unknowns) * n_unknowns * n_unknowns, Mat4::Zero()) {
    if (n_unknowns < 1) throw ConfigError("CartesianCoeffs: N >= 1 required");
  }

  int n() const { return n_; }
  Mat4& block(int K, int I, int J) { return blocks_[idx(K, I, J)]; }
  const Mat4& block(int K, int I, int J) const { return blocks_[idx(K, I, J)]; }
  double& entry(int K, int I, int J, int mu, int nu) { return block(K, I, J)(mu, nu); }

  bool is_zero() const {
    for (const auto& b : blocks_)
      if (b.cwiseAbs().maxCoeff() != 0.0) return false;
    return true;
  }

 private:
  size_t idx(int K, int I, int J) const {
    if (K < 0 || K >= n_ || I < 0 || I >= n_ || J < 0 || J >= n_)
      throw ConfigError("CartesianCoeffs: index out of range");
    return (size_t(K) * n_ + I) * n_ + J;
  }
  int n_ = 0;
  std::vector<Mat4> blocks_;
};

/// Reads lines "K I J mu nu value" (K,I,J 1-based; mu,nu 0-based Cartesian
/// slots (tbar, x1, x2, x3)); '#' starts a comment.
CartesianCoeffs parse_coefficients(std::istream& in, int n_unknowns);

/// abar^{K alpha beta}_{IJ} = Jbar ahat Jbar^T at a physical point.
Mat4 spherical_tensor(const CartesianCoeffs& a, int K, int I, int J, double rbar, double theta,
                      double phi);

/// Coefficients of the exact expansion abar = c + d/rbar + e/rbar^2 at fixed angles.
struct CdeSample {
  int n = 0;
  std::vector<Mat4> c, d, e;  // indexed like CartesianCoeffs blocks
  const Mat4& cb(int K, int I, int J) const { return c[(size_t(K) * n + I) * n + J]; }
  const Mat4& db(int K, int I, int J) const { return d[(size_t(K) * n + I) * n + J]; }
  const Mat4& eb(int K, int I, int J) const { return e[(size_t(K) * n + I) * n + J]; }
};

/// Extracts (c,d,e) by sampling abar at three radii and solving the exact
/// 3x3 Vandermonde system in 1/rbar.
CdeSample spherical_expansion(const CartesianCoeffs& a, double theta, double phi);

/// Null-form scalars b^K_{IJ}(theta, phi) = L_a L_b abar^{ab}; rbar-independent.
class NullForm {
 public:
  NullForm() = default;
  explicit NullForm(const CartesianCoeffs& a) : a_(a) {}
  int n() const { return a_.n(); }

  /// Angle-dependent value via the spherical components.
  double operator()(int K, int I, int J, double theta, double phi) const;

  /// The constant Cartesian combination ahat^00 - ahat^01 - ahat^10 + ahat^11;
  /// equals the angle-dependent value at the reference angle (pi/2, 0).
  double cartesian(int K, int I, int J) const;

  /// True when b vanishes at the probed angles for all (K,I,J).
  bool is_null(double tol = 1e-14) const;

 private:
  CartesianCoeffs a_;
};

inline NullForm null_form(const CartesianCoeffs& a) { return NullForm(a); }

/// All 16 compactified component families of a^{K mu nu}_{IJ} at (t, r, theta,
/// phi) from the closed-form expansion; r is the plain radial coordinate.
std::vector<Mat4> compact_components(const CartesianCoeffs& a, double t, double r, double theta,
                                     double phi);

/// Same expansion from a pre-evaluated angular sample (b is recovered from
/// the c family); used on hot paths where the angles are fixed.
std::vector<Mat4> compact_from_cde(const CdeSample& s, double t, double r);

/// Null-form values from the c family alone.
inline double null_from_cde(const CdeSample& s, int K, int I, int J) {
  const Mat4& c = s.cb(K, I, J);
  return c(0, 0) - c(0, 1) - c(1, 0) + c(1, 1);
}

/// Same tensor by the numeric route a = J abar J^T with J from jacobian_compact
/// and abar from the direct transformation law; no closed-form expansion used.
std::vector<Mat4> pushforward_oracle(const CartesianCoeffs& a, double t, double r, double theta,
                                     double phi);

/// Stock tensors used across tests and configs.
CartesianCoeffs single_entry(int n, int K, int I, int J, int mu, int nu, double value);
CartesianCoeffs minkowski_null(int n = 1);  // ahat = diag(-1,1,1,1): b == 0 at all angles
CartesianCoeffs random_coeffs(int n, Rng& rng, double scale = 1.0);

}  // namespace scriwave::coeffs
