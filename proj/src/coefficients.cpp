#include "scriwave/coefficients.hpp"

#include <istream>
#include <sstream>

namespace scriwave::coeffs {

using geometry::CompactPoint;
using geometry::PhysicalPoint;

CartesianCoeffs parse_coefficients(std::istream& in, int n_unknowns) {
  CartesianCoeffs a(n_unknowns);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    int K, I, J, mu, nu;
    double value;
    if (!(ls >> K)) continue;  // blank line
    if (!(ls >> I >> J >> mu >> nu >> value))
      throw ConfigError("coefficients line " + std::to_string(lineno) +
                        ": expected 'K I J mu nu value'");
    if (K < 1 || K > n_unknowns || I < 1 || I > n_unknowns || J < 1 || J > n_unknowns)
      throw ConfigError("coefficients line " + std::to_string(lineno) + ": K,I,J must be in 1..N");
    if (mu < 0 || mu > 3 || nu < 0 || nu > 3)
      throw ConfigError("coefficients line " + std::to_string(lineno) + ": mu,nu must be in 0..3");
    a.entry(K - 1, I - 1, J - 1, mu, nu) = value;
  }
  return a;
}

Mat4 spherical_tensor(const CartesianCoeffs& a, int K, int I, int J, double rbar, double theta,
                      double phi) {
  Mat4 Jb = geometry::jacobian_spherical({1.0, rbar, theta, phi});
  return Jb * a.block(K, I, J) * Jb.transpose();
}

CdeSample spherical_expansion(const CartesianCoeffs& a, double theta, double phi) {
  geometry::require_nonpole(theta, "spherical_expansion");
  const double radii[3] = {1.0, 2.0, 4.0};
  Eigen::Matrix3d V;
  for (int i = 0; i < 3; ++i) {
    const double x = 1.0 / radii[i];
    V(i, 0) = 1.0;
    V(i, 1) = x;
    V(i, 2) = x * x;
  }
  Eigen::FullPivLU<Eigen::Matrix3d> lu(V);

  const int n = a.n();
  CdeSample s;
  s.n = n;
  const size_t total = size_t(n) * n * n;
  s.c.assign(total, Mat4::Zero());
  s.d.assign(total, Mat4::Zero());
  s.e.assign(total, Mat4::Zero());
  for (int K = 0; K < n; ++K)
    for (int I = 0; I < n; ++I)
      for (int J = 0; J < n; ++J) {
        Mat4 samples[3];
        for (int i = 0; i < 3; ++i) samples[i] = spherical_tensor(a, K, I, J, radii[i], theta, phi);
        const size_t id = (size_t(K) * n + I) * n + J;
        for (int mu = 0; mu < 4; ++mu)
          for (int nu = 0; nu < 4; ++nu) {
            Eigen::Vector3d rhs(samples[0](mu, nu), samples[1](mu, nu), samples[2](mu, nu));
            Eigen::Vector3d cde = lu.solve(rhs);
            s.c[id](mu, nu) = cde[0];
            s.d[id](mu, nu) = cde[1];
            s.e[id](mu, nu) = cde[2];
          }
      }
  return s;
}

double NullForm::operator()(int K, int I, int J, double theta, double phi) const {
  Mat4 ab = spherical_tensor(a_, K, I, J, 1.0, theta, phi);
  return ab(0, 0) - ab(0, 1) - ab(1, 0) + ab(1, 1);
}

double NullForm::cartesian(int K, int I, int J) const {
  const Mat4& ah = a_.block(K, I, J);
  return ah(0, 0) - ah(0, 1) - ah(1, 0) + ah(1, 1);
}

bool NullForm::is_null(double tol) const {
  const double thetas[] = {0.3, 1.1, geometry::kPoleTol + 1.5707963267948966, 2.7};
  const double phis[] = {0.0, 0.9, 2.2, 5.1};
  for (int K = 0; K < n(); ++K)
    for (int I = 0; I < n(); ++I)
      for (int J = 0; J < n(); ++J)
        for (double th : thetas)
          for (double ph : phis)
            if (std::abs((*this)(K, I, J, th, ph)) > tol) return false;
  return true;
}

std::vector<Mat4> compact_components(const CartesianCoeffs& a, double t, double r, double theta,
                                     double phi) {
  geometry::require_region(t, r, "compact_components");
  return compact_from_cde(spherical_expansion(a, theta, phi), t, r);
}

std::vector<Mat4> compact_from_cde(const CdeSample& s, double t, double r) {
  const double w = 1.0 - r;
  const double D = geometry::region_quantity(t, r);
  const int n = s.n;
  std::vector<Mat4> out(size_t(n) * n * n, Mat4::Zero());
  for (int K = 0; K < n; ++K)
    for (int I = 0; I < n; ++I)
      for (int J = 0; J < n; ++J) {
        const Mat4& c = s.cb(K, I, J);
        const Mat4& d = s.db(K, I, J);
        const Mat4& e = s.eb(K, I, J);
        const double bv = null_from_cde(s, K, I, J);
        Mat4& A = out[(size_t(K) * n + I) * n + J];

        A(0, 0) = t * t * sq(r / w) * bv + 2.0 * t * t * t * (c(0, 0) - c(1, 1)) +
                  std::pow(t, 4) * sq(w) / sq(r) * (c(0, 0) + c(0, 1) + c(1, 0) + c(1, 1));
        A(0, 1) = t * r * r * r / w * bv + t * t * r * w * (c(0, 0) - c(0, 1) + c(1, 0) - c(1, 1));
        A(1, 0) = t * r * r * r / w * bv + t * t * r * w * (c(0, 0) + c(0, 1) - c(1, 0) - c(1, 1));
        A(1, 1) = std::pow(r, 4) * bv;
        for (int L = 2; L < 4; ++L) {
          A(0, L) = -2.0 * t * t * (r * r + t * sq(w)) / D * d(0, L) + 2.0 * t * t * d(1, L);
          A(L, 0) = -2.0 * t * t * (r * r + t * sq(w)) / D * d(L, 0) + 2.0 * t * t * d(L, 1);
          A(1, L) = 2.0 * r * r * r * w * t / D * (d(1, L) - d(0, L));
          A(L, 1) = 2.0 * r * r * r * w * t / D * (d(L, 1) - d(L, 0));
          for (int S = 2; S < 4; ++S) A(L, S) = 4.0 * r * r * sq(w) * t * t / sq(D) * e(L, S);
        }
      }
  return out;
}

std::vector<Mat4> pushforward_oracle(const CartesianCoeffs& a, double t, double r, double theta,
                                     double phi) {
  CompactPoint c{t, r, theta, phi};
  PhysicalPoint p = geometry::map_inverse(c);
  Mat4 J = geometry::jacobian_compact(c);
  const int n = a.n();
  std::vector<Mat4> out(size_t(n) * n * n);
  for (int K = 0; K < n; ++K)
    for (int I = 0; I < n; ++I)
      for (int J3 = 0; J3 < n; ++J3) {
        Mat4 abar = spherical_tensor(a, K, I, J3, p.rbar, theta, phi);
        out[(size_t(K) * n + I) * n + J3] = J * abar * J.transpose();
      }
  return out;
}

CartesianCoeffs single_entry(int n, int K, int I, int J, int mu, int nu, double value) {
  CartesianCoeffs a(n);
  a.entry(K, I, J, mu, nu) = value;
  return a;
}

CartesianCoeffs minkowski_null(int n) {
  CartesianCoeffs a(n);
  for (int K = 0; K < n; ++K) {
    a.block(K, K, K) = Mat4::Identity();
    a.block(K, K, K)(0, 0) = -1.0;
  }
  return a;
}

CartesianCoeffs random_coeffs(int n, Rng& rng, double scale) {
  CartesianCoeffs a(n);
  for (int K = 0; K < n; ++K)
    for (int I = 0; I < n; ++I)
      for (int J = 0; J < n; ++J)
        for (int mu = 0; mu < 4; ++mu)
          for (int nu = 0; nu < 4; ++nu) a.entry(K, I, J, mu, nu) = scale * rng.uniform(-1.0, 1.0);
  return a;
}

}  // namespace scriwave::coeffs
