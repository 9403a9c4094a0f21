#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace scriwave {

using Mat2 = Eigen::Matrix2d;
using Mat4 = Eigen::Matrix4d;
using Mat5 = Eigen::Matrix<double, 5, 5>;
using Vec4 = Eigen::Vector4d;
using Vec5 = Eigen::Matrix<double, 5, 1>;

/// Thrown when a point leaves the admissible coordinate region.
struct DomainError : std::domain_error {
  using std::domain_error::domain_error;
};

/// Thrown on invalid run configuration (CLI exit code 2).
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Thrown on numerical failure: NaN guard, Newton stall, ... (CLI exit code 3).
struct NumericalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

namespace consts {

inline constexpr double sqrt5 = 2.23606797749978969640917366873;

/// Final time of the symmetric-hyperbolic window, t0 = (sqrt5 + sqrt(10 sqrt5 - 2) - 3)/8.
inline double default_t0() { return 0.125 * (sqrt5 + std::sqrt(10.0 * sqrt5 - 2.0) - 3.0); }

/// Coercivity constant gamma1 = 1 - sqrt(10 + 2 sqrt5)/4 of the singular block.
inline double gamma1() { return 1.0 - 0.25 * std::sqrt(10.0 + 2.0 * sqrt5); }

/// Young-inequality weights used to degenerate the boundary and coercivity forms.
inline constexpr double beta0 = 0.5 * (1.0 + sqrt5);
inline constexpr double beta1 = 1.0 + sqrt5;
inline double beta2() { return (2.0 + std::sqrt(2.0 * sqrt5 + 10.0)) / (1.0 + sqrt5); }

}  // namespace consts

namespace fd {

/// 4th-order central first derivative on a periodic sequence.
template <class Getter>
double d1_periodic(Getter&& f, int i, int n, double h) {
  auto at = [&](int j) { return f(((j % n) + n) % n); };
  return (-at(i + 2) + 8.0 * at(i + 1) - 8.0 * at(i - 1) + at(i - 2)) / (12.0 * h);
}

/// 4th-order central first derivative of a callable at x (step chosen by caller).
template <class F>
double d1_central(F&& f, double x, double h) {
  return (-f(x + 2 * h) + 8.0 * f(x + h) - 8.0 * f(x - h) + f(x - 2 * h)) / (12.0 * h);
}

/// 4th-order central second derivative of a callable at x.
template <class F>
double d2_central(F&& f, double x, double h) {
  return (-f(x + 2 * h) + 16.0 * f(x + h) - 30.0 * f(x) + 16.0 * f(x - h) - f(x - 2 * h)) /
         (12.0 * h * h);
}

}  // namespace fd

/// One classical RK4 step for dy/ds = rhs(s, y) on any Eigen-like state.
template <class State, class Rhs>
State rk4_step(const State& y, double s, double ds, Rhs&& rhs) {
  State k1 = rhs(s, y);
  State k2 = rhs(s + 0.5 * ds, State(y + 0.5 * ds * k1));
  State k3 = rhs(s + 0.5 * ds, State(y + 0.5 * ds * k2));
  State k4 = rhs(s + ds, State(y + ds * k3));
  return State(y + (ds / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4));
}

/// Least-squares slope of y against x.
inline double fit_slope(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw NumericalError("fit_slope: need >= 2 samples");
  double mx = 0, my = 0;
  for (size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= double(x.size());
  my /= double(x.size());
  double num = 0, den = 0;
  for (size_t i = 0; i < x.size(); ++i) {
    num += (x[i] - mx) * (y[i] - my);
    den += (x[i] - mx) * (x[i] - mx);
  }
  if (den == 0) throw NumericalError("fit_slope: degenerate abscissae");
  return num / den;
}

/// Deterministic RNG for all sampling-based checks; the seed is recorded in reports.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed), seed_(seed) {}
  double uniform(double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(gen_);
  }
  double normal(double mean = 0.0, double stddev = 1.0) {
    return std::normal_distribution<double>(mean, stddev)(gen_);
  }
  std::uint64_t seed() const { return seed_; }

 private:
  std::mt19937_64 gen_;
  std::uint64_t seed_;
};

inline double sq(double x) { return x * x; }

}  // namespace scriwave
