#include "scriwave/symmetrizer.hpp"

#include "doctest.h"

#include <cmath>

using namespace scriwave;
using namespace scriwave::sym;

namespace {

// sample (t, r) with the point inside the region
std::pair<double, double> random_tr(Rng& rng) {
  const double r = rng.uniform(0.3, 0.9);
  const double t = rng.uniform(0.05, 0.9) * geometry::parabola_t(r);
  return {std::min(t, consts::default_t0() * 0.999), r};
}

Mat5 h_matrix(double theta) { return Mat5(h_weight(theta).asDiagonal()); }

bool h_symmetric(const Mat5& A, double theta, double tol) {
  Mat5 HA = h_matrix(theta) * A;
  return (HA - HA.transpose()).cwiseAbs().maxCoeff() < tol;
}

double min_sym_eig(const Mat5& A) {
  Eigen::SelfAdjointEigenSolver<Mat5> es(Mat5(0.5 * (A + A.transpose())));
  return es.eigenvalues().minCoeff();
}

double max_sym_eig(const Mat5& A) {
  Eigen::SelfAdjointEigenSolver<Mat5> es(Mat5(0.5 * (A + A.transpose())));
  return es.eigenvalues().maxCoeff();
}

}  // namespace

TEST_CASE("time weights at t=0") {
  auto w = time_weights(0.0);
  CHECK(w.a0 == doctest::Approx((3.0 + consts::sqrt5) / 2.0).epsilon(1e-15));
  CHECK(w.a1 == doctest::Approx(-consts::beta0).epsilon(1e-15));
  CHECK(w.p == 1.0);
  CHECK(w.q == 0.0);
}

TEST_CASE("weight identities a0 + a1 beta0 = 0 and 2/(2+(3+sqrt5)t) + a1/beta0 = 0") {
  Rng rng(31);
  for (int i = 0; i < 300; ++i) {
    const double t = rng.uniform(0.0, consts::default_t0());
    auto w = time_weights(t);
    CHECK(std::abs(w.a0 + w.a1 * consts::beta0) < 1e-14);
    CHECK(std::abs(2.0 / (2.0 + (3.0 + consts::sqrt5) * t) + w.a1 / consts::beta0) < 1e-14);
  }
}

TEST_CASE("symmetrization conditions on p, q hold to machine precision") {
  Rng rng(37);
  for (int i = 0; i < 300; ++i) {
    const double t = rng.uniform(1e-8, consts::default_t0());
    auto w = time_weights(t);
    const double res1 = w.p * w.a0 + w.a1 * w.p * (1.0 + w.q) / (1.0 + t) - (1.0 + t) / w.p;
    const double res2 = w.a1 * w.p * w.q / t + 1.0 / w.p;
    CHECK(std::abs(res1) < 1e-12);
    CHECK(std::abs(res2) < 1e-12);
  }
}

TEST_CASE("mixing matrix times its inverse is the identity") {
  Rng rng(41);
  for (int i = 0; i < 300; ++i) {
    auto [t, r] = random_tr(rng);
    Mat5 prod = mixing_matrix(t, r) * mixing_matrix_inv(t, r);
    CHECK((prod - Mat5::Identity()).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("mixing matrix time derivative matches finite differences") {
  Rng rng(43);
  for (int i = 0; i < 50; ++i) {
    auto [t, r] = random_tr(rng);
    if (t < 1e-3) continue;
    const double h = 1e-6 * t;
    Mat5 fd = (mixing_matrix(t + h, r) - mixing_matrix(t - h, r)) / (2.0 * h);
    CHECK((mixing_matrix_dt(t, r) - fd).cwiseAbs().maxCoeff() < 1e-5);
  }
}

TEST_CASE("B0, B1 and n_L B^L are h-symmetric; B0 reproduces h") {
  Rng rng(47);
  for (int i = 0; i < 200; ++i) {
    auto [t, r] = random_tr(rng);
    const double theta = rng.uniform(0.3, M_PI - 0.3);
    BlockSet b = assemble(t, r, theta);
    CHECK(h_symmetric(b.B0, theta, 1e-14));
    CHECK(h_symmetric(b.B1, theta, 1e-13));
    const double n_th = rng.normal(), n_ph = rng.normal();
    CHECK(h_symmetric(Mat5(n_th * b.Btheta + n_ph * b.Bphi), theta, 1e-12));
    Vec5 Y, X;
    for (int k = 0; k < 5; ++k) {
      Y[k] = rng.normal();
      X[k] = rng.normal();
    }
    CHECK(inner_product_h(Y, b.B0 * Y, theta) ==
          doctest::Approx(inner_product_h(Y, Y, theta)).epsilon(1e-14));
    // h-symmetry through values: h(Y, B1 X) == h(B1 Y, X)
    CHECK(inner_product_h(Y, b.B1 * X, theta) ==
          doctest::Approx(inner_product_h(Vec5(b.B1 * Y), X, theta)).epsilon(1e-12));
  }
}

TEST_CASE("h is positive definite and bilinear away from poles") {
  Rng rng(53);
  for (int i = 0; i < 100; ++i) {
    const double theta = rng.uniform(0.05, M_PI - 0.05);
    Vec5 Y;
    for (int k = 0; k < 5; ++k) Y[k] = rng.normal();
    if (Y.cwiseAbs().maxCoeff() == 0.0) continue;
    CHECK(inner_product_h(Y, Y, theta) > 0.0);
    Vec5 X, Z;
    for (int k = 0; k < 5; ++k) {
      X[k] = rng.normal();
      Z[k] = rng.normal();
    }
    const double a = rng.normal();
    CHECK(inner_product_h(Y, Vec5(X + a * Z), theta) ==
          doctest::Approx(inner_product_h(Y, X, theta) + a * inner_product_h(Y, Z, theta))
              .epsilon(1e-12));
  }
  CHECK_THROWS_AS(h_weight(0.0), DomainError);
}

TEST_CASE("projector properties and commutation with B0, Bcal") {
  Mat5 P = projector();
  CHECK((P * P - P).cwiseAbs().maxCoeff() == 0.0);
  CHECK((P - P.transpose()).cwiseAbs().maxCoeff() == 0.0);
  Rng rng(59);
  for (int i = 0; i < 100; ++i) {
    auto [t, r] = random_tr(rng);
    BlockSet b = assemble(t, r, 1.1);
    CHECK((b.B0 * P - P * b.B0).cwiseAbs().maxCoeff() == 0.0);
    CHECK((b.Bcal * P - P * b.Bcal).cwiseAbs().maxCoeff() == 0.0);
    CHECK((bcal_star(t) * P - P * bcal_star(t)).cwiseAbs().maxCoeff() == 0.0);
  }
}

TEST_CASE("starred blocks equal interior blocks in the limit r -> 1") {
  const double t = 0.3;
  BlockSet b = assemble(t, 1.0 - 1e-11, 1.2);
  CHECK((b.Bcal - bcal_star(t)).cwiseAbs().maxCoeff() < 1e-8);
  CHECK((b.Ccal - ccal_star(t)).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("smallest eigenvalue of sym Bcal* at t=0 equals gamma1 exactly") {
  const double g1 = min_sym_eig(bcal_star(0.0));
  CHECK(std::abs(g1 - consts::gamma1()) < 1e-12);
  CHECK(consts::gamma1() == doctest::Approx(0.0489435).epsilon(2e-6));
  // the {1,4} block at t=0 is [[3/2, -(1+sqrt5)/4], [-(1+sqrt5)/4, 1/2]]
  Mat5 B = bcal_star(0.0);
  CHECK(B(1, 1) == doctest::Approx(1.5).epsilon(1e-15));
  CHECK(B(4, 1) == doctest::Approx(-consts::beta0).epsilon(1e-15));
}

TEST_CASE("sym Bcal*(t) stays coercive with constant gamma1 on [0, t0]") {
  const double t0 = consts::default_t0();
  for (int i = 0; i <= 400; ++i) {
    const double t = t0 * i / 400.0;
    CHECK(min_sym_eig(bcal_star(t)) >= consts::gamma1() - 1e-13);
  }
}

TEST_CASE("cutoff: plateau, support, smooth derivative") {
  Cutoff chi(0.982, 0.992, 0.002);
  CHECK(chi(0.987) == 1.0);
  CHECK(chi(0.982) == 1.0);
  CHECK(chi(0.992) == 1.0);
  CHECK(chi(0.980) == 0.0);
  CHECK(chi(0.994) == 0.0);
  CHECK(chi(0.960) == 0.0);
  // monotone rise, derivative consistent with finite differences
  Rng rng(61);
  double max_d = 0.0;
  for (int i = 0; i < 400; ++i) {
    const double rho = rng.uniform(0.9795, 0.9945);
    const double v = chi(rho);
    CHECK(v >= 0.0);
    CHECK(v <= 1.0);
    const double fd = scriwave::fd::d1_central([&](double x) { return chi(x); }, rho, 1e-7);
    CHECK(std::abs(chi.derivative(rho) - fd) < 1e-4 * std::max(1.0, std::abs(fd)));
    max_d = std::max(max_d, std::abs(chi.derivative(rho)));
  }
  CHECK(max_d > 0.0);
  CHECK(std::isfinite(max_d));
}

TEST_CASE("extension: identity on the plateau, starred outside the support") {
  DomainParams dom;
  Cutoff chi(dom.rho0, dom.rho1, dom.alpha);
  const double t = 0.25;
  const double rho_in = 0.5 * (dom.rho0 + dom.rho1);
  ExtendedBlocks e = extend(t, rho_in, 1.3, dom.m, chi);
  BlockSet b = assemble(t, geometry::r_from_rho(rho_in, dom.m), 1.3);
  CHECK((e.Btilde - b.Bcal).cwiseAbs().maxCoeff() < 1e-15);
  CHECK((e.Ctilde - b.Ccal).cwiseAbs().maxCoeff() < 1e-15);
  CHECK((e.Btheta - b.Btheta).cwiseAbs().maxCoeff() < 1e-15);
  CHECK(e.advect == doctest::Approx((1.0 - rho_in) * rho_in / dom.m).epsilon(1e-15));

  ExtendedBlocks out = extend(t, dom.torus_lo() + 1e-4, 1.3, dom.m, chi);
  CHECK((out.Btilde - bcal_star(t)).cwiseAbs().maxCoeff() == 0.0);
  CHECK((out.Ctilde - ccal_star(t)).cwiseAbs().maxCoeff() == 0.0);
  CHECK(out.advect == 0.0);
  CHECK(out.Btheta.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("pointwise extension bound |Btilde - Bcal*| <= |Bcal - Bcal*|") {
  DomainParams dom;
  Cutoff chi(dom.rho0, dom.rho1, dom.alpha);
  Rng rng(67);
  for (int i = 0; i < 200; ++i) {
    const double t = rng.uniform(1e-4, consts::default_t0());
    const double rho = rng.uniform(dom.rho0 - dom.alpha + 1e-9, dom.rho1 + dom.alpha - 1e-9);
    ExtendedBlocks e = extend(t, rho, 1.3, dom.m, chi);
    BlockSet b = assemble(t, geometry::r_from_rho(rho, dom.m), 1.3);
    const double lhs = (e.Btilde - bcal_star(t)).cwiseAbs().maxCoeff();
    const double rhs = (b.Bcal - bcal_star(t)).cwiseAbs().maxCoeff();
    CHECK(lhs <= rhs + 1e-15);
  }
}

TEST_CASE("boundary forms: Gamma+ vanishes, Gamma- and Gamma are negative semidefinite") {
  CHECK(gamma_plus_form().cwiseAbs().maxCoeff() == 0.0);
  DomainParams dom;
  const double t0 = consts::default_t0();
  for (int i = 1; i <= 500; ++i) {
    const double t = t0 * i / 500.0;
    CHECK(max_sym_eig(gamma_minus_form(t, dom.rho0, dom.m)) <= 1e-12);
    CHECK(max_sym_eig(gamma_parabola_form(t)) <= 1e-12);
  }
  // the top block of B1 is exactly degenerate (Young weight beta0 saturates)
  Mat5 B1 = radial_block(0.3);
  CHECK(std::abs(B1(0, 0) * B1(1, 1) - sq(B1(0, 1))) < 1e-15);
  // t0 is close to sharp: the parabola form loses negativity above it
  CHECK(max_sym_eig(gamma_parabola_form(1.15 * t0)) > 0.0);
}

TEST_CASE("run constants: defaults validate, margins hold") {
  Rng rng(4242);
  RunConstants rc = compute_constants(DomainParams{}, ExponentParams{}, rng, 4000);
  // the closed form evaluates to 0.46854362 (0.4685452 is a common misprint)
  CHECK(rc.t0 == doctest::Approx(0.46854362).epsilon(1e-7));
  CHECK(std::abs(rc.t0 - 0.4685452) < 2e-6);
  CHECK(rc.gamma1 == doctest::Approx(1.0 - 0.25 * std::sqrt(10.0 + 2.0 * consts::sqrt5))
                         .epsilon(1e-15));
  CHECK(rc.beta2 == doctest::Approx((2.0 + std::sqrt(2.0 * consts::sqrt5 + 10.0)) /
                                    (1.0 + consts::sqrt5))
                        .epsilon(1e-15));
  CHECK(rc.sigma > 0.0);
  CHECK(rc.sigma < 0.03);
  CHECK(rc.coercivity_margin() > rc.exps.kappa + rc.exps.nu);
  CHECK(rc.sigma1 >= 1.0);
  CHECK(std::isfinite(rc.sigma2));
}

TEST_CASE("run constants: kappa too large is rejected with a message") {
  Rng rng(4343);
  ExponentParams exps;
  exps.kappa = 0.3;
  exps.nu = 0.01;
  CHECK_THROWS_WITH_AS(compute_constants(DomainParams{}, exps, rng, 500),
                       doctest::Contains("kappa+nu"), ConfigError);
}

TEST_CASE("run constants: a low-radius slab is rejected as out of region") {
  Rng rng(4444);
  DomainParams dom;
  dom.m = 8;
  dom.rho0 = 0.45;
  dom.rho1 = 0.55;
  dom.alpha = 0.02;
  CHECK_THROWS_WITH_AS(compute_constants(dom, ExponentParams{}, rng, 500),
                       doctest::Contains("parabola"), ConfigError);
}

TEST_CASE("coercivity of the extended block against the sampled sigma") {
  Rng rng(71);
  DomainParams dom;
  RunConstants rc = compute_constants(dom, ExponentParams{}, rng, 4000);
  double min_eig = 1e9, max_dev = 0.0;
  for (int i = 0; i < 4000; ++i) {
    const double t = rng.uniform(1e-5, rc.t0);
    const double rho = rng.uniform(dom.torus_lo(), dom.torus_hi());
    ExtendedBlocks e = extend(t, rho, 1.3, dom.m, rc.chi);
    min_eig = std::min(min_eig, min_sym_eig(e.Btilde));
    max_dev = std::max(max_dev, (e.Btilde - bcal_star(t)).jacobiSvd().singularValues()[0]);
  }
  CHECK(min_eig >= rc.gamma1 - 1.1 * rc.sigma);
  CHECK(max_dev <= 1.05 * rc.sigma);
  CHECK(rc.gamma1 - 1.1 * rc.sigma > rc.exps.kappa + rc.exps.nu);
}
