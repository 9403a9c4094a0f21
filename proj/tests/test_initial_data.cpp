#include "scriwave/initial_data.hpp"

#include "doctest.h"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>

using namespace scriwave;
using namespace scriwave::idata;

namespace {

sym::RunConstants constants_with(double t0_override = 0.0) {
  Rng rng(321);
  sym::DomainParams dom;
  dom.t0_override = t0_override;
  return sym::compute_constants(dom, sym::ExponentParams{}, rng, 1000);
}

evol::Grid grid_for(const sym::DomainParams& dom, int n = 128) {
  evol::Grid g;
  g.n_rho = n;
  g.rho_lo = dom.torus_lo();
  g.rho_hi = dom.torus_hi();
  return g;
}

// conformal u on the compact chart from an analytic physical profile
struct Profile {
  double ubar(double tb, double rb) const { return 0.8 * std::sin(0.11 * tb) * std::cos(0.07 * rb); }
  double dt(double tb, double rb) const { return 0.8 * 0.11 * std::cos(0.11 * tb) * std::cos(0.07 * rb); }
  double dr(double tb, double rb) const { return -0.8 * 0.07 * std::sin(0.11 * tb) * std::sin(0.07 * rb); }
  double u(double t, double r) const {
    auto p = geometry::map_inverse({t, r, M_PI / 2, 0.0});
    return geometry::conformal_factor_tr(t, r) * ubar(p.tbar, p.rbar);
  }
};

}  // namespace

TEST_CASE("physical to conformal: printed hand values at r = 1/2") {
  auto c1 = physical_to_conformal_point(1.0, 0.0, 0.0, 0.5, 0.5, DataVariant::paper_displayed);
  CHECK(c1.v == doctest::Approx(0.5).epsilon(1e-14));
  auto c2 = physical_to_conformal_point(0.0, 1.0, 0.0, 0.5, 0.5, DataVariant::paper_displayed);
  CHECK(c2.w == doctest::Approx(-1.0).epsilon(1e-14));
  CHECK(c2.z == doctest::Approx(1.0).epsilon(1e-14));
  auto z = physical_to_conformal_point(0.0, 0.0, 0.0, 0.5, 0.5, DataVariant::paper_displayed);
  CHECK(z.v == 0.0);
  CHECK(z.w == 0.0);
  CHECK(z.z == 0.0);
}

TEST_CASE("printed transformation equals the generic chain at t0 = 1/2") {
  Rng rng(11);
  for (int i = 0; i < 200; ++i) {
    const double r = rng.uniform(0.2, 0.98);
    const double vb = rng.normal(), wb = rng.normal(), zb = rng.normal();
    auto disp = physical_to_conformal_point(vb, wb, zb, r, 0.5, DataVariant::paper_displayed);
    auto chain = physical_to_conformal_point(vb, wb, zb, r, 0.5, DataVariant::chain);
    CHECK(disp.v == doctest::Approx(chain.v).epsilon(1e-13));
    CHECK(disp.w == doctest::Approx(chain.w).epsilon(1e-13));
    CHECK(disp.z == doctest::Approx(chain.z).epsilon(1e-13));
  }
}

TEST_CASE("printed first-order rows equal the generic chain at t0 = 1/2") {
  Rng rng(12);
  for (int i = 0; i < 200; ++i) {
    const double rho = rng.uniform(0.5, 0.98);
    ConformalTriple c{rng.normal(), rng.normal(), rng.normal()};
    const double dth = rng.normal(), dph = rng.normal();
    Vec5 disp = first_order_point(c, dth, dph, rho, 1, 0.5, DataVariant::paper_displayed);
    Vec5 chain = first_order_point(c, dth, dph, rho, 1, 0.5, DataVariant::chain);
    CHECK((disp - chain).cwiseAbs().maxCoeff() < 1e-12 * std::max(1.0, disp.cwiseAbs().maxCoeff()));
  }
}

TEST_CASE("finite-difference chain-rule oracle validates the maps") {
  // v = u|_{t0}, w = d_t u|_{t0}, z = d_r u|_{t0} computed by finite
  // differences of u = Omega ubar(psi^{-1}) match the pointwise map
  Profile pp;
  auto oracle = [&](double r, double t0) {
    ConformalTriple c;
    c.v = pp.u(t0, r);
    c.w = fd::d1_central([&](double t) { return pp.u(t, r); }, t0, 1e-6);
    c.z = fd::d1_central([&](double rr) { return pp.u(t0, rr); }, r, 1e-6);
    return c;
  };
  auto physical_inputs = [&](double r, double t0) {
    auto p = geometry::map_inverse({t0, r, M_PI / 2, 0.0});
    return std::array<double, 3>{pp.ubar(p.tbar, p.rbar), pp.dt(p.tbar, p.rbar),
                                 pp.dr(p.tbar, p.rbar)};
  };
  Rng rng(13);
  for (int i = 0; i < 40; ++i) {
    const double r = rng.uniform(0.55, 0.8);
    // at t0 = 1/2 the printed map is the exact chain rule
    auto in = physical_inputs(r, 0.5);
    auto disp = physical_to_conformal_point(in[0], in[1], in[2], r, 0.5,
                                            DataVariant::paper_displayed);
    auto orc = oracle(r, 0.5);
    CHECK(disp.v == doctest::Approx(orc.v).epsilon(1e-8));
    CHECK(disp.w == doctest::Approx(orc.w).epsilon(1e-6));
    CHECK(disp.z == doctest::Approx(orc.z).epsilon(1e-6));
  }
  // at the run t0 the chain variant matches and the printed one deviates
  const double t0 = consts::default_t0();
  double max_chain_dev = 0.0, max_disp_dev = 0.0;
  for (int i = 0; i < 40; ++i) {
    const double r = rng.uniform(0.55, 0.8);
    auto in = physical_inputs(r, t0);
    auto chain = physical_to_conformal_point(in[0], in[1], in[2], r, t0, DataVariant::chain);
    auto disp =
        physical_to_conformal_point(in[0], in[1], in[2], r, t0, DataVariant::paper_displayed);
    auto orc = oracle(r, t0);
    max_chain_dev = std::max(max_chain_dev, std::abs(chain.w - orc.w) / std::max(1.0, std::abs(orc.w)));
    max_disp_dev = std::max(max_disp_dev, std::abs(disp.w - orc.w) / std::max(1.0, std::abs(orc.w)));
  }
  CHECK(max_chain_dev < 1e-6);
  CHECK(max_disp_dev > 1e-3);  // the printed constants assume t0 = 1/2
}

TEST_CASE("first-order rows: hand values and round trip through M^{-1}") {
  const double t0 = consts::default_t0();
  ConformalTriple zero{};
  Vec5 vz = first_order_point(zero, 0.0, 0.0, 0.987, 1, t0, DataVariant::chain);
  CHECK(vz.cwiseAbs().maxCoeff() == 0.0);

  // angularly constant v: rows theta/phi vanish
  ConformalTriple c{0.7, -0.2, 0.4};
  Vec5 v = first_order_point(c, 0.0, 0.0, 0.987, 1, t0, DataVariant::chain);
  CHECK(v[2] == 0.0);
  CHECK(v[3] == 0.0);

  // chain consistency: U = M^{-1} Vhat reproduces the scaled data
  Rng rng(14);
  for (int i = 0; i < 100; ++i) {
    const double rho = rng.uniform(0.98, 0.995);
    const double r = rho;
    ConformalTriple cc{rng.normal(), rng.normal(), rng.normal()};
    const double dth = rng.normal(), dph = rng.normal();
    Vec5 vhat = first_order_point(cc, dth, dph, rho, 1, t0, DataVariant::chain);
    Vec5 U = sym::mixing_matrix_inv(t0, r) * vhat;
    const double sq0 = std::sqrt(t0);
    CHECK(U[0] == doctest::Approx(t0 * cc.w / (1.0 - r)).epsilon(1e-10));
    CHECK(U[1] == doctest::Approx(sq0 * r * cc.z).epsilon(1e-10));
    CHECK(U[2] == doctest::Approx(sq0 * dth / (1.0 - r)).epsilon(1e-10));
    CHECK(U[3] == doctest::Approx(sq0 * dph / (1.0 - r)).epsilon(1e-10));
    CHECK(U[4] == doctest::Approx(sq0 * cc.v / (1.0 - r)).epsilon(1e-10));
  }

  // the printed rows divide by r^2 + 2r - 1
  ConformalTriple cv{1.0, 0.0, 0.0};
  CHECK_THROWS_AS(
      first_order_point(cv, 1.0, 0.0, std::sqrt(2.0) - 1.0, 1, 0.5, DataVariant::paper_displayed),
      DomainError);
}

TEST_CASE("torus extension: restriction, support and derivative bound") {
  auto rc = constants_with();
  evol::Grid g = grid_for(rc.domain, 256);
  evol::StateField V(1, g, rc.t0);
  Rng rng(15);
  for (int j = 0; j < g.n_rho; ++j) {
    Vec5 v;
    for (int c = 0; c < 5; ++c) v[c] = std::sin(7.0 * g.rho(j)) + 0.1 * c;
    V.set_block(0, j, v);
  }
  evol::StateField E = extend_to_torus(V, rc);
  double interior_d = 0.0, extended_d = 0.0, max_v = V.max_abs();
  Eigen::ArrayXXd dV = evol::d_rho_periodic(V.comps, g);
  Eigen::ArrayXXd dE = evol::d_rho_periodic(E.comps, g);
  double max_dchi = 0.0;
  for (int j = 0; j < g.n_rho; ++j) {
    const double rho = g.rho(j);
    max_dchi = std::max(max_dchi, std::abs(rc.chi.derivative(rho)));
    if (rho >= rc.domain.rho0 && rho <= rc.domain.rho1) {
      CHECK((E.block(0, j) - V.block(0, j)).cwiseAbs().maxCoeff() == 0.0);
      interior_d = std::max(interior_d, dV.col(j).abs().maxCoeff());
    }
    if (rho <= rc.domain.rho0 - rc.domain.alpha || rho >= rc.domain.rho1 + rc.domain.alpha)
      CHECK(E.block(0, j).cwiseAbs().maxCoeff() == 0.0);
    extended_d = std::max(extended_d, dE.col(j).abs().maxCoeff());
  }
  CHECK(extended_d <= max_dchi * max_v + dV.abs().maxCoeff() + 1.0);
}

TEST_CASE("constraints: zero data and chain-consistent data") {
  auto rc = constants_with();
  // zero data -> zero residuals
  {
    evol::Grid g = grid_for(rc.domain, 64);
    evol::StateField V(1, g, rc.t0);
    auto rep = constraint_residual(V, rc);
    CHECK(rep.res1_displayed == 0.0);
    CHECK(rep.res1_chain == 0.0);
  }
  // conformal data with z = dv/dr satisfies the chain constraint; the printed
  // constants (t0 = 1/2) do not hold at the run t0 and are reported as such
  auto build = [&](int n) {
    evol::Grid g = grid_for(rc.domain, n);
    evol::StateField V(1, g, rc.t0);
    const double c0 = 0.5 * (rc.domain.rho0 + rc.domain.rho1), wdt = 2.5e-3;
    for (int j = 0; j < g.n_rho; ++j) {
      const double rho = g.rho(j);
      const double vv = std::exp(-sq((rho - c0) / wdt));
      const double zz = vv * (-2.0 * (rho - c0) / sq(wdt));  // dv/drho = dv/dr at m=1
      const double ww = 0.3 * vv;
      V.set_block(0, j,
                  first_order_point({vv, ww, zz}, 0.0, 0.0, rho, 1, rc.t0, DataVariant::chain));
    }
    return constraint_residual(V, rc);
  };
  auto coarse = build(256);
  auto fine = build(512);
  CHECK(coarse.res1_chain < 2e-4);
  CHECK(fine.res1_chain < coarse.res1_chain / 10.0);  // 4th-order FD convergence
  CHECK(coarse.res1_displayed > 1e-2 * coarse.res1_chain);
  CHECK(coarse.res1_displayed > 0.01);  // the printed constants genuinely fail here
  MESSAGE("res1 chain ", fine.res1_chain, " vs printed-constant residual ",
          fine.res1_displayed);
}

TEST_CASE("constraints with the printed constants hold at t0 = 1/2") {
  // t0 = 1/2 is outside the symmetric-hyperbolic window (t0 > time0), which
  // the validator rejects; build constants by hand for this algebra check
  sym::RunConstants rc;
  rc.domain = sym::DomainParams{};
  rc.exps = sym::ExponentParams{};
  rc.t0 = 0.5;
  rc.chi = sym::Cutoff(rc.domain.rho0, rc.domain.rho1, rc.domain.alpha);
  evol::Grid g = grid_for(rc.domain, 512);
  evol::StateField V(1, g, 0.5);
  const double c0 = 0.5 * (rc.domain.rho0 + rc.domain.rho1), wdt = 2.5e-3;
  for (int j = 0; j < g.n_rho; ++j) {
    const double rho = g.rho(j);
    const double vv = std::exp(-sq((rho - c0) / wdt));
    const double zz = vv * (-2.0 * (rho - c0) / sq(wdt));
    V.set_block(0, j,
                first_order_point({vv, 0.4 * vv, zz}, 0.0, 0.0, rho, 1, 0.5,
                                  DataVariant::paper_displayed));
  }
  auto rep = constraint_residual(V, rc);
  CHECK(rep.res1_displayed < 2e-4);
  CHECK(rep.res1_chain == doctest::Approx(rep.res1_displayed).epsilon(1e-6));
}

TEST_CASE("full mode: chain data satisfies the angular constraint at FD order") {
  // the cancellation between d_Lambda V4 and the V_Lambda row is algebraic;
  // the measured residual is the angular FD error of d_theta V4 and shrinks
  // with theta resolution (the fields themselves are O(10^3) here)
  auto rc = constants_with();
  DataSet data;
  data.vbar = {expr::Expression::parse("0.3*gauss(rho,0.987,0.003)*sin(theta)*sin(theta)*cos(phi)")};
  data.wbar = {expr::Expression::parse("0.1*gauss(rho,0.987,0.003)")};
  data.zbar = {expr::Expression::parse("0")};
  auto residual_at = [&](int ntheta) {
    evol::Grid g = grid_for(rc.domain, 16);
    g.mode = evol::Grid::Mode::full;
    g.n_theta = ntheta;
    g.n_phi = ntheta - 1;  // refine both angular directions together
    evol::StateField V = build_initial_state(data, g, rc, DataVariant::chain, false);
    auto rep = constraint_residual(V, rc);
    double scale = 1.0;
    for (int pt = 0; pt < g.n_points(); ++pt)
      scale = std::max(scale, std::abs(V.at(0, 4, pt)));
    return rep.res2_chain / scale;
  };
  const double coarse = residual_at(17);
  const double fine = residual_at(33);
  MESSAGE("relative res2 at n_theta 17/33: ", coarse, " ", fine);
  CHECK(fine < 2e-2);
  CHECK(fine < coarse / 3.0);
}

TEST_CASE("gridded CSV data round-trips against the expression pipeline") {
  auto rc = constants_with();
  evol::Grid g = grid_for(rc.domain, 64);
  // write a CSV sampling the same profile the expression path uses
  const std::string path = "/tmp/scriwave_test_data.csv";
  {
    std::ofstream f(path);
    f << "rho,theta,phi,K,vbar,wbar,zbar\n" << std::setprecision(17);
    for (int j = -2; j < g.n_rho + 2; ++j) {  // cover the grid with margin
      const double rho = g.rho_lo + j * g.drho();
      const double vb = 1e-3 * std::exp(-sq((rho - 0.987) / 0.0015));
      f << rho << ",0,0,1," << vb << "," << 0.5 * vb << ",0\n";
    }
  }
  GriddedData gd = load_gridded_csv(path, 1);
  evol::StateField from_csv = build_initial_state_gridded(gd, g, rc, DataVariant::chain);
  DataSet ds;
  ds.vbar = {expr::Expression::parse("1e-3*gauss(rho,0.987,0.0015)")};
  ds.wbar = {expr::Expression::parse("0.5e-3*gauss(rho,0.987,0.0015)")};
  ds.zbar = {expr::Expression::parse("0")};
  evol::StateField from_expr = build_initial_state(ds, g, rc, DataVariant::chain);
  CHECK((from_csv.comps - from_expr.comps).abs().maxCoeff() <
        1e-10 * std::max(1.0, from_expr.max_abs()));
  std::remove(path.c_str());

  std::ofstream bad("/tmp/scriwave_bad.csv");
  bad << "rho,theta,phi,K,vbar,wbar,zbar\n0.99,0,0,7,1,0,0\n";
  bad.close();
  CHECK_THROWS_AS(load_gridded_csv("/tmp/scriwave_bad.csv", 1), ConfigError);
  std::remove("/tmp/scriwave_bad.csv");
}
