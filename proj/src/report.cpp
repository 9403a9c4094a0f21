#include "scriwave/report.hpp"

#include "scriwave/initial_data.hpp"

#include <fstream>
#include <iomanip>

#include "json.hpp"

namespace scriwave::report {

namespace {

std::ofstream open_out(const std::string& path) {
  std::ofstream f(path);
  if (!f) throw NumericalError("cannot open output file: " + path);
  f << std::setprecision(17);
  return f;
}

geometry::PhysicalPoint random_physical(Rng& rng) {
  const double tbar = rng.uniform(1.2, 6.0);
  const double rbar = rng.uniform(0.05, tbar - 0.1);
  return {tbar, rbar, rng.uniform(0.2, M_PI - 0.2), rng.uniform(0.0, 2.0 * M_PI)};
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

std::vector<CheckRow> run_identity_suite(const config::RunConfig& cfg, Rng& rng) {
  std::vector<CheckRow> rows;
  auto add = [&](const std::string& name, double residual, double tol) {
    rows.push_back({name, residual, tol, residual <= tol});
  };

  // geometry: mutually inverse maps
  {
    double worst = 0;
    for (int i = 0; i < 1000; ++i) {
      auto p = random_physical(rng);
      auto q = geometry::map_inverse(geometry::map_forward(p));
      worst = std::max(worst, std::abs(q.tbar - p.tbar) / std::max(1.0, p.tbar));
      worst = std::max(worst, std::abs(q.rbar - p.rbar) / std::max(1.0, p.tbar));
    }
    add("map_roundtrip", worst, 1e-10);
  }
  // geometry: analytic vs FD Jacobian of the map
  {
    double worst = 0;
    for (int i = 0; i < 200; ++i) {
      auto p = random_physical(rng);
      auto c = geometry::map_forward(p);
      Mat4 J = geometry::jacobian_compact(c);
      const double h = 1e-5;
      auto tof = [&](double tb, double rb) { return geometry::map_forward_t(tb, rb); };
      auto rof = [&](double tb, double rb) { return geometry::map_forward_r(tb, rb); };
      worst = std::max(worst, std::abs(J(0, 0) - fd::d1_central([&](double x) { return tof(x, p.rbar); }, p.tbar, h)));
      worst = std::max(worst, std::abs(J(0, 1) - fd::d1_central([&](double x) { return tof(p.tbar, x); }, p.rbar, h)));
      worst = std::max(worst, std::abs(J(1, 0) - fd::d1_central([&](double x) { return rof(x, p.rbar); }, p.tbar, h)));
      worst = std::max(worst, std::abs(J(1, 1) - fd::d1_central([&](double x) { return rof(p.tbar, x); }, p.rbar, h)));
    }
    add("jacobian_vs_fd", worst, 1e-6);
  }
  // geometry: spherical Jacobian pair
  {
    double worst = 0;
    for (int i = 0; i < 200; ++i) {
      auto p = random_physical(rng);
      Mat4 prod = geometry::jacobian_spherical(p) * geometry::jacobian_spherical_inverse(p);
      worst = std::max(worst, (prod - Mat4::Identity()).cwiseAbs().maxCoeff());
    }
    add("spherical_jacobian_pair", worst, 1e-10);
  }
  // geometry: metric inverse and pushforward
  {
    double worst_inv = 0, worst_push = 0, worst_omega = 0;
    Mat4 eta_inv = Mat4::Identity();
    eta_inv(0, 0) = -1.0;
    for (int i = 0; i < 200; ++i) {
      auto p = random_physical(rng);
      auto c = geometry::map_forward(p);
      auto s = geometry::metric_sample(c);
      worst_inv = std::max(worst_inv, (s.g_dd * s.g_uu - Mat4::Identity()).cwiseAbs().maxCoeff());
      Mat4 Jb = geometry::jacobian_spherical(p);
      Mat4 J = geometry::jacobian_compact(c);
      Mat4 pushed = J * (Jb * eta_inv * Jb.transpose()) * J.transpose();
      Mat4 expected = s.g_uu / sq(s.omega);
      worst_push = std::max(worst_push, (pushed - expected).cwiseAbs().maxCoeff() /
                                            expected.cwiseAbs().maxCoeff());
      worst_omega = std::max(worst_omega, std::abs(s.omega - p.rbar) / p.rbar);
    }
    add("metric_times_inverse", worst_inv, 1e-10);
    add("minkowski_pushforward", worst_push, 1e-8);
    add("conformal_factor_equals_rbar", worst_omega, 1e-10);
  }
  // symmetrizer: mixing identity and weight conditions
  {
    double worst_mix = 0, worst_pq = 0, worst_w = 0;
    const double t0 = consts::default_t0();
    for (int i = 0; i < 200; ++i) {
      const double r = rng.uniform(0.3, 0.9);
      const double t = std::min(rng.uniform(0.05, 0.9) * geometry::parabola_t(r), 0.999 * t0);
      worst_mix = std::max(worst_mix, (sym::mixing_matrix(t, r) * sym::mixing_matrix_inv(t, r) -
                                       Mat5::Identity())
                                          .cwiseAbs()
                                          .maxCoeff());
      const auto w = sym::time_weights(t);
      worst_pq = std::max(worst_pq, std::abs(w.p * w.a0 + w.a1 * w.p * (1.0 + w.q) / (1.0 + t) -
                                             (1.0 + t) / w.p));
      worst_pq = std::max(worst_pq, std::abs(w.a1 * w.p * w.q / t + 1.0 / w.p));
      worst_w = std::max(worst_w, std::abs(w.a0 + w.a1 * consts::beta0));
      worst_w = std::max(worst_w,
                         std::abs(2.0 / (2.0 + (3.0 + consts::sqrt5) * t) + w.a1 / consts::beta0));
    }
    add("mixing_matrix_identity", worst_mix, 1e-10);
    add("symmetrization_conditions", worst_pq, 1e-12);
    add("weight_identities", worst_w, 1e-14);
  }
  // symmetrizer: h-symmetry and projector algebra
  {
    double worst_sym = 0, worst_proj = 0;
    for (int i = 0; i < 200; ++i) {
      const double r = rng.uniform(0.3, 0.9);
      const double t = rng.uniform(0.05, 0.9) * geometry::parabola_t(r);
      const double theta = rng.uniform(0.3, M_PI - 0.3);
      sym::BlockSet b = sym::assemble(std::min(t, 0.99), r, theta);
      Mat5 H = Mat5(sym::h_weight(theta).asDiagonal());
      auto sym_dev = [&](const Mat5& A) {
        Mat5 HA = H * A;
        return (HA - HA.transpose()).cwiseAbs().maxCoeff();
      };
      worst_sym = std::max({worst_sym, sym_dev(b.B0), sym_dev(b.B1),
                            sym_dev(Mat5(rng.normal() * b.Btheta + rng.normal() * b.Bphi))});
      Mat5 P = sym::projector();
      worst_proj = std::max(worst_proj, (P * P - P).cwiseAbs().maxCoeff());
      worst_proj = std::max(worst_proj, (b.Bcal * P - P * b.Bcal).cwiseAbs().maxCoeff());
      worst_proj = std::max(worst_proj, (b.B0 * P - P * b.B0).cwiseAbs().maxCoeff());
    }
    add("h_symmetry_blocks", worst_sym, 1e-11);
    add("projector_algebra", worst_proj, 1e-15);
  }
  // coefficients: closed form vs pushforward oracle (includes the null case)
  {
    double worst = 0;
    for (int tensor = 0; tensor < 5; ++tensor) {
      coeffs::CartesianCoeffs a = tensor == 4 ? coeffs::minkowski_null(std::min(cfg.n_unknowns, 2))
                                              : coeffs::random_coeffs(std::min(cfg.n_unknowns, 2), rng);
      for (int i = 0; i < 100; ++i) {
        const double r = rng.uniform(0.3, 0.9);
        const double t = rng.uniform(0.05, 0.9) * geometry::parabola_t(r);
        const double th = rng.uniform(0.3, M_PI - 0.3), ph = rng.uniform(0.0, 2.0 * M_PI);
        auto closed = coeffs::compact_components(a, std::min(t, 0.99), r, th, ph);
        auto oracle = coeffs::pushforward_oracle(a, std::min(t, 0.99), r, th, ph);
        double scale = 1.0, diff = 0.0;
        for (size_t k = 0; k < closed.size(); ++k) {
          scale = std::max(scale, oracle[k].cwiseAbs().maxCoeff());
          diff = std::max(diff, (closed[k] - oracle[k]).cwiseAbs().maxCoeff());
        }
        worst = std::max(worst, diff / scale);
      }
    }
    add("coefficient_pushforward_oracle", worst, 1e-9);
  }
  // coercivity and boundary forms
  {
    sym::RunConstants rc = cfg.make_constants();
    add("gamma1_block_eigenvalue", std::abs(min_sym_eig(sym::bcal_star(0.0)) - rc.gamma1), 1e-12);
    double min_eig = 1e9;
    for (int i = 0; i < 10000; ++i) {
      const double t = rng.uniform(1e-5, rc.t0);
      const double rho = rng.uniform(rc.domain.torus_lo(), rc.domain.torus_hi());
      min_eig = std::min(min_eig, min_sym_eig(sym::extend(t, rho, 1.3, rc.domain.m, rc.chi).Btilde));
    }
    add("extended_block_coercivity", std::max(0.0, rc.gamma1 - rc.sigma - min_eig), 1e-12);
    add("coercivity_exponent_margin",
        std::max(0.0, rc.exps.kappa + rc.exps.nu - rc.coercivity_margin()), 0.0);

    double worst_minus = 0, worst_parab = 0;
    for (int i = 1; i <= 500; ++i) {
      const double t = rc.t0 * i / 500.0;
      worst_minus = std::max(worst_minus, max_sym_eig(sym::gamma_minus_form(t, rc.domain.rho0, rc.domain.m)));
      worst_parab = std::max(worst_parab, max_sym_eig(sym::gamma_parabola_form(t)));
    }
    add("gamma_plus_form_zero", sym::gamma_plus_form().cwiseAbs().maxCoeff(), 0.0);
    add("gamma_minus_form_spacelike", std::max(0.0, worst_minus), 1e-12);
    add("gamma_parabola_form_spacelike", std::max(0.0, worst_parab), 1e-12);

    double chi_dev = std::max(1.0 - rc.chi(0.5 * (rc.domain.rho0 + rc.domain.rho1)),
                              std::max(rc.chi(rc.domain.rho0 - rc.domain.alpha),
                                       rc.chi(rc.domain.rho1 + rc.domain.alpha)));
    add("cutoff_plateau_support", std::abs(chi_dev), 0.0);
  }
  // conformal wave-operator identity on a fixed box
  {
    auto u = [](const Vec4& x) { return 1.0 + x[0] * x[1] + 0.2 * sq(x[2]) * x[0] - 0.1 * x[3]; };
    auto omega = [](const Vec4& x) { return geometry::conformal_factor_tr(x[0], x[1]); };
    geometry::ChartBox box{Vec4(0.20, 0.80, 0.0, 0.0), Vec4(0.24, 0.84, 0.04, 0.04), 2};
    auto res = geometry::conformal_wave_identity_check(u, omega, box);
    add("conformal_wave_identity", res.max_residual, 1e-4);
    // exact identity probed by nested finite differences; tolerance is FD noise
    add("conformal_source_identity", res.max_source_residual, 1e-5);
  }
  return rows;
}

void write_identity_report(const std::string& path, const std::vector<CheckRow>& rows) {
  auto f = open_out(path);
  f << "check_name,max_residual,tolerance,pass\n";
  for (const auto& r : rows)
    f << r.name << "," << r.max_residual << "," << r.tolerance << "," << (r.pass ? 1 : 0) << "\n";
}

void write_energy_csv(const std::string& path, const std::vector<evol::StepRecord>& records,
                      const std::vector<diag::EnergyRecord>& energies) {
  auto f = open_out(path);
  f << "t,h_energy,Pi_energy,pi_integral,PV_norm,DV_norm,V0_sup,PV_h2,DV_h2\n";
  size_t e = 0;
  for (const auto& r : records) {
    double z2 = 0, pi2 = 0, piint = 0;
    while (e < energies.size() && energies[e].t > r.t + 1e-15) ++e;
    if (e < energies.size() && std::abs(energies[e].t - r.t) < 1e-12 * std::max(1.0, r.t)) {
      z2 = energies[e].z_norm2;
      pi2 = energies[e].pi_norm2;
      piint = energies[e].pi_integral;
    }
    f << r.t << "," << z2 << "," << pi2 << "," << piint << "," << r.pv_l2 << "," << r.dv_l2 << ","
      << r.v0_sup << "," << r.pv_h2 << "," << r.dv_h2 << "\n";
  }
}

void write_state_csv(const std::string& path, const evol::StateField& V, int m) {
  auto f = open_out(path);
  f << "rho,theta,phi,K,V0,V1,Vth,Vph,V4\n";
  const auto& g = V.grid;
  for (int j = 0; j < g.n_rho; ++j)
    for (int a = 0; a < g.n_angles(); ++a)
      for (int K = 0; K < V.n_unknowns; ++K) {
        const int pt = g.point(j, a);
        f << g.rho(j) << "," << g.theta(a) << "," << g.phi(a) << "," << (K + 1);
        for (int c = 0; c < 5; ++c) f << "," << V.at(K, c, pt);
        f << "\n";
      }
  (void)m;
}

void write_flow_trajectories_csv(const std::string& path, const flow::FlowTrajectory& tr) {
  auto f = open_out(path);
  f << "t";
  const int n = tr.xi.empty() ? 0 : int(tr.xi.front().size());
  for (int k = 1; k <= n; ++k) f << ",xi_" << k;
  f << ",xi_norm,jac_norm\n";
  for (size_t i = 0; i < tr.times.size(); ++i) {
    f << tr.times[i];
    for (int k = 0; k < n; ++k) f << "," << tr.xi[i][k];
    f << "," << tr.xi[i].norm() << ","
      << (i < tr.jac.size() ? tr.jac[i].norm() : 0.0) << "\n";
  }
}

void write_flow_verdict_json(const std::string& path, const flow::ClassifyResult& res,
                             double t_star, std::uint64_t seed) {
  nlohmann::json j;
  j["verdict"] = res.verdict == flow::Verdict::bounded
                     ? "bounded"
                     : res.verdict == flow::Verdict::blowup ? "blowup" : "inconclusive";
  j["C"] = res.C;
  j["R0"] = res.R0;
  j["linearity_slope"] = res.linearity;
  if (t_star > 0.0) j["t_star"] = t_star;
  j["seed"] = seed;
  auto f = open_out(path);
  f << j.dump(2) << "\n";
}

void write_theorem_bounds_csv(const std::string& path,
                              const std::vector<evol::StepRecord>& records,
                              const diag::DecayFit& fit) {
  auto f = open_out(path);
  f << "t,V0_sup,PV_norm,DV_norm,PV_h2,DV_h2\n";
  for (const auto& r : records)
    f << r.t << "," << r.v0_sup << "," << r.pv_l2 << "," << r.dv_l2 << "," << r.pv_h2 << ","
      << r.dv_h2 << "\n";
  f << "# fitted slopes: PV " << fit.slope_pv << " (pass " << fit.pass_pv << "), DV "
    << fit.slope_dv << " (pass " << fit.pass_dv << ")\n";
}

void write_residuals_csv(const std::string& path,
                         const std::vector<std::pair<int, diag::ResidualNorms>>& rows) {
  auto f = open_out(path);
  f << "n_rho,w_equation,x_equation,y_equation\n";
  for (const auto& [n, r] : rows) f << n << "," << r.w_eq << "," << r.x_eq << "," << r.y_eq << "\n";
}

void write_summary(const std::string& path, const std::vector<std::string>& lines) {
  auto f = open_out(path);
  for (const auto& l : lines) f << l << "\n";
}

void svg_line_chart(const std::string& path,
                    const std::vector<std::pair<std::string, std::vector<std::pair<double, double>>>>&
                        series) {
  const int Wd = 720, Ht = 420, margin = 50;
  double xmin = 1e300, xmax = -1e300, ymin = 1e300, ymax = -1e300;
  for (const auto& [name, pts] : series)
    for (auto [x, y] : pts) {
      if (x <= 0.0 || y <= 0.0) continue;
      xmin = std::min(xmin, std::log10(x));
      xmax = std::max(xmax, std::log10(x));
      ymin = std::min(ymin, std::log10(y));
      ymax = std::max(ymax, std::log10(y));
    }
  if (xmin >= xmax) {
    xmin -= 1;
    xmax += 1;
  }
  if (ymin >= ymax) {
    ymin -= 1;
    ymax += 1;
  }
  auto sx = [&](double lx) { return margin + (lx - xmin) / (xmax - xmin) * (Wd - 2 * margin); };
  auto sy = [&](double ly) { return Ht - margin - (ly - ymin) / (ymax - ymin) * (Ht - 2 * margin); };
  const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e"};
  auto f = open_out(path);
  f << "<svg xmlns='http://www.w3.org/2000/svg' width='" << Wd << "' height='" << Ht << "'>\n";
  f << "<rect width='100%' height='100%' fill='white'/>\n";
  f << "<rect x='" << margin << "' y='" << margin << "' width='" << Wd - 2 * margin
    << "' height='" << Ht - 2 * margin << "' fill='none' stroke='#999'/>\n";
  int ci = 0;
  for (const auto& [name, pts] : series) {
    f << "<polyline fill='none' stroke='" << colors[ci % 5] << "' stroke-width='1.5' points='";
    for (auto [x, y] : pts)
      if (x > 0.0 && y > 0.0) f << sx(std::log10(x)) << "," << sy(std::log10(y)) << " ";
    f << "'/>\n";
    f << "<text x='" << margin + 8 << "' y='" << margin + 16 + 16 * ci << "' fill='"
      << colors[ci % 5] << "' font-size='12'>" << name << "</text>\n";
    ++ci;
  }
  f << "<text x='" << Wd / 2 << "' y='" << Ht - 12
    << "' font-size='12' text-anchor='middle'>log10 t</text>\n";
  f << "</svg>\n";
}

}  // namespace scriwave::report
