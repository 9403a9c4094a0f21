#include "scriwave/diagnostics.hpp"

#include <algorithm>
#include <cmath>

namespace scriwave::diag {

using evol::Grid;
using evol::StateField;
using Eigen::MatrixXd;
using Eigen::VectorXd;

std::vector<flow::FlowParams> make_flow_context(const evol::EvolveContext& ctx, const Grid& g) {
  std::vector<flow::FlowParams> out;
  out.reserve(g.n_points());
  const int n = ctx.n_unknowns;
  for (int j = 0; j < g.n_rho; ++j)
    for (int a = 0; a < g.n_angles(); ++a) {
      flow::FlowParams p;
      p.n = n;
      p.rho = g.rho(j);
      p.m = ctx.constants.domain.m;
      p.chi = ctx.constants.chi(g.rho(j));
      p.t0 = ctx.constants.t0;
      p.mode = flow::CoefficientMode::exact;
      p.b.assign(n, MatrixXd::Zero(n, n));
      if (!ctx.source.zero)
        for (int K = 0; K < n; ++K)
          for (int I = 0; I < n; ++I)
            for (int J = 0; J < n; ++J) p.b[K](I, J) = ctx.source.bval(a, K, I, J);
      out.push_back(std::move(p));
    }
  return out;
}

CompositeState composite(const StateField& V, const evol::EvolveContext& ctx,
                         const std::vector<flow::FlowParams>& flow_ctx) {
  const Grid& g = V.grid;
  const int n = V.n_unknowns;
  CompositeState z;
  z.t = V.t;
  const double tk = std::pow(V.t, ctx.constants.exps.kappa);
  const double tnu = std::pow(V.t, -ctx.constants.exps.nu);
  z.W = tk * evol::d_rho_periodic(V.comps, g);
  if (g.mode == Grid::Mode::full) {
    z.Wth = tk * evol::d_theta(V.comps, g);
    z.Wph = tk * evol::d_phi(V.comps, g);
  }
  z.X = tnu * V.comps;
  for (int K = 0; K < n; ++K) z.X.row(5 * K).setZero();
  z.Y.resize(n, g.n_points());
#pragma omp parallel for schedule(dynamic, 8)
  for (int pt = 0; pt < g.n_points(); ++pt) {
    VectorXd v0(n);
    for (int K = 0; K < n; ++K) v0[K] = V.at(K, 0, pt);
    z.Y.col(pt) = flow::y_transform(v0, V.t, flow_ctx[pt], flow::Direction::to_Y).array();
  }
  return z;
}

namespace {

double h_energy(const ArrayXXd& f, const Grid& g) {
  // h-weighted square integral; weights are 1 away from poles in spherical mode
  double sum = 0.0;
  const int n5 = int(f.rows());
  for (int j = 0; j < g.n_rho; ++j)
    for (int a = 0; a < g.n_angles(); ++a) {
      const double csc2 = 1.0 / sq(std::sin(g.theta(a)));
      const int pt = g.point(j, a);
      for (int row = 0; row < n5; ++row) {
        const double w = (row % 5 == 3) ? csc2 : 1.0;
        sum += w * sq(f(row, pt));
      }
    }
  return sum * g.drho() / g.n_angles();
}

}  // namespace

EnergyRecord energies(const CompositeState& z, const Grid& g) {
  EnergyRecord rec;
  rec.t = z.t;
  double wsum = h_energy(z.W, g);
  if (g.mode == Grid::Mode::full) {
    wsum += h_energy(z.Wth, g);
    // q^{phi phi} = csc^2 weight for the W_phi direction
    ArrayXXd wph = z.Wph;
    for (int j = 0; j < g.n_rho; ++j)
      for (int a = 0; a < g.n_angles(); ++a)
        wph.col(g.point(j, a)) /= std::sin(g.theta(a));
    wsum += h_energy(wph, g);
  }
  const double xsum = h_energy(z.X, g);
  const double ysum = (z.Y * z.Y).sum() * g.drho() / g.n_angles();
  rec.z_norm2 = wsum + xsum + ysum;
  rec.pi_norm2 = wsum + xsum;
  return rec;
}

EnergyRecord EnergyMonitor::push(EnergyRecord rec) {
  if (have_prev_) {
    // d tau / tau, integrating downward from t0
    const double dlog = std::log(prev_t_ / rec.t);
    total_ += 0.5 * (prev_pi_ + rec.pi_norm2) * dlog;
  }
  have_prev_ = true;
  prev_t_ = rec.t;
  prev_pi_ = rec.pi_norm2;
  rec.pi_integral = total_;
  return rec;
}

double fit_decay_exponent(const std::vector<double>& times, const std::vector<double>& norms) {
  std::vector<double> lt, ln;
  for (size_t i = 0; i < times.size(); ++i)
    if (norms[i] > 0.0) {
      lt.push_back(std::log(times[i]));
      ln.push_back(std::log(norms[i]));
    }
  return fit_slope(lt, ln);
}

DecayFit decay_fit(const std::vector<evol::StepRecord>& records, const sym::ExponentParams& exps) {
  if (records.size() < 10) throw NumericalError("decay_fit: need at least 10 samples");
  const double t_end = records.back().t;
  std::vector<double> t, pv, dv, pvh, dvh;
  double scale = 0.0;
  for (const auto& r : records) scale = std::max({scale, r.pv_l2, r.dv_l2});
  for (const auto& r : records) {
    if (r.t > 10.0 * t_end) continue;
    t.push_back(r.t);
    pv.push_back(r.pv_l2);
    dv.push_back(r.dv_l2);
    pvh.push_back(r.pv_h2);
    dvh.push_back(r.dv_h2);
  }
  DecayFit fit;
  fit.samples_used = int(t.size());
  if (fit.samples_used < 10) throw NumericalError("decay_fit: final decade has < 10 samples");
  if (scale < 1e-100) {  // identically zero run passes trivially
    fit.pass_pv = fit.pass_dv = true;
    return fit;
  }
  fit.slope_pv = fit_decay_exponent(t, pv);
  fit.slope_dv = fit_decay_exponent(t, dv);
  fit.slope_pv_hk = fit_decay_exponent(t, pvh);
  fit.slope_dv_hk = fit_decay_exponent(t, dvh);
  fit.pass_pv = fit.slope_pv >= exps.nu - 0.2;
  fit.pass_dv = fit.slope_dv >= -exps.kappa - 0.2;
  return fit;
}

VectorXd split_remainder(const VectorXd& v_point, double t, double rho, int angle,
                         const evol::EvolveContext& ctx) {
  const int n = ctx.n_unknowns;
  const double chi = ctx.constants.chi(rho);
  const double r = geometry::r_from_rho(rho, ctx.constants.domain.m);
  VectorXd rem = VectorXd::Zero(5 * n);
  if (ctx.source.zero || chi == 0.0) return rem;
  evol::PointSource ps = evol::source_f(v_point, t, r, angle, ctx.source, ctx.opts);
  rem = chi * ps.F;
  for (int K = 0; K < n; ++K) rem[5 * K] -= chi * ps.q[K] / t;
  return rem;
}

namespace {

// analytic rho-derivatives of the extended blocks (spherical entries only)
struct BlockDerivs {
  Mat5 dBtilde = Mat5::Zero();
  Mat5 dCtilde = Mat5::Zero();
  double dadvect = 0.0;
};

BlockDerivs block_derivs(double t, double rho, const evol::EvolveContext& ctx) {
  const int m = ctx.constants.domain.m;
  const sym::Cutoff& cut = ctx.constants.chi;
  const double chi = cut(rho), dchi = cut.derivative(rho);
  const double r = geometry::r_from_rho(rho, m);
  const double rp = m * geometry::r_from_rho(rho, m - 1);  // dr/drho
  const double w = 1.0 - r;
  const auto tw = sym::time_weights(t);
  const double D = geometry::region_quantity(t, r);
  const double dD = rp * (2.0 * r + 2.0 * t * w);

  BlockDerivs out;
  out.dadvect = dchi * w * rho / m + chi * (1.0 - (1.0 + m) * r) / m;
  if (chi == 0.0 && dchi == 0.0) return out;

  Mat5 dB = Mat5::Zero(), dC = Mat5::Zero();
  dB(1, 1) = tw.a1 * (1.0 - consts::sqrt5) / 2.0 * rp;
  dB(2, 2) = dB(3, 3) = (3.0 + t + 2.0 * tw.q) / (2.0 * (1.0 + t)) * rp *
                        ((2.0 * r - 2.0 * w * t) * D - (r * r + w * w * t) * (2.0 * r + 2.0 * t * w)) /
                        sq(D);
  dC(0, 0) = std::sqrt(t) * tw.a0 * rp;
  dC(0, 1) = tw.a1 * rp;
  dC(1, 0) = tw.a0 * (1.0 - consts::sqrt5) / 2.0 * rp;
  if (ctx.opts.lambda_row_sources) {
    const double core = rp * ((2.0 * r * w - r * r) * D - w * r * r * (2.0 * r + 2.0 * t * w)) / sq(D);
    dC(2, 0) = dC(3, 0) = tw.a0 * tw.p * core;
    dC(2, 1) = dC(3, 1) = tw.a1 * tw.p * core;
  }
  sym::BlockSet b = sym::assemble(t, r, M_PI / 2.0, ctx.opts);
  out.dBtilde = dchi * (b.Bcal - sym::bcal_star(t)) + chi * dB;
  out.dCtilde = dchi * (b.Ccal - sym::ccal_star(t)) + chi * dC;
  (void)dD;
  return out;
}

}  // namespace

ResidualNorms system_residuals(const StateField& prev, const StateField& mid,
                               const StateField& next, const evol::EvolveContext& ctx,
                               const std::vector<flow::FlowParams>& flow_ctx) {
  const Grid& g = mid.grid;
  if (g.mode != Grid::Mode::spherical)
    throw ConfigError("system_residuals: spherical mode only");
  const int n = mid.n_unknowns;
  const double t = mid.t;
  const double kappa = ctx.constants.exps.kappa, nu = ctx.constants.exps.nu;
  const double ds = std::log(prev.t / next.t) * 0.5;  // snapshots equally spaced in ln t
  if (!(ds > 0.0)) throw ConfigError("system_residuals: snapshots must decrease in t");

  auto w_field = [&](const StateField& s) {
    return ArrayXXd(std::pow(s.t, kappa) * evol::d_rho_periodic(s.comps, g));
  };
  auto x_field = [&](const StateField& s) {
    ArrayXXd x = std::pow(s.t, -nu) * s.comps;
    for (int K = 0; K < n; ++K) x.row(5 * K).setZero();
    return x;
  };
  auto g_field = [&](const StateField& s) {
    ArrayXXd gf(5 * n, g.n_points());
    for (int pt = 0; pt < g.n_points(); ++pt)
      gf.col(pt) = split_remainder(s.comps.col(pt).matrix(), s.t, g.rho(pt / g.n_angles()), 0, ctx);
    return gf;
  };

  ArrayXXd W = w_field(mid), Wp = w_field(prev), Wn = w_field(next);
  ArrayXXd X = x_field(mid), Xp = x_field(prev), Xn = x_field(next);
  ArrayXXd G = g_field(mid);
  ArrayXXd dW = evol::d_rho_periodic(W, g);
  ArrayXXd dX = evol::d_rho_periodic(X, g);
  ArrayXXd dV = evol::d_rho_periodic(mid.comps, g);
  ArrayXXd dG = evol::d_rho_periodic(G, g);
  // centered log-time derivatives: d_t f = (f_prev - f_next) / (2 ds t)
  ArrayXXd Wt = (Wp - Wn) / (2.0 * ds * t);
  ArrayXXd Xt = (Xp - Xn) / (2.0 * ds * t);

  ArrayXXd resW(5 * n, g.n_points()), resX(5 * n, g.n_points());
  Eigen::ArrayXXd resY(n, g.n_points());

  // Y fields for the flow-regularized equation
  CompositeState zp = composite(prev, ctx, flow_ctx);
  CompositeState zm = composite(mid, ctx, flow_ctx);
  CompositeState zn = composite(next, ctx, flow_ctx);

  const double sqt = std::sqrt(t);
  const double tk = std::pow(t, kappa);
  for (int j = 0; j < g.n_rho; ++j) {
    const double rho = g.rho(j);
    const double r = geometry::r_from_rho(rho, ctx.constants.domain.m);
    const double chi = ctx.constants.chi(rho);
    sym::ExtendedBlocks e =
        sym::extend(t, rho, M_PI / 2.0, ctx.constants.domain.m, ctx.constants.chi, ctx.opts);
    BlockDerivs d = block_derivs(t, rho, ctx);
    const double D = geometry::region_quantity(t, r);
    const double gpref = -r * r * r * chi / (2.0 * D);
    const double dgpref = -ctx.constants.chi.derivative(rho) * r * r * r / (2.0 * D) -
                          chi * ctx.constants.domain.m * geometry::r_from_rho(rho, ctx.constants.domain.m - 1) *
                              (3.0 * r * r * D - r * r * r * (2.0 * r + 2.0 * t * (1.0 - r))) /
                              (2.0 * sq(D));

    const int pt = j;
    for (int K = 0; K < n; ++K) {
      Vec5 w5 = W.col(pt).segment(5 * K, 5).matrix();
      Vec5 dw5 = dW.col(pt).segment(5 * K, 5).matrix();
      Vec5 wt5 = Wt.col(pt).segment(5 * K, 5).matrix();
      Vec5 v5 = mid.comps.col(pt).segment(5 * K, 5).matrix();
      Vec5 pv5 = v5;
      pv5[0] = 0.0;
      Vec5 pw5 = w5;
      pw5[0] = 0.0;

      // Q_rho and the differentiated singular prefactor term
      double qrho = 0.0, dpref_v0v0 = 0.0;
      if (!ctx.source.zero)
        for (int I = 0; I < n; ++I)
          for (int J = 0; J < n; ++J) {
            const double b = ctx.source.bval(0, K, I, J);
            const double v0I = mid.at(I, 0, pt), v0J = mid.at(J, 0, pt);
            const double dv0I = dV(5 * I, pt), dv0J = dV(5 * J, pt);
            qrho += gpref * tk * b * (dv0I * v0J + v0I * dv0J);
            dpref_v0v0 += dgpref * b * v0I * v0J;
          }

      Vec5 Hrho = -(d.dadvect / t) * (e.B1 * w5) + std::pow(t, kappa - 1.0) * (d.dBtilde * pv5) +
                  std::pow(t, kappa - 0.5) * (d.dCtilde * v5) + (1.0 / sqt) * (e.Ctilde * w5) +
                  tk * dG.col(pt).segment(5 * K, 5).matrix();
      Hrho[0] += std::pow(t, kappa - 1.0) * dpref_v0v0;

      Vec5 rw = wt5 + (e.advect / t) * (e.B1 * dw5) - (1.0 / t) * (e.Btilde * pw5 + kappa * w5) -
                Hrho;
      rw[0] -= qrho / t;
      resW.col(pt).segment(5 * K, 5) = rw.array();

      // projected system
      Vec5 x5 = X.col(pt).segment(5 * K, 5).matrix();
      Vec5 dx5 = dX.col(pt).segment(5 * K, 5).matrix();
      Vec5 xt5 = Xt.col(pt).segment(5 * K, 5).matrix();
      Mat5 P = sym::projector();
      Mat5 combr = P * e.B1 - e.B1 * P;
      Vec5 K5 = -(e.advect * std::pow(t, -(1.0 + kappa + nu))) * (combr * w5);
      Vec5 cv = e.Ctilde * Vec5(std::pow(t, -nu) * (v5 - pv5) + x5);
      cv[0] = 0.0;  // P projects out the top row
      K5 += cv / sqt;
      Vec5 pg = G.col(pt).segment(5 * K, 5).matrix();
      pg[0] = 0.0;
      K5 += std::pow(t, -nu) * pg;
      Vec5 rx = xt5 + (e.advect / t) * (e.B1 * dx5) -
                (1.0 / t) * (e.Btilde * x5 - nu * x5) - K5;
      resX.col(pt).segment(5 * K, 5) = rx.array();
    }

    // flow-regularized scalar equation
    VectorXd Yt = ((zp.Y.col(pt) - zn.Y.col(pt)) / (2.0 * ds * t)).matrix();
    VectorXd GY(n);
    for (int K = 0; K < n; ++K) {
      const double w0 = W(5 * K + 0, pt), w1 = W(5 * K + 1, pt);
      Vec5 v5 = mid.comps.col(pt).segment(5 * K, 5).matrix();
      const double crow0 = (e.Ctilde.row(0) * v5)(0);
      GY[K] = -(e.advect / tk) * (sym::time_weights(t).a0 * w0 +
                                  sym::time_weights(t).a1 * w1 / sqt) +
              crow0 / sqt + G(5 * K, pt);
    }
    MatrixXd Linv = flow::flow_map_inverse_jacobian(zm.Y.col(pt).matrix(), t, flow_ctx[pt]);
    resY.col(pt) = (Yt - Linv * GY).array();
  }

  ResidualNorms rn;
  rn.w_eq = evol::l2_norm(resW, g);
  rn.x_eq = evol::l2_norm(resX, g);
  rn.y_eq = evol::l2_norm(resY, g);
  return rn;
}

History::History(std::vector<StateField> snaps) : snaps_(std::move(snaps)) {
  if (snaps_.size() < 2) throw ConfigError("History: need at least two snapshots");
  for (size_t i = 1; i < snaps_.size(); ++i)
    if (!(snaps_[i].t < snaps_[i - 1].t)) throw ConfigError("History: t must decrease");
}

double History::v4(int K, double t, double rho) const {
  const Grid& g = snaps_.front().grid;
  if (t > snaps_.front().t + 1e-12 || t < snaps_.back().t - 1e-12)
    throw DomainError("History::v4: time outside computed range");
  if (rho < g.rho_lo || rho > g.rho(g.n_rho - 1))
    throw DomainError("History::v4: rho outside grid");
  size_t hi = 1;
  while (hi + 1 < snaps_.size() && snaps_[hi].t > t) ++hi;
  const StateField& a = snaps_[hi - 1];
  const StateField& b = snaps_[hi];
  const double wa = (std::log(t) - std::log(b.t)) / (std::log(a.t) - std::log(b.t));
  auto sample = [&](const StateField& s) {
    const double x = (rho - g.rho_lo) / g.drho();
    int j = std::min(int(x), g.n_rho - 2);
    const double f = x - j;
    return (1.0 - f) * s.at(K, 4, g.point(j, 0)) + f * s.at(K, 4, g.point(j + 1, 0));
  };
  return wa * sample(a) + (1.0 - wa) * sample(b);
}

double reconstruct_u_at(const History& h, int K, double t, double rho, int m) {
  const double r = geometry::r_from_rho(rho, m);
  return (1.0 - r) / std::sqrt(t) * h.v4(K, t, rho);
}

double reconstruct_ubar_at(const History& h, int K, double tbar, double rbar, int m) {
  geometry::CompactPoint c = geometry::map_forward({tbar, rbar, M_PI / 2.0, 0.0});
  const double rho = geometry::rho_from_r(c.r, m);
  // ubar = u / Omega with Omega == rbar
  return reconstruct_u_at(h, K, c.t, rho, m) / rbar;
}

double pointwise_bound_constant(const History& h, int K, const sym::RunConstants& rc) {
  double sup = 0.0;
  const double expo = rc.exps.nu + rc.exps.kappa - rc.exps.zeta - 0.5;
  for (const auto& snap : h.snapshots()) {
    const Grid& g = snap.grid;
    for (int j = 0; j < g.n_rho; ++j) {
      const double rho = g.rho(j);
      if (rho < rc.domain.rho0 || rho > rc.domain.rho1) continue;
      const double r = geometry::r_from_rho(rho, rc.domain.m);
      geometry::PhysicalPoint p = geometry::map_inverse({snap.t, r, M_PI / 2.0, 0.0});
      const double u = (1.0 - r) / std::sqrt(snap.t) * snap.at(K, 4, g.point(j, 0));
      const double ubar = u / p.rbar;
      const double W = 1.0 + p.tbar - p.rbar;
      const double bound = (p.tbar - p.rbar) / W * std::pow(W, -expo);
      if (bound > 0.0) sup = std::max(sup, std::abs(ubar) / bound);
    }
  }
  return sup;
}

ZBlocks assemble_z_blocks(double t, double rho, double theta, const evol::EvolveContext& ctx) {
  const int n = ctx.n_unknowns;
  const int nb = 5 * n;
  const int dim = 2 * nb + n;
  sym::ExtendedBlocks e =
      sym::extend(t, rho, theta, ctx.constants.domain.m, ctx.constants.chi, ctx.opts);
  const double kappa = ctx.constants.exps.kappa, nu = ctx.constants.exps.nu;

  ZBlocks z;
  z.A0 = MatrixXd::Identity(dim, dim);
  z.A1 = MatrixXd::Zero(dim, dim);
  z.Acal = MatrixXd::Zero(dim, dim);
  z.Pi = MatrixXd::Zero(dim, dim);
  z.h_weight = VectorXd::Ones(dim);
  const Vec5 hw = sym::h_weight(theta);
  Mat5 P = sym::projector();
  for (int K = 0; K < n; ++K) {
    z.A1.block<5, 5>(5 * K, 5 * K) = e.B1;
    z.A1.block<5, 5>(nb + 5 * K, nb + 5 * K) = e.B1;
    z.Acal.block<5, 5>(5 * K, 5 * K) = e.Btilde * P + kappa * Mat5::Identity();
    z.Acal.block<5, 5>(nb + 5 * K, nb + 5 * K) = e.Btilde - nu * Mat5::Identity();
    z.Pi.block<5, 5>(5 * K, 5 * K) = Mat5::Identity();
    z.Pi.block<5, 5>(nb + 5 * K, nb + 5 * K) = Mat5::Identity();
    z.h_weight.segment(5 * K, 5) = hw;
    z.h_weight.segment(nb + 5 * K, 5) = hw;
  }
  for (int K = 0; K < n; ++K) z.Acal(2 * nb + K, 2 * nb + K) = 1.0;
  return z;
}

}  // namespace scriwave::diag
