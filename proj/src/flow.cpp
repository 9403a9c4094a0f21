#include "scriwave/flow.hpp"

#include <cmath>

namespace scriwave::flow {

FlowParams make_params(const coeffs::NullForm& nf, double rho, double theta, double phi,
                       double chi_value, int m, double t0, CoefficientMode mode) {
  FlowParams p;
  p.n = nf.n();
  p.rho = rho;
  p.m = m;
  p.chi = chi_value;
  p.t0 = t0;
  p.mode = mode;
  p.b.assign(p.n, MatrixXd::Zero(p.n, p.n));
  for (int K = 0; K < p.n; ++K)
    for (int I = 0; I < p.n; ++I)
      for (int J = 0; J < p.n; ++J) p.b[K](I, J) = nf(K, I, J, theta, phi);
  return p;
}

FlowParams scalar_frozen(double c0, double t0) {
  FlowParams p;
  p.n = 1;
  p.b.assign(1, MatrixXd::Constant(1, 1, 2.0 * c0));  // rho^m b chi / 2 = c0 with rho=chi=1
  p.rho = 1.0;
  p.m = 1;
  p.chi = 1.0;
  p.t0 = t0;
  p.mode = CoefficientMode::frozen;
  return p;
}

double q_prefactor(double t, const FlowParams& p) {
  const double rm = std::pow(p.rho, p.m);
  if (p.mode == CoefficientMode::frozen) return -0.5 * rm * p.chi;
  const double den = rm * rm - sq(1.0 - rm) * t;
  if (p.chi > 0.0 && den <= 0.0)
    throw DomainError("q_prefactor: rho^{2m} - (1-rho^m)^2 t <= 0 inside supp chi");
  if (p.chi == 0.0) return 0.0;
  return -0.5 * rm * rm * rm * p.chi / den;
}

VectorXd q_rhs(double t, const VectorXd& xi, const FlowParams& p) {
  const double pref = q_prefactor(t, p);
  VectorXd q(p.n);
  for (int K = 0; K < p.n; ++K) q[K] = pref * xi.dot(p.b[K] * xi);
  return q;
}

MatrixXd q_linearization(double t, const VectorXd& xi, const FlowParams& p) {
  const double pref = q_prefactor(t, p);
  MatrixXd L = MatrixXd::Zero(p.n, p.n);
  for (int K = 0; K < p.n; ++K)
    L.row(K) = pref * ((p.b[K] + p.b[K].transpose()) * xi).transpose();
  return L;
}

namespace {

struct PackedState {
  // [xi; vec(D); vec(Dinv)] when jacobians are carried, else just xi
  VectorXd v;
};

}  // namespace

FlowTrajectory integrate_flow(const FlowParams& p, const VectorXd& xi0, double t_min,
                              const IntegrateOptions& opts) {
  if (!(t_min > 0.0) || !(t_min < p.t0)) throw ConfigError("integrate_flow: t_min in (0, t0)");
  if (xi0.size() != p.n) throw ConfigError("integrate_flow: xi0 has wrong dimension");

  const int n = p.n;
  const bool wj = opts.with_jacobian;
  const int dim = wj ? n + 2 * n * n : n;

  auto pack = [&](const VectorXd& xi, const MatrixXd& D, const MatrixXd& Dinv) {
    VectorXd v(dim);
    v.head(n) = xi;
    if (wj) {
      v.segment(n, n * n) = Eigen::Map<const VectorXd>(D.data(), n * n);
      v.segment(n + n * n, n * n) = Eigen::Map<const VectorXd>(Dinv.data(), n * n);
    }
    return v;
  };

  auto rhs = [&](double s, const VectorXd& v) {
    const double t = std::exp(s);
    VectorXd out(dim);
    VectorXd xi = v.head(n);
    out.head(n) = q_rhs(t, xi, p);
    if (wj) {
      MatrixXd L = q_linearization(t, xi, p);
      Eigen::Map<const MatrixXd> D(v.data() + n, n, n);
      Eigen::Map<const MatrixXd> Dinv(v.data() + n + n * n, n, n);
      MatrixXd dD = L * D;
      MatrixXd dDinv = -Dinv * L;
      out.segment(n, n * n) = Eigen::Map<VectorXd>(dD.data(), n * n);
      out.segment(n + n * n, n * n) = Eigen::Map<VectorXd>(dDinv.data(), n * n);
    }
    return out;
  };

  FlowTrajectory traj;
  double s = std::log(p.t0);
  const double s_end = std::log(t_min);
  VectorXd v = pack(xi0, MatrixXd::Identity(n, n), MatrixXd::Identity(n, n));

  auto record = [&](double sv, const VectorXd& state) {
    traj.times.push_back(std::exp(sv));
    traj.xi.push_back(state.head(n));
    if (wj) {
      traj.jac.push_back(Eigen::Map<const MatrixXd>(state.data() + n, n, n));
      traj.jac_inv.push_back(Eigen::Map<const MatrixXd>(state.data() + n + n * n, n, n));
    }
    traj.bound_C = std::max(traj.bound_C, state.head(n).template lpNorm<Eigen::Infinity>());
  };

  record(s, v);
  long step = 0;
  while (s > s_end) {
    const VectorXd q = q_rhs(std::exp(s), v.head(n), p);
    const double xi_mag = v.head(n).lpNorm<Eigen::Infinity>();
    const double q_mag = q.lpNorm<Eigen::Infinity>();
    // near a pole the growth per step is capped so t* is resolved
    double ds = std::min(opts.ds, s - s_end);
    if (q_mag * ds > 0.1 * (1.0 + xi_mag)) ds = 0.1 * (1.0 + xi_mag) / q_mag;
    v = rk4_step(v, s, -ds, rhs);
    s -= ds;
    ++step;

    const double mag = v.head(n).lpNorm<Eigen::Infinity>();
    if (!v.allFinite() || mag > opts.blowup_threshold) {
      traj.verdict = Verdict::blowup;
      traj.t_star = std::exp(s);
      return traj;
    }
    traj.bound_C = std::max(traj.bound_C, mag);
    if (step % opts.record_stride == 0 || s <= s_end) record(s, v);
  }
  traj.verdict = Verdict::bounded;
  return traj;
}

double step_halving_error(const FlowParams& p, const VectorXd& xi0, double t_min, double ds) {
  IntegrateOptions full{ds, false, 1e8, 1};
  IntegrateOptions half{0.5 * ds, false, 1e8, 2};
  FlowTrajectory a = integrate_flow(p, xi0, t_min, full);
  FlowTrajectory b = integrate_flow(p, xi0, t_min, half);
  const size_t m = std::min(a.xi.size(), b.xi.size());
  double err = 0.0;
  for (size_t i = 0; i < m; ++i) {
    const double scale = std::max(1.0, a.xi[i].lpNorm<Eigen::Infinity>());
    err = std::max(err, (a.xi[i] - b.xi[i]).lpNorm<Eigen::Infinity>() / scale);
  }
  return err;
}

ClassifyResult classify_bounded(const FlowParams& p, double R, int n_samples, double t_min,
                                Rng& rng, const IntegrateOptions& opts) {
  ClassifyResult res;
  std::vector<double> radii = {R, 0.5 * R, 0.25 * R};
  std::vector<double> sups;
  bool all_bounded = true, any_inconclusive = false;
  for (double radius : radii) {
    double sup_r = 0.0;
    for (int k = 0; k < n_samples; ++k) {
      VectorXd dir(p.n);
      for (int i = 0; i < p.n; ++i) dir[i] = rng.normal();
      if (dir.norm() == 0.0) dir.setOnes();
      dir *= radius / dir.norm();
      IntegrateOptions io = opts;
      io.record_stride = 1 << 20;  // endpoints only
      FlowTrajectory tr = integrate_flow(p, dir, t_min, io);
      sup_r = std::max(sup_r, tr.bound_C);
      if (tr.verdict == Verdict::blowup) all_bounded = false;
      if (tr.verdict == Verdict::inconclusive) any_inconclusive = true;
    }
    sups.push_back(sup_r);
    if (all_bounded && radius >= res.R0) res.R0 = radius;
    res.C = std::max(res.C, sup_r);
  }
  res.verdict = all_bounded ? (any_inconclusive ? Verdict::inconclusive : Verdict::bounded)
                            : Verdict::blowup;
  if (all_bounded) {
    // sup|xi|(R) should scale linearly in R for small data
    std::vector<double> lr, ls;
    for (size_t i = 0; i < radii.size(); ++i)
      if (sups[i] > 0.0) {
        lr.push_back(std::log(radii[i]));
        ls.push_back(std::log(sups[i]));
      }
    res.linearity = lr.size() >= 2 ? fit_slope(lr, ls) : 0.0;
  }
  return res;
}

VectorXd y_transform(const VectorXd& value, double t, const FlowParams& p, Direction dir,
                     double ds) {
  IntegrateOptions io;
  io.ds = ds;
  io.record_stride = 1 << 20;
  if (dir == Direction::to_V0) {
    if (t == p.t0) return value;
    FlowTrajectory tr = integrate_flow(p, value, t, io);
    if (tr.verdict == Verdict::blowup)
      throw NumericalError("y_transform: flow blows up before the target time");
    return tr.xi.back();
  }
  // Newton solve F(t, Y) = value for Y
  if (t == p.t0) return value;
  io.with_jacobian = true;
  VectorXd Y = value;
  for (int it = 0; it < 50; ++it) {
    FlowTrajectory tr = integrate_flow(p, Y, t, io);
    if (tr.verdict == Verdict::blowup)
      throw NumericalError("y_transform: Newton iterate leaves the bounded regime");
    VectorXd res = tr.xi.back() - value;
    VectorXd delta = tr.jac.back().fullPivLu().solve(res);
    Y -= delta;
    if (delta.lpNorm<Eigen::Infinity>() <= 1e-12 * (1.0 + Y.lpNorm<Eigen::Infinity>())) return Y;
  }
  throw NumericalError("y_transform: Newton failed to converge in 50 iterations");
}

MatrixXd flow_map_inverse_jacobian(const VectorXd& Y, double t, const FlowParams& p, double ds) {
  if (t == p.t0) return MatrixXd::Identity(p.n, p.n);
  IntegrateOptions io;
  io.ds = ds;
  io.with_jacobian = true;
  io.record_stride = 1 << 20;
  FlowTrajectory tr = integrate_flow(p, Y, t, io);
  if (tr.verdict == Verdict::blowup)
    throw NumericalError("flow_map_inverse_jacobian: blow-up before target time");
  const MatrixXd& D = tr.jac.back();
  const MatrixXd& Dinv = tr.jac_inv.back();
  if ((D * Dinv - MatrixXd::Identity(p.n, p.n)).cwiseAbs().maxCoeff() > 1e-6)
    throw NumericalError("flow_map_inverse_jacobian: singular Jacobian (product check failed)");
  return Dinv;
}

}  // namespace scriwave::flow
