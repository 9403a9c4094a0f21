#include "scriwave/initial_data.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

namespace scriwave::idata {

using evol::Grid;
using evol::StateField;

namespace {
constexpr double kS5 = consts::sqrt5;

struct ChainFactors {
  double omega0;           // Omega at the slice
  double domega_dt;        // d_t Omega
  double domega_dr;        // d_r Omega
  double dtbar_dt;         // inverse-map partials on the slice
  double dtbar_dr, drbar_dr;
};

ChainFactors chain_factors(double r, double t0) {
  ChainFactors f;
  const double w = 1.0 - r;
  const double D = geometry::region_quantity(t0, r);
  f.omega0 = D / (2.0 * r * w * t0);
  f.domega_dt = -r / (2.0 * w * t0 * t0);  // also equals dtbar/dt and drbar/dt
  f.domega_dr = (r * r + t0 * w * w) / (2.0 * r * r * w * w * t0);
  f.dtbar_dt = f.domega_dt;
  f.dtbar_dr = D / (2.0 * r * r * w * w * t0);
  f.drbar_dr = (r * r + t0 * w * w) / (2.0 * r * r * w * w * t0);
  return f;
}

}  // namespace

ConformalTriple physical_to_conformal_point(double vb, double wb, double zb, double r, double t0,
                                            DataVariant variant) {
  if (!(r > 0.0) || !(r < 1.0))
    throw DomainError("physical_to_conformal_point: r must be in (0,1)");
  ConformalTriple c;
  if (variant == DataVariant::paper_displayed) {
    const double w = 1.0 - r;
    const double num = r * r + 2.0 * r - 1.0;
    c.v = num / (2.0 * r * w) * vb;
    c.w = -(2.0 * r / w) * (num / (2.0 * r * w) * (wb + zb) + vb);
    c.z = sq(num) / (4.0 * w * w * w * r * r * r) * wb +
          (3.0 * r * r - 2.0 * r + 1.0) / (2.0 * w * w * r * r) * vb +
          (4.0 * std::pow(r, 4) - std::pow(w, 4)) / (4.0 * w * w * w * r * r * r) * zb;
    return c;
  }
  const ChainFactors f = chain_factors(r, t0);
  c.v = f.omega0 * vb;
  c.w = f.domega_dt * vb + f.omega0 * (wb + zb) * f.dtbar_dt;
  c.z = f.domega_dr * vb + f.omega0 * (wb * f.dtbar_dr + zb * f.drbar_dr);
  return c;
}

Vec5 first_order_point(const ConformalTriple& c, double dth_v, double dph_v, double rho, int m,
                       double t0, DataVariant variant) {
  const double r = geometry::r_from_rho(rho, m);
  const double w = 1.0 - r;
  Vec5 out;
  if (variant == DataVariant::paper_displayed) {
    const double den = r * r + 2.0 * r - 1.0;
    if (std::abs(den) < 1e-10)
      throw DomainError("first_order_point: r^2 + 2r - 1 vanishes on the slab");
    out[0] = 0.75 * c.w / w + r * c.z;
    out[1] = c.w / (2.0 * std::sqrt(2.0) * w) + (1.0 + kS5) * r * c.z / (2.0 * std::sqrt(2.0));
    out[2] = std::sqrt(11.0) * r * dth_v / (std::sqrt(2.0) * den);
    out[3] = std::sqrt(11.0) * r * dph_v / (std::sqrt(2.0) * den);
    out[4] = c.v / (std::sqrt(2.0) * w);
    return out;
  }
  // generic chain: Vhat = M(t0, r) U with U from the first-order variables
  const double sqt = std::sqrt(t0);
  Vec5 U;
  U << t0 * c.w / w, sqt * r * c.z, sqt * dth_v / w, sqt * dph_v / w, sqt * c.v / w;
  return sym::mixing_matrix(t0, r) * U;
}

StateField build_initial_state(const DataSet& data, const Grid& g, const sym::RunConstants& rc,
                               DataVariant variant, bool extend) {
  const int n = data.n();
  if (n < 1) throw ConfigError("build_initial_state: empty data set");
  StateField s(n, g, rc.t0);
  for (int j = 0; j < g.n_rho; ++j) {
    const double rho = g.rho(j);
    const double r = geometry::r_from_rho(rho, rc.domain.m);
    for (int a = 0; a < g.n_angles(); ++a) {
      const double th = g.theta(a), ph = g.phi(a);
      for (int K = 0; K < n; ++K) {
        const expr::Dual vb = data.vbar[K].eval_dual(rho, th, ph);
        const double wb = data.wbar[K].eval(rho, th, ph);
        const double zb = data.zbar[K].eval(rho, th, ph);
        ConformalTriple c = physical_to_conformal_point(vb.v, wb, zb, r, rc.t0, variant);
        // angular derivatives of v are the r-only conformal weight times those of vbar
        const double scale = variant == DataVariant::paper_displayed
                                 ? (r * r + 2.0 * r - 1.0) / (2.0 * r * (1.0 - r))
                                 : chain_factors(r, rc.t0).omega0;
        const double dth_v = g.mode == Grid::Mode::full ? scale * vb.d[1] : 0.0;
        const double dph_v = g.mode == Grid::Mode::full ? scale * vb.d[2] : 0.0;
        s.set_block(K, g.point(j, a),
                    first_order_point(c, dth_v, dph_v, rho, rc.domain.m, rc.t0, variant));
      }
    }
  }
  return extend ? extend_to_torus(s, rc) : s;
}

StateField extend_to_torus(const StateField& slab_field, const sym::RunConstants& rc) {
  StateField out = slab_field;
  const Grid& g = out.grid;
  for (int j = 0; j < g.n_rho; ++j) {
    const double chi = rc.chi(g.rho(j));
    for (int a = 0; a < g.n_angles(); ++a) out.comps.col(g.point(j, a)) *= chi;
  }
  return out;
}

ConstraintReport constraint_residual(const StateField& V, const sym::RunConstants& rc) {
  const Grid& g = V.grid;
  const int n = V.n_unknowns;
  const int m = rc.domain.m;
  const double t0 = rc.t0;
  ConstraintReport rep;

  rep.c0_displayed = -std::sqrt(2.0) * (1.0 + kS5) / (7.0 + kS5);
  rep.c1_displayed = 3.0 * (1.0 + kS5) / (7.0 + kS5);
  rep.c0_chain = -std::sqrt(t0) / ((1.0 + t0) * consts::beta0 - 1.0);
  rep.c1_chain = 1.0 / (consts::beta0 - 1.0 / (1.0 + t0));

  Eigen::ArrayXXd drho = evol::d_rho_periodic(V.comps, g);
  Eigen::ArrayXXd dth, dph;
  const bool full = g.mode == Grid::Mode::full;
  if (full) {
    dth = evol::d_theta(V.comps, g);
    dph = evol::d_phi(V.comps, g);
  }
  const auto tw = sym::time_weights(t0);
  for (int j = 0; j < g.n_rho; ++j) {
    const double rho = g.rho(j);
    if (rho < rc.domain.rho0 || rho > rc.domain.rho1) continue;  // chi == 1 plateau only
    const double r = geometry::r_from_rho(rho, m);
    const double adv = (1.0 - r) * rho / m;
    for (int a = 0; a < g.n_angles(); ++a) {
      const int pt = g.point(j, a);
      for (int K = 0; K < n; ++K) {
        const double v0 = V.at(K, 0, pt), v1 = V.at(K, 1, pt), v4 = V.at(K, 4, pt);
        const double dv4 = drho(5 * K + 4, pt);
        const double lhs = adv * dv4 - r * v4;
        rep.res1_displayed = std::max(
            rep.res1_displayed, std::abs(lhs - rep.c0_displayed * v0 - rep.c1_displayed * v1));
        rep.res1_chain =
            std::max(rep.res1_chain, std::abs(lhs - rep.c0_chain * v0 - rep.c1_chain * v1));
        if (full) {
          const double coef_disp =
              (r * r + 2.0 * r - 1.0) / (std::sqrt(11.0) * r * (1.0 - r));
          const double coef_chain =
              geometry::region_quantity(t0, r) / (r * tw.p * (1.0 - r));
          for (int L = 2; L <= 3; ++L) {
            const double dv4a = (L == 2 ? dth : dph)(5 * K + 4, pt);
            const double vl = V.at(K, L, pt);
            rep.res2_displayed = std::max(rep.res2_displayed, std::abs(dv4a - coef_disp * vl));
            rep.res2_chain = std::max(rep.res2_chain, std::abs(dv4a - coef_chain * vl));
          }
        }
      }
    }
  }
  return rep;
}

GriddedData load_gridded_csv(const std::string& path, int n_unknowns) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot open gridded data file: " + path);
  std::string line;
  std::getline(f, line);  // header
  struct Row {
    double rho, v, w, z;
    int K;
  };
  std::vector<Row> rows;
  int lineno = 1;
  while (std::getline(f, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream ls(line);
    double rho, theta, phi, v, w, z;
    int K;
    if (!(ls >> rho >> theta >> phi >> K >> v >> w >> z))
      throw ConfigError("gridded data line " + std::to_string(lineno) + ": bad row");
    if (K < 1 || K > n_unknowns)
      throw ConfigError("gridded data line " + std::to_string(lineno) + ": K out of range");
    rows.push_back({rho, v, w, z, K});
  }
  GriddedData g;
  g.n_unknowns = n_unknowns;
  for (const auto& r : rows)
    if (std::find(g.rho.begin(), g.rho.end(), r.rho) == g.rho.end()) g.rho.push_back(r.rho);
  std::sort(g.rho.begin(), g.rho.end());
  g.values.assign(n_unknowns, Eigen::ArrayXXd::Zero(3, g.rho.size()));
  for (const auto& r : rows) {
    const auto it = std::lower_bound(g.rho.begin(), g.rho.end(), r.rho);
    const int col = int(it - g.rho.begin());
    g.values[r.K - 1](0, col) = r.v;
    g.values[r.K - 1](1, col) = r.w;
    g.values[r.K - 1](2, col) = r.z;
  }
  return g;
}

evol::StateField build_initial_state_gridded(const GriddedData& data, const evol::Grid& g,
                                             const sym::RunConstants& rc, DataVariant variant,
                                             bool extend) {
  if (g.mode != evol::Grid::Mode::spherical)
    throw ConfigError("gridded data is supported in spherical mode only");
  if (data.n_unknowns < 1 || data.rho.size() < 2)
    throw ConfigError("gridded data: need at least two samples");
  evol::StateField s(data.n_unknowns, g, rc.t0);
  auto interp = [&](int K, int comp, double rho) {
    const auto& xs = data.rho;
    if (rho < xs.front() - 1e-12 || rho > xs.back() + 1e-12)
      throw ConfigError("gridded data does not cover the grid coordinate range");
    auto it = std::upper_bound(xs.begin(), xs.end(), rho);
    size_t hi = std::min(size_t(it - xs.begin()), xs.size() - 1);
    size_t lo = hi == 0 ? 0 : hi - 1;
    if (hi == lo) return data.values[K](comp, lo);
    const double f = (rho - xs[lo]) / (xs[hi] - xs[lo]);
    return (1.0 - f) * data.values[K](comp, lo) + f * data.values[K](comp, hi);
  };
  for (int j = 0; j < g.n_rho; ++j) {
    const double rho = g.rho(j);
    const double r = geometry::r_from_rho(rho, rc.domain.m);
    for (int K = 0; K < data.n_unknowns; ++K) {
      ConformalTriple c = physical_to_conformal_point(interp(K, 0, rho), interp(K, 1, rho),
                                                      interp(K, 2, rho), r, rc.t0, variant);
      s.set_block(K, j, first_order_point(c, 0.0, 0.0, rho, rc.domain.m, rc.t0, variant));
    }
  }
  return extend ? extend_to_torus(s, rc) : s;
}

}  // namespace scriwave::idata
