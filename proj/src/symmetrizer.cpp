#include "scriwave/symmetrizer.hpp"

#include <sstream>
#include <vector>

namespace scriwave::sym {

namespace {
constexpr double kS5 = consts::sqrt5;

void require_mixing_domain(double t, double r, const char* who) {
  if (!(t > 0.0) || !(r > 0.0) || !(r < 1.0))
    throw DomainError(std::string(who) + ": need t > 0 and r in (0,1)");
  if (std::abs(geometry::region_quantity(t, r)) < geometry::kRegionTol)
    throw DomainError(std::string(who) + ": on the parabola");
}
}  // namespace

Mat5 mixing_matrix(double t, double r) {
  require_mixing_domain(t, r, "mixing_matrix");
  const auto w = time_weights(t);
  const double D = geometry::region_quantity(t, r);
  Mat5 M = Mat5::Zero();
  M(0, 0) = t + 1.0;
  M(0, 1) = 1.0 / std::sqrt(t);
  M(1, 0) = std::sqrt(t);
  M(1, 1) = consts::beta0;
  M(2, 2) = M(3, 3) = r * (1.0 - r) * w.p / D;
  M(4, 4) = 1.0;
  return M;
}

Mat5 mixing_matrix_inv(double t, double r) {
  require_mixing_domain(t, r, "mixing_matrix_inv");
  const auto w = time_weights(t);
  const double D = geometry::region_quantity(t, r);
  Mat5 M = Mat5::Zero();
  M(0, 0) = w.a0;
  M(0, 1) = w.a1 / std::sqrt(t);
  M(1, 0) = std::sqrt(t) * w.a1;
  M(1, 1) = -(1.0 + t) * w.a1;
  M(2, 2) = M(3, 3) = D / (r * (1.0 - r) * w.p);
  M(4, 4) = 1.0;
  return M;
}

Mat5 mixing_matrix_dt(double t, double r) {
  require_mixing_domain(t, r, "mixing_matrix_dt");
  const auto w = time_weights(t);
  const double D = geometry::region_quantity(t, r);
  const double dD = -sq(1.0 - r);  // d D / dt
  Mat5 M = Mat5::Zero();
  M(0, 0) = 1.0;
  M(0, 1) = -0.5 * std::pow(t, -1.5);
  M(1, 0) = 0.5 / std::sqrt(t);
  M(2, 2) = M(3, 3) = r * (1.0 - r) * (w.dp * D - w.p * dD) / sq(D);
  return M;
}

Mat5 radial_block(double t) {
  const auto w = time_weights(t);
  Mat5 B = Mat5::Zero();
  B(0, 0) = t * w.a0;
  B(0, 1) = B(1, 0) = std::sqrt(t) * w.a1;
  B(1, 1) = 2.0 / (2.0 + (3.0 + kS5) * t);
  B(2, 2) = B(3, 3) = 2.0 / (2.0 + (3.0 - kS5) * t);
  return B;
}

BlockSet assemble(double t, double r, double theta, const AssemblyOptions& opts) {
  require_mixing_domain(t, r, "assemble");
  const auto w = time_weights(t);
  const double D = geometry::region_quantity(t, r);
  const double st2 = sq(std::sin(theta));
  geometry::require_nonpole(theta, "assemble");

  BlockSet b;
  b.B1 = radial_block(t);

  const double c_big = (1.0 - r) * r * (1.0 + t) / (w.p * D);
  const double c_small = std::sqrt(t) * (1.0 - r) * r / (w.p * D);
  b.Btheta(0, 2) = -c_big;
  b.Btheta(1, 2) = -c_small;
  b.Btheta(2, 0) = -c_big;
  b.Btheta(2, 1) = -c_small;
  b.Bphi(0, 3) = -c_big / st2;
  b.Bphi(1, 3) = -c_small / st2;
  b.Bphi(3, 0) = -c_big;
  b.Bphi(3, 1) = -c_small;

  b.Bcal(0, 0) = 0.5;
  b.Bcal(1, 1) = 0.5 + w.a1 * r * (1.0 - kS5) / 2.0;
  b.Bcal(2, 2) = b.Bcal(3, 3) =
      (r * r + sq(1.0 - r) * t) * (3.0 + t + 2.0 * w.q) / (2.0 * D * (1.0 + t));
  b.Bcal(4, 1) = w.a1;
  b.Bcal(4, 4) = 0.5;

  b.Ccal(0, 0) = std::sqrt(t) * w.a0 * (1.0 + r);
  b.Ccal(0, 1) = w.a1 * (1.0 + r);
  b.Ccal(1, 0) = w.a0 * r * (1.0 - kS5) / 2.0;
  if (opts.lambda_row_sources) {
    b.Ccal(2, 0) = b.Ccal(3, 0) = w.a0 * (1.0 - r) * r * r * w.p / D;
    b.Ccal(2, 1) = b.Ccal(3, 1) = w.a1 * (1.0 - r) * r * r * w.p / D;
  }
  b.Ccal(2, 2) = b.Ccal(3, 3) = (3.0 + 2.0 * t) * std::sqrt(t) / (2.0 + 2.0 * t * (3.0 + t));
  b.Ccal(4, 0) = w.a0;
  return b;
}

Mat5 bcal_star(double t) {
  const auto w = time_weights(t);
  Mat5 B = Mat5::Zero();
  B(0, 0) = 0.5;
  B(1, 1) = 0.5 + w.a1 * (1.0 - kS5) / 2.0;
  B(2, 2) = B(3, 3) = (3.0 + t + 2.0 * w.q) / (2.0 * (1.0 + t));
  B(4, 1) = w.a1;
  B(4, 4) = 0.5;
  return B;
}

Mat5 ccal_star(double t) {
  const auto w = time_weights(t);
  Mat5 C = Mat5::Zero();
  C(0, 0) = 2.0 * std::sqrt(t) * w.a0;
  C(0, 1) = 2.0 * w.a1;
  C(1, 0) = w.a0 * (1.0 - kS5) / 2.0;
  C(2, 2) = C(3, 3) = (3.0 + 2.0 * t) * std::sqrt(t) / (2.0 + 2.0 * t * (3.0 + t));
  C(4, 0) = w.a0;
  return C;
}

Vec5 h_weight(double theta) {
  geometry::require_nonpole(theta, "h_weight");
  Vec5 w;
  w << 1.0, 1.0, 1.0, 1.0 / sq(std::sin(theta)), 1.0;
  return w;
}

double inner_product_h(const Vec5& Y, const Vec5& X, double theta) {
  return Y.cwiseProduct(h_weight(theta)).dot(X);
}

namespace {
double mollifier(double x) { return x > 0.0 ? std::exp(-1.0 / x) : 0.0; }
double mollifier_d(double x) { return x > 0.0 ? std::exp(-1.0 / x) / (x * x) : 0.0; }
// smoothstep s: 0 at 0, 1 at 1
double sstep(double x) {
  const double a = mollifier(x), b = mollifier(1.0 - x);
  return a / (a + b);
}
double sstep_d(double x) {
  const double a = mollifier(x), b = mollifier(1.0 - x);
  const double da = mollifier_d(x), db = -mollifier_d(1.0 - x);
  return (da * b - a * db) / sq(a + b);
}
}  // namespace

Cutoff::Cutoff(double rho0, double rho1, double alpha) : rho0_(rho0), rho1_(rho1), alpha_(alpha) {
  if (!(alpha > 0.0) || !(rho0 < rho1)) throw ConfigError("Cutoff: need alpha > 0, rho0 < rho1");
}

double Cutoff::operator()(double rho) const {
  if (rho <= rho0_ - alpha_ || rho >= rho1_ + alpha_) return 0.0;
  if (rho < rho0_) return sstep((rho - (rho0_ - alpha_)) / alpha_);
  if (rho <= rho1_) return 1.0;
  return sstep(((rho1_ + alpha_) - rho) / alpha_);
}

double Cutoff::derivative(double rho) const {
  if (rho <= rho0_ - alpha_ || rho >= rho1_ + alpha_) return 0.0;
  if (rho < rho0_) return sstep_d((rho - (rho0_ - alpha_)) / alpha_) / alpha_;
  if (rho <= rho1_) return 0.0;
  return -sstep_d(((rho1_ + alpha_) - rho) / alpha_) / alpha_;
}

ExtendedBlocks extend(double t, double rho, double theta, int m, const Cutoff& chi,
                      const AssemblyOptions& opts) {
  ExtendedBlocks e;
  e.chi = chi(rho);
  e.B1 = radial_block(t);
  if (e.chi <= 0.0) {
    e.Btilde = bcal_star(t);
    e.Ctilde = ccal_star(t);
    return e;
  }
  const double r = geometry::r_from_rho(rho, m);
  BlockSet b = assemble(t, r, theta, opts);
  e.advect = e.chi * (1.0 - r) * rho / m;
  e.Btilde = bcal_star(t) + e.chi * (b.Bcal - bcal_star(t));
  e.Ctilde = ccal_star(t) + e.chi * (b.Ccal - ccal_star(t));
  e.Btheta = e.chi * b.Btheta;
  e.Bphi = e.chi * b.Bphi;
  return e;
}

Mat5 gamma_minus_form(double t, double rho0, int m) {
  const double r0 = geometry::r_from_rho(rho0, m);
  return Mat5(-(1.0 - r0) * rho0 / m * radial_block(t));
}

Mat5 gamma_parabola_form(double t) {
  return Mat5(-Mat5::Identity() + 2.0 * t * radial_block(t));
}

RunConstants compute_constants(const DomainParams& dom, const ExponentParams& exps, Rng& rng,
                               int n_samples) {
  RunConstants rc;
  rc.domain = dom;
  rc.exps = exps;
  rc.t0 = dom.t0_override > 0.0 ? dom.t0_override : consts::default_t0();
  rc.gamma1 = consts::gamma1();
  rc.beta0 = consts::beta0;
  rc.beta1 = consts::beta1;
  rc.beta2 = consts::beta2();
  rc.chi = Cutoff(dom.rho0, dom.rho1, dom.alpha);

  std::vector<std::string> violations;
  if (!(dom.rho0 > 0.0 && dom.rho1 < 1.0 && dom.torus_lo() > 0.0 && dom.torus_hi() < 1.0))
    violations.push_back("torus [rho0-2a, rho1+2a] must lie in (0,1)");
  if (!(dom.t_min > 0.0 && dom.t_min < rc.t0)) violations.push_back("t_min must be in (0, t0)");
  if (dom.m < 1) violations.push_back("m >= 1 required");

  // supp chi must stay strictly inside the region for all t in (0, t0]
  const double supp_lo = dom.rho0 - dom.alpha, supp_hi = dom.rho1 + dom.alpha;
  const double r_lo = geometry::r_from_rho(supp_lo, dom.m);
  if (geometry::region_quantity(rc.t0, r_lo) < 1e-6)
    violations.push_back("supp(chi) crosses the parabola before t0 (move the slab toward rho=1)");

  // initial-data denominators r^2 + 2r - 1 must not vanish on supp chi
  const double r_hi = geometry::r_from_rho(supp_hi, dom.m);
  const double sqrt2m1 = std::sqrt(2.0) - 1.0;
  if (r_lo - 1e-3 <= sqrt2m1 && sqrt2m1 <= r_hi + 1e-3)
    violations.push_back("slab contains the radius r = sqrt(2)-1 (initial-data denominator zero)");

  // sampled suprema over supp(chi) x (0, t0)
  if (violations.empty()) {
    double sB = 0, sC = 0, s1 = 0, s2 = 0;
    const int n_line = std::max(32, int(std::sqrt(double(n_samples))));
    for (int i = 0; i < n_samples; ++i) {
      const double t = rng.uniform(1e-6, rc.t0);
      const double rho = rng.uniform(supp_lo + 1e-12, supp_hi - 1e-12);
      const double r = geometry::r_from_rho(rho, dom.m);
      BlockSet b = assemble(t, r, 1.2345, {});
      sB = std::max(sB, (b.Bcal - bcal_star(t)).jacobiSvd().singularValues()[0]);
      sC = std::max(sC, (b.Ccal - ccal_star(t)).jacobiSvd().singularValues()[0]);
      const double chi_v = rc.chi(rho), chi_d = rc.chi.derivative(rho);
      const double dadv = chi_d * (1.0 - r) * rho / dom.m +
                          chi_v * (1.0 - (1.0 + dom.m) * r) / dom.m;
      s2 = std::max(s2, std::abs(dadv) * b.B1.jacobiSvd().singularValues()[0]);
    }
    for (int i = 0; i < n_line; ++i) {
      const double t = rc.t0 * (i + 0.5) / n_line;
      s1 = std::max(s1, radial_block(t).jacobiSvd().singularValues()[0]);
    }
    s1 = std::max(s1, 1.0);  // |B0|
    rc.sigma = sB;
    rc.sigma_C = sC;
    rc.sigma1 = s1;
    rc.sigma2 = s2;

    const double margin = rc.coercivity_margin();
    std::ostringstream os;
    if (!(exps.kappa + exps.nu <= margin)) {
      os << "kappa+nu = " << exps.kappa + exps.nu << " > gamma1 - 1.1*sigma = " << margin;
      violations.push_back(os.str());
    }
    if (!(margin < 0.5 - exps.epsilon))
      violations.push_back("gamma1 - sigma < 1/2 - epsilon violated");
    if (!(2.0 * exps.epsilon < exps.kappa && exps.kappa < 1.0 - exps.epsilon))
      violations.push_back("2 eps < kappa < 1 - eps violated");
    if (!(exps.epsilon < 2.0 * exps.nu)) violations.push_back("eps < 2 nu violated");
    if (!(exps.zeta > 0.0 && exps.zeta < exps.kappa)) violations.push_back("zeta in (0, kappa) violated");
  }

  if (!violations.empty()) {
    std::string msg = "configuration rejected:";
    for (const auto& v : violations) msg += "\n  - " + v;
    throw ConfigError(msg);
  }
  return rc;
}

}  // namespace scriwave::sym
