#pragma once

// Conversion of physical Cauchy data on the hyperboloid into conformal data,
// then into first-order data on the slab, with torus extension and constraint
// residual evaluation.
//
// The printed transformation constants correspond to a slice time of 1/2;
// the generic-t0 chain reproduces them exactly at t0 = 1/2 and is what
// evolution runs use at the actual t0. Both variants are kept and reported.

#include "scriwave/evolution.hpp"
#include "scriwave/expressions.hpp"

#include <vector>

namespace scriwave::idata {

enum class DataVariant { chain, paper_displayed };

/// Physical data (ubar, d_tbar ubar, d_rbar ubar) per unknown, as closed-form
/// profiles in (rho, theta, phi) on the data slab.
struct DataSet {
  std::vector<expr::Expression> vbar, wbar, zbar;
  int n() const { return int(vbar.size()); }
};

struct ConformalTriple {
  double v = 0, w = 0, z = 0;
};

/// Pointwise physical -> conformal map at radius r (plain radial coordinate).
ConformalTriple physical_to_conformal_point(double vb, double wb, double zb, double r, double t0,
                                            DataVariant variant);

/// First-order 5-vector from conformal values and angular derivatives of v.
Vec5 first_order_point(const ConformalTriple& c, double dth_v, double dph_v, double rho, int m,
                       double t0, DataVariant variant);

/// Full pipeline on the grid; when extend is true the result is multiplied by
/// the cutoff and extended by zero to the torus.
evol::StateField build_initial_state(const DataSet& data, const evol::Grid& g,
                                     const sym::RunConstants& rc, DataVariant variant,
                                     bool extend = true);

/// Multiplies by the cutoff (restriction to [rho0, rho1] is unchanged).
evol::StateField extend_to_torus(const evol::StateField& slab_field, const sym::RunConstants& rc);

/// Gridded data: CSV rows "rho,theta,phi,K,vbar,wbar,zbar" (K 1-based).
/// Samples must cover every grid rho; spherical mode only.
struct GriddedData {
  int n_unknowns = 0;
  std::vector<double> rho;                  // sorted sample abscissae
  std::vector<Eigen::ArrayXXd> values;      // per K: 3 x n_samples (vbar, wbar, zbar)
};

GriddedData load_gridded_csv(const std::string& path, int n_unknowns);

evol::StateField build_initial_state_gridded(const GriddedData& data, const evol::Grid& g,
                                             const sym::RunConstants& rc, DataVariant variant,
                                             bool extend = true);

struct ConstraintReport {
  // radial constraint, evaluated with the printed constants and the chain ones
  double res1_displayed = 0, res1_chain = 0;
  // angular constraint (zero in spherical mode)
  double res2_displayed = 0, res2_chain = 0;
  // the constants themselves, for reporting
  double c0_displayed = 0, c1_displayed = 0, c0_chain = 0, c1_chain = 0;
};

/// Max-norm constraint residuals over the chi == 1 plateau.
ConstraintReport constraint_residual(const evol::StateField& V, const sym::RunConstants& rc);

}  // namespace scriwave::idata
