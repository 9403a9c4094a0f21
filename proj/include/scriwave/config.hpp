#pragma once

// Plain-text run configuration: [section] headers with key = value lines.
// Unknown sections or keys are rejected; every derived-constant inequality is
// validated at load time.

#include "scriwave/coefficients.hpp"
#include "scriwave/evolution.hpp"
#include "scriwave/initial_data.hpp"
#include "scriwave/symmetrizer.hpp"

#include <cstdint>
#include <iosfwd>
#include <string>

namespace scriwave::config {

struct OutputOptions {
  bool write_states = true;
  bool svg = false;
};

struct RunConfig {
  sym::DomainParams domain;
  sym::ExponentParams exponents;
  int n_unknowns = 1;
  coeffs::CartesianCoeffs coefficients{1};
  idata::DataSet data;
  std::string data_csv;  // optional gridded-samples path (overrides expressions)
  idata::DataVariant data_variant = idata::DataVariant::chain;
  evol::Grid grid;
  evol::SolverConfig solver;
  OutputOptions output;
  std::uint64_t seed = 20240817;

  /// Derived constants with all inequalities validated (throws ConfigError).
  sym::RunConstants make_constants() const {
    Rng rng(seed);
    return sym::compute_constants(domain, exponents, rng, 10000);
  }
};

/// Parses the key=value format; paths in the file are resolved relative to dir.
RunConfig parse_config(std::istream& in, const std::string& dir = ".");
RunConfig load_config(const std::string& path);

/// The torus grid implied by the domain block.
evol::Grid make_grid(const RunConfig& cfg);

}  // namespace scriwave::config
