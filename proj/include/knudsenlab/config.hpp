#pragma once

#include "knudsenlab/operators.hpp"

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace knudsenlab {

/// Malformed or invalid configuration; maps to exit code 2.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class ExperimentKind { verify, simulate, decay_sweep, branches, hydro_sweep };

std::string to_string(ExperimentKind k);
/// Accepts the CLI spelling (decay-sweep). Throws ConfigError.
ExperimentKind parse_experiment_kind(const std::string& name);

struct ModelBlock {
  ModelKind kind = ModelKind::HydroBGK;
  SemiClassicalParams params;
  int K = 10;   ///< Hermite order per axis
  int Mx = 10;  ///< Fourier truncation |n_i| <= Mx
  int N = 2;    ///< velocity and space dimension
};

/// Family-specific keys; unset optionals take the family default.
struct ExperimentBlock {
  ExperimentKind kind = ExperimentKind::verify;
  int k = 1;
  std::optional<double> T;
  std::optional<double> dt;
  std::string data = "random";  ///< random | well_prepared | ill_prepared | both (hydro-sweep)
  double amplitude = 1.0;
  int max_mode = 3;
  bool nonlinear = false;
  int sample_every = 1;
  std::string output_dir;
  // verify
  double tol = 1e-10;
  // decay-sweep
  double tau_band = 2.0;
  std::optional<double> window_start;
  // branches
  double zeta_max = 0.1;
  int zeta_points = 8;
  double omega_angle = 0.0;
  double tau_max = 5.0;
  // hydro-sweep
  double small_time = 0.02;
  double acoustic_T = 4.0;
  double slope_min = 0.35;
};

struct RuntimeBlock {
  int threads = 1;
  std::uint64_t seed = 1;
};

struct ExperimentConfig {
  ModelBlock model;
  std::vector<double> eps_grid;
  ExperimentBlock experiment;
  RuntimeBlock runtime;

  /// FNV-1a 64 of the canonical key=value listing; threads are excluded because they do not
  /// change results.
  std::uint64_t hash() const;
  std::string canonical() const;
};

/// INI text: sections [model], [epsilon], [experiment], [runtime]; '#' or ';' comments.
/// Unknown sections or keys, bad values and a missing epsilon.grid raise ConfigError.
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::string& path);

/// Validation shared by the parser and programmatic configs. Throws ConfigError.
void validate(const ExperimentConfig& config);

std::uint64_t fnv1a64(const std::string& bytes);
std::string hex64(std::uint64_t v);

}  // namespace knudsenlab
