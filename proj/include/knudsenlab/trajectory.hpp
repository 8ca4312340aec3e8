#pragma once

#include "knudsenlab/moments.hpp"
#include "knudsenlab/spectral_core.hpp"

#include <map>
#include <string>
#include <vector>

namespace knudsenlab {

/// Sampled history of one run. Norm series hold norms (not squares) under the keys
/// L2, Hk, HkLambda, HypEps, HypPerp, HkxL2.
struct TrajectoryRecord {
  double eps = 1.0;
  int k = 1;
  bool nonlinear = false;  ///< Gamma was active
  std::vector<double> times;
  std::map<std::string, std::vector<double>> norms;
  std::vector<double> collision_form;  ///< <L h, h>
  std::vector<double> gamma_form;      ///< Re <Gamma(h,h), h>, 0 for linear runs
  std::vector<std::vector<double>> kernel_moments;  ///< x-averaged <h, phi_i>
  std::vector<double> truncation_loss;              ///< mass pushed above the Hermite order by v.grad_x
  std::vector<double> moment_times;
  std::vector<MomentFields> moments;
  std::vector<double> state_times;
  std::vector<SpectralField> states;
  SpectralField final_state;
  std::vector<std::string> warnings;

  /// Throws std::out_of_range for an unknown key.
  const std::vector<double>& norm(const std::string& key) const { return norms.at(key); }
  std::size_t size() const { return times.size(); }
};

}  // namespace knudsenlab
