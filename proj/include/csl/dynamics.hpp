#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "csl/params.hpp"
#include "csl/rates.hpp"

namespace csl {

struct CoherenceCurve {
  std::vector<double> times;   // s, strictly increasing from 0
  std::vector<double> values;  // C(t)
  double c0 = 1.0;
};

struct RateSample {
  double delta_x = 0.0;  // m
  double gamma = 0.0;    // 1/s
  double sigma = 0.0;    // 1/s
};

struct GenerationTruth {
  double lambda_csl = 0.0;
  double d_pp = 0.0;
};

struct RateDataset {
  std::vector<RateSample> points;
  std::uint64_t seed = 0;
  std::optional<GenerationTruth> truth;
  int resampled = 0;  // negative draws rejected during generation

  /// Throws ConfigError unless every sigma > 0 and delta_x is strictly increasing.
  void validate() const;
};

/// n log-spaced values from lo to hi inclusive.
std::vector<double> log_space(double lo, double hi, int n);

/// c0 exp(-(gamma_env + gamma_csl) t).
CoherenceCurve coherence_static(double c0, double gamma_env, double gamma_csl,
                                const std::vector<double>& times);

/// c0 exp(-int_0^t rate(2|alpha| x_zpf |cos Omega t'|) dt'), quadrature to 1e-8 relative.
CoherenceCurve coherence_dynamic(double c0, const RateFunction& rate, double alpha_mag,
                                 double x_zpf, double omega, const std::vector<double>& times);

/// Multiplicative Gaussian noise around gamma_total. Point i draws from Philox
/// stream i of `seed`, so the result does not depend on `threads`.
RateDataset generate_synthetic_dataset(const Geometry& geometry, const GenerationTruth& truth,
                                       const std::vector<double>& delta_x_grid,
                                       double noise_fraction, std::uint64_t seed,
                                       unsigned threads = 1);

}  // namespace csl
