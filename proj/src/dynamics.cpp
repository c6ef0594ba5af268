#include "csl/dynamics.hpp"

#include <array>
#include <cmath>

#include <fmt/format.h>

#include "csl/constants.hpp"
#include "csl/error.hpp"
#include "csl/parallel.hpp"
#include "csl/quadrature.hpp"
#include "csl/rng.hpp"

namespace csl {

namespace {

void check_times(const std::vector<double>& times) {
  if (times.empty() || times.front() != 0.0) {
    throw ConfigError("times: must be non-empty and start at 0");
  }
  for (std::size_t i = 1; i < times.size(); ++i) {
    if (!(times[i] > times[i - 1])) throw ConfigError("times: must be strictly increasing");
  }
}

void check_c0(double c0) {
  if (!(c0 > 0.0 && c0 <= 1.0)) throw ConfigError("c0: must lie in (0, 1]");
}

}  // namespace

void RateDataset::validate() const {
  for (std::size_t i = 0; i < points.size(); ++i) {
    const auto& p = points[i];
    if (!(p.sigma > 0.0)) throw ConfigError(fmt::format("dataset row {}: sigma must be > 0", i));
    if (!(p.delta_x >= 0.0)) throw ConfigError(fmt::format("dataset row {}: delta_x must be >= 0", i));
    if (i > 0 && !(p.delta_x > points[i - 1].delta_x)) {
      throw ConfigError(fmt::format("dataset row {}: delta_x must be distinct and sorted", i));
    }
  }
}

std::vector<double> log_space(double lo, double hi, int n) {
  if (n < 1 || !(lo > 0.0) || !(hi >= lo)) throw ConfigError("log_space: need n >= 1 and 0 < lo <= hi");
  std::vector<double> out(static_cast<std::size_t>(n));
  if (n == 1) {
    out[0] = lo;
    return out;
  }
  const double a = std::log10(lo);
  const double b = std::log10(hi);
  for (int i = 0; i < n; ++i) out[i] = std::pow(10.0, a + (b - a) * i / (n - 1));
  out.front() = lo;
  out.back() = hi;
  return out;
}

CoherenceCurve coherence_static(double c0, double gamma_env, double gamma_csl,
                                const std::vector<double>& times) {
  check_c0(c0);
  check_times(times);
  if (!(gamma_env >= 0.0 && gamma_csl >= 0.0)) throw ConfigError("rates: must be >= 0");
  CoherenceCurve curve{times, {}, c0};
  curve.values.reserve(times.size());
  const double total = gamma_env + gamma_csl;
  for (double t : times) curve.values.push_back(c0 * std::exp(-total * t));
  return curve;
}

CoherenceCurve coherence_dynamic(double c0, const RateFunction& rate, double alpha_mag,
                                 double x_zpf, double omega, const std::vector<double>& times) {
  check_c0(c0);
  check_times(times);
  const double dx_max = 2.0 * alpha_mag * x_zpf;
  auto integrand = [&](double t) { return rate(dx_max * std::abs(std::cos(omega * t))); };

  // The separation has period pi/omega with a kink at its midpoint.
  const double half_period = constants::pi / omega;
  const std::array<double, 1> kink = {half_period / 2.0};
  const double per_half_period = integrate_piecewise(integrand, 0.0, half_period, kink);

  CoherenceCurve curve{times, {}, c0};
  curve.values.reserve(times.size());
  for (double t : times) {
    const double cycles = std::floor(t / half_period);
    const double rest = t - cycles * half_period;
    const double exponent =
        cycles * per_half_period + integrate_piecewise(integrand, 0.0, rest, kink);
    curve.values.push_back(c0 * std::exp(-exponent));
  }
  return curve;
}

RateDataset generate_synthetic_dataset(const Geometry& geometry, const GenerationTruth& truth,
                                       const std::vector<double>& delta_x_grid,
                                       double noise_fraction, std::uint64_t seed,
                                       unsigned threads) {
  if (!(noise_fraction > 0.0)) throw ConfigError("noise: must be > 0");
  if (delta_x_grid.empty()) throw ConfigError("delta_x grid: must be non-empty");

  CollapseParams collapse = geometry.collapse;
  collapse.lambda_csl = truth.lambda_csl;

  RateDataset data;
  data.seed = seed;
  data.truth = truth;
  data.points.resize(delta_x_grid.size());
  std::vector<int> redraws(delta_x_grid.size(), 0);

  parallel_for(delta_x_grid.size(), threads, [&](std::size_t i) {
    const double dx = delta_x_grid[i];
    const double exact = gamma_total(truth.d_pp, collapse, geometry.mass, geometry.radius, dx);
    if (!(exact > 0.0)) {
      throw ConfigError(fmt::format("true rate at delta_x = {:g} m is zero; sigma would vanish", dx));
    }
    Philox rng(seed, i);
    double reported = exact * (1.0 + noise_fraction * rng.normal());
    while (reported < 0.0) {
      ++redraws[i];
      reported = exact * (1.0 + noise_fraction * rng.normal());
    }
    data.points[i] = RateSample{dx, reported, noise_fraction * exact};
  });
  for (int r : redraws) data.resampled += r;
  data.validate();
  return data;
}

}  // namespace csl
