#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "csl/dynamics.hpp"
#include "csl/params.hpp"

namespace csl {

struct PriorSpec {
  double lambda_log_min = -18.0;  // log10(1/s)
  double lambda_log_max = -6.0;
  double dpp_center = 0.0;        // kg^2 m^2 / s^3
  double dpp_sigma = 1.0;

  void validate() const;
};

/// Gaussian log-likelihood of the dataset under gamma_total(lambda, d_pp).
double log_likelihood(const RateDataset& data, double lambda_csl, double d_pp,
                      const Geometry& geometry);

/// Log-likelihood plus log prior, in (log10 lambda, D_pp) coordinates: the
/// log-uniform prior is the constant -log(max - min) inside the box. Returns
/// -infinity outside the box or for D_pp < 0.
double log_posterior(const RateDataset& data, double lambda_csl, double d_pp,
                     const PriorSpec& prior, const Geometry& geometry);

/// The fit model is linear in (lambda, D_pp); cache the per-point design
/// coefficients so each posterior evaluation is a dot product.
class PosteriorModel {
 public:
  PosteriorModel(const RateDataset& data, const PriorSpec& prior, const Geometry& geometry);
  double operator()(double log10_lambda, double d_pp) const;
  const PriorSpec& prior() const { return prior_; }

 private:
  PriorSpec prior_;
  std::vector<double> env_coeff_;  // gamma_env at D_pp = 1
  std::vector<double> csl_coeff_;  // gamma_csl at lambda = 1
  std::vector<double> gamma_;
  std::vector<double> inv_sigma_;
  double normalization_ = 0.0;
};

struct McmcSettings {
  int chains = 4;
  int samples = 20000;  // iterations per chain, burn-in included
  int burn = -1;        // -1: 20% of samples
  std::uint64_t seed = 1;
  unsigned threads = 1;
  double target_acceptance = 0.3;

  int resolved_burn() const { return burn < 0 ? samples / 5 : burn; }
  void validate() const;
};

struct ChainSample {
  double log10_lambda = 0.0;
  double d_pp = 0.0;
  double log_posterior = 0.0;
};

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
  bool contains(double v) const { return v >= lo && v <= hi; }
  double width() const { return hi - lo; }
};

struct PosteriorResult {
  std::vector<std::vector<ChainSample>> chains;  // post burn-in, one vector per chain
  ChainSample map_point;
  Interval hpd68_log10_lambda, hpd95_log10_lambda;
  Interval hpd68_dpp, hpd95_dpp;
  std::array<double, 2> r_gr{};  // (log10 lambda, D_pp)
  double acceptance_rate = 0.0;
  std::vector<double> chain_acceptance;
  std::uint64_t seed = 0;
  bool converged = false;  // every r_gr < 1.05
  std::vector<std::string> warnings;
  PriorSpec prior;

  std::vector<double> log10_lambda_samples() const;
  std::vector<double> dpp_samples() const;
  std::size_t size() const;
};

/// Target density over (log10 lambda, D_pp).
using LogDensity = std::function<double(double log10_lambda, double d_pp)>;

/// Metropolis-Hastings with Gaussian proposals in (log10 lambda, D_pp / dpp_sigma).
/// Proposal covariance and scale adapt during burn-in only. Chain c uses Philox
/// stream c of the seed and starts in stratum c of the lambda box, so results
/// are identical for any thread count.
PosteriorResult run_metropolis(const LogDensity& target, const PriorSpec& box,
                               const McmcSettings& settings);

PosteriorResult run_mcmc(const RateDataset& data, const PriorSpec& prior, const Geometry& geometry,
                         const McmcSettings& settings);

/// Potential scale reduction per parameter. Needs >= 2 chains of equal length >= 10.
/// Throws NumericalError for zero within-chain variance.
double gelman_rubin(const std::vector<std::vector<double>>& chains);
std::array<double, 2> gelman_rubin(const std::vector<std::vector<ChainSample>>& chains);

/// Shortest interval containing a fraction `mass` of the samples.
Interval hpd_interval(std::vector<double> samples, double mass);

/// Empirical quantile (order statistic ceil(q n)); quantile(1) is the maximum.
double sample_quantile(std::vector<double> samples, double q);

/// Quantile of the lambda marginal, in 1/s.
double upper_bound(const PosteriorResult& posterior, double quantile = 0.95);

/// Fraction of lambda samples within one decade of the lower prior edge.
double lower_edge_mass(const PosteriorResult& posterior);

/// Pearson correlation of (log10 lambda, D_pp) samples.
double posterior_correlation(const PosteriorResult& posterior);

struct NarrowingRow {
  int n_points = 0;
  double mean_width = 0.0;          // mean over seeds of std(log10 lambda)
  std::vector<double> widths;       // per seed
};

struct NarrowingSetup {
  Geometry geometry;
  GenerationTruth truth;
  PriorSpec prior;
  double dx_min = 10e-9;
  double dx_max = 1e-6;
  double noise = 0.05;
  McmcSettings mcmc;
};

/// For each N, generate a dataset per seed, sample the posterior and record
/// the standard deviation of log10 lambda.
std::vector<NarrowingRow> narrowing_study(const NarrowingSetup& setup, const std::vector<int>& n_values,
                                          const std::vector<std::uint64_t>& seeds);

double sample_std(const std::vector<double>& v);

}  // namespace csl
