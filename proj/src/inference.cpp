#include "csl/inference.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <fmt/format.h>

#include "csl/constants.hpp"
#include "csl/error.hpp"
#include "csl/parallel.hpp"
#include "csl/rates.hpp"
#include "csl/rng.hpp"

namespace csl {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
const double kLogSqrt2Pi = 0.5 * std::log(2.0 * constants::pi);

}  // namespace

void PriorSpec::validate() const {
  if (!(lambda_log_min < lambda_log_max)) throw ConfigError("prior: lambda_log_min must be below lambda_log_max");
  if (!(dpp_sigma > 0.0)) throw ConfigError("prior: dpp_sigma must be > 0");
}

void McmcSettings::validate() const {
  if (chains < 2) throw ConfigError("mcmc: need at least 2 chains");
  if (samples < 1000) throw ConfigError("mcmc: need at least 1000 samples per chain");
  const int b = resolved_burn();
  if (b < 0 || samples - b < 10) throw ConfigError("mcmc: burn-in must leave at least 10 samples");
}

double log_likelihood(const RateDataset& data, double lambda_csl, double d_pp,
                      const Geometry& geometry) {
  CollapseParams collapse = geometry.collapse;
  collapse.lambda_csl = lambda_csl;
  double total = 0.0;
  for (const auto& p : data.points) {
    const double model = gamma_total(d_pp, collapse, geometry.mass, geometry.radius, p.delta_x);
    const double z = (p.gamma - model) / p.sigma;
    total += -0.5 * z * z - (kLogSqrt2Pi + std::log(p.sigma));
  }
  return total;
}

namespace {

double log_prior(const PriorSpec& prior, double log10_lambda, double d_pp) {
  if (!(log10_lambda >= prior.lambda_log_min && log10_lambda <= prior.lambda_log_max)) return kNegInf;
  if (!(d_pp >= 0.0)) return kNegInf;
  const double z = (d_pp - prior.dpp_center) / prior.dpp_sigma;
  return -std::log(prior.lambda_log_max - prior.lambda_log_min) - 0.5 * z * z -
         (kLogSqrt2Pi + std::log(prior.dpp_sigma));
}

}  // namespace

double log_posterior(const RateDataset& data, double lambda_csl, double d_pp,
                     const PriorSpec& prior, const Geometry& geometry) {
  if (!(lambda_csl > 0.0)) return kNegInf;
  const double lp = log_prior(prior, std::log10(lambda_csl), d_pp);
  if (lp == kNegInf) return kNegInf;
  return lp + log_likelihood(data, lambda_csl, d_pp, geometry);
}

PosteriorModel::PosteriorModel(const RateDataset& data, const PriorSpec& prior,
                               const Geometry& geometry)
    : prior_(prior) {
  prior_.validate();
  data.validate();
  CollapseParams unit = geometry.collapse;
  unit.lambda_csl = 1.0;
  for (const auto& p : data.points) {
    env_coeff_.push_back(gamma_env(1.0, p.delta_x));
    csl_coeff_.push_back(gamma_csl(unit, geometry.mass, geometry.radius, p.delta_x));
    gamma_.push_back(p.gamma);
    inv_sigma_.push_back(1.0 / p.sigma);
    normalization_ -= kLogSqrt2Pi + std::log(p.sigma);
  }
}

double PosteriorModel::operator()(double log10_lambda, double d_pp) const {
  const double lp = log_prior(prior_, log10_lambda, d_pp);
  if (lp == kNegInf) return kNegInf;
  const double lambda = std::pow(10.0, log10_lambda);
  double chi2 = 0.0;
  for (std::size_t i = 0; i < gamma_.size(); ++i) {
    const double z = (gamma_[i] - (d_pp * env_coeff_[i] + lambda * csl_coeff_[i])) * inv_sigma_[i];
    chi2 += z * z;
  }
  return lp + normalization_ - 0.5 * chi2;
}

// ---------------------------------------------------------------------------

namespace {

struct Proposal {
  // Lower-triangular factor of the proposal covariance in scaled coordinates.
  double l11 = 1.0, l21 = 0.0, l22 = 1.0;
  double scale = 1.0;
};

bool covariance_factor(const std::vector<std::array<double, 2>>& pts, Proposal& prop) {
  const double n = static_cast<double>(pts.size());
  if (n < 10) return false;
  double m0 = 0, m1 = 0;
  for (const auto& p : pts) {
    m0 += p[0];
    m1 += p[1];
  }
  m0 /= n;
  m1 /= n;
  double c00 = 0, c01 = 0, c11 = 0;
  for (const auto& p : pts) {
    c00 += (p[0] - m0) * (p[0] - m0);
    c01 += (p[0] - m0) * (p[1] - m1);
    c11 += (p[1] - m1) * (p[1] - m1);
  }
  c00 /= n - 1;
  c01 /= n - 1;
  c11 /= n - 1;
  const double det = c00 * c11 - c01 * c01;
  if (!(c00 > 0.0) || !(c11 > 0.0) || !(det > 1e-12 * c00 * c11)) return false;
  prop.l11 = std::sqrt(c00);
  prop.l21 = c01 / prop.l11;
  prop.l22 = std::sqrt(c11 - prop.l21 * prop.l21);
  return true;
}

struct ChainOutput {
  std::vector<ChainSample> kept;
  double acceptance = 0.0;
};

ChainOutput run_chain(const LogDensity& target, const PriorSpec& box, const McmcSettings& s,
                      int chain) {
  Philox rng(s.seed, static_cast<std::uint64_t>(chain));
  const double sigma = box.dpp_sigma;
  const double width = box.lambda_log_max - box.lambda_log_min;
  auto eval = [&](double u0, double u1) { return target(u0, u1 * sigma); };

  // Overdispersed start: stratum `chain` of the lambda box, D_pp two prior widths out.
  double u0 = 0.0, u1 = 0.0, lp = kNegInf;
  for (int attempt = 0; attempt < 1000 && lp == kNegInf; ++attempt) {
    u0 = box.lambda_log_min + (chain + rng.uniform()) / s.chains * width;
    u1 = (box.dpp_center + 2.0 * sigma * rng.normal()) / sigma;
    if (u1 < 0.0) u1 = -u1;
    lp = eval(u0, u1);
  }
  if (lp == kNegInf) throw NumericalError(fmt::format("chain {}: no finite starting point found", chain));

  const int burn = s.resolved_burn();
  const double target_acc = s.target_acceptance;

  // Phase 1 (first half of burn-in): one-coordinate moves with independent scales.
  std::array<double, 2> step = {width / 20.0, 1.0};
  std::array<int, 2> tried = {0, 0}, accepted = {0, 0};
  // Phase 2 (second half): joint moves from the empirical covariance, global scale tuned.
  Proposal prop;
  bool joint = false;
  int window_tried = 0, window_accepted = 0;
  std::vector<std::array<double, 2>> history;
  history.reserve(static_cast<std::size_t>(burn));

  ChainOutput out;
  out.kept.reserve(static_cast<std::size_t>(s.samples - burn));
  int kept_accepted = 0;

  auto try_move = [&](double c0, double c1) {
    const double cand = eval(c0, c1);
    if (cand == kNegInf) return false;
    if (cand >= lp || std::log(rng.uniform()) < cand - lp) {
      u0 = c0;
      u1 = c1;
      lp = cand;
      return true;
    }
    return false;
  };

  auto refit = [&](std::size_t from, std::size_t to) {
    std::vector<std::array<double, 2>> slice(history.begin() + from, history.begin() + to);
    if (covariance_factor(slice, prop)) {
      if (!joint) prop.scale = 2.38 / std::sqrt(2.0);
      joint = true;
    }
  };

  for (int it = 0; it < s.samples; ++it) {
    const bool adapting = it < burn;
    if (adapting && it == burn / 2) refit(burn / 4, burn / 2);
    if (adapting && it == (3 * burn) / 4) refit(burn / 2, (3 * burn) / 4);

    if (adapting && !joint) {
      for (int k = 0; k < 2; ++k) {
        const double z = rng.normal() * step[k];
        const bool ok = (k == 0) ? try_move(u0 + z, u1) : try_move(u0, u1 + z);
        ++tried[k];
        accepted[k] += ok;
        if (tried[k] == 25) {
          const double rate = static_cast<double>(accepted[k]) / tried[k];
          step[k] *= std::exp(3.0 * (rate - target_acc));
          tried[k] = accepted[k] = 0;
        }
      }
    } else {
      const double z0 = rng.normal();
      const double z1 = rng.normal();
      const double d0 = prop.scale * prop.l11 * z0;
      const double d1 = prop.scale * (prop.l21 * z0 + prop.l22 * z1);
      if (!joint) {
        // No usable burn-in: fall back to the diagonal scales.
        const bool ok = try_move(u0 + step[0] * z0, u1 + step[1] * z1);
        if (!adapting) kept_accepted += ok;
      } else {
        const bool ok = try_move(u0 + d0, u1 + d1);
        if (adapting) {
          ++window_tried;
          window_accepted += ok;
          if (window_tried == 50) {
            const double rate = static_cast<double>(window_accepted) / window_tried;
            prop.scale *= std::exp(2.0 * (rate - target_acc));
            window_tried = window_accepted = 0;
          }
        } else {
          kept_accepted += ok;
        }
      }
    }

    if (adapting) {
      history.push_back({u0, u1});
    } else {
      out.kept.push_back({u0, u1 * sigma, lp});
    }
  }
  out.acceptance = out.kept.empty() ? 0.0 : static_cast<double>(kept_accepted) / out.kept.size();
  return out;
}

}  // namespace

std::vector<double> PosteriorResult::log10_lambda_samples() const {
  std::vector<double> v;
  v.reserve(size());
  for (const auto& c : chains) {
    for (const auto& s : c) v.push_back(s.log10_lambda);
  }
  return v;
}

std::vector<double> PosteriorResult::dpp_samples() const {
  std::vector<double> v;
  v.reserve(size());
  for (const auto& c : chains) {
    for (const auto& s : c) v.push_back(s.d_pp);
  }
  return v;
}

std::size_t PosteriorResult::size() const {
  std::size_t n = 0;
  for (const auto& c : chains) n += c.size();
  return n;
}

PosteriorResult run_metropolis(const LogDensity& target, const PriorSpec& box,
                               const McmcSettings& settings) {
  settings.validate();
  box.validate();
  std::vector<ChainOutput> outputs(static_cast<std::size_t>(settings.chains));
  parallel_for(outputs.size(), settings.threads,
               [&](std::size_t c) { outputs[c] = run_chain(target, box, settings, static_cast<int>(c)); });

  PosteriorResult r;
  r.seed = settings.seed;
  r.prior = box;
  double acc = 0.0;
  for (auto& o : outputs) {
    r.chain_acceptance.push_back(o.acceptance);
    acc += o.acceptance;
    r.chains.push_back(std::move(o.kept));
  }
  r.acceptance_rate = acc / settings.chains;

  r.map_point = r.chains.front().front();
  for (const auto& c : r.chains) {
    for (const auto& s : c) {
      if (s.log_posterior > r.map_point.log_posterior) r.map_point = s;
    }
  }

  const auto lam = r.log10_lambda_samples();
  const auto dpp = r.dpp_samples();
  r.hpd68_log10_lambda = hpd_interval(lam, 0.68);
  r.hpd95_log10_lambda = hpd_interval(lam, 0.95);
  r.hpd68_dpp = hpd_interval(dpp, 0.68);
  r.hpd95_dpp = hpd_interval(dpp, 0.95);

  r.r_gr = gelman_rubin(r.chains);
  r.converged = r.r_gr[0] < 1.05 && r.r_gr[1] < 1.05;
  if (!r.converged) {
    r.warnings.push_back(fmt::format("not converged: R_GR = ({:.4f}, {:.4f}) >= 1.05", r.r_gr[0], r.r_gr[1]));
  }
  if (r.acceptance_rate < 0.1 || r.acceptance_rate > 0.6) {
    r.warnings.push_back(fmt::format("acceptance rate {:.3f} outside [0.1, 0.6]", r.acceptance_rate));
  }
  return r;
}

PosteriorResult run_mcmc(const RateDataset& data, const PriorSpec& prior, const Geometry& geometry,
                         const McmcSettings& settings) {
  const PosteriorModel model(data, prior, geometry);
  return run_metropolis([&model](double l, double d) { return model(l, d); }, prior, settings);
}

double gelman_rubin(const std::vector<std::vector<double>>& chains) {
  const std::size_t m = chains.size();
  if (m < 2) throw NumericalError("gelman_rubin: need at least 2 chains");
  const std::size_t n = chains.front().size();
  if (n < 10) throw NumericalError("gelman_rubin: chains need at least 10 samples");
  for (const auto& c : chains) {
    if (c.size() != n) throw NumericalError("gelman_rubin: chains must have equal length");
  }
  std::vector<double> means(m), vars(m);
  for (std::size_t j = 0; j < m; ++j) {
    const double mean = std::accumulate(chains[j].begin(), chains[j].end(), 0.0) / n;
    double ss = 0.0;
    for (double x : chains[j]) ss += (x - mean) * (x - mean);
    means[j] = mean;
    vars[j] = ss / (n - 1);
  }
  const double w = std::accumulate(vars.begin(), vars.end(), 0.0) / m;
  if (!(w > 0.0)) throw NumericalError("gelman_rubin: degenerate chains with zero within-chain variance");
  const double grand = std::accumulate(means.begin(), means.end(), 0.0) / m;
  double b = 0.0;
  for (double mu : means) b += (mu - grand) * (mu - grand);
  b *= static_cast<double>(n) / (m - 1);
  const double v = (n - 1.0) / n * w + b / n;
  return std::sqrt(v / w);
}

std::array<double, 2> gelman_rubin(const std::vector<std::vector<ChainSample>>& chains) {
  std::vector<std::vector<double>> lam, dpp;
  for (const auto& c : chains) {
    std::vector<double> a, b;
    a.reserve(c.size());
    b.reserve(c.size());
    for (const auto& s : c) {
      a.push_back(s.log10_lambda);
      b.push_back(s.d_pp);
    }
    lam.push_back(std::move(a));
    dpp.push_back(std::move(b));
  }
  return {gelman_rubin(lam), gelman_rubin(dpp)};
}

Interval hpd_interval(std::vector<double> samples, double mass) {
  if (samples.empty()) throw NumericalError("hpd_interval: no samples");
  if (!(mass > 0.0 && mass <= 1.0)) throw ConfigError("hpd_interval: mass must lie in (0, 1]");
  std::sort(samples.begin(), samples.end());
  const std::size_t n = samples.size();
  const std::size_t k = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(mass * n)));
  std::size_t best = 0;
  double best_width = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i + k <= n; ++i) {
    const double w = samples[i + k - 1] - samples[i];
    if (w < best_width) {
      best_width = w;
      best = i;
    }
  }
  return {samples[best], samples[best + k - 1]};
}

double sample_quantile(std::vector<double> samples, double q) {
  if (samples.empty()) throw NumericalError("sample_quantile: no samples");
  if (!(q >= 0.0 && q <= 1.0)) throw ConfigError("quantile must lie in [0, 1]");
  std::sort(samples.begin(), samples.end());
  const auto n = samples.size();
  const auto rank = static_cast<std::size_t>(std::ceil(q * n));
  return samples[rank == 0 ? 0 : rank - 1];
}

double upper_bound(const PosteriorResult& posterior, double quantile) {
  return std::pow(10.0, sample_quantile(posterior.log10_lambda_samples(), quantile));
}

double lower_edge_mass(const PosteriorResult& posterior) {
  const auto v = posterior.log10_lambda_samples();
  const double edge = posterior.prior.lambda_log_min + 1.0;
  const auto below = std::count_if(v.begin(), v.end(), [edge](double x) { return x < edge; });
  return static_cast<double>(below) / v.size();
}

double posterior_correlation(const PosteriorResult& posterior) {
  const auto a = posterior.log10_lambda_samples();
  const auto b = posterior.dpp_samples();
  const double n = static_cast<double>(a.size());
  const double ma = std::accumulate(a.begin(), a.end(), 0.0) / n;
  const double mb = std::accumulate(b.begin(), b.end(), 0.0) / n;
  double sab = 0, saa = 0, sbb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sab += (a[i] - ma) * (b[i] - mb);
    saa += (a[i] - ma) * (a[i] - ma);
    sbb += (b[i] - mb) * (b[i] - mb);
  }
  return sab / std::sqrt(saa * sbb);
}

double sample_std(const std::vector<double>& v) {
  const double n = static_cast<double>(v.size());
  const double mean = std::accumulate(v.begin(), v.end(), 0.0) / n;
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return std::sqrt(ss / (n - 1.0));
}

std::vector<NarrowingRow> narrowing_study(const NarrowingSetup& setup, const std::vector<int>& n_values,
                                          const std::vector<std::uint64_t>& seeds) {
  for (std::size_t i = 1; i < n_values.size(); ++i) {
    if (!(n_values[i] > n_values[i - 1])) throw ConfigError("narrowing_study: n_values must increase");
  }
  if (seeds.empty()) throw ConfigError("narrowing_study: need at least one seed");
  std::vector<NarrowingRow> rows;
  for (int n : n_values) {
    NarrowingRow row;
    row.n_points = n;
    const auto grid = log_space(setup.dx_min, setup.dx_max, n);
    for (std::uint64_t seed : seeds) {
      const auto data = generate_synthetic_dataset(setup.geometry, setup.truth, grid, setup.noise, seed);
      McmcSettings mcmc = setup.mcmc;
      mcmc.seed = seed + 0x9E3779B97F4A7C15ull;
      const auto post = run_mcmc(data, setup.prior, setup.geometry, mcmc);
      row.widths.push_back(sample_std(post.log10_lambda_samples()));
    }
    row.mean_width = std::accumulate(row.widths.begin(), row.widths.end(), 0.0) / row.widths.size();
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace csl
