#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "approx.hpp"
#include "csl/constants.hpp"
#include "csl/dynamics.hpp"
#include "csl/error.hpp"
#include "csl/inference.hpp"
#include "csl/rates.hpp"
#include "csl/rng.hpp"

using namespace csl;

namespace {

Geometry demo_geometry() {
  Geometry g;
  g.mass = 1e-17;
  g.radius = 50e-9;
  g.collapse.lambda_csl = 1e-21;
  g.collapse.r_c = 100e-9;
  return g;
}

PriorSpec demo_prior() {
  PriorSpec p;
  p.lambda_log_min = -26.0;
  p.lambda_log_max = -16.0;
  p.dpp_center = 3e-56;
  p.dpp_sigma = 3e-57;
  return p;
}

RateDataset demo_data(std::uint64_t seed, int n = 30, double lambda = 1e-21) {
  return generate_synthetic_dataset(demo_geometry(), {lambda, 3e-56}, log_space(1e-8, 1e-6, n), 0.05, seed);
}

// Brute-force grid search over (log10 lambda, D_pp) for the weighted least-squares minimum.
std::pair<double, double> grid_search(const RateDataset& data, const Geometry& geo, double dpp_lo, double dpp_hi) {
  double best = std::numeric_limits<double>::infinity();
  std::pair<double, double> arg{0, 0};
  for (int i = 0; i <= 1000; ++i) {
    const double ll = -26.0 + 10.0 * i / 1000.0;
    for (int j = 0; j <= 200; ++j) {
      const double d = dpp_lo + (dpp_hi - dpp_lo) * j / 200.0;
      CollapseParams c = geo.collapse;
      c.lambda_csl = std::pow(10.0, ll);
      double chi2 = 0.0;
      for (const auto& p : data.points) {
        const double z = (p.gamma - gamma_total(d, c, geo.mass, geo.radius, p.delta_x)) / p.sigma;
        chi2 += z * z;
      }
      if (chi2 < best) {
        best = chi2;
        arg = {ll, d};
      }
    }
  }
  return arg;
}

}  // namespace

TEST_SUITE("inference") {
  TEST_CASE("likelihood matches a direct Gaussian evaluation") {
    RateDataset d;
    d.points = {{1e-7, 0.03, 0.002}, {2e-7, 0.1, 0.005}};
    const auto geo = demo_geometry();
    double expect = 0.0;
    for (const auto& p : d.points) {
      const double m = gamma_total(3e-56, geo.collapse, geo.mass, geo.radius, p.delta_x);
      expect += -0.5 * std::pow((p.gamma - m) / p.sigma, 2) - std::log(std::sqrt(2 * constants::pi) * p.sigma);
    }
    CHECK(rel_err(log_likelihood(d, 1e-21, 3e-56, geo), expect) < 1e-12);
  }

  TEST_CASE("posterior model agrees with the direct log posterior") {
    const auto data = demo_data(3);
    const auto prior = demo_prior();
    const PosteriorModel model(data, prior, demo_geometry());
    for (double ll : {-23.0, -21.0, -20.3}) {
      for (double d : {2.5e-56, 3.1e-56}) {
        CHECK(rel_err(model(ll, d), log_posterior(data, std::pow(10.0, ll), d, prior, demo_geometry())) < 1e-9);
      }
    }
    CHECK(model(-27.0, 3e-56) == -std::numeric_limits<double>::infinity());
    CHECK(model(-21.0, -1e-60) == -std::numeric_limits<double>::infinity());
  }

  TEST_CASE("grid-search oracle recovers lambda with a self-consistent D_pp") {
    const auto data = demo_data(5);
    const auto [ll, d] = grid_search(data, demo_geometry(), 2e-56, 4e-56);
    CHECK(std::abs(ll + 21.0) < std::log10(3.0));
    CHECK(rel_err(d, 3e-56) < 0.2);
  }

  TEST_CASE("with D_pp = 1.2e-42 the CSL term is invisible in the data") {
    const auto geo = demo_geometry();
    const auto grid = log_space(1e-8, 1e-6, 30);
    // Fisher information for lambda at fixed D_pp.
    CollapseParams unit = geo.collapse;
    unit.lambda_csl = 1.0;
    double info = 0.0;
    for (double dx : grid) {
      const double sigma = 0.05 * gamma_total(1.2e-42, geo, dx);
      const double g = gamma_csl(unit, geo.mass, geo.radius, dx);
      info += g * g / (sigma * sigma);
    }
    CHECK(1.0 / std::sqrt(info) > 1e9 * 1e-21);
  }

  TEST_CASE("Gelman-Rubin statistic") {
    std::vector<std::vector<double>> same(4);
    Philox g(1);
    for (auto& c : same) {
      for (int i = 0; i < 5000; ++i) c.push_back(g.normal());
    }
    CHECK(gelman_rubin(same) < 1.01);
    auto shifted = same;
    for (double& x : shifted[0]) x += 3.0;
    CHECK(gelman_rubin(shifted) > 1.2);
    std::vector<std::vector<double>> flat(3, std::vector<double>(20, 1.0));
    CHECK_THROWS_AS(gelman_rubin(flat), NumericalError);
    CHECK_THROWS_AS(gelman_rubin({same[0]}), NumericalError);
  }

  TEST_CASE("HPD interval and quantiles") {
    std::vector<double> v(1000);
    std::iota(v.begin(), v.end(), 0.0);
    const auto i = hpd_interval(v, 0.5);
    CHECK(i.width() == doctest::Approx(499.0));
    CHECK(sample_quantile(v, 1.0) == 999.0);
    CHECK(sample_quantile(v, 0.5) == 499.0);
    // Skewed sample: the HPD hugs the mode.
    std::vector<double> e;
    Philox g(2);
    for (int k = 0; k < 100000; ++k) e.push_back(-std::log(g.uniform()));
    const auto h = hpd_interval(e, 0.9);
    CHECK(h.lo < 0.01);
    CHECK(h.hi == doctest::Approx(-std::log(0.1)).epsilon(0.02));
  }

  TEST_CASE("MCMC settings validation") {
    McmcSettings s;
    s.chains = 1;
    CHECK_THROWS_AS(s.validate(), ConfigError);
    s.chains = 4;
    s.samples = 10;
    CHECK_THROWS_AS(s.validate(), ConfigError);
    s.samples = 2000;
    CHECK(s.resolved_burn() == 400);
  }

  TEST_CASE("sampler reproduces a flat target (detailed balance)") {
    PriorSpec box;
    box.lambda_log_min = 0.0;
    box.lambda_log_max = 1.0;
    box.dpp_center = 0.5;
    box.dpp_sigma = 1.0;
    // Uniform on the unit square.
    const LogDensity flat = [](double a, double b) {
      return (a >= 0.0 && a <= 1.0 && b >= 0.0 && b <= 1.0) ? 0.0 : -std::numeric_limits<double>::infinity();
    };
    McmcSettings s;
    s.chains = 4;
    s.samples = 60000;
    s.seed = 17;
    const auto post = run_metropolis(flat, box, s);
    // Thin to roughly independent draws, then compare 20 bins with multinomial 3.5-sigma bands.
    for (int axis = 0; axis < 2; ++axis) {
      std::vector<int> bins(20, 0);
      int n = 0;
      for (const auto& chain : post.chains) {
        for (std::size_t k = 0; k < chain.size(); k += 10) {
          const double v = axis == 0 ? chain[k].log10_lambda : chain[k].d_pp;
          ++bins[std::min(19, static_cast<int>(v * 20.0))];
          ++n;
        }
      }
      const double expect = n / 20.0;
      const double band = 3.5 * std::sqrt(expect * (1.0 - 1.0 / 20.0));
      for (int b : bins) CHECK(std::abs(b - expect) < band);
    }
    CHECK(post.converged);
  }

  TEST_CASE("empty dataset returns the prior") {
    RateDataset empty;
    const auto prior = demo_prior();
    McmcSettings s;
    s.samples = 40000;
    s.seed = 4;
    const auto post = run_mcmc(empty, prior, demo_geometry(), s);
    // Kolmogorov-Smirnov distance of the thinned log10 lambda marginal against the uniform prior.
    std::vector<double> v;
    for (const auto& c : post.chains) {
      for (std::size_t k = 0; k < c.size(); k += 10) v.push_back((c[k].log10_lambda + 26.0) / 10.0);
    }
    std::sort(v.begin(), v.end());
    double ks = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) {
      ks = std::max({ks, std::abs(v[i] - static_cast<double>(i) / v.size()),
                     std::abs(v[i] - static_cast<double>(i + 1) / v.size())});
    }
    CHECK(ks < 0.05);
    const auto d = post.dpp_samples();
    const double mean = std::accumulate(d.begin(), d.end(), 0.0) / d.size();
    CHECK(rel_err(mean, 3e-56) < 0.02);
    CHECK(rel_err(sample_std(d), 3e-57) < 0.1);
  }

  TEST_CASE("posterior recovers the injected parameters") {
    const auto post = run_mcmc(demo_data(9), demo_prior(), demo_geometry(), McmcSettings{});
    CHECK(post.converged);
    CHECK(post.hpd95_log10_lambda.contains(-21.0));
    CHECK(post.hpd68_log10_lambda.width() < post.hpd95_log10_lambda.width());
    CHECK(post.acceptance_rate > 0.1);
    CHECK(post.acceptance_rate < 0.6);
    CHECK(post.r_gr[0] < 1.05);
    CHECK(post.r_gr[1] < 1.05);
    CHECK(post.size() == 4u * 16000u);
    CHECK(post.map_point.log_posterior >= post.chains[0][0].log_posterior);
  }

  TEST_CASE("sampling is reproducible and thread independent") {
    McmcSettings s;
    s.samples = 3000;
    s.seed = 12;
    const auto a = run_mcmc(demo_data(1), demo_prior(), demo_geometry(), s);
    s.threads = 4;
    const auto b = run_mcmc(demo_data(1), demo_prior(), demo_geometry(), s);
    REQUIRE(a.size() == b.size());
    for (std::size_t c = 0; c < a.chains.size(); ++c) {
      for (std::size_t k = 0; k < a.chains[c].size(); ++k) {
        CHECK(a.chains[c][k].log10_lambda == b.chains[c][k].log10_lambda);
        CHECK(a.chains[c][k].d_pp == b.chains[c][k].d_pp);
      }
    }
  }

  TEST_CASE("upper bound and lower-edge mass for a null dataset") {
    const auto post = run_mcmc(demo_data(2, 30, 0.0), demo_prior(), demo_geometry(), McmcSettings{});
    CHECK(lower_edge_mass(post) > 0.1);
    const double ub = upper_bound(post);
    CHECK(ub < 1e-21);
    CHECK(ub > 1e-26);
  }

  TEST_CASE("narrowing study runs per seed") {
    NarrowingSetup setup;
    setup.geometry = demo_geometry();
    setup.truth = {1e-21, 3e-56};
    setup.prior = demo_prior();
    setup.mcmc.samples = 4000;
    const auto rows = narrowing_study(setup, {10, 40}, {1, 2});
    REQUIRE(rows.size() == 2);
    CHECK(rows[0].widths.size() == 2);
    CHECK(rows[0].mean_width > rows[1].mean_width);
    CHECK_THROWS_AS(narrowing_study(setup, {40, 10}, {1}), ConfigError);
  }
}
