#include <doctest.h>

#include <cmath>

#include "approx.hpp"
#include "csl/config.hpp"
#include "csl/constants.hpp"
#include "csl/error.hpp"
#include "csl/rates.hpp"

using namespace csl;

namespace {

CollapseParams fig_collapse() {
  CollapseParams c;
  c.lambda_csl = 1e-21;
  c.r_c = 100e-9;
  return c;
}

}  // namespace

TEST_SUITE("rate-models") {
  TEST_CASE("gas diffusion oracle") {
    GasSpec g;
    g.pressure = 1e-13;
    g.temperature = 5.0;
    g.molecule_mass = 4.65e-26;
    g.cross_section = constants::pi * 50e-9 * 50e-9;
    CHECK(rel_err(d_pp_gas(g, 1e-17), 2.13908340331716e-54) < 1e-12);
    g.pressure = 0.0;
    CHECK(d_pp_gas(g, 1e-17) == 0.0);
  }

  TEST_CASE("photon recoil diffusion oracle") {
    CHECK(rel_err(d_pp_trap(1e6, 2.0 * constants::pi / 1064e-9), 2.58545833444740e-49) < 1e-12);
    CHECK(d_pp_trap(0.0, 1.0) == 0.0);
  }

  TEST_CASE("blackbody aggregate is a validated pass-through") {
    CHECK(d_pp_blackbody(3e-57) == 3e-57);
    CHECK_THROWS_AS(d_pp_blackbody(-1.0), ConfigError);
  }

  TEST_CASE("diffusion budget sums the channels") {
    const auto cfg = validate_config(nlohmann::json{
        {"particle", {{"mass", 1e-17}, {"blackbody_dpp", 1e-57}}}, {"trap", {{"scattering_rate", 10.0}}}});
    const auto b = diffusion_budget(cfg);
    CHECK(b.total == doctest::Approx(b.gas + b.trap + b.blackbody).epsilon(1e-15));
    CHECK(b.blackbody == 1e-57);
    CHECK(b.trap > 0.0);
  }

  TEST_CASE("environmental rate oracle and quadratic law") {
    CHECK(rel_err(gamma_env(1.2e-42, 100e-9), 1.07901858351415e12) < 1e-12);
    CHECK(rel_err(gamma_env(3e-56, 2e-7) / gamma_env(3e-56, 1e-7), 4.0) < 1e-14);
    CHECK(gamma_env(0.0, 1e-6) == 0.0);
  }

  TEST_CASE("heating calibration round trip") {
    const double omega = 2.0 * constants::pi * 1e5;
    const double d = calibrate_dpp_from_heating(100.0, 1e-17, omega);
    CHECK(rel_err(d, 6.62607014594008e-44) < 1e-12);
    CHECK(rel_err(heating_from_dpp(d, 1e-17, omega), 100.0) < 1e-14);
  }

  TEST_CASE("Gamma_env of 0.03/s at 100 nm needs D_pp near 3.3e-56") {
    const double d = 0.03 * constants::hbar * constants::hbar / (100e-9 * 100e-9);
    CHECK(rel_err(d, 3.336e-56) < 1e-3);
  }

  TEST_CASE("CSL form factor") {
    CHECK(rel_err(csl_form_factor(1.0, 0.5), 0.414163961871372) < 1e-13);
    CHECK(csl_form_factor(0.0, 0.0) == 0.0);
    CHECK(csl_form_factor(1e4, 0.5) == doctest::Approx(1.0).epsilon(1e-15));
    // Point-particle limit: 1 - exp(-u^2/4), accurate at tiny u.
    CHECK(rel_err(csl_form_factor(1e-6, 0.0), 0.25e-12) < 1e-9);
  }

  TEST_CASE("CSL plateau and mass scaling") {
    const auto c = fig_collapse();
    CHECK(rel_err(gamma_csl_max(c, 1e-17), 0.0362897372623022) < 1e-12);
    CHECK(rel_err(gamma_csl(c, 1e-17, 50e-9, 1e4 * c.r_c), gamma_csl_max(c, 1e-17)) < 1e-6);
    CHECK(rel_err(gamma_csl(c, 2e-17, 50e-9, 1e-6) / gamma_csl(c, 1e-17, 50e-9, 1e-6), 4.0) < 1e-14);
    CollapseParams null = c;
    null.lambda_csl = 0.0;
    CHECK(gamma_csl(null, 1e-17, 50e-9, 1e-6) == 0.0);
  }

  TEST_CASE("small-separation law as printed lacks the (1+v^2)^(-3/2) factor") {
    const auto c = fig_collapse();
    const double v = 0.5;
    const double dx = c.r_c / 100.0;
    const double ratio = (gamma_csl(c, 1e-17, 50e-9, dx) - gamma_csl(c, 1e-17, 50e-9, 0.0)) /
                         gamma_csl_small_sep(c, 1e-17, 50e-9, dx);
    CHECK(rel_err(ratio, std::pow(1.0 + v * v, -1.5)) < 1e-3);
    // With R = 0 the two agree and the offset vanishes.
    CHECK(rel_err(gamma_csl(c, 1e-17, 0.0, dx), gamma_csl_small_sep(c, 1e-17, 0.0, dx)) < 1e-3);
  }

  TEST_CASE("CSL rate is monotone in separation") {
    const auto c = fig_collapse();
    double prev = -1.0;
    for (double dx = 1e-10; dx < 1e-4; dx *= 1.3) {
      const double g = gamma_csl(c, 1e-17, 50e-9, dx);
      CHECK(g >= prev);
      prev = g;
    }
  }

  TEST_CASE("Diosi-Penrose rate") {
    CHECK(rel_err(gamma_dp(1e-17, 1e-10, 1e-10), 0.104583685777515) < 1e-12);
    // No plateau at r_C scales: still growing between 1 um and 10 um.
    CHECK(gamma_dp(1e-17, 1e-10, 1e-5) > gamma_dp(1e-17, 1e-10, 1e-6));
    CHECK(gamma_dp(1e-17, 1e-10, 1e3) == doctest::Approx(0.357071038384557).epsilon(1e-9));
    CHECK(gamma_dp(1e-17, 1e-10, 0.0) == 0.0);
  }

  TEST_CASE("total is env plus CSL") {
    const auto c = fig_collapse();
    const Geometry geo{1e-17, 50e-9, c};
    CHECK(gamma_total(3e-56, geo, 1e-7) == gamma_env(3e-56, 1e-7) + gamma_csl(c, 1e-17, 50e-9, 1e-7));
  }

  TEST_CASE("cycle averaged rate") {
    const double omega = 2.0 * constants::pi * 1e5;
    const double x = 2.89689762954226e-12;
    // Quadratic rate: mean of cos^2 is one half.
    const RateFunction quad = [](double dx) { return 3.0 * dx * dx; };
    const double alpha = 1000.0;
    const double peak = 2.0 * alpha * x;
    CHECK(rel_err(cycle_averaged_gamma(quad, alpha, x, omega), 1.5 * peak * peak) < 1e-9);
    // Constant rate is unchanged; phase does not matter.
    const RateFunction flat = [](double) { return 0.7; };
    CHECK(rel_err(cycle_averaged_gamma(flat, alpha, x, omega, 2.3), 0.7) < 1e-12);
    const RateFunction abs_rate = [](double dx) { return dx; };
    const double a0 = cycle_averaged_gamma(abs_rate, alpha, x, omega, 0.0);
    const double a1 = cycle_averaged_gamma(abs_rate, alpha, x, omega, -4.0);
    CHECK(rel_err(a0, 2.0 * peak / constants::pi) < 1e-9);
    CHECK(rel_err(a1, a0) < 1e-9);
  }
}
