#include <doctest.h>

#include <cmath>

#include "approx.hpp"
#include "csl/constants.hpp"
#include "csl/error.hpp"
#include "csl/rates.hpp"
#include "csl/state.hpp"

using namespace csl;

namespace {

OscillatorUnits demo_units() { return {1e-17, 2.0 * constants::pi * 1e5}; }

LindbladProblem localization_only(int n, double kappa) {
  LindbladProblem p;
  p.h0 = CMatrix::Zero(n, n);
  p.localization = kappa;
  return p;
}

}  // namespace

TEST_SUITE("state-engine") {
  TEST_CASE("ladder operators") {
    const int n = 10;
    const CMatrix a = annihilation(n);
    const CMatrix comm = a * a.adjoint() - a.adjoint() * a;
    for (int k = 0; k < n - 1; ++k) CHECK(std::abs(comm(k, k) - 1.0) < 1e-14);
    CHECK((number_operator(n) - a.adjoint() * a).norm() < 1e-13);
    CHECK((position_quadrature(n) - (a + a.adjoint())).norm() < 1e-14);
  }

  TEST_CASE("truncation rule") {
    CHECK(minimum_nmax(2.0) == 36);
    CHECK(default_nmax(1.0) == 32);
    CHECK(default_nmax(3.0) == 56);
  }

  TEST_CASE("displacement of the vacuum is the analytic coherent state") {
    const Complex beta(1.3, -0.4);
    const int n = 40;
    const CVector from_d = displacement(beta, n).col(0);
    CHECK((from_d - coherent_state(beta, n).amplitudes).norm() < 1e-10);
  }

  TEST_CASE("displacement refuses a truncation that is too small") {
    try {
      displacement(Complex(3.0, 0.0), 20);
      FAIL("expected DimensionError");
    } catch (const DimensionError& e) {
      CHECK(e.suggested_nmax() == minimum_nmax(3.0));
    }
  }

  TEST_CASE("coherent state statistics") {
    const auto psi = coherent_state(Complex(2.0, 0.5), 64);
    psi.validate();
    const auto rho = DensityMatrix::pure(psi);
    CHECK(rel_err(rho.mean_number(), 4.25) < 1e-10);
  }

  TEST_CASE("even cat state") {
    const double alpha = 2.0;
    const auto cat = prepare_cat(alpha, 64);
    CHECK(std::abs(cat.norm_squared() - 1.0) < 1e-12);
    for (int k = 1; k < 64; k += 2) CHECK(cat.amplitudes(k) == Complex(0.0, 0.0));
    const auto rho = DensityMatrix::pure(cat);
    rho.validate();
    CHECK(rel_err(rho.mean_number(), alpha * alpha * std::tanh(alpha * alpha)) < 1e-10);
    // <alpha|cat><cat|-alpha> = (1 + e^{-2 alpha^2}) / 2
    CHECK(rel_err(std::abs(rho.coherent_element(alpha, -alpha)), 0.5 * (1.0 + std::exp(-8.0))) < 1e-10);
    CHECK(rho.odd_population() == 0.0);
    CHECK_THROWS_AS(prepare_cat(4.0, 32), DimensionError);
  }

  TEST_CASE("cat via the conditional displacement gate") {
    const double eta = 0.01;
    const double theta = 150.0;  // eta theta = 1.5
    const auto prep = prepare_cat_via_gate(eta, theta, 48);
    const double b2 = 1.5 * 1.5;
    const double n_cat = 2.0 * (1.0 + std::exp(-2.0 * b2));
    CHECK(rel_err(prep.unnormalized_even_norm_squared, n_cat) < 1e-10);
    CHECK(rel_err(prep.probability_even, 0.5 * (1.0 + std::exp(-2.0 * b2))) < 1e-10);
    CHECK(std::abs(prep.probability_even + prep.probability_odd - 1.0) < 1e-12);
    const auto target = prepare_cat(Complex(0.0, 1.5), 48);
    CHECK(std::abs(std::abs(prep.even.amplitudes.dot(target.amplitudes)) - 1.0) < 1e-10);
    CHECK(rel_err(prep.gate.global_factor, std::exp(-0.5 * b2)) < 1e-14);
    CHECK_FALSE(prep.gate.lamb_dicke_warning);
    CHECK(conditional_displacement_gate(0.2, 7.5, 48).lamb_dicke_warning);
  }

  TEST_CASE("Hermite functions are orthonormal") {
    std::vector<double> x;
    const double h = 0.05;
    for (double v = -20; v <= 20; v += h) x.push_back(v);
    const Eigen::MatrixXd psi = hermite_functions(x, 30);
    const Eigen::MatrixXd gram = h * psi.transpose() * psi;
    CHECK((gram - Eigen::MatrixXd::Identity(30, 30)).cwiseAbs().maxCoeff() < 1e-10);
  }

  TEST_CASE("position grid anchors the lobes on nodes") {
    const auto g = PositionGrid::for_cat(8.0, 1.0, 256);
    CHECK(g.size() == 256);
    CHECK(std::abs(g.x[g.nearest(4.0)] - 4.0) < 1e-12);
    CHECK(std::abs(g.x[g.nearest(-4.0)] + 4.0) < 1e-12);
    CHECK(g.x.back() >= 9.5);
  }

  TEST_CASE("Fock to position conversion") {
    const auto rho = DensityMatrix::pure(prepare_cat(2.0, 64));
    const auto grid = PositionGrid::for_cat(8.0, demo_units().x_zpf(), 256);
    const auto pos = to_position(rho, grid);
    CHECK(std::abs(pos.trace() - 1.0) < 1e-8);
    CHECK(std::abs(pos.purity() - 1.0) < 1e-8);
    CHECK(pos.hermiticity_error() < 1e-12);
    const Complex a = rho.position_element(4.0, -4.0);
    const Complex b = pos.position_element(4.0, -4.0);
    CHECK(std::abs(a - b) < 1e-10);
  }

  TEST_CASE("localization kernel") {
    const auto units = demo_units();
    const auto grid = PositionGrid::for_cat(8.0, units.x_zpf(), 256);
    const auto pos = to_position(DensityMatrix::pure(prepare_cat(2.0, 64)), grid);
    const double d_pp = 1e-46;
    const SeparationRate rate = [d_pp](double dx) { return gamma_env(d_pp, dx); };
    const double dt = 0.1;
    const auto out = apply_localization_kernel(pos, rate, dt);
    CHECK(std::abs(out.trace() - pos.trace()) < 1e-14);
    for (int i = 0; i < out.dimension(); ++i) CHECK(out.matrix(i, i) == pos.matrix(i, i));
    const double sep = 8.0 * units.x_zpf();
    const double ratio = std::abs(out.position_element(4.0, -4.0)) / std::abs(pos.position_element(4.0, -4.0));
    CHECK(rel_err(ratio, std::exp(-rate(sep) * dt)) < 1e-12);
    CHECK(out.purity() < pos.purity());
    CHECK_THROWS_AS(apply_localization_kernel(DensityMatrix::pure(prepare_cat(2.0, 64)), rate, dt), ConfigError);
  }

  TEST_CASE("Lindblad generator is traceless and Hermiticity preserving") {
    const int n = 32;
    const auto rho = DensityMatrix::pure(prepare_cat(Complex(1.2, 0.3), n));
    LindbladProblem p;
    p.h0 = number_operator(n).cast<Complex>();
    p.localization = 0.3;
    p.damping = 0.2;
    p.n_th = 0.7;
    const CMatrix d = lindblad_rhs(p, rho.matrix);
    CHECK(std::abs(d.trace()) < 1e-12);
    CHECK((d - d.adjoint()).cwiseAbs().maxCoeff() < 1e-12);
  }

  TEST_CASE("double commutator against dense operator algebra") {
    const int n = 16;
    const auto rho = DensityMatrix::pure(coherent_state(Complex(0.8, -0.2), n)).matrix;
    const CMatrix x = position_quadrature(n);
    const CMatrix c = x * rho - rho * x;
    const CMatrix expect = -0.25 * (x * c - c * x);
    CHECK((lindblad_rhs(localization_only(n, 0.25), rho) - expect).cwiseAbs().maxCoeff() < 1e-13);
  }

  TEST_CASE("position coherences decay as exp(-kappa (X - X')^2 t)") {
    const double alpha = 2.0;
    const int n = 64;
    const double kappa = 0.01;
    const auto rho0 = DensityMatrix::pure(prepare_cat(alpha, n));
    const auto traj = evolve_lindblad(rho0, localization_only(n, kappa), 0.002, 500, 100);
    const Complex c0 = rho0.position_element(2 * alpha, -2 * alpha);
    for (const auto& s : traj) {
      const double expect = std::exp(-kappa * 16.0 * alpha * alpha * s.time);
      CHECK(rel_err(std::abs(s.rho.position_element(2 * alpha, -2 * alpha) / c0), expect) < 1e-6);
    }
  }

  TEST_CASE("coherent-state overlap follows its Gaussian average") {
    const double alpha = 2.5;
    const int n = 64;
    const double kappa = 0.01;
    const auto rho0 = DensityMatrix::pure(prepare_cat(alpha, n));
    const auto traj = evolve_lindblad(rho0, localization_only(n, kappa), 0.002, 500, 100);
    const double c0 = std::abs(rho0.coherent_element(alpha, -alpha));
    for (const auto& s : traj) {
      const double kt = kappa * s.time;
      const double expect = std::exp(-16.0 * alpha * alpha * kt / (1.0 + 4.0 * kt)) / std::sqrt(1.0 + 4.0 * kt);
      CHECK(rel_err(std::abs(s.rho.coherent_element(alpha, -alpha)) / c0, expect) < 5e-5);
    }
  }

  TEST_CASE("localization keeps even and odd sectors decoupled") {
    const int n = 48;
    const auto traj = evolve_lindblad(DensityMatrix::pure(prepare_cat(2.0, n)), localization_only(n, 0.05), 0.001,
                                      400, 100);
    for (const auto& s : traj) CHECK(s.rho.parity_coherence() < 1e-8);
    // Momentum kicks do populate odd levels.
    CHECK(traj.back().rho.odd_population() > 1e-3);
  }

  TEST_CASE("thermal state is stationary") {
    const int n = 40;
    const double nth = 0.5;
    Eigen::VectorXcd diag(n);
    double z = 0.0;
    for (int k = 0; k < n; ++k) z += std::pow(nth / (1 + nth), k);
    for (int k = 0; k < n; ++k) diag(k) = std::pow(nth / (1 + nth), k) / z;
    const CMatrix thermal = diag.asDiagonal();
    LindbladProblem p;
    p.h0 = number_operator(n).cast<Complex>();
    p.damping = 0.3;
    p.n_th = nth;
    CHECK(lindblad_rhs(p, thermal).cwiseAbs().maxCoeff() < 1e-12);
  }

  TEST_CASE("stability guard and input checks") {
    const auto rho = DensityMatrix::pure(prepare_cat(1.0, 32));
    CHECK_THROWS_AS(evolve_lindblad(rho, localization_only(32, 10.0), 0.1, 10), NumericalError);
    CHECK_THROWS_AS(evolve_lindblad(rho, localization_only(32, 0.0), -0.1, 10), ConfigError);
    CHECK_THROWS_AS(evolve_lindblad(rho, localization_only(16, 0.0), 0.01, 10), ConfigError);
    DensityMatrix broken = rho;
    broken.matrix(0, 1) += 0.1;
    CHECK_THROWS_AS(broken.validate(), NumericalError);
  }

  TEST_CASE("physical conversion of the localization coefficient") {
    const auto units = demo_units();
    const double d_pp = 3e-56;
    const auto p = LindbladProblem::physical(CMatrix(), d_pp, {}, units);
    const double x = units.x_zpf();
    // Coherence rate for lobes 4 alpha apart: kappa 16 alpha^2 Omega equals Gamma_env(4 alpha x_zpf).
    const double alpha = 2.0;
    CHECK(rel_err(p.localization * 16.0 * alpha * alpha * units.omega, gamma_env(d_pp, 4.0 * alpha * x)) < 1e-12);
    CHECK_THROWS_AS(LindbladProblem::physical(CMatrix(), -1.0, {}, units), ConfigError);
  }

  TEST_CASE("Wigner function of the vacuum") {
    const auto units = demo_units();
    const auto rho = DensityMatrix::pure(coherent_state(0.0, 32));
    const auto w = wigner(rho, {}, units);
    const double peak = 1.0 / (constants::pi * constants::hbar);
    CHECK(rel_err(w.at(0.0, 0.0), peak) < 1e-10);
    CHECK(std::abs(w.normalization() - 1.0) < 1e-6);
    CHECK(std::abs(w.purity() - 1.0) < 1e-6);
  }

  TEST_CASE("Wigner function of a cat: fringes, normalization, both bases") {
    const auto units = demo_units();
    const double alpha = 1.25;
    const auto rho = DensityMatrix::pure(prepare_cat(alpha, 40));
    WignerRequest req;
    req.x_max = 7.0;
    req.p_max = 7.0;
    req.nx = 141;
    req.np = 141;
    const auto w = wigner(rho, req, units);
    CHECK(std::abs(w.normalization() - 1.0) < 1e-4);
    CHECK(std::abs(w.purity() - 1.0) < 1e-3);
    CHECK(w.min() < 0.0);
    CHECK(w.at(0.0, 0.0) > 0.0);

    const auto grid = PositionGrid::for_cat(4.0 * alpha, units.x_zpf(), 256);
    const auto pos = to_position(rho, grid);
    WignerRequest preq = req;
    const auto wp = wigner(pos, preq, units);
    const double scale = w.max();
    CHECK(std::abs(wp.at(0.0, 0.0) - w.at(0.0, 0.0)) < 1e-3 * scale);
    const double xl = 2.0 * alpha * units.x_zpf();
    CHECK(std::abs(wp.at(xl, 0.0) - w.at(xl, 0.0)) < 0.02 * scale);
  }

  TEST_CASE("Wigner grid too coarse for the fringes") {
    const auto rho = DensityMatrix::pure(prepare_cat(4.0, 96));
    WignerRequest req;
    req.x_max = 12.0;
    req.p_max = 12.0;
    req.nx = 9;
    req.np = 9;
    CHECK_THROWS_AS(wigner(rho, req, demo_units()), NumericalError);
  }
}
