#include <cmath>

#include <fmt/format.h>

#include "csl/constants.hpp"
#include "csl/error.hpp"
#include "csl/state.hpp"

namespace csl {

namespace {

std::vector<double> linspace(double lo, double hi, int n) {
  std::vector<double> v(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) v[i] = (n == 1) ? lo : lo + (hi - lo) * i / (n - 1);
  return v;
}

double trapezoid_2d(const std::vector<double>& x, const std::vector<double>& p,
                    const Eigen::MatrixXd& f) {
  auto weights = [](const std::vector<double>& axis) {
    std::vector<double> w(axis.size(), 0.0);
    for (std::size_t i = 0; i + 1 < axis.size(); ++i) {
      const double h = axis[i + 1] - axis[i];
      w[i] += 0.5 * h;
      w[i + 1] += 0.5 * h;
    }
    return w;
  };
  const auto wx = weights(x);
  const auto wp = weights(p);
  double total = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    for (std::size_t j = 0; j < p.size(); ++j) total += wx[i] * wp[j] * f(i, j);
  }
  return total;
}

// Quadrature variances in x_zpf / p_zpf units from a Fock-basis state.
void quadrature_variances(const CMatrix& rho, double& var_x, double& var_p) {
  const int n = static_cast<int>(rho.rows());
  const CMatrix a = annihilation(n);
  const Complex ea = (a * rho).trace();
  const Complex ea2 = (a * a * rho).trace();
  const double ena = (a.adjoint() * a * rho).trace().real();
  // X = a + a^dag, P = -i (a - a^dag)
  const double mean_x = 2.0 * ea.real();
  const double mean_p = 2.0 * ea.imag();
  var_x = 2.0 * ea2.real() + 2.0 * ena + 1.0 - mean_x * mean_x;
  var_p = -2.0 * ea2.real() + 2.0 * ena + 1.0 - mean_p * mean_p;
}

// Two coherent lobes separated by d along one quadrature produce fringes of
// wavelength 4 pi / d along the other. Estimate d from the excess variance.
void check_resolution(const CMatrix& rho, double step_x, double step_p) {
  double var_x = 0.0, var_p = 0.0;
  quadrature_variances(rho, var_x, var_p);
  const double sep_x = 2.0 * std::sqrt(std::max(var_x - 1.0, 0.0));
  const double sep_p = 2.0 * std::sqrt(std::max(var_p - 1.0, 0.0));
  if (sep_x > 0.0) {
    const double wavelength_p = 4.0 * constants::pi / sep_x;
    if (wavelength_p < 2.0 * step_p) {
      throw NumericalError(fmt::format(
          "wigner grid too coarse: p step {:.3g} p_zpf exceeds half the fringe wavelength {:.3g}",
          step_p, wavelength_p));
    }
  }
  if (sep_p > 0.0) {
    const double wavelength_x = 4.0 * constants::pi / sep_p;
    if (wavelength_x < 2.0 * step_x) {
      throw NumericalError(fmt::format(
          "wigner grid too coarse: x step {:.3g} x_zpf exceeds half the fringe wavelength {:.3g}",
          step_x, wavelength_x));
    }
  }
}

// Iterative Laguerre-free evaluation over the cross-Wigner functions of |m><n|.
// Returns W(beta) normalized so that its integral over d^2 beta is one.
Eigen::MatrixXd wigner_fock(const CMatrix& rho, const std::vector<double>& xs,
                            const std::vector<double>& ps) {
  const int n = static_cast<int>(rho.rows());
  const int nx = static_cast<int>(xs.size());
  const int np = static_cast<int>(ps.size());
  Eigen::ArrayXXcd beta(nx, np);
  for (int i = 0; i < nx; ++i) {
    for (int j = 0; j < np; ++j) beta(i, j) = Complex(xs[i] / 2.0, ps[j] / 2.0);
  }
  const Eigen::ArrayXXcd beta_conj = beta.conjugate();

  std::vector<Eigen::ArrayXXcd> w(static_cast<std::size_t>(n));
  Eigen::ArrayXXd total = Eigen::ArrayXXd::Zero(nx, np);
  w[0] = ((-2.0 * beta.abs2()).exp() / constants::pi).cast<Complex>();
  total += rho(0, 0).real() * w[0].real();
  for (int k = 1; k < n; ++k) {
    w[k] = 2.0 * beta * w[k - 1] / std::sqrt(static_cast<double>(k));
    total += 2.0 * (rho(0, k) * w[k]).real();
  }
  for (int m = 1; m < n; ++m) {
    Eigen::ArrayXXcd temp = w[m];
    const double sm = std::sqrt(static_cast<double>(m));
    w[m] = (2.0 * beta_conj * temp - sm * w[m - 1]) / sm;
    total += rho(m, m).real() * w[m].real();
    for (int k = m + 1; k < n; ++k) {
      Eigen::ArrayXXcd next = (2.0 * beta * w[k - 1] - sm * temp) / std::sqrt(static_cast<double>(k));
      temp = w[k];
      w[k] = std::move(next);
      total += 2.0 * (rho(m, k) * w[k]).real();
    }
  }
  return 2.0 * total.matrix();
}

}  // namespace

double WignerGrid::normalization() const { return trapezoid_2d(x_axis, p_axis, values); }

double WignerGrid::purity() const {
  return 2.0 * constants::pi * constants::hbar * trapezoid_2d(x_axis, p_axis, values.array().square().matrix());
}

double WignerGrid::at(double x, double p) const {
  auto nearest = [](const std::vector<double>& axis, double v) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < axis.size(); ++i) {
      if (std::abs(axis[i] - v) < std::abs(axis[best] - v)) best = i;
    }
    return static_cast<Eigen::Index>(best);
  };
  return values(nearest(x_axis, x), nearest(p_axis, p));
}

WignerGrid wigner(const DensityMatrix& rho, const WignerRequest& request,
                  const OscillatorUnits& units) {
  if (request.nx < 2 || request.np < 2 || !(request.x_max > 0.0) || !(request.p_max > 0.0)) {
    throw ConfigError("wigner: need >= 2 points per axis and positive extents");
  }
  const double x_zpf = units.x_zpf();
  const double p_zpf = units.p_zpf();
  const std::vector<double> ps = linspace(-request.p_max, request.p_max, request.np);
  const double step_p = ps[1] - ps[0];

  WignerGrid out;
  std::vector<double> xs;
  Eigen::MatrixXd w_xp;  // normalized over dX dP

  if (rho.basis == Basis::Fock) {
    xs = linspace(-request.x_max, request.x_max, request.nx);
    check_resolution(rho.matrix, xs[1] - xs[0], step_p);
    w_xp = wigner_fock(rho.matrix, xs, ps) / 4.0;
  } else {
    // Position grid: W(X_i, P) = (1/2pi) sum_k rho(i+k, i-k) exp(-i P k h).
    const auto& g = *rho.grid;
    if (step_p * g.step > constants::pi / 2.0 || request.p_max * g.step >= constants::pi) {
      throw NumericalError("wigner: momentum range exceeds the position grid Nyquist limit");
    }
    std::vector<int> rows;
    for (int i = 0; i < g.size(); ++i) {
      if (std::abs(g.x[i]) <= request.x_max) rows.push_back(i);
    }
    xs.reserve(rows.size());
    w_xp.resize(static_cast<Eigen::Index>(rows.size()), request.np);
    for (std::size_t r = 0; r < rows.size(); ++r) {
      const int i = rows[r];
      xs.push_back(g.x[i]);
      const int reach = std::min(i, g.size() - 1 - i);
      for (int j = 0; j < request.np; ++j) {
        double sum = rho.matrix(i, i).real();
        for (int k = 1; k <= reach; ++k) {
          const Complex phase = std::exp(Complex(0.0, -ps[j] * k * g.step));
          sum += 2.0 * (rho.matrix(i + k, i - k) * phase).real();
        }
        w_xp(static_cast<Eigen::Index>(r), j) = sum / (2.0 * constants::pi);
      }
    }
  }

  out.x_axis.reserve(xs.size());
  for (double x : xs) out.x_axis.push_back(x * x_zpf);
  out.p_axis.reserve(ps.size());
  for (double p : ps) out.p_axis.push_back(p * p_zpf);
  out.values = w_xp / (x_zpf * p_zpf);
  return out;
}

}  // namespace csl
