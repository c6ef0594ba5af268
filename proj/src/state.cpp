#include "csl/state.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "csl/constants.hpp"
#include "csl/error.hpp"

namespace csl {

double OscillatorUnits::x_zpf() const { return zero_point_width(mass, omega); }
double OscillatorUnits::p_zpf() const { return constants::hbar / (2.0 * x_zpf()); }

int minimum_nmax(double beta_abs) {
  return static_cast<int>(std::ceil(4.0 * beta_abs * beta_abs)) + 20;
}

int default_nmax(double alpha_abs) { return std::max(minimum_nmax(alpha_abs), 32); }

CMatrix annihilation(int n_max) {
  CMatrix a = CMatrix::Zero(n_max, n_max);
  for (int n = 1; n < n_max; ++n) a(n - 1, n) = std::sqrt(static_cast<double>(n));
  return a;
}

CMatrix number_operator(int n_max) {
  CMatrix n = CMatrix::Zero(n_max, n_max);
  for (int k = 0; k < n_max; ++k) n(k, k) = static_cast<double>(k);
  return n;
}

CMatrix position_quadrature(int n_max) {
  const CMatrix a = annihilation(n_max);
  return a + a.adjoint();
}

CMatrix displacement(Complex beta, int n_max) {
  const int required = minimum_nmax(std::abs(beta));
  if (n_max < required) {
    throw DimensionError(
        fmt::format("displacement |beta| = {:.4g} needs n_max >= {} (got {})", std::abs(beta),
                    required, n_max),
        required);
  }
  if (beta == Complex(0.0, 0.0)) return CMatrix::Identity(n_max, n_max);

  // Exponentiate in a padded space: rows near n_max couple to levels up to
  // ~ 2|beta| sqrt(n_max) above them.
  const int padded = 2 * n_max + required;
  const CMatrix a = annihilation(padded);
  const CMatrix generator = beta * a.adjoint() - std::conj(beta) * a;  // anti-Hermitian
  const CMatrix hermitian = Complex(0.0, 1.0) * generator;
  Eigen::SelfAdjointEigenSolver<CMatrix> solver(hermitian);
  const CVector phases =
      (Complex(0.0, -1.0) * solver.eigenvalues().cast<Complex>()).array().exp().matrix();
  const CMatrix full = solver.eigenvectors() * phases.asDiagonal() * solver.eigenvectors().adjoint();
  return full.topLeftCorner(n_max, n_max);
}

double FockState::leakage() const { return std::norm(amplitudes(amplitudes.size() - 1)); }

void FockState::validate() const {
  if (std::abs(norm_squared() - 1.0) > 1e-10) {
    throw NumericalError(fmt::format("Fock state norm^2 = {:.12g}, expected 1", norm_squared()));
  }
  if (leakage() >= 1e-8) {
    const int suggestion = 2 * n_max();
    throw DimensionError(
        fmt::format("Fock truncation leakage {:.3g} >= 1e-8 at n_max = {}", leakage(), n_max()),
        suggestion);
  }
}

FockState coherent_state(Complex alpha, int n_max) {
  FockState psi{CVector(n_max)};
  Complex c = std::exp(-0.5 * std::norm(alpha));
  psi.amplitudes(0) = c;
  for (int n = 1; n < n_max; ++n) {
    c *= alpha / std::sqrt(static_cast<double>(n));
    psi.amplitudes(n) = c;
  }
  return psi;
}

FockState prepare_cat(Complex alpha, int n_max) {
  const int required = minimum_nmax(std::abs(alpha));
  if (n_max < required) {
    throw DimensionError(fmt::format("cat |alpha| = {:.4g} needs n_max >= {} (got {})",
                                     std::abs(alpha), required, n_max),
                         required);
  }
  FockState cat = coherent_state(alpha, n_max);
  cat.amplitudes += coherent_state(-alpha, n_max).amplitudes;
  // Odd levels cancel exactly; set them to zero rather than leave rounding noise.
  for (int n = 1; n < n_max; n += 2) cat.amplitudes(n) = 0.0;
  cat.amplitudes /= cat.amplitudes.norm();
  cat.validate();
  return cat;
}

FockState prepare_cat(double alpha_mag, int n_max) { return prepare_cat(Complex(alpha_mag, 0.0), n_max); }

ConditionalGate conditional_displacement_gate(double eta, double theta, int n_max) {
  ConditionalGate gate;
  gate.cat_size = eta * theta;
  gate.excited_branch = displacement(Complex(0.0, gate.cat_size), n_max);
  gate.ground_branch = displacement(Complex(0.0, -gate.cat_size), n_max);
  gate.global_factor = std::exp(-0.5 * gate.cat_size * gate.cat_size);
  const double mean_n = gate.cat_size * gate.cat_size;
  gate.lamb_dicke_warning = eta * std::sqrt(mean_n + 1.0) >= 0.3;
  return gate;
}

GatePreparation prepare_cat_via_gate(double eta, double theta, int n_max) {
  GatePreparation out;
  out.gate = conditional_displacement_gate(eta, theta, n_max);

  // TLS (x) motion as two motional branches; start in |g>|0>.
  CVector ground = CVector::Zero(n_max);
  CVector excited = CVector::Zero(n_max);
  ground(0) = 1.0;

  const double r = 1.0 / std::sqrt(2.0);
  auto hadamard = [&] {
    const CVector g = ground;
    ground = r * (g + excited);
    excited = r * (g - excited);
  };

  hadamard();
  ground = out.gate.ground_branch * ground;
  excited = out.gate.excited_branch * excited;
  hadamard();

  out.probability_even = ground.squaredNorm();
  out.probability_odd = excited.squaredNorm();
  out.unnormalized_even_norm_squared = 4.0 * out.probability_even;
  out.even.amplitudes = ground / std::sqrt(out.probability_even);
  if (out.probability_odd > 0.0) {
    out.odd.amplitudes = excited / std::sqrt(out.probability_odd);
  } else {
    out.odd.amplitudes = excited;
  }
  return out;
}

// ---------------------------------------------------------------------------

PositionGrid PositionGrid::centered(int points, double half_extent, double anchor,
                                    double length_unit) {
  if (points < 4 || !(half_extent > 0.0)) throw ConfigError("position grid: need >= 4 points and positive extent");
  PositionGrid g;
  g.length_unit = length_unit;
  // Nodes at (j - (M-1)/2) h. For even M the nodes are half-integer multiples
  // of h; pick h so that anchor is a node.
  const double half_span = (points - 1) / 2.0;
  double h = half_extent / half_span;
  if (anchor > 0.0) {
    const double offset = (points % 2 == 0) ? 0.5 : 0.0;
    const double k = std::max(1.0, std::round(anchor / h - offset));
    h = anchor / (k + offset);
  }
  g.step = h;
  g.x.resize(static_cast<std::size_t>(points));
  for (int j = 0; j < points; ++j) g.x[j] = (j - half_span) * h;
  return g;
}

PositionGrid PositionGrid::for_cat(double separation, double length_unit, int points) {
  return centered(points, separation / 2.0 + 6.0, separation / 2.0, length_unit);
}

int PositionGrid::nearest(double value) const {
  const double idx = std::round(value / step + (size() - 1) / 2.0);
  return static_cast<int>(std::clamp(idx, 0.0, static_cast<double>(size() - 1)));
}

DensityMatrix DensityMatrix::pure(const FockState& psi) {
  DensityMatrix rho;
  rho.matrix = psi.amplitudes * psi.amplitudes.adjoint();
  rho.basis = Basis::Fock;
  return rho;
}

double DensityMatrix::trace() const { return matrix.trace().real(); }

double DensityMatrix::purity() const { return matrix.cwiseAbs2().sum(); }

double DensityMatrix::hermiticity_error() const {
  return (matrix - matrix.adjoint()).cwiseAbs().maxCoeff();
}

double DensityMatrix::min_eigenvalue() const {
  const CMatrix h = 0.5 * (matrix + matrix.adjoint());
  Eigen::SelfAdjointEigenSolver<CMatrix> solver(h, Eigen::EigenvaluesOnly);
  return solver.eigenvalues().minCoeff();
}

void DensityMatrix::validate() const {
  if (hermiticity_error() > 1e-10) {
    throw NumericalError(fmt::format("density matrix not Hermitian: {:.3g}", hermiticity_error()));
  }
  if (std::abs(trace() - 1.0) > 1e-8) {
    throw NumericalError(fmt::format("density matrix trace {:.12g} != 1", trace()));
  }
  if (min_eigenvalue() < -1e-8) {
    throw NumericalError(fmt::format("density matrix eigenvalue {:.3g} < 0", min_eigenvalue()));
  }
}

namespace {

void require_fock(const DensityMatrix& rho, const char* what) {
  if (rho.basis != Basis::Fock) throw ConfigError(fmt::format("{}: requires a Fock-basis state", what));
}

}  // namespace

double DensityMatrix::mean_number() const {
  require_fock(*this, "mean_number");
  double n = 0.0;
  for (int k = 0; k < dimension(); ++k) n += k * matrix(k, k).real();
  return n;
}

Complex DensityMatrix::coherent_element(Complex beta1, Complex beta2) const {
  require_fock(*this, "coherent_element");
  const CVector b1 = coherent_state(beta1, dimension()).amplitudes;
  const CVector b2 = coherent_state(beta2, dimension()).amplitudes;
  return b1.dot(matrix * b2);  // dot conjugates its left argument
}

Complex DensityMatrix::position_element(double x1, double x2) const {
  if (basis == Basis::Fock) {
    const Eigen::MatrixXd psi = hermite_functions({x1, x2}, dimension());
    const CVector left = psi.row(0).transpose().cast<Complex>();
    const CVector right = psi.row(1).transpose().cast<Complex>();
    return (left.transpose() * matrix * right)(0, 0);
  }
  const auto& g = *grid;
  return matrix(g.nearest(x1), g.nearest(x2)) / g.step;
}

double DensityMatrix::parity_coherence() const {
  require_fock(*this, "parity_coherence");
  double worst = 0.0;
  for (int m = 0; m < dimension(); ++m) {
    for (int n = (m + 1) % 2; n < dimension(); n += 2) worst = std::max(worst, std::abs(matrix(m, n)));
  }
  return worst;
}

double DensityMatrix::odd_population() const {
  require_fock(*this, "odd_population");
  double p = 0.0;
  for (int k = 1; k < dimension(); k += 2) p += matrix(k, k).real();
  return p;
}

Eigen::MatrixXd hermite_functions(const std::vector<double>& points, int n_max) {
  const int m = static_cast<int>(points.size());
  Eigen::MatrixXd psi(m, n_max);
  const double norm0 = std::pow(constants::pi, -0.25) * std::pow(2.0, -0.25);
  for (int i = 0; i < m; ++i) {
    const double xi = points[i] / std::sqrt(2.0);
    double prev = norm0 * std::exp(-0.5 * xi * xi);
    psi(i, 0) = prev;
    if (n_max == 1) continue;
    double cur = std::sqrt(2.0) * xi * prev;
    psi(i, 1) = cur;
    for (int n = 1; n + 1 < n_max; ++n) {
      const double next = std::sqrt(2.0 / (n + 1)) * xi * cur - std::sqrt(static_cast<double>(n) / (n + 1)) * prev;
      prev = cur;
      cur = next;
      psi(i, n + 1) = cur;
    }
  }
  return psi;
}

DensityMatrix to_position(const DensityMatrix& rho, const PositionGrid& grid) {
  require_fock(rho, "to_position");
  const CMatrix psi = (hermite_functions(grid.x, rho.dimension()) * std::sqrt(grid.step)).cast<Complex>();
  DensityMatrix out;
  out.matrix = psi * rho.matrix * psi.transpose();
  out.basis = Basis::Position;
  out.grid = grid;
  return out;
}

DensityMatrix apply_localization_kernel(const DensityMatrix& rho, const SeparationRate& rate,
                                        double dt) {
  if (rho.basis != Basis::Position || !rho.grid) {
    throw ConfigError("apply_localization_kernel: requires a position-basis state");
  }
  const auto& g = *rho.grid;
  const int m = g.size();
  const double offset = rate(0.0);
  // Uniform grid: the factor depends only on |i - j|.
  std::vector<double> factor(static_cast<std::size_t>(m));
  for (int k = 0; k < m; ++k) {
    factor[k] = std::exp(-(rate(k * g.step * g.length_unit) - offset) * dt);
  }
  factor[0] = 1.0;
  DensityMatrix out = rho;
  for (int j = 0; j < m; ++j) {
    for (int i = 0; i < m; ++i) out.matrix(i, j) *= factor[std::abs(i - j)];
  }
  return out;
}

}  // namespace csl
