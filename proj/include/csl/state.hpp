#pragma once

// Quantum-state layer for the trapped centre-of-mass mode.
//
// Internal units: position in x_zpf, momentum in p_zpf = hbar / (2 x_zpf),
// time in 1/Omega, energy in hbar Omega. With these, x = a + a^dagger and a
// coherent state |alpha> is centred at X = 2 Re(alpha), P = 2 Im(alpha).
// Conversion to SI happens through OscillatorUnits at the module boundary.

#include <complex>
#include <functional>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "csl/params.hpp"

namespace csl {

using Complex = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;

struct OscillatorUnits {
  double mass = 1e-17;   // kg
  double omega = 1.0;    // rad/s

  double x_zpf() const;  // m
  double p_zpf() const;  // kg m / s
  double time() const { return 1.0 / omega; }  // s per internal time unit
};

/// Smallest truncation accepted for a displacement of size |beta|: 4|beta|^2 + 20.
int minimum_nmax(double beta_abs);
/// Default truncation max(4|alpha|^2 + 20, 32).
int default_nmax(double alpha_abs);

// Truncated ladder operators; dimension n_max covers Fock levels 0 .. n_max-1.
CMatrix annihilation(int n_max);
CMatrix number_operator(int n_max);
CMatrix position_quadrature(int n_max);  // a + a^dagger

/// exp(beta a^dagger - beta* a) restricted to the first n_max levels.
/// The exponential is taken in a padded space so the returned block is accurate.
/// Throws DimensionError when n_max < minimum_nmax(|beta|).
CMatrix displacement(Complex beta, int n_max);

struct FockState {
  CVector amplitudes;

  int n_max() const { return static_cast<int>(amplitudes.size()); }
  double norm_squared() const { return amplitudes.squaredNorm(); }
  /// Population of the highest retained level.
  double leakage() const;
  /// Throws DimensionError when leakage() >= 1e-8, NumericalError when not normalized.
  void validate() const;
};

/// Analytic coherent-state amplitudes e^{-|a|^2/2} a^n / sqrt(n!).
FockState coherent_state(Complex alpha, int n_max);
/// Even cat (|alpha> + |-alpha>) / sqrt(N), N = 2(1 + e^{-2|alpha|^2}).
FockState prepare_cat(Complex alpha, int n_max);
FockState prepare_cat(double alpha_mag, int n_max);

/// Two-branch conditional displacement D(i eta theta sigma_z).
struct ConditionalGate {
  CMatrix excited_branch;  // D(+i eta theta)
  CMatrix ground_branch;   // D(-i eta theta)
  double global_factor = 1.0;  // e^{-(eta theta)^2 / 2}, tracked but not applied
  double cat_size = 0.0;       // |alpha| = eta theta
  bool lamb_dicke_warning = false;  // eta sqrt(<n> + 1) >= 0.3
};

ConditionalGate conditional_displacement_gate(double eta, double theta, int n_max);

/// Result of H -> gate -> H -> projective TLS measurement on |g>|0>.
struct GatePreparation {
  FockState even;   // outcome g, proportional to |+i eta theta> + |-i eta theta>
  FockState odd;    // outcome e
  double probability_even = 0.0;
  double probability_odd = 0.0;
  double unnormalized_even_norm_squared = 0.0;  // || D+|0> + D-|0> ||^2, equals N
  ConditionalGate gate;
};

GatePreparation prepare_cat_via_gate(double eta, double theta, int n_max);

enum class Basis { Fock, Position };

/// Uniform position grid in x_zpf units.
struct PositionGrid {
  std::vector<double> x;
  double step = 0.0;
  double length_unit = 1.0;  // metres per grid unit (x_zpf)

  int size() const { return static_cast<int>(x.size()); }
  double extent_m() const { return (x.back() - x.front()) * length_unit; }

  /// Symmetric grid of `points` nodes spanning about +-half_extent with +-anchor exactly on nodes.
  static PositionGrid centered(int points, double half_extent, double anchor, double length_unit);
  /// Default grid for a cat of separation `separation` (x_zpf units):
  /// 256 points over +-(separation/2 + 6).
  static PositionGrid for_cat(double separation, double length_unit, int points = 256);

  int nearest(double value) const;
};

/// Density matrix in either the truncated Fock basis or on a position grid.
/// Position-basis entries are rho(x_i, x_j) * step so that the trace is sum of the diagonal.
struct DensityMatrix {
  CMatrix matrix;
  Basis basis = Basis::Fock;
  std::optional<PositionGrid> grid;

  static DensityMatrix pure(const FockState& psi);

  int dimension() const { return static_cast<int>(matrix.rows()); }
  double trace() const;
  double purity() const;
  double hermiticity_error() const;  // max |rho - rho^dagger|
  double min_eigenvalue() const;
  /// Hermitian within 1e-10, trace 1 within 1e-8, eigenvalues >= -1e-8.
  void validate() const;

  /// <n>; Fock basis only.
  double mean_number() const;
  /// <beta1| rho |beta2> for coherent states; Fock basis only.
  Complex coherent_element(Complex beta1, Complex beta2) const;
  /// Continuum position-representation element rho(x1, x2) in 1/x_zpf units.
  Complex position_element(double x1, double x2) const;
  /// Largest |rho_mn| with m, n of opposite parity; Fock basis only.
  double parity_coherence() const;
  /// Total population of odd Fock levels.
  double odd_population() const;
};

/// Oscillator eigenfunctions psi_n(X), n < n_max, normalized in X (x_zpf units).
/// Rows index points, columns index n.
Eigen::MatrixXd hermite_functions(const std::vector<double>& points, int n_max);

/// Fock -> position grid conversion.
DensityMatrix to_position(const DensityMatrix& rho, const PositionGrid& grid);

using SeparationRate = std::function<double(double delta_x_m)>;

/// Multiply each rho(x, x') by exp(-(rate(|x-x'|) - rate(0)) dt). Diagonal is untouched.
/// `dt` in seconds, separations converted to metres through grid.length_unit.
DensityMatrix apply_localization_kernel(const DensityMatrix& rho, const SeparationRate& rate,
                                        double dt);

// ---------------------------------------------------------------------------
// Lindblad evolution

struct LindbladProblem {
  CMatrix h0;                 // hbar Omega units; zero matrix for a static frame
  double localization = 0.0;  // D_pp x_zpf^2 / (hbar^2 Omega)
  double damping = 0.0;       // gamma_m / Omega
  double n_th = 0.0;

  /// Convert SI inputs. h0 is supplied in hbar Omega units.
  static LindbladProblem physical(CMatrix h0, double d_pp, const ThermalizationSpec& therm,
                                  const OscillatorUnits& units);
  /// Upper bound on the Liouvillian rate, used by the stability guard.
  double max_rate() const;
};

struct Snapshot {
  double time = 0.0;  // internal units
  DensityMatrix rho;
};

/// Right-hand side of the master equation (exposed for tests).
CMatrix lindblad_rhs(const LindbladProblem& problem, const CMatrix& rho);

/// Fixed-step RK4 with Hermitian symmetrization after every step. Records the
/// initial state and every `record_every`-th step. Throws NumericalError when
/// dt * max_rate() >= 0.1 or a recorded state has an eigenvalue below -1e-6.
std::vector<Snapshot> evolve_lindblad(const DensityMatrix& rho, const LindbladProblem& problem,
                                      double dt, int steps, int record_every = 1);

// ---------------------------------------------------------------------------
// Wigner function

struct WignerRequest {
  double x_max = 6.0;  // half-extent in x_zpf
  double p_max = 6.0;  // half-extent in p_zpf
  int nx = 121;
  int np = 121;
};

struct WignerGrid {
  std::vector<double> x_axis;  // m
  std::vector<double> p_axis;  // kg m / s
  Eigen::MatrixXd values;      // W(x_i, p_j), 1/(J s)

  /// Trapezoidal integral of W over the grid.
  double normalization() const;
  /// 2 pi hbar times the trapezoidal integral of W^2.
  double purity() const;
  double min() const { return values.minCoeff(); }
  double max() const { return values.maxCoeff(); }
  /// W at the node closest to (x, p) given in SI.
  double at(double x, double p) const;
};

/// Throws NumericalError when the grid step exceeds half the estimated fringe
/// wavelength of the state.
WignerGrid wigner(const DensityMatrix& rho, const WignerRequest& request,
                  const OscillatorUnits& units);

}  // namespace csl
