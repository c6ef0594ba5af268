#include <cmath>

#include <fmt/format.h>

#include "csl/constants.hpp"
#include "csl/error.hpp"
#include "csl/state.hpp"

namespace csl {

namespace {

// Banded ladder-operator products, O(N^2) each.
// (a rho)[m, :] = sqrt(m+1) rho[m+1, :]
CMatrix a_left(const CMatrix& rho, const Eigen::VectorXd& s) {
  const int n = static_cast<int>(rho.rows());
  CMatrix out = CMatrix::Zero(n, rho.cols());
  out.topRows(n - 1) = s.asDiagonal() * rho.bottomRows(n - 1);
  return out;
}

// (a^dag rho)[m, :] = sqrt(m) rho[m-1, :]
CMatrix adag_left(const CMatrix& rho, const Eigen::VectorXd& s) {
  const int n = static_cast<int>(rho.rows());
  CMatrix out = CMatrix::Zero(n, rho.cols());
  out.bottomRows(n - 1) = s.asDiagonal() * rho.topRows(n - 1);
  return out;
}

// (rho a)[:, n] = sqrt(n) rho[:, n-1]
CMatrix a_right(const CMatrix& rho, const Eigen::VectorXd& s) {
  const int n = static_cast<int>(rho.cols());
  CMatrix out = CMatrix::Zero(rho.rows(), n);
  out.rightCols(n - 1) = rho.leftCols(n - 1) * s.asDiagonal();
  return out;
}

// (rho a^dag)[:, n] = sqrt(n+1) rho[:, n+1]
CMatrix adag_right(const CMatrix& rho, const Eigen::VectorXd& s) {
  const int n = static_cast<int>(rho.cols());
  CMatrix out = CMatrix::Zero(rho.rows(), n);
  out.leftCols(n - 1) = rho.rightCols(n - 1) * s.asDiagonal();
  return out;
}

struct Workspace {
  Eigen::VectorXd sqrt_n;          // sqrt(1), ..., sqrt(N-1)
  Eigen::VectorXd number;          // a^dag a = diag(0..N-1)
  Eigen::VectorXd number_plus;     // truncated a a^dag = diag(1..N-1, 0)
  bool diagonal_h0 = false;
  Eigen::VectorXcd h0_diag;

  Workspace(const LindbladProblem& p, int n) : sqrt_n(n - 1), number(n), number_plus(n) {
    for (int k = 0; k < n - 1; ++k) sqrt_n(k) = std::sqrt(static_cast<double>(k + 1));
    for (int k = 0; k < n; ++k) {
      number(k) = k;
      number_plus(k) = (k + 1 < n) ? k + 1 : 0.0;
    }
    if (p.h0.size() > 0) {
      CMatrix off = p.h0;
      off.diagonal().setZero();
      diagonal_h0 = off.cwiseAbs().maxCoeff() == 0.0;
      h0_diag = p.h0.diagonal();
    } else {
      diagonal_h0 = true;
      h0_diag = Eigen::VectorXcd::Zero(n);
    }
  }
};

CMatrix rhs(const LindbladProblem& p, const Workspace& w, const CMatrix& rho) {
  const auto& s = w.sqrt_n;
  CMatrix d = CMatrix::Zero(rho.rows(), rho.cols());
  const Complex i(0.0, 1.0);

  // -i [H0, rho]
  if (w.diagonal_h0) {
    for (int c = 0; c < rho.cols(); ++c) {
      for (int r = 0; r < rho.rows(); ++r) d(r, c) = -i * (w.h0_diag(r) - w.h0_diag(c)) * rho(r, c);
    }
  } else {
    d.noalias() = -i * (p.h0 * rho - rho * p.h0);
  }

  // -kappa [X, [X, rho]], X = a + a^dag
  if (p.localization != 0.0) {
    const CMatrix x_rho = a_left(rho, s) + adag_left(rho, s);
    const CMatrix comm = x_rho - (a_right(rho, s) + adag_right(rho, s));
    const CMatrix double_comm =
        (a_left(comm, s) + adag_left(comm, s)) - (a_right(comm, s) + adag_right(comm, s));
    d -= p.localization * double_comm;
  }

  if (p.damping != 0.0) {
    const double down = p.damping * (p.n_th + 1.0);
    const double up = p.damping * p.n_th;
    // D[a] rho = a rho a^dag - (a^dag a rho + rho a^dag a)/2
    if (down != 0.0) {
      CMatrix term = adag_right(a_left(rho, s), s);
      term -= 0.5 * (w.number.asDiagonal() * rho + rho * w.number.asDiagonal());
      d += down * term;
    }
    // D[a^dag] rho = a^dag rho a - (a a^dag rho + rho a a^dag)/2
    if (up != 0.0) {
      CMatrix term = a_right(adag_left(rho, s), s);
      term -= 0.5 * (w.number_plus.asDiagonal() * rho + rho * w.number_plus.asDiagonal());
      d += up * term;
    }
  }
  return d;
}

}  // namespace

LindbladProblem LindbladProblem::physical(CMatrix h0, double d_pp, const ThermalizationSpec& therm,
                                          const OscillatorUnits& units) {
  check(therm);
  if (!(d_pp >= 0.0)) throw ConfigError("d_pp: must be >= 0");
  LindbladProblem p;
  p.h0 = std::move(h0);
  const double x = units.x_zpf();
  p.localization = d_pp * x * x / (constants::hbar * constants::hbar * units.omega);
  p.damping = therm.gamma_m / units.omega;
  p.n_th = therm.n_th;
  return p;
}

double LindbladProblem::max_rate() const {
  const int n = static_cast<int>(h0.rows());
  double spread = 0.0;
  if (n > 0) {
    Eigen::SelfAdjointEigenSolver<CMatrix> solver(0.5 * (h0 + h0.adjoint()), Eigen::EigenvaluesOnly);
    spread = solver.eigenvalues().maxCoeff() - solver.eigenvalues().minCoeff();
  }
  // Gershgorin bound on the spectrum of the truncated X.
  const double x_max = n > 1 ? std::sqrt(n - 2.0) + std::sqrt(n - 1.0) : 1.0;
  return spread + localization * 4.0 * x_max * x_max + damping * (2.0 * n_th + 1.0) * n;
}

CMatrix lindblad_rhs(const LindbladProblem& problem, const CMatrix& rho) {
  Workspace w(problem, static_cast<int>(rho.rows()));
  return rhs(problem, w, rho);
}

std::vector<Snapshot> evolve_lindblad(const DensityMatrix& rho0, const LindbladProblem& problem,
                                      double dt, int steps, int record_every) {
  if (rho0.basis != Basis::Fock) throw ConfigError("evolve_lindblad: requires a Fock-basis state");
  const int n = rho0.dimension();
  if (problem.h0.size() > 0 && problem.h0.rows() != n) {
    throw ConfigError("evolve_lindblad: h0 dimension does not match the state");
  }
  if (!(dt > 0.0) || steps < 0 || record_every < 1) {
    throw ConfigError("evolve_lindblad: need dt > 0, steps >= 0, record_every >= 1");
  }
  LindbladProblem p = problem;
  if (p.h0.size() == 0) p.h0 = CMatrix::Zero(n, n);
  const double guard = dt * p.max_rate();
  if (guard >= 0.1) {
    throw NumericalError(fmt::format(
        "stability guard: dt * max_rate = {:.3g} >= 0.1; reduce dt below {:.3g}", guard,
        0.1 / p.max_rate()));
  }

  Workspace w(p, n);
  std::vector<Snapshot> out;
  out.push_back({0.0, rho0});

  CMatrix rho = rho0.matrix;
  for (int step = 1; step <= steps; ++step) {
    const CMatrix k1 = rhs(p, w, rho);
    const CMatrix k2 = rhs(p, w, rho + 0.5 * dt * k1);
    const CMatrix k3 = rhs(p, w, rho + 0.5 * dt * k2);
    const CMatrix k4 = rhs(p, w, rho + dt * k3);
    rho += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    rho = 0.5 * (rho + rho.adjoint()).eval();

    if (step % record_every == 0 || step == steps) {
      DensityMatrix snap;
      snap.matrix = rho;
      snap.basis = Basis::Fock;
      const double lowest = snap.min_eigenvalue();
      if (lowest < -1e-6) {
        throw NumericalError(fmt::format(
            "positivity lost at t = {:.6g}: eigenvalue {:.3g}, trace {:.12g}, purity {:.6g}",
            step * dt, lowest, snap.trace(), snap.purity()));
      }
      out.push_back({step * dt, std::move(snap)});
    }
  }
  return out;
}

}  // namespace csl
