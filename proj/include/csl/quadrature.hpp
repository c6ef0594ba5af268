#pragma once

#include <functional>
#include <span>

namespace csl {

/// Adaptive Gauss-Kronrod (7/15) integral of f over [a, b].
/// Throws NumericalError with the achieved relative error if rel_tol is not met.
double integrate(const std::function<double(double)>& f, double a, double b,
                 double rel_tol = 1e-8);

/// Same, split at the given interior points (kinks of the integrand).
/// Breakpoints must be sorted and lie inside [a, b].
double integrate_piecewise(const std::function<double(double)>& f, double a, double b,
                           std::span<const double> breakpoints, double rel_tol = 1e-8);

}  // namespace csl
