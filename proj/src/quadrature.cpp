#include "csl/quadrature.hpp"

#include <cmath>
#include <limits>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <fmt/format.h>

#include "csl/error.hpp"

namespace csl {

double integrate(const std::function<double(double)>& f, double a, double b, double rel_tol) {
  if (a == b) return 0.0;
  double error = 0.0;
  double l1 = 0.0;
  constexpr unsigned max_depth = 20;
  const double value = boost::math::quadrature::gauss_kronrod<double, 15>::integrate(
      f, a, b, max_depth, rel_tol, &error, &l1);
  if (!std::isfinite(value)) {
    throw NumericalError(fmt::format("quadrature over [{:g}, {:g}] produced a non-finite value", a, b));
  }
  // boost reports the absolute error estimate; compare against the L1 norm so
  // sign-changing integrands do not spuriously fail.
  const double scale = std::max(std::abs(value), l1);
  if (scale > 0.0 && error > rel_tol * scale &&
      error > 64 * std::numeric_limits<double>::epsilon() * scale) {
    // Kronrod error estimates are very pessimistic at integrable endpoint
    // singularities (sqrt-type kinks). Accept the value when an independent
    // double-exponential rule agrees with it to the requested tolerance.
    boost::math::quadrature::tanh_sinh<double> ts;
    double ts_value = std::numeric_limits<double>::quiet_NaN();
    try {
      auto g = [&f](double x) { return f(x); };
      ts_value = ts.integrate(g, a, b, rel_tol);
    } catch (const std::exception&) {
    }
    if (std::isfinite(ts_value) && std::abs(ts_value - value) <= rel_tol * scale) return value;
    throw NumericalError(fmt::format(
        "quadrature over [{:g}, {:g}] did not converge: achieved relative error {:.3g} > {:.3g}",
        a, b, error / scale, rel_tol));
  }
  return value;
}

double integrate_piecewise(const std::function<double(double)>& f, double a, double b,
                           std::span<const double> breakpoints, double rel_tol) {
  double total = 0.0;
  double lo = a;
  for (double x : breakpoints) {
    if (x <= lo || x >= b) continue;
    total += integrate(f, lo, x, rel_tol);
    lo = x;
  }
  total += integrate(f, lo, b, rel_tol);
  return total;
}

}  // namespace csl
