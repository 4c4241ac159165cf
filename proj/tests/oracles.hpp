#pragma once

// Independent reference computations used by the tests. Nothing here calls
// into the library.

#include <boost/math/special_functions/gamma.hpp>
#include <boost/multiprecision/cpp_bin_float.hpp>

#include <cmath>
#include <functional>
#include <numbers>
#include <stdexcept>

namespace oracle {

using big = boost::multiprecision::cpp_bin_float_100;

/// E_{alpha,beta}(-x) by the power series in 100-digit arithmetic.
inline double ml_series_hp(double alpha, double beta, double x) {
  // terms peak near exp(x^{1/alpha}); beyond ~1e60 the 100 digits no longer cover the cancellation
  if (std::pow(x, 1.0 / alpha) > 130.0) throw std::domain_error("series oracle out of range");
  big sum = 0, xk = 1;
  const big bx = x, ba = alpha, bb = beta;
  for (int k = 0; k < 4000; ++k) {
    const big term = xk / boost::math::tgamma(ba * k + bb);
    sum += (k % 2 ? -term : term);
    if (k > 10 && term < 1e-60 * (abs(sum) + 1e-300)) return static_cast<double>(sum);
    xk *= bx;
  }
  throw std::domain_error("series oracle did not converge");
}

/// Bisection on a sign change of f in [a, b].
inline double bisect(const std::function<double(double)>& f, double a, double b, double tol = 1e-15) {
  double fa = f(a);
  if (fa * f(b) > 0.0) throw std::invalid_argument("no sign change");
  for (int i = 0; i < 200 && b - a > tol * std::max(1.0, std::abs(a)); ++i) {
    const double m = 0.5 * (a + b);
    const double fm = f(m);
    if ((fm < 0.0) == (fa < 0.0)) {
      a = m;
      fa = fm;
    } else {
      b = m;
    }
  }
  return 0.5 * (a + b);
}

/// Robin eigenvalues of -y'' = lambda y on [0,1] with y'(0) = h y(0), y'(1) = -H y(1).
/// Roots k of (k^2 - hH) sin k - (h + H) k cos k = 0 with lambda = k^2; valid when h, H >= 0.
inline double robin_free_eigenvalue(double h, double H, int n) {
  auto f = [=](double k) { return (k * k - h * H) * std::sin(k) - (h + H) * k * std::cos(k); };
  if (h == 0.0 && H == 0.0) return n * n * std::numbers::pi * std::numbers::pi;
  // exactly one root in (n pi, (n+1) pi) for n >= 1, and one in (0, pi) for n = 0
  const double lo = n == 0 ? 1e-9 : n * std::numbers::pi + 1e-12;
  const double hi = (n + 1) * std::numbers::pi - 1e-12;
  const double k = bisect(f, lo, hi);
  return k * k;
}

/// Composite Simpson rule on [a, b] with 2m panels.
inline double simpson(const std::function<double(double)>& f, double a, double b, int m = 2000) {
  const double h = (b - a) / (2 * m);
  double s = f(a) + f(b);
  for (int i = 1; i < 2 * m; ++i) s += (i % 2 ? 4.0 : 2.0) * f(a + i * h);
  return s * h / 3.0;
}

}  // namespace oracle
