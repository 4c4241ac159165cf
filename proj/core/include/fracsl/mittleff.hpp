#pragma once

#include <span>
#include <vector>

namespace fracsl::ml {

/// Upper end of the power-series window for E_{alpha,beta}(-x). The series is
/// used only while exp(x^{1/alpha}) stays small, so cancellation between
/// alternating terms remains bounded.
double series_limit(double alpha);

/// Lower end of the algebraic asymptotic window.
inline constexpr double kAsymptoticStart = 50.0;

/// E_{alpha,beta}(z) for alpha in (0,1], beta > 0, z <= 0.
double ml(double alpha, double beta, double z);

// Individual branches, exposed for overlap checks.
double ml_series(double alpha, double beta, double z);
double ml_integral(double alpha, double beta, double z);
double ml_asymptotic(double alpha, double beta, double z);

/// Same as ml, but the integral window is served from a cached piecewise
/// Chebyshev table built once per (alpha, beta).
double ml_tabulated(double alpha, double beta, double z);

/// 1 / Gamma(x), zero at the poles of Gamma.
double rgamma(double x);

/// |E_{alpha,1}(-lambda t^alpha) - 1/(Gamma(1-alpha) lambda t^alpha)| (lambda t^alpha)^2
std::vector<double> ml_asymptotic_residual(double alpha, double lambda, std::span<const double> t_values);

/// int_0^t s^{alpha-1} E_{alpha,alpha}(-lambda s^alpha) ds.
double relax_primitive(double alpha, double lambda, double t);

/// int_0^t relax_primitive(alpha, lambda, s) ds.
double relax_primitive2(double alpha, double lambda, double t);

/// |int_0^inf exp(-zeta t) E_{alpha,1}(-lambda t^alpha) dt - zeta^{alpha-1}/(zeta^alpha + lambda)|
double ml_laplace_residual(double alpha, double lambda, double zeta, double tol = 1e-10);

struct L1Weights {
  double alpha = 0.5;
  double tau = 1.0;
  std::vector<double> weights;

  int count() const noexcept { return static_cast<int>(weights.size()); }
};

/// b_j = ((j+1)^{1-alpha} - j^{1-alpha}) tau^{-alpha} / Gamma(2-alpha), j = 0..count-1.
L1Weights l1_weights(double alpha, double tau, int count);

}  // namespace fracsl::ml
