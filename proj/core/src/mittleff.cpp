#include "fracsl/mittleff.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <sstream>

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <boost/math/special_functions/sin_pi.hpp>

#include "fracsl/error.hpp"

namespace fracsl::ml {
namespace {

constexpr double kPi = std::numbers::pi;

void check_domain(double alpha, double beta, double z) {
  if (!(alpha > 0.0 && alpha <= 1.0)) raise(ErrorKind::kDomain, "alpha must lie in (0,1]");
  if (!(beta > 0.0) || !std::isfinite(beta)) raise(ErrorKind::kDomain, "beta must be positive");
  if (!(z <= 0.0) || !std::isfinite(z)) raise(ErrorKind::kDomain, "argument must be finite and nonpositive");
}

bool is_integer(double v) { return v == std::round(v); }

// Neumaier compensated accumulator.
struct CompensatedSum {
  double sum = 0.0;
  double carry = 0.0;
  void add(double v) {
    const double t = sum + v;
    if (std::abs(sum) >= std::abs(v)) {
      carry += (sum - t) + v;
    } else {
      carry += (v - t) + sum;
    }
    sum = t;
  }
  double value() const { return sum + carry; }
};

// Spectral density of t^{beta-1} E_{alpha,beta}(-t^alpha), valid for beta < 1 + alpha.
double spectral_density(double alpha, double beta, double r) {
  const double ra = std::pow(r, alpha);
  const double num = ra * boost::math::sin_pi(beta) + boost::math::sin_pi(beta - alpha);
  const double den = ra * ra + 2.0 * ra * std::cos(kPi * alpha) + 1.0;
  return std::pow(r, alpha - beta) * num / (den * kPi);
}

double integral_branch(double alpha, double beta, double x) {
  if (beta > 1.0 + 1e-12) {
    // E_{a,b}(z) = (E_{a,b-a}(z) - 1/Gamma(b-a)) / z; the density below needs
    // beta < 1 + alpha and converges slowly near that limit, so reduce to beta <= 1.
    return (rgamma(beta - alpha) - integral_branch(alpha, beta - alpha, x)) / x;
  }
  const double t = std::pow(x, 1.0 / alpha);
  const double r_peak = alpha > 0.5 ? std::pow(-std::cos(kPi * alpha), 1.0 / alpha) : 1.0;
  const double u_split = r_peak * t;
  auto f = [&](double u) {
    if (u <= 0.0) return 0.0;
    return std::exp(-u) * spectral_density(alpha, beta, u / t);
  };
  thread_local boost::math::quadrature::tanh_sinh<double> ts(15);
  thread_local boost::math::quadrature::exp_sinh<double> es(9);
  double err1 = 0.0, err2 = 0.0, l1 = 0.0;
  const double near = ts.integrate(f, 0.0, u_split, 1e-14, &err1, &l1);
  const double far = es.integrate(f, u_split, std::numeric_limits<double>::infinity(), 1e-14, &err2);
  return std::pow(t, -beta) * (near + far);
}

// Piecewise Chebyshev interpolant of y -> E_{alpha,beta}(-y) on the integral
// window, built by bisection until the trailing coefficients are negligible.
class MiddleTable {
 public:
  MiddleTable(double alpha, double beta) : alpha_(alpha), beta_(beta) {
    build(series_limit(alpha), kAsymptoticStart, 0);
  }

  double operator()(double y) const {
    auto it = std::upper_bound(breaks_.begin(), breaks_.end(), y);
    std::size_t i = it == breaks_.begin() ? 0 : static_cast<std::size_t>(it - breaks_.begin()) - 1;
    if (i >= pieces_.size()) i = pieces_.size() - 1;
    const Piece& p = pieces_[i];
    const double s = (2.0 * y - p.a - p.b) / (p.b - p.a);
    // Clenshaw
    double b1 = 0.0, b2 = 0.0;
    for (std::size_t k = p.c.size() - 1; k > 0; --k) {
      const double b0 = 2.0 * s * b1 - b2 + p.c[k];
      b2 = b1;
      b1 = b0;
    }
    return s * b1 - b2 + p.c[0];
  }

 private:
  static constexpr int kNodes = 32;
  struct Piece {
    double a, b;
    std::vector<double> c;
  };

  void build(double a, double b, int depth) {
    std::vector<double> f(kNodes);
    double scale = 0.0;
    for (int j = 0; j < kNodes; ++j) {
      const double s = std::cos(kPi * (j + 0.5) / kNodes);
      f[j] = integral_branch(alpha_, beta_, 0.5 * (a + b) + 0.5 * (b - a) * s);
      scale = std::max(scale, std::abs(f[j]));
    }
    std::vector<double> c(kNodes);
    for (int k = 0; k < kNodes; ++k) {
      double acc = 0.0;
      for (int j = 0; j < kNodes; ++j) acc += f[j] * std::cos(kPi * k * (j + 0.5) / kNodes);
      c[k] = acc * (k == 0 ? 1.0 : 2.0) / kNodes;
    }
    const double tail = std::abs(c[kNodes - 1]) + std::abs(c[kNodes - 2]) + std::abs(c[kNodes - 3]);
    if (tail > 5e-14 * scale && depth < 8) {
      const double mid = 0.5 * (a + b);
      build(a, mid, depth + 1);
      build(mid, b, depth + 1);
      return;
    }
    breaks_.push_back(a);
    pieces_.push_back(Piece{a, b, std::move(c)});
  }

  double alpha_, beta_;
  std::vector<double> breaks_;
  std::vector<Piece> pieces_;
};

const MiddleTable& middle_table(double alpha, double beta) {
  static std::mutex mu;
  static std::map<std::pair<double, double>, std::unique_ptr<MiddleTable>> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto& slot = cache[{alpha, beta}];
  if (!slot) slot = std::make_unique<MiddleTable>(alpha, beta);
  return *slot;
}

}  // namespace

double rgamma(double x) {
  if (x <= 0.0 && is_integer(x)) return 0.0;
  if (x > 0.0) {
    if (x > 170.0) return std::exp(-std::lgamma(x));
    return 1.0 / std::tgamma(x);
  }
  // reflection: 1/Gamma(x) = Gamma(1-x) sin(pi x) / pi
  const double s = boost::math::sin_pi(x);
  if (1.0 - x < 170.0) return std::tgamma(1.0 - x) * s / kPi;
  return std::exp(std::lgamma(1.0 - x)) * s / kPi;
}

double series_limit(double alpha) { return std::min(5.0, std::pow(4.0, alpha)); }

double ml_series(double alpha, double beta, double z) {
  check_domain(alpha, beta, z);
  const double x = -z;
  if (x == 0.0) return rgamma(beta);
  const double lx = std::log(x);
  CompensatedSum acc;
  double prev_mag = 0.0;
  for (int k = 0; k < 20000; ++k) {
    const double lmag = k * lx - std::lgamma(alpha * k + beta);
    const double mag = std::exp(lmag);
    acc.add((k % 2 == 0) ? mag : -mag);
    if (k > 2 && mag < prev_mag && mag <= 1e-17 * std::abs(acc.value())) break;
    if (k > 2 && mag == 0.0) break;
    prev_mag = mag;
  }
  return acc.value();
}

double ml_tabulated(double alpha, double beta, double z) {
  check_domain(alpha, beta, z);
  const double x = -z;
  // below alpha = 0.2 the quadrature is too slow and noisy to tabulate
  if (alpha < 0.2 || alpha == 1.0 || x <= series_limit(alpha) || x >= kAsymptoticStart) return ml(alpha, beta, z);
  return middle_table(alpha, beta)(x);
}

double ml_asymptotic(double alpha, double beta, double z) {
  check_domain(alpha, beta, z);
  const double x = -z;
  if (x <= 0.0) raise(ErrorKind::kDomain, "asymptotic branch needs a negative argument");
  const double lx = std::log(x);
  CompensatedSum acc;
  double prev_mag = std::numeric_limits<double>::infinity();
  for (int k = 1; k < 2000; ++k) {
    const double arg = beta - alpha * k;
    double term = 0.0;
    if (!(arg <= 0.0 && is_integer(arg))) {
      if (arg > 0.0) {
        term = rgamma(arg) * std::exp(-k * lx);
      } else {
        term = std::exp(std::lgamma(1.0 - arg) - k * lx) * boost::math::sin_pi(arg) / kPi;
      }
    }
    if (k % 2 == 0) term = -term;
    const double mag = std::abs(term);
    if (mag != 0.0 && mag > prev_mag && k > 3) break;  // asymptotic series starts diverging
    acc.add(term);
    if (mag != 0.0) {
      if (mag <= 1e-17 * std::abs(acc.value())) break;
      prev_mag = mag;
    }
  }
  return acc.value();
}

double ml_integral(double alpha, double beta, double z) {
  check_domain(alpha, beta, z);
  if (alpha >= 1.0) raise(ErrorKind::kDomain, "integral branch requires alpha < 1");
  const double x = -z;
  if (x <= 0.0) raise(ErrorKind::kDomain, "integral branch needs a negative argument");
  return integral_branch(alpha, beta, x);
}

double ml(double alpha, double beta, double z) {
  check_domain(alpha, beta, z);
  const double x = -z;
  if (x == 0.0) return rgamma(beta);
  if (alpha == 1.0) {
    if (beta == 1.0) return std::exp(z);
    if (x <= series_limit(alpha) || !is_integer(beta)) return ml_series(alpha, beta, z);
    // E_{1,m}(z) = (E_{1,m-1}(z) - 1/(m-2)!) / z
    double e = std::exp(z);
    for (int m = 2; m <= static_cast<int>(beta); ++m) e = (e - rgamma(m - 1.0)) / z;
    return e;
  }
  if (x <= series_limit(alpha)) return ml_series(alpha, beta, z);
  if (x >= kAsymptoticStart) return ml_asymptotic(alpha, beta, z);
  return integral_branch(alpha, beta, x);
}

std::vector<double> ml_asymptotic_residual(double alpha, double lambda, std::span<const double> t_values) {
  if (!(lambda > 0.0)) raise(ErrorKind::kDomain, "lambda must be positive");
  std::vector<double> out;
  out.reserve(t_values.size());
  double prev = 0.0;
  for (double t : t_values) {
    if (t < 1.0 || t < prev) raise(ErrorKind::kDomain, "t values must be increasing and >= 1");
    prev = t;
    const double y = lambda * std::pow(t, alpha);
    const double e = ml(alpha, 1.0, -y);
    out.push_back(std::abs(e - rgamma(1.0 - alpha) / y) * y * y);
  }
  return out;
}

double relax_primitive(double alpha, double lambda, double t) {
  if (!(t >= 0.0)) raise(ErrorKind::kDomain, "t must be nonnegative");
  if (!(lambda >= 0.0)) raise(ErrorKind::kDomain, "lambda must be nonnegative");
  if (t == 0.0) return 0.0;
  const double ta = std::pow(t, alpha);
  return ta * ml_tabulated(alpha, alpha + 1.0, -lambda * ta);
}

double relax_primitive2(double alpha, double lambda, double t) {
  if (!(t >= 0.0)) raise(ErrorKind::kDomain, "t must be nonnegative");
  if (!(lambda >= 0.0)) raise(ErrorKind::kDomain, "lambda must be nonnegative");
  if (t == 0.0) return 0.0;
  const double ta = std::pow(t, alpha);
  return t * ta * ml_tabulated(alpha, alpha + 2.0, -lambda * ta);
}

double ml_laplace_residual(double alpha, double lambda, double zeta, double tol) {
  if (!(zeta > 0.0)) raise(ErrorKind::kDomain, "zeta must be positive");
  if (!(lambda > 0.0)) raise(ErrorKind::kDomain, "lambda must be positive");
  check_domain(alpha, 1.0, 0.0);
  // Truncate at T where the tail bound Gamma(1+alpha) e^{-zeta T} / (zeta lambda T^alpha)
  // drops below a hundredth of the tolerance.
  auto tail_bound = [&](double T) {
    if (alpha == 1.0) return std::exp(-(zeta + lambda) * T) / (zeta + lambda);
    return std::tgamma(1.0 + alpha) * std::exp(-zeta * T) / (zeta * lambda * std::pow(T, alpha));
  };
  double T = 1.0 / zeta;
  while (tail_bound(T) > 1e-2 * tol) {
    T *= 1.5;
    if (T > 1e8) raise(ErrorKind::kQuadratureNonConvergence, "tail bound cannot reach tolerance");
  }
  auto f = [&](double t) {
    if (t <= 0.0) return 1.0;
    return std::exp(-zeta * t) * ml(alpha, 1.0, -lambda * std::pow(t, alpha));
  };
  boost::math::quadrature::tanh_sinh<double> ts(12);
  double err = 0.0, l1 = 0.0;
  // split at the unit scale of the relaxation so both pieces are resolved
  const double knee = std::min(T, std::pow(1.0 / lambda, 1.0 / alpha));
  double value = ts.integrate(f, 0.0, knee, 1e-12, &err, &l1);
  double err2 = 0.0;
  if (T > knee) value += ts.integrate(f, knee, T, 1e-12, &err2, &l1);
  if (err + err2 > tol) {
    std::ostringstream os;
    os << "quadrature error estimate " << err + err2 << " exceeds " << tol;
    raise(ErrorKind::kQuadratureNonConvergence, os.str());
  }
  const double exact = std::pow(zeta, alpha - 1.0) / (std::pow(zeta, alpha) + lambda);
  return std::abs(value - exact);
}

L1Weights l1_weights(double alpha, double tau, int count) {
  if (!(alpha > 0.0 && alpha <= 1.0)) raise(ErrorKind::kDomain, "alpha must lie in (0,1]");
  if (!(tau > 0.0)) raise(ErrorKind::kDomain, "tau must be positive");
  if (count < 1) raise(ErrorKind::kDomain, "count must be at least 1");
  L1Weights w;
  w.alpha = alpha;
  w.tau = tau;
  w.weights.resize(static_cast<std::size_t>(count));
  const double scale = std::pow(tau, -alpha) / std::tgamma(2.0 - alpha);
  const double p = 1.0 - alpha;
  auto pw = [p](int j) { return j == 0 ? 0.0 : std::pow(static_cast<double>(j), p); };
  for (int j = 0; j < count; ++j) w.weights[j] = (pw(j + 1) - pw(j)) * scale;
  return w;
}

}  // namespace fracsl::ml
