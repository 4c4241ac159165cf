#include "fracsl/weyl.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "fracsl/error.hpp"

namespace fracsl::weyl {
namespace {

constexpr double kPi = std::numbers::pi;

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double rms = 0.0;
};

LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
  const std::size_t n = x.size();
  if (n < 3) raise(ErrorKind::kFitFailure, "need at least three samples");
  double sx = 0, sy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (!std::isfinite(x[i]) || !std::isfinite(y[i])) raise(ErrorKind::kFitFailure, "non-finite sample");
    sx += x[i];
    sy += y[i];
  }
  const double mx = sx / n, my = sy / n;
  double sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (!(sxx > 1e-300)) raise(ErrorKind::kFitFailure, "degenerate abscissae");
  LineFit f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  double sse = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double e = y[i] - f.intercept - f.slope * x[i];
    sse += e * e;
  }
  f.rms = std::sqrt(sse / n);
  return f;
}

void check_match(const PotentialSpec& q1, const PotentialSpec& q2, double d) {
  if (!(d > 0.0 && d < 1.0)) raise(ErrorKind::kDomain, "d must lie in (0,1)");
  const double gap = max_difference_on(q1, q2, d, 1.0);
  if (gap > 1e-12) {
    std::ostringstream os;
    os << "potentials differ by " << gap << " on [d,1]";
    raise(ErrorKind::kDomain, os.str());
  }
}

}  // namespace

ComplexRay ComplexRay::imaginary_axis(std::vector<double> magnitudes) {
  ComplexRay r;
  r.kind = Kind::kImaginaryAxis;
  r.angle = kPi / 2.0;
  r.magnitudes = std::move(magnitudes);
  r.validate();
  return r;
}

ComplexRay ComplexRay::sector(double angle, std::vector<double> magnitudes) {
  ComplexRay r;
  r.kind = Kind::kSector;
  r.angle = angle;
  r.magnitudes = std::move(magnitudes);
  r.validate();
  return r;
}

ComplexRay ComplexRay::geometric(double lo, double hi, int count, double angle) {
  if (!(lo > 0.0 && hi > lo) || count < 2) raise(ErrorKind::kDomain, "need 0 < lo < hi and count >= 2");
  std::vector<double> m(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) m[i] = lo * std::pow(hi / lo, static_cast<double>(i) / (count - 1));
  m.back() = hi;
  if (angle == kPi / 2.0) return imaginary_axis(std::move(m));
  return sector(angle, std::move(m));
}

cdouble ComplexRay::point(std::size_t i) const {
  const double a = kind == Kind::kImaginaryAxis ? kPi / 2.0 : angle;
  return std::polar(magnitudes.at(i), a);
}

void ComplexRay::validate() const {
  if (magnitudes.empty()) raise(ErrorKind::kDomain, "ray has no sample magnitudes");
  for (std::size_t i = 0; i < magnitudes.size(); ++i) {
    if (!(magnitudes[i] > 0.0)) raise(ErrorKind::kDomain, "ray magnitudes must be positive");
    if (i > 0 && !(magnitudes[i] > magnitudes[i - 1])) raise(ErrorKind::kDomain, "ray magnitudes must increase");
  }
  if (std::sqrt(magnitudes.back()) > kMaxSqrtMagnitude) {
    raise(ErrorKind::kDomain, "ray leaves the overflow-safe window |lambda|^{1/2} <= 40");
  }
}

cdouble weyl_m_minus(const PotentialSpec& q, double h, cdouble lambda, double x) {
  const auto [phi, dphi] = sl::phi_at(q, h, lambda, x);
  const double scale = std::abs(phi) + std::abs(dphi) / std::max(1.0, std::sqrt(std::abs(lambda)));
  if (std::abs(phi) <= kPoleGuard * scale) {
    std::ostringstream os;
    os << "|phi(" << x << ")| = " << std::abs(phi) << " at lambda=" << lambda;
    raise(ErrorKind::kNearPole, os.str());
  }
  return -dphi / phi;
}

void write_scan_csv(std::ostream& os, const std::vector<ScanPoint>& points) {
  const auto old = os.precision(17);
  os << "re_lambda,im_lambda,re_value,im_value,magnitude\n";
  for (const auto& p : points) {
    os << p.lambda.real() << ',' << p.lambda.imag() << ',' << p.value.real() << ',' << p.value.imag() << ','
       << std::abs(p.value) << '\n';
  }
  os.precision(old);
}

std::string ExponentFit::to_json() const {
  nlohmann::json j;
  j["exponent"] = exponent;
  j["coefficient"] = coefficient;
  j["residual"] = residual;
  j["stated_exponent"] = stated_exponent;
  return j.dump();
}

ExponentFit fit_exponent(std::vector<ScanPoint> samples) {
  std::vector<double> lx, ly;
  for (const auto& s : samples) {
    const double mag = std::abs(s.value);
    if (!(mag > 0.0)) raise(ErrorKind::kFitFailure, "zero magnitude in scan");
    lx.push_back(std::log(std::abs(s.lambda)));
    ly.push_back(std::log(mag));
  }
  const LineFit f = fit_line(lx, ly);
  ExponentFit out;
  out.exponent = f.slope;
  out.coefficient = std::exp(f.intercept);
  out.residual = f.rms;
  out.samples = std::move(samples);
  return out;
}

ExponentFit m_asymptotic_scan(const PotentialSpec& q, double h, double x, const ComplexRay& ray) {
  ray.validate();
  std::vector<ScanPoint> pts;
  for (std::size_t i = 0; i < ray.magnitudes.size(); ++i) {
    const cdouble lam = ray.point(i);
    pts.push_back({lam, weyl_m_minus(q, h, lam, x)});
  }
  return fit_exponent(std::move(pts));
}

std::vector<ScanPoint> m_difference_scan(const PotentialSpec& q1, const PotentialSpec& q2, double h, double x,
                                         const ComplexRay& ray) {
  ray.validate();
  std::vector<ScanPoint> pts;
  for (std::size_t i = 0; i < ray.magnitudes.size(); ++i) {
    const cdouble lam = ray.point(i);
    const cdouble m1 = weyl_m_minus(q1, h, lam, x);
    const cdouble m2 = weyl_m_minus(q2, h, lam, x);
    pts.push_back({lam, 1.0 / m2 - 1.0 / m1});
  }
  return pts;
}

cdouble wronskian_U(const PotentialSpec& q1, const PotentialSpec& q2, double h1, double h2, cdouble lambda,
                    double x) {
  if (x == 0.0) return cdouble(h2 - h1);
  const auto [p1, d1] = sl::phi_at(q1, h1, lambda, x);
  const auto [p2, d2] = sl::phi_at(q2, h2, lambda, x);
  return p1 * d2 - p2 * d1;
}

std::vector<cdouble> wronskian_trace(const PotentialSpec& q1, const PotentialSpec& q2, double h1, double h2,
                                     cdouble lambda, int grid_size) {
  const int n = grid_size > 0 ? grid_size : std::max(q1.grid_size(), q2.grid_size());
  const auto a = sl::solve_ivp_left(q1, h1, lambda, n);
  const auto b = sl::solve_ivp_left(q2, h2, lambda, n);
  std::vector<cdouble> u(a.values.size());
  for (std::size_t i = 0; i < u.size(); ++i) u[i] = a.values[i] * b.derivs[i] - b.values[i] * a.derivs[i];
  return u;
}

int ProductSpec::used() const {
  const int n = static_cast<int>(spectrum.size());
  if (truncation < 0) return n;
  if (truncation > n) raise(ErrorKind::kDomain, "truncation exceeds spectrum length");
  return truncation;
}

cdouble product_log(const ProductSpec& spec, cdouble lambda) {
  const int n = spec.used();
  cdouble acc = 0.0;
  for (int i = 0; i < n; ++i) {
    if (spec.exclusion.count(i)) continue;
    const double ln = spec.spectrum[i];
    if (ln == 0.0) {
      std::ostringstream os;
      os << "retained eigenvalue " << i << " is zero";
      raise(ErrorKind::kZeroEigenvalue, os.str());
    }
    acc += std::log(1.0 - lambda / ln);
  }
  return acc;
}

cdouble product_eval(const ProductSpec& spec, cdouble lambda) {
  if (lambda == 0.0) {
    product_log(spec, lambda);  // still validates the spectrum
    return 1.0;
  }
  return std::exp(product_log(spec, lambda));
}

cdouble asymptotic_tail_log(cdouble lambda, int first, double shift) {
  constexpr int kTerms = 100000;
  cdouble acc = 0.0;
  const int last = first + kTerms;
  for (int n = first; n < last; ++n) {
    const double ln = static_cast<double>(n) * n * kPi * kPi + shift;
    if (!(ln > 0.0)) raise(ErrorKind::kZeroEigenvalue, "asymptotic tail eigenvalue is not positive");
    acc += std::log(1.0 - lambda / ln);
  }
  // sum_{n >= last} 1/(n^2 pi^2) ~ 1/(pi^2 (last - 1/2))
  acc -= lambda / (kPi * kPi * (last - 0.5));
  return acc;
}

HadamardReport hadamard_check(const PotentialSpec& q, const RobinPair& robin, const sl::EigenSystem& es,
                              const std::vector<cdouble>& lambdas, bool tail_correction) {
  if (lambdas.empty()) raise(ErrorKind::kEmptyData, "no lambda points");
  ProductSpec spec;
  spec.spectrum = es.lambdas;
  const int n = es.size();
  const double shift = es.lambdas.back() - (n - 1.0) * (n - 1.0) * kPi * kPi;
  std::vector<cdouble> g(lambdas.size()), delta(lambdas.size());
  for (std::size_t i = 0; i < lambdas.size(); ++i) {
    cdouble lg = product_log(spec, lambdas[i]);
    if (tail_correction) lg += asymptotic_tail_log(lambdas[i], n, shift);
    g[i] = std::exp(lg);
    delta[i] = sl::char_delta(q, robin, lambdas[i]);
  }
  cdouble num = 0.0;
  double den = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    num += std::conj(g[i]) * delta[i];
    den += std::norm(g[i]);
  }
  if (!(den > 0.0)) raise(ErrorKind::kFitFailure, "product vanishes on every lambda point");
  HadamardReport rep;
  rep.constant = num / den;
  for (std::size_t i = 0; i < g.size(); ++i) {
    const cdouble ratio = delta[i] / g[i];
    rep.ratios.push_back({lambdas[i], ratio});
    rep.max_relative_deviation = std::max(rep.max_relative_deviation, std::abs(ratio / rep.constant - 1.0));
  }
  return rep;
}

namespace {

cdouble F_direct(const PotentialSpec& q1, const PotentialSpec& q2, double h1, double h2, double d, cdouble lambda,
                 const ProductSpec& product, const FOptions& opts) {
  cdouble lg = product_log(product, lambda);
  if (opts.tail_correction) lg += asymptotic_tail_log(lambda, product.used(), opts.tail_shift);
  const cdouble u = wronskian_U(q1, q2, h1, h2, lambda, d);
  // U / g^2 in log form keeps large |lambda| in range
  if (u == 0.0) return 0.0;
  return std::exp(std::log(u) - 2.0 * lg);
}

}  // namespace

std::vector<cdouble> F_eval(const PotentialSpec& q1, const PotentialSpec& q2, double h1, double h2, double d,
                            const std::vector<cdouble>& lambda_set, const ProductSpec& product,
                            const FOptions& opts) {
  check_match(q1, q2, d);
  const int n = product.used();
  std::vector<cdouble> out;
  out.reserve(lambda_set.size());
  const double near_rel = std::sqrt(opts.guard);
  for (const cdouble lam : lambda_set) {
    int near = -1;
    for (int i = 0; i < n; ++i) {
      if (product.exclusion.count(i)) continue;
      const double ln = product.spectrum[i];
      if (std::abs(lam - ln) <= near_rel * (1.0 + std::abs(ln))) {
        near = i;
        break;
      }
    }
    if (near < 0) {
      out.push_back(F_direct(q1, q2, h1, h2, d, lam, product, opts));
      continue;
    }
    if (!opts.removable) {
      std::ostringstream os;
      os << "lambda=" << lam << " is within the guard of retained eigenvalue " << product.spectrum[near];
      raise(ErrorKind::kNearZeroDenominator, os.str());
    }
    // Cubic interpolation through four points on a circle around the eigenvalue.
    const double ln = product.spectrum[near];
    const double r = opts.probe_radius * (1.0 + std::abs(ln));
    const cdouble nodes[4] = {ln + r, ln + cdouble(0, r), ln - r, ln - cdouble(0, r)};
    cdouble vals[4];
    for (int k = 0; k < 4; ++k) vals[k] = F_direct(q1, q2, h1, h2, d, nodes[k], product, opts);
    cdouble f = 0.0;
    for (int k = 0; k < 4; ++k) {
      cdouble w = 1.0;
      for (int m = 0; m < 4; ++m) {
        if (m != k) w *= (lam - nodes[m]) / (nodes[k] - nodes[m]);
      }
      f += w * vals[k];
    }
    out.push_back(f);
  }
  return out;
}

FScan F_scan(const PotentialSpec& q1, const PotentialSpec& q2, double h1, double h2, double d,
             const std::vector<double>& y_values, const ProductSpec& product, const FOptions& opts) {
  const auto ray = ComplexRay::imaginary_axis(y_values);
  std::vector<cdouble> lams;
  for (std::size_t i = 0; i < y_values.size(); ++i) lams.push_back(ray.point(i));
  const auto vals = F_eval(q1, q2, h1, h2, d, lams, product, opts);
  FScan scan;
  std::vector<double> ly, ry, lf;
  for (std::size_t i = 0; i < lams.size(); ++i) {
    scan.points.push_back({lams[i], vals[i]});
    const double mag = std::abs(vals[i]);
    if (!(mag > 0.0)) raise(ErrorKind::kFitFailure, "F vanishes on the scan; no decay trend to fit");
    ly.push_back(std::log(y_values[i]));
    ry.push_back(std::sqrt(y_values[i]));
    lf.push_back(std::log(mag));
  }
  scan.loglog_slope = fit_line(ly, lf).slope;
  scan.growth_exponent = fit_line(ry, lf).slope;
  return scan;
}

}  // namespace fracsl::weyl
