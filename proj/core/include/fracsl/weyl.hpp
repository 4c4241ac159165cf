#pragma once

#include <complex>
#include <iosfwd>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "fracsl/potential.hpp"
#include "fracsl/sl_core.hpp"

namespace fracsl::weyl {

using cdouble = std::complex<double>;

/// Largest |lambda|^{1/2} reachable without overflowing exp(|Im sqrt(lambda)|)
/// factors in double precision.
inline constexpr double kMaxSqrtMagnitude = 40.0;

/// Relative pole guard for m_- and F denominators.
inline constexpr double kPoleGuard = 1e-10;

struct ComplexRay {
  enum class Kind { kImaginaryAxis, kSector };
  Kind kind = Kind::kImaginaryAxis;
  double angle = 0.0;  ///< arg(lambda) for kSector, radians
  std::vector<double> magnitudes;

  static ComplexRay imaginary_axis(std::vector<double> magnitudes);
  static ComplexRay sector(double angle, std::vector<double> magnitudes);
  static ComplexRay geometric(double lo, double hi, int count, double angle);

  cdouble point(std::size_t i) const;
  void validate() const;
};

/// m_-(x, lambda) = -phi'(x;lambda) / phi(x;lambda).
cdouble weyl_m_minus(const PotentialSpec& q, double h, cdouble lambda, double x);

struct ScanPoint {
  cdouble lambda;
  cdouble value;
};

void write_scan_csv(std::ostream& os, const std::vector<ScanPoint>& points);

/// Least-squares fit log|value| = log c + p log|lambda|.
struct ExponentFit {
  double exponent = 0.0;
  double coefficient = 0.0;
  double residual = 0.0;       ///< rms residual of the log-log fit
  double stated_exponent = -0.5;  ///< exponent of the form -i / sqrt(lambda)
  std::vector<ScanPoint> samples;

  std::string to_json() const;
};

ExponentFit fit_exponent(std::vector<ScanPoint> samples);

ExponentFit m_asymptotic_scan(const PotentialSpec& q, double h, double x, const ComplexRay& ray);

/// |1/m_2 - 1/m_1| along a ray.
std::vector<ScanPoint> m_difference_scan(const PotentialSpec& q1, const PotentialSpec& q2, double h, double x,
                                         const ComplexRay& ray);

/// U(x;lambda) = phi_1 phi_2' - phi_2 phi_1'.
cdouble wronskian_U(const PotentialSpec& q1, const PotentialSpec& q2, double h1, double h2, cdouble lambda,
                    double x);

/// U at every node of a common grid of `grid_size` intervals.
std::vector<cdouble> wronskian_trace(const PotentialSpec& q1, const PotentialSpec& q2, double h1, double h2,
                                     cdouble lambda, int grid_size = 0);

struct ProductSpec {
  std::vector<double> spectrum;
  int truncation = -1;  ///< number of leading entries used, -1 for all
  std::set<int> exclusion;

  int used() const;
};

/// log of prod (1 - lambda / lambda_n) over retained entries, accumulated in
/// ascending index order; the imaginary part is the unwrapped argument.
cdouble product_log(const ProductSpec& spec, cdouble lambda);
cdouble product_eval(const ProductSpec& spec, cdouble lambda);

/// log prod_{n >= first} (1 - lambda / (n^2 pi^2 + shift)): the asymptotic tail
/// of a Robin spectrum truncated before index `first`.
cdouble asymptotic_tail_log(cdouble lambda, int first, double shift);

struct HadamardReport {
  cdouble constant;
  double max_relative_deviation = 0.0;
  std::vector<ScanPoint> ratios;  ///< Delta / g_sigma
};

/// Fits Delta(lambda) = C g_sigma(lambda) over a lambda grid.
HadamardReport hadamard_check(const PotentialSpec& q, const RobinPair& robin, const sl::EigenSystem& es,
                              const std::vector<cdouble>& lambdas, bool tail_correction = true);

struct FOptions {
  double guard = kPoleGuard;
  bool removable = false;       ///< evaluate near retained eigenvalues by local interpolation
  double probe_radius = 1e-3;   ///< relative radius of the interpolation stencil
  bool tail_correction = false;  ///< multiply g_Lambda by the asymptotic tail beyond the spectrum
  double tail_shift = 0.0;
};

/// F(lambda) = U(d;lambda) / g_Lambda(lambda)^2.
std::vector<cdouble> F_eval(const PotentialSpec& q1, const PotentialSpec& q2, double h1, double h2, double d,
                            const std::vector<cdouble>& lambda_set, const ProductSpec& product,
                            const FOptions& opts = {});

struct FScan {
  std::vector<ScanPoint> points;
  double loglog_slope = 0.0;    ///< d log|F| / d log y
  double growth_exponent = 0.0;  ///< fitted C2 in log|F| = log C1 + C2 |lambda|^{1/2}
};

FScan F_scan(const PotentialSpec& q1, const PotentialSpec& q2, double h1, double h2, double d,
             const std::vector<double>& y_values, const ProductSpec& product, const FOptions& opts = {});

}  // namespace fracsl::weyl
