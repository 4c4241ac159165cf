#include "fracsl/uniqueness.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <ostream>
#include <sstream>

#include "fracsl/error.hpp"

namespace fracsl::uq {
namespace {

constexpr double kPi = std::numbers::pi;

double nearest_distance(const std::vector<double>& sorted, double v) {
  if (sorted.empty()) return std::numeric_limits<double>::infinity();
  const auto it = std::lower_bound(sorted.begin(), sorted.end(), v);
  double best = std::numeric_limits<double>::infinity();
  if (it != sorted.end()) best = std::abs(*it - v);
  if (it != sorted.begin()) best = std::min(best, std::abs(*(it - 1) - v));
  return best;
}

std::size_t upper_half_start(std::size_t n) { return n / 2; }

void check_s_grid(const std::vector<double>& s) {
  if (s.size() < 2) raise(ErrorKind::kDomain, "s_grid needs at least two points");
  for (std::size_t i = 1; i < s.size(); ++i) {
    if (!(s[i] > s[i - 1])) raise(ErrorKind::kDomain, "s_grid must be strictly increasing");
  }
}

}  // namespace

std::string to_string(SetLabel label) {
  switch (label) {
    case SetLabel::kFullSpectrum: return "full-spectrum";
    case SetLabel::kLambdaSet: return "lambda-set";
    case SetLabel::kLambdaComplement: return "lambda-complement";
    case SetLabel::kMuMinus: return "mu-minus";
    case SetLabel::kMuPlus: return "mu-plus";
  }
  return "?";
}

CountedSet::CountedSet(std::vector<double> v, SetLabel l) : values(std::move(v)), label(l) {
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!std::isfinite(values[i])) raise(ErrorKind::kDomain, "counted set entries must be finite");
    if (i > 0 && !(values[i] > values[i - 1])) raise(ErrorKind::kDomain, "counted set must be strictly increasing");
  }
}

int counting(const CountedSet& set, double s) {
  return static_cast<int>(std::upper_bound(set.values.begin(), set.values.end(), s) - set.values.begin());
}

LambdaSplit lambda_set(const sl::EigenSystem& es, double x0, double tau) {
  if (!(x0 >= 0.0 && x0 <= 1.0)) raise(ErrorKind::kDomain, "x0 must lie in [0,1]");
  if (!(tau > 0.0)) raise(ErrorKind::kDomain, "tau must be positive");
  LambdaSplit out;
  std::vector<double> in, out_of;
  for (int n = 0; n < es.size(); ++n) {
    ModeAudit a;
    a.index = n;
    a.lambda = es.lambdas[n];
    a.value_at_x0 = std::abs(es.efunc_at(n, x0));
    for (double v : es.efuncs[n]) a.sup_norm = std::max(a.sup_norm, std::abs(v));
    const double ratio = a.value_at_x0 / a.sup_norm;
    a.in_lambda = ratio > tau;
    a.near_threshold = ratio > tau / 100.0 && ratio < tau * 100.0;
    (a.in_lambda ? in : out_of).push_back(a.lambda);
    out.audit.push_back(a);
  }
  out.lambda = CountedSet(std::move(in), SetLabel::kLambdaSet);
  out.complement = CountedSet(std::move(out_of), SetLabel::kLambdaComplement);
  return out;
}

InclusionReport complement_inclusion_check(const sl::EigenSystem& es, double x0, const RobinPair& robin,
                                           const PotentialSpec& q, double tau, double match_tol) {
  InclusionReport rep;
  rep.tolerance = match_tol;
  const auto split = lambda_set(es, x0, tau);
  if (split.complement.size() == 0) return rep;
  if (!(x0 > 0.0 && x0 < 1.0)) raise(ErrorKind::kDomain, "x0 must lie in (0,1) for split spectra");
  const double top = split.complement.values.back();
  const double reach = std::max(x0, 1.0 - x0) * std::sqrt(std::max(0.0, top) + q.max_abs()) / kPi;
  const int n = static_cast<int>(std::ceil(reach)) + 3;
  sl::EigenOptions opts;
  opts.grid_size = es.grid_size;
  const auto mu = sl::split_spectra(q, x0, robin, n, opts);
  for (double lam : split.complement.values) {
    InclusionEntry e;
    e.lambda = lam;
    e.dist_minus = nearest_distance(mu.mu_minus, lam);
    e.dist_plus = nearest_distance(mu.mu_plus, lam);
    const double tol = match_tol * std::max(1.0, std::abs(lam));
    e.ok = e.dist_minus <= tol && e.dist_plus <= tol;
    rep.pass = rep.pass && e.ok;
    rep.entries.push_back(e);
  }
  return rep;
}

void CountingBoundReport::write_csv(std::ostream& os) const {
  const auto old = os.precision(17);
  os << "s,count,bound\n";
  for (const auto& r : rows) os << r.s << ',' << r.count << ',' << r.bound << '\n';
  os.precision(old);
}

CountingBoundReport counting_bound_check(const CountedSet& lambda, double x0, const std::vector<double>& s_grid) {
  if (!(x0 >= 0.0 && x0 <= 1.0)) raise(ErrorKind::kDomain, "x0 must lie in [0,1]");
  check_s_grid(s_grid);
  CountingBoundReport rep;
  rep.factor = 1.0 - std::min(1.0 - x0, x0);
  rep.pass = true;
  const std::size_t start = upper_half_start(s_grid.size());
  for (std::size_t i = 0; i < s_grid.size(); ++i) {
    BoundRow r;
    r.s = s_grid[i];
    r.count = counting(lambda, r.s);
    r.bound = rep.factor * std::sqrt(std::max(0.0, r.s)) / kPi;
    r.in_window = i >= start;
    if (r.in_window && r.count < r.bound) rep.pass = false;
    rep.rows.push_back(r);
  }
  return rep;
}

DensityReport density_criterion(const CountedSet& lambda, double A, const std::vector<double>& s_grid) {
  if (!(A > 0.0)) raise(ErrorKind::kDomain, "A must be positive");
  check_s_grid(s_grid);
  DensityReport rep;
  rep.threshold = A / kPi;
  rep.implied_d_max = A / 2.0;
  rep.estimate = std::numeric_limits<double>::infinity();
  for (std::size_t i = upper_half_start(s_grid.size()); i < s_grid.size(); ++i) {
    const double s = s_grid[i];
    if (!(s > 0.0)) raise(ErrorKind::kDomain, "s_grid window must be positive");
    rep.estimate = std::min(rep.estimate, counting(lambda, s) / std::sqrt(s));
  }
  rep.pass = rep.estimate > rep.threshold;
  return rep;
}

std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::kTheorem1CaseI: return "theorem1-case-i";
    case Verdict::kTheorem1CaseII: return "theorem1-case-ii";
    case Verdict::kTheorem2Conditional: return "theorem2-conditional";
    case Verdict::kUnknown: return "unknown";
  }
  return "?";
}

RegionVerdict classify_region(double d, double x0, const std::optional<Certificate>& cert) {
  if (!(d > 0.0 && d < 1.0)) raise(ErrorKind::kDomain, "d must lie in (0,1)");
  if (!(x0 >= 0.0 && x0 <= 1.0)) raise(ErrorKind::kDomain, "x0 must lie in [0,1]");
  RegionVerdict v;
  v.d = d;
  v.x0 = x0;
  if (d <= x0) {
    v.verdict = Verdict::kTheorem1CaseI;
    v.note = "0 < d <= x0 <= 1";
    return v;
  }
  if (d < 0.5 && x0 < std::min(d, 1.0 - 2.0 * d)) {
    v.verdict = Verdict::kTheorem1CaseII;
    v.note = "0 <= x0 < min{d, 1-2d}, d < 1/2";
    return v;
  }
  const bool window = (1.0 - 2.0 * d) < x0 && x0 < d && d > 1.0 / 3.0 && d < 0.5;
  if (!window) {
    v.note = "outside both theorems";
    return v;
  }
  std::ostringstream os;
  if (!cert) {
    os << "1-2d < x0 < d with 1/3 < d < 1/2; needs a certificate A >= 2d, B >= 1/2 - d";
  } else {
    const bool a_ok = cert->A >= 2.0 * d;
    const bool b_ok = cert->B >= 0.5 - d;
    const bool b_weak = cert->B >= -0.25 - d;
    os << "A=" << cert->A << (a_ok ? " >= " : " < ") << "2d=" << 2.0 * d << "; B=" << cert->B
       << (b_ok ? " >= " : " < ") << "1/2-d=" << 0.5 - d << " (stated variant B >= -1/4-d "
       << (b_weak ? "holds" : "fails") << ")";
    if (a_ok && b_ok) v.verdict = Verdict::kTheorem2Conditional;
  }
  v.note = os.str();
  return v;
}

void RegionMap::write_csv(std::ostream& os) const {
  const auto old = os.precision(17);
  os << "d,x0,verdict\n";
  for (const auto& c : cells) os << c.d << ',' << c.x0 << ',' << to_string(c.verdict) << '\n';
  os.precision(old);
}

RegionMap region_map(int resolution, const std::optional<Certificate>& cert) {
  if (resolution < 10) raise(ErrorKind::kDomain, "resolution must be at least 10");
  RegionMap map;
  map.resolution = resolution;
  map.cells.reserve(static_cast<std::size_t>(resolution) * resolution);
  for (int i = 0; i < resolution; ++i) {
    const double d = (i + 0.5) / resolution;
    for (int j = 0; j < resolution; ++j) {
      const double x0 = (j + 0.5) / resolution;
      map.cells.push_back(classify_region(d, x0, cert));
    }
  }
  return map;
}

}  // namespace fracsl::uq
