#include "fracsl/forward.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <numbers>
#include <ostream>
#include <sstream>

#include "fracsl/error.hpp"
#include "fracsl/mittleff.hpp"

namespace fracsl::fwd {
namespace {

constexpr double kPi = std::numbers::pi;

void check_alpha(double alpha) {
  if (!(alpha > 0.0 && alpha <= 1.0)) raise(ErrorKind::kDomain, "alpha must lie in (0,1]");
}

void check_time_grid(const std::vector<double>& t, double t_end) {
  if (t.empty()) raise(ErrorKind::kIncompatibleGrids, "empty time grid");
  if (t.front() < 0.0) raise(ErrorKind::kIncompatibleGrids, "time grid starts before 0");
  for (std::size_t i = 1; i < t.size(); ++i) {
    if (!(t[i] > t[i - 1])) raise(ErrorKind::kIncompatibleGrids, "time grid must be strictly increasing");
  }
  if (t.back() > t_end * (1.0 + 1e-12)) {
    std::ostringstream os;
    os << "time grid reaches " << t.back() << " beyond drive support " << t_end;
    raise(ErrorKind::kIncompatibleGrids, os.str());
  }
}

// Positions of the t_grid points as integer multiples of the drive step, if
// every point lands on a drive node.
bool lag_indices(const std::vector<double>& t, double dt, std::vector<int>& idx) {
  if (dt <= 0.0) return false;
  idx.resize(t.size());
  for (std::size_t i = 0; i < t.size(); ++i) {
    const double r = t[i] / dt;
    const double k = std::round(r);
    if (std::abs(r - k) > 1e-9 * std::max(1.0, r)) return false;
    idx[i] = static_cast<int>(k);
  }
  return true;
}

double lambda_floor(int n, double qmax) {
  const double m = (n - 1) * kPi;
  return m * m - qmax;
}

// Sums term(lambda_floor(n)) over n >= first, with an integral estimate of the
// remainder beyond a fixed cutoff. `decay` is the power of 1/lambda at which
// the terms ultimately fall off.
template <class Term>
double tail_sum(int first, double qmax, int decay, Term term) {
  constexpr int kTerms = 200000;
  double s = 0.0;
  const int last = first + kTerms;
  for (int n = first; n < last; ++n) {
    const double lam = lambda_floor(n, qmax);
    if (!(lam > 0.0)) return std::numeric_limits<double>::infinity();
    s += term(lam);
  }
  const double lam = lambda_floor(last, qmax);
  // term(l) ~ term(lam) (lam/l)^decay with l ~ (n pi)^2
  const double m = static_cast<double>(last - 1);
  s += 2.0 * term(lam) * m / (2.0 * decay - 1.0);
  return s;
}

double integrated_relaxation_bound(double alpha, double lam, double T) {
  if (alpha >= 1.0) return std::min(T, 1.0 / lam);
  return std::min(T, std::tgamma(1.0 + alpha) * std::pow(T, 1.0 - alpha) / ((1.0 - alpha) * lam));
}

double green_shifted(const sl::EigenSystem& es, double x, double c) {
  const double delta = sl::char_delta(es.q, es.robin, -c, es.grid_size);
  if (std::abs(delta) < 1e-300) raise(ErrorKind::kNearZeroDenominator, "shift hits an eigenvalue");
  double phi = 1.0;
  if (x > 0.0) phi = sl::phi_at(es.q, es.robin.h, sl::cdouble(-c, 0.0), std::min(x, 1.0)).first.real();
  return phi / -delta;
}

double effective_shift(const sl::EigenSystem& es, double c) {
  if (!(c > 0.0)) raise(ErrorKind::kDomain, "shift must be positive");
  return es.lambdas.front() + c > 0.0 ? c : c - es.lambdas.front();
}

// Eigenvalues of admissible problems are nonnegative; the solver can return
// a zero mode as a tiny negative number.
double mode_lambda(const sl::EigenSystem& es, int n) {
  const double lam = es.lambdas[n];
  if (lam < 0.0 && lam > -1e-9) return 0.0;
  return lam;
}

int resolve_modes(const sl::EigenSystem& es, int requested) {
  const int n = requested < 0 ? es.size() : requested;
  if (n < 1 || n > es.size()) {
    std::ostringstream os;
    os << "requested " << n << " modes, eigen system has " << es.size();
    raise(ErrorKind::kTruncationTooCoarse, os.str());
  }
  return n;
}

}  // namespace

DriveSignal::DriveSignal(std::vector<double> t, std::vector<double> values, std::string description)
    : t_(std::move(t)), values_(std::move(values)), description_(std::move(description)) {
  if (t_.size() < 2) raise(ErrorKind::kDomain, "drive needs at least two samples");
  if (t_.size() != values_.size()) raise(ErrorKind::kDomain, "drive time and value arrays differ in length");
  if (t_.front() != 0.0) raise(ErrorKind::kDomain, "drive time grid must start at 0");
  for (std::size_t i = 1; i < t_.size(); ++i) {
    if (!(t_[i] > t_[i - 1])) raise(ErrorKind::kDomain, "drive time grid must be strictly increasing");
  }
  for (double v : values_) {
    if (!std::isfinite(v)) raise(ErrorKind::kDomain, "drive values must be finite");
  }
  if (values_.front() != 0.0) raise(ErrorKind::kDomain, "drive must vanish at t=0");
}

DriveSignal DriveSignal::sampled(const std::function<double(double)>& f, double T, int n, std::string description) {
  if (!(T > 0.0) || n < 1) raise(ErrorKind::kDomain, "need T > 0 and n >= 1");
  std::vector<double> t(static_cast<std::size_t>(n) + 1), v(t.size());
  for (int i = 0; i <= n; ++i) {
    t[i] = T * i / n;
    v[i] = f(t[i]);
  }
  v[0] = f(0.0);
  return DriveSignal(std::move(t), std::move(v), std::move(description));
}

double DriveSignal::operator()(double t) const {
  if (t <= 0.0) return values_.front();
  if (t >= t_.back()) return values_.back();
  const auto it = std::upper_bound(t_.begin(), t_.end(), t);
  const std::size_t j = static_cast<std::size_t>(it - t_.begin());
  const double w = (t - t_[j - 1]) / (t_[j] - t_[j - 1]);
  return (1.0 - w) * values_[j - 1] + w * values_[j];
}

double DriveSignal::max_abs() const noexcept {
  double m = 0.0;
  for (double v : values_) m = std::max(m, std::abs(v));
  return m;
}

double DriveSignal::max_slope() const noexcept {
  double m = 0.0;
  for (std::size_t i = 1; i < t_.size(); ++i) {
    m = std::max(m, std::abs(values_[i] - values_[i - 1]) / (t_[i] - t_[i - 1]));
  }
  return m;
}

double DriveSignal::uniform_step() const noexcept {
  const double dt = t_.back() / intervals();
  for (std::size_t i = 1; i < t_.size(); ++i) {
    if (std::abs(t_[i] - dt * i) > 1e-12 * t_.back()) return 0.0;
  }
  return dt;
}

DriveSignal DriveSignal::truncated(double t_cut) const {
  std::vector<double> v = values_;
  for (std::size_t i = 0; i < t_.size(); ++i) {
    if (t_[i] > t_cut) v[i] = 0.0;
  }
  return DriveSignal(t_, std::move(v), description_ + " (truncated)");
}

DriveSignal DriveSignal::scaled(double factor) const {
  std::vector<double> v = values_;
  for (double& x : v) x *= factor;
  return DriveSignal(t_, std::move(v), description_);
}

void DriveSignal::write_csv(std::ostream& os) const {
  const auto old = os.precision(17);
  os << "t,eta\n";
  for (std::size_t i = 0; i < t_.size(); ++i) os << t_[i] << ',' << values_[i] << '\n';
  os.precision(old);
}

DriveSignal DriveSignal::read_csv(std::istream& is, std::string description) {
  std::string line;
  if (!std::getline(is, line)) raise(ErrorKind::kEmptyData, "drive CSV is empty");
  std::vector<double> t, v;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) raise(ErrorKind::kDomain, "malformed drive CSV row: " + line);
    t.push_back(std::stod(line.substr(0, comma)));
    v.push_back(std::stod(line.substr(comma + 1)));
  }
  return DriveSignal(std::move(t), std::move(v), std::move(description));
}

std::string to_string(Method m) { return m == Method::kSpectral ? "spectral" : "l1fd"; }

std::vector<double> SpaceTimeField::row(std::size_t i) const {
  return std::vector<double>(values.begin() + static_cast<std::ptrdiff_t>(i * t.size()),
                             values.begin() + static_cast<std::ptrdiff_t>((i + 1) * t.size()));
}

double SpaceTimeField::max_abs() const noexcept {
  double m = 0.0;
  for (double v : values) m = std::max(m, std::abs(v));
  return m;
}

void SpaceTimeField::write_csv(std::ostream& os) const {
  const auto old = os.precision(17);
  const std::string name = to_string(method);
  os << "x,t,u,method\n";
  for (std::size_t i = 0; i < x.size(); ++i) {
    for (std::size_t j = 0; j < t.size(); ++j) os << x[i] << ',' << t[j] << ',' << at(i, j) << ',' << name << '\n';
  }
  os.precision(old);
}

double quasi_static_remainder(const sl::EigenSystem& es, int n_modes, double x, double c) {
  double partial = 0.0;
  for (int n = 0; n < n_modes; ++n) {
    partial += es.efunc_at(n, x) * es.efuncs[n].back() / (es.lambdas[n] + c);
  }
  return green_shifted(es, x, c) - partial;
}

SpaceTimeField solve_spectral(const sl::EigenSystem& es, double alpha, const DriveSignal& eta,
                              const std::vector<double>& x_points, const std::vector<double>& t_grid,
                              const SpectralOptions& opts) {
  check_alpha(alpha);
  check_time_grid(t_grid, eta.end_time());
  for (double x : x_points) {
    if (!(x >= 0.0 && x <= 1.0)) raise(ErrorKind::kDomain, "x points must lie in [0,1]");
  }
  const int modes = resolve_modes(es, opts.n_modes);

  SpaceTimeField out;
  out.x = x_points;
  out.t = t_grid;
  out.values.assign(x_points.size() * t_grid.size(), 0.0);
  out.method = Method::kSpectral;
  out.n_modes = modes;
  const double eta_max = eta.max_abs();
  if (eta_max == 0.0) return out;

  const double c = effective_shift(es, opts.shift);
  const double qmax = es.q.max_abs();
  const double T = t_grid.back();
  if (opts.tail_correction) {
    const double L = eta.max_slope();
    out.tail_bound = tail_sum(modes, qmax, 2, [&](double lam) {
      return 2.0 * (L * integrated_relaxation_bound(alpha, lam, T) / lam + eta_max * c / (lam * (lam + c)));
    });
  } else {
    out.tail_bound = tail_sum(modes, qmax, 1, [&](double lam) {
      return 2.0 * eta_max * std::min(std::pow(T, alpha) / std::tgamma(1.0 + alpha), 1.0 / lam);
    });
  }
  const double tol = opts.tail_tolerance >= 0.0 ? opts.tail_tolerance : 1e-2 * eta_max;
  if (!(out.tail_bound <= tol)) {
    std::ostringstream os;
    os << "mode truncation bound " << out.tail_bound << " exceeds tolerance " << tol << " with " << modes
       << " modes";
    raise(ErrorKind::kTruncationTooCoarse, os.str());
  }

  const auto& tau = eta.t();
  const auto& ev = eta.values();
  const int nd = eta.intervals();
  std::vector<double> slope(static_cast<std::size_t>(nd));
  for (int j = 0; j < nd; ++j) slope[j] = (ev[j + 1] - ev[j]) / (tau[j + 1] - tau[j]);

  std::vector<int> idx;
  const bool lagged = lag_indices(t_grid, eta.uniform_step(), idx);
  const int max_lag = lagged ? *std::max_element(idx.begin(), idx.end()) : 0;
  const double dt = eta.uniform_step();

  std::vector<double> conv(t_grid.size());
  std::vector<double> diff(static_cast<std::size_t>(max_lag) + 1);
  for (int n = 0; n < modes; ++n) {
    const double lam = mode_lambda(es, n);
    if (lagged) {
      // diff[k] = P2(k dt) - P2((k-1) dt)
      double prev = 0.0;
      for (int k = 1; k <= max_lag; ++k) {
        const double cur = ml::relax_primitive2(alpha, lam, k * dt);
        diff[k] = cur - prev;
        prev = cur;
      }
      for (std::size_t i = 0; i < t_grid.size(); ++i) {
        double s = 0.0;
        for (int j = 0; j < idx[i]; ++j) s += slope[j] * diff[idx[i] - j];
        conv[i] = s;
      }
    } else {
      for (std::size_t i = 0; i < t_grid.size(); ++i) {
        const double t = t_grid[i];
        double s = 0.0;
        for (int j = 0; j < nd && tau[j] < t; ++j) {
          const double hi = std::min(tau[j + 1], t);
          s += slope[j] * (ml::relax_primitive2(alpha, lam, t - tau[j]) - ml::relax_primitive2(alpha, lam, t - hi));
        }
        conv[i] = s;
      }
    }
    const double e1 = es.efuncs[n].back();
    for (std::size_t p = 0; p < x_points.size(); ++p) {
      const double w = es.efunc_at(n, x_points[p]) * e1;
      for (std::size_t i = 0; i < t_grid.size(); ++i) out.at(p, i) += w * conv[i];
    }
  }

  if (opts.tail_correction) {
    for (std::size_t p = 0; p < x_points.size(); ++p) {
      const double r = quasi_static_remainder(es, modes, x_points[p], c);
      for (std::size_t i = 0; i < t_grid.size(); ++i) out.at(p, i) += r * eta(t_grid[i]);
    }
  }
  for (double v : out.values) {
    if (!std::isfinite(v)) raise(ErrorKind::kNonFiniteBlowup, "spectral solution is not finite");
  }
  return out;
}

KernelTrace kernel_K(const sl::EigenSystem& es, double alpha, double x, const std::vector<double>& t_grid,
                     int n_modes, const KernelOptions& opts) {
  check_alpha(alpha);
  check_time_grid(t_grid, std::numeric_limits<double>::infinity());
  if (!(x >= 0.0 && x <= 1.0)) raise(ErrorKind::kDomain, "x must lie in [0,1]");
  const int modes = resolve_modes(es, n_modes);

  KernelTrace kt;
  kt.x = x;
  kt.t = t_grid;
  kt.values.assign(t_grid.size(), 0.0);
  kt.primitive.assign(t_grid.size(), 0.0);
  kt.n_modes = modes;

  for (int n = 0; n < modes; ++n) {
    const double lam = mode_lambda(es, n);
    const double w = es.efunc_at(n, x) * es.efuncs[n].back();
    for (std::size_t i = 0; i < t_grid.size(); ++i) {
      kt.values[i] += w * ml::relax_primitive(alpha, lam, t_grid[i]);
      kt.primitive[i] += w * ml::relax_primitive2(alpha, lam, t_grid[i]);
    }
  }

  const double c = effective_shift(es, opts.shift);
  const double qmax = es.q.max_abs();
  double t_min = 0.0;
  for (double t : t_grid) {
    if (t > 0.0) {
      t_min = t;
      break;
    }
  }
  if (opts.tail_correction) {
    const double r = quasi_static_remainder(es, modes, x, c);
    for (std::size_t i = 0; i < t_grid.size(); ++i) {
      if (t_grid[i] > 0.0) {
        kt.values[i] += r;
        kt.primitive[i] += r * t_grid[i];
      }
    }
    const double g = std::tgamma(1.0 + alpha);
    kt.tail_bound = t_min == 0.0 ? 0.0 : tail_sum(modes, qmax, 2, [&](double lam) {
      const double relax = alpha >= 1.0 ? std::exp(-lam * t_min) : std::min(1.0, g / (lam * std::pow(t_min, alpha)));
      return 2.0 * (relax / lam + c / (lam * (lam + c)));
    });
  } else {
    const double T = t_grid.back();
    kt.tail_bound = tail_sum(modes, qmax, 1, [&](double lam) {
      return 2.0 * std::min(std::pow(T, alpha) / std::tgamma(1.0 + alpha), 1.0 / lam);
    });
  }
  if (opts.tail_tolerance >= 0.0 && !(kt.tail_bound <= opts.tail_tolerance)) {
    std::ostringstream os;
    os << "kernel truncation bound " << kt.tail_bound << " exceeds tolerance " << opts.tail_tolerance;
    raise(ErrorKind::kTruncationTooCoarse, os.str());
  }
  return kt;
}

double duhamel_residual(const SpaceTimeField& field, const KernelTrace& kernel, const DriveSignal& eta) {
  if (field.method != Method::kSpectral) raise(ErrorKind::kIncompatibleGrids, "Duhamel check needs a spectral field");
  if (field.x.empty()) raise(ErrorKind::kIncompatibleGrids, "field has no x points");
  const auto& t = field.t;
  if (t.size() != kernel.t.size()) raise(ErrorKind::kIncompatibleGrids, "field and kernel time grids differ");
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (std::abs(t[i] - kernel.t[i]) > 1e-12 * std::max(1.0, std::abs(t[i]))) {
      raise(ErrorKind::kIncompatibleGrids, "field and kernel time grids differ");
    }
  }
  std::size_t p = field.x.size();
  for (std::size_t i = 0; i < field.x.size(); ++i) {
    if (std::abs(field.x[i] - kernel.x) < 1e-12) {
      p = i;
      break;
    }
  }
  if (p == field.x.size()) raise(ErrorKind::kIncompatibleGrids, "kernel x is not a field x point");
  if (t.front() != 0.0 || t.size() < 2) raise(ErrorKind::kIncompatibleGrids, "time grid must start at 0");
  const double dt = (t.back() - t.front()) / static_cast<double>(t.size() - 1);
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (std::abs(t[i] - dt * static_cast<double>(i)) > 1e-9 * dt) {
      raise(ErrorKind::kIncompatibleGrids, "Duhamel check needs a uniform time grid");
    }
  }

  // Both sides by the trapezoid rule in time: the left from u, the right from
  // the sampled kernel. The two use different Mittag-Leffler primitives.
  std::vector<double> eta_t(t.size());
  for (std::size_t j = 0; j < t.size(); ++j) eta_t[j] = eta(t[j]);
  const auto& K = kernel.values;
  double worst = 0.0;
  double lhs = 0.0;
  for (std::size_t i = 1; i < t.size(); ++i) {
    lhs += 0.5 * dt * (field.at(p, i - 1) + field.at(p, i));
    double rhs = 0.5 * (K[0] * eta_t[i] + K[i] * eta_t[0]);
    for (std::size_t j = 1; j < i; ++j) rhs += K[j] * eta_t[i - j];
    worst = std::max(worst, std::abs(lhs - dt * rhs));
  }
  return worst;
}

SpaceTimeField solve_l1_fd(const PotentialSpec& q, const RobinPair& robin, double alpha, const DriveSignal& eta,
                           int nx, int nt) {
  check_alpha(alpha);
  if (nx < 32 || nt < 32) raise(ErrorKind::kDomain, "need nx >= 32 and nt >= 32");
  const double T = eta.end_time();
  const double dx = 1.0 / nx;
  const double tau = T / nt;
  const auto w = ml::l1_weights(alpha, tau, nt);
  const auto& b = w.weights;
  const double inv_dx2 = 1.0 / (dx * dx);
  const std::size_t nn = static_cast<std::size_t>(nx) + 1;

  // Tridiagonal operator b0 I - D2 - q with ghost-node Robin rows.
  std::vector<double> lo(nn, 0.0), di(nn, 0.0), up(nn, 0.0);
  for (std::size_t i = 0; i < nn; ++i) {
    di[i] = b[0] + 2.0 * inv_dx2 - q(static_cast<double>(i) * dx);
    if (i > 0) lo[i] = -inv_dx2;
    if (i + 1 < nn) up[i] = -inv_dx2;
  }
  up[0] = -2.0 * inv_dx2;
  di[0] += 2.0 * robin.h * dx * inv_dx2;
  lo[nn - 1] = -2.0 * inv_dx2;
  di[nn - 1] += 2.0 * robin.H * dx * inv_dx2;

  // Thomas factorisation, reused every step.
  std::vector<double> cp(nn), dp(nn);
  {
    double piv = di[0];
    if (!(std::abs(piv) > 1e-300) || !std::isfinite(piv)) raise(ErrorKind::kLinearSolveFailure, "zero pivot");
    cp[0] = up[0] / piv;
    dp[0] = piv;
    for (std::size_t i = 1; i < nn; ++i) {
      piv = di[i] - lo[i] * cp[i - 1];
      if (!(std::abs(piv) > 1e-300) || !std::isfinite(piv)) raise(ErrorKind::kLinearSolveFailure, "zero pivot");
      dp[i] = piv;
      cp[i] = up[i] / piv;
    }
  }

  SpaceTimeField out;
  out.method = Method::kL1Fd;
  out.nx = nx;
  out.nt = nt;
  out.x.resize(nn);
  for (std::size_t i = 0; i < nn; ++i) out.x[i] = static_cast<double>(i) * dx;
  out.t.resize(static_cast<std::size_t>(nt) + 1);
  for (int k = 0; k <= nt; ++k) out.t[k] = k * tau;
  out.values.assign(nn * out.t.size(), 0.0);
  if (eta.max_abs() == 0.0) return out;

  // increments[k] = u^{k+1} - u^k
  std::vector<std::vector<double>> increments;
  increments.reserve(static_cast<std::size_t>(nt));
  std::vector<double> prev(nn, 0.0), rhs(nn), sol(nn);
  for (int k = 1; k <= nt; ++k) {
    for (std::size_t i = 0; i < nn; ++i) rhs[i] = b[0] * prev[i];
    for (int j = 1; j < k; ++j) {
      const auto& inc = increments[static_cast<std::size_t>(k - j - 1)];
      const double bj = b[j];
      for (std::size_t i = 0; i < nn; ++i) rhs[i] -= bj * inc[i];
    }
    rhs[nn - 1] += 2.0 * eta(out.t[k]) * dx * inv_dx2;
    // forward sweep then back substitution
    sol[0] = rhs[0] / dp[0];
    for (std::size_t i = 1; i < nn; ++i) sol[i] = (rhs[i] - lo[i] * sol[i - 1]) / dp[i];
    for (std::size_t i = nn - 1; i-- > 0;) sol[i] -= cp[i] * sol[i + 1];
    std::vector<double> inc(nn);
    for (std::size_t i = 0; i < nn; ++i) {
      if (!std::isfinite(sol[i])) raise(ErrorKind::kLinearSolveFailure, "non-finite solution in tridiagonal solve");
      inc[i] = sol[i] - prev[i];
      out.at(i, static_cast<std::size_t>(k)) = sol[i];
    }
    increments.push_back(std::move(inc));
    prev = sol;
  }
  return out;
}

}  // namespace fracsl::fwd
