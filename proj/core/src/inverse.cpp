#include "fracsl/inverse.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <ostream>
#include <random>
#include <sstream>

#include <Eigen/Dense>
#include <json.hpp>

#include "fracsl/error.hpp"
#include "fracsl/uniqueness.hpp"

namespace fracsl::inv {
namespace {

constexpr double kPi = std::numbers::pi;
using nlohmann::json;

double sq_norm(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return s;
}

double interp_uniform(const std::vector<double>& grid_values, double step, double t) {
  const int n = static_cast<int>(grid_values.size()) - 1;
  const double pos = std::clamp(t / step, 0.0, static_cast<double>(n));
  const int i = std::min(static_cast<int>(pos), n - 1);
  const double w = pos - i;
  return (1.0 - w) * grid_values[i] + w * grid_values[i + 1];
}

// Parameter vector layout: coefficients first, then h when it is estimated.
struct Layout {
  int m = 0;
  bool with_h = true;
  double fixed_h = 0.0;

  int size() const { return m + (with_h ? 1 : 0); }

  CandidateParam unpack(const Eigen::VectorXd& p) const {
    CandidateParam c;
    c.coeffs.assign(p.data(), p.data() + m);
    c.h = with_h ? p[m] : fixed_h;
    return c;
  }

  Eigen::VectorXd pack(const CandidateParam& c) const {
    Eigen::VectorXd p(size());
    for (int i = 0; i < m; ++i) p[i] = c.coeffs[i];
    if (with_h) p[m] = c.h;
    return p;
  }

  void project(Eigen::VectorXd& p) const {
    if (with_h) p[m] = std::max(0.0, p[m]);
  }
};

struct Evaluation {
  std::vector<double> model;
  double data_sq = 0.0;  ///< sum (u - data)^2
  double penalized = 0.0;
};

Evaluation evaluate(const Layout& lay, const Eigen::VectorXd& p, const InverseProblemSpec& spec, double gamma,
                    const ReconstructOptions& opt) {
  Evaluation e;
  const CandidateParam c = lay.unpack(p);
  e.model = predict(c, spec, opt.model, opt.project_q);
  for (std::size_t k = 0; k < e.model.size(); ++k) {
    const double r = e.model[k] - spec.data.u[k];
    e.data_sq += r * r;
  }
  e.penalized = e.data_sq + gamma * sq_norm(c.coeffs);
  return e;
}

struct GaussNewtonRun {
  Eigen::VectorXd p;
  std::vector<double> history;
  int iterations = 0;
  double gamma = 0.0;
  double data_sq = 0.0;
  std::string termination;
  std::vector<std::string> warnings;
};

GaussNewtonRun gauss_newton(const Layout& lay, Eigen::VectorXd p, const InverseProblemSpec& spec, double gamma,
                            const ReconstructOptions& opt, int max_iterations) {
  GaussNewtonRun run;
  run.gamma = gamma;
  const int P = lay.size();
  const int K = static_cast<int>(spec.data.u.size());
  lay.project(p);
  Evaluation cur = evaluate(lay, p, spec, gamma, opt);
  run.history.push_back(cur.penalized);
  if (P == 0) {
    run.p = p;
    run.data_sq = cur.data_sq;
    run.termination = "no free parameters";
    return run;
  }

  double mu = -1.0;
  for (int it = 0;; ++it) {
    if (it >= max_iterations) {
      run.termination = "iteration limit";
      break;
    }
    // residual vector and Jacobian: data rows, then sqrt(gamma) * coeff rows
    const int rows = K + lay.m;
    Eigen::VectorXd r(rows);
    for (int k = 0; k < K; ++k) r[k] = cur.model[k] - spec.data.u[k];
    const double sg = std::sqrt(run.gamma);
    for (int i = 0; i < lay.m; ++i) r[K + i] = sg * p[i];

    Eigen::MatrixXd J = Eigen::MatrixXd::Zero(rows, P);
    const auto base = opt.project_q ? predict(lay.unpack(p), spec, opt.model, false) : cur.model;
    for (int j = 0; j < P; ++j) {
      Eigen::VectorXd pj = p;
      const double step = opt.jacobian_step * std::max(1.0, std::abs(p[j]));
      pj[j] += step;
      // the clipped model has one-sided kinks wherever q touches 0, so
      // differentiate the smooth extension
      const auto u = predict(lay.unpack(pj), spec, opt.model, false);
      for (int k = 0; k < K; ++k) J(k, j) = (u[k] - base[k]) / step;
      if (j < lay.m) J(K + j, j) = sg;
    }

    const Eigen::VectorXd grad = J.transpose() * r;
    if (grad.norm() < opt.gradient_tol) {
      run.termination = "gradient norm below tolerance";
      break;
    }

    Eigen::JacobiSVD<Eigen::MatrixXd> svd(J);
    const auto& sv = svd.singularValues();
    const double cond = sv[sv.size() - 1] > 0.0 ? sv[0] / sv[sv.size() - 1] : std::numeric_limits<double>::infinity();
    if (cond > opt.rank_condition_limit) {
      std::ostringstream os;
      os << "JacobianRankDeficient: condition " << cond << " at iteration " << it << ", gamma raised to "
         << std::max(run.gamma * 10.0, 1e-12);
      run.warnings.push_back(os.str());
      run.gamma = std::max(run.gamma * 10.0, 1e-12);
      cur.penalized = cur.data_sq + run.gamma * sq_norm(lay.unpack(p).coeffs);
      continue;
    }
    // Levenberg damping: solve [J; sqrt(mu) I] delta = -[r; 0]; mu shrinks
    // after a full accepted step and grows whenever halving was needed.
    auto damped_step = [&](double mu_value) {
      Eigen::MatrixXd A(rows + P, P);
      A.topRows(rows) = J;
      A.bottomRows(P) = std::sqrt(mu_value) * Eigen::MatrixXd::Identity(P, P);
      Eigen::VectorXd b = Eigen::VectorXd::Zero(rows + P);
      b.head(rows) = -r;
      return Eigen::VectorXd(A.colPivHouseholderQr().solve(b));
    };
    if (mu < 0.0) mu = 1e-3 * sv[0] * sv[0];
    Eigen::VectorXd delta = damped_step(mu);

    double t = 1.0;
    bool accepted = false;
    Eigen::VectorXd p_new;
    Evaluation next;
    for (int trial = 0; trial < 10; ++trial) {
      p_new = p + t * delta;
      lay.project(p_new);
      next = evaluate(lay, p_new, spec, run.gamma, opt);
      if (next.penalized < cur.penalized) {
        accepted = true;
        break;
      }
      if (trial % 2 == 0) {
        mu *= 4.0;
        delta = damped_step(mu);
      } else {
        t *= 0.5;
      }
    }
    if (accepted && t == 1.0) mu = std::max(mu / 3.0, 1e-14 * sv[0] * sv[0]);
    const double rel_full = delta.norm() / (1.0 + p.norm());
    if (!accepted) {
      // A linearised decrease below 1e-6 of the misfit is under the
      // resolution of the difference Jacobian: the floor. A sizeable
      // predicted gain that still fails ten trials means divergence.
      const double predicted = r.squaredNorm() - (r + J * delta).squaredNorm();
      if (predicted <= 1e-6 * cur.penalized || rel_full < 1e-6) {
        run.termination = "line search stalled at the misfit floor";
        break;
      }
      // With q clipped to <= 0 the Jacobian of the smooth extension
      // overpredicts; failure there is a stall on the constraint.
      double clip_gap = 0.0;
      if (opt.project_q) {
        for (int k = 0; k < K; ++k) clip_gap = std::max(clip_gap, std::abs(base[k] - cur.model[k]));
      }
      if (clip_gap > 0.0) {
        run.termination = "line search stalled at the admissibility boundary";
        break;
      }
      std::ostringstream os;
      os << "misfit increased on 10 consecutive trials at iteration " << it;
      raise(ErrorKind::kDivergenceDetected, os.str());
    }
    const double rel_step = (p_new - p).norm() / (1.0 + p.norm());
    p = p_new;
    cur = next;
    run.history.push_back(cur.penalized);
    run.iterations = it + 1;
    if (rel_step < opt.step_tol) {
      run.termination = "relative step below tolerance";
      break;
    }
  }
  run.p = p;
  run.data_sq = cur.data_sq;
  return run;
}

}  // namespace

void DataSeries::write_csv(std::ostream& os) const {
  const auto old = os.precision(17);
  os << "t,u\n";
  for (std::size_t i = 0; i < t.size(); ++i) os << t[i] << ',' << u[i] << '\n';
  os.precision(old);
}

void InverseProblemSpec::validate() const {
  if (!(alpha > 0.0 && alpha <= 1.0)) raise(ErrorKind::kDomain, "alpha must lie in (0,1]");
  if (!(d > 0.0 && d < 1.0)) raise(ErrorKind::kDomain, "d must lie in (0,1)");
  if (!(x0 >= 0.0 && x0 <= 1.0)) raise(ErrorKind::kDomain, "x0 must lie in [0,1]");
  if (!(H >= 0.0)) raise(ErrorKind::kDomain, "H must be nonnegative");
  if (q_tail.grid_size() < 1) raise(ErrorKind::kDomain, "q_tail is empty");
  if (data.t.size() != data.u.size() || data.t.empty()) raise(ErrorKind::kEmptyData, "data series is empty or ragged");
  for (double t : data.t) {
    if (t < 0.0 || t > eta.end_time() * (1 + 1e-12)) raise(ErrorKind::kIncompatibleGrids, "data time outside drive");
  }
}

std::string InverseProblemSpec::to_json() const {
  json j;
  j["alpha"] = alpha;
  j["x0"] = x0;
  j["d"] = d;
  j["H"] = H;
  j["noise_level"] = noise_level;
  j["q_tail"] = json::parse(q_tail.to_json());
  j["eta"] = {{"t", eta.t()}, {"values", eta.values()}, {"description", eta.description()}};
  j["data"] = {{"t", data.t}, {"u", data.u}};
  return j.dump();
}

InverseProblemSpec InverseProblemSpec::from_json(const std::string& text) {
  const json j = json::parse(text);
  InverseProblemSpec s;
  s.alpha = j.at("alpha").get<double>();
  s.x0 = j.at("x0").get<double>();
  s.d = j.at("d").get<double>();
  s.H = j.at("H").get<double>();
  s.noise_level = j.value("noise_level", 0.0);
  s.q_tail = PotentialSpec::from_json(j.at("q_tail").dump());
  const auto& e = j.at("eta");
  s.eta = fwd::DriveSignal(e.at("t").get<std::vector<double>>(), e.at("values").get<std::vector<double>>(),
                           e.value("description", std::string{}));
  s.data.t = j.at("data").at("t").get<std::vector<double>>();
  s.data.u = j.at("data").at("u").get<std::vector<double>>();
  s.validate();
  return s;
}

PotentialSpec candidate_potential(const CandidateParam& c, const InverseProblemSpec& spec, int grid_size,
                                  bool project) {
  if (static_cast<int>(c.coeffs.size()) > kMaxBasisDim) raise(ErrorKind::kDomain, "basis dimension exceeds 16");
  const double d = spec.d;
  const double anchor = spec.q_tail(d);
  return PotentialSpec::sampled(
      [&](double x) {
        double v = spec.q_tail(x);
        if (x < d) {
          v = anchor;
          for (std::size_t m = 1; m <= c.coeffs.size(); ++m) {
            v += c.coeffs[m - 1] * (std::cos(m * kPi * (d - x) / (2.0 * d)) - 1.0);
          }
        }
        return project ? std::min(v, 0.0) : v;
      },
      grid_size);
}

std::vector<double> predict(const CandidateParam& c, const InverseProblemSpec& spec, const ModelSettings& model,
                            bool project) {
  const PotentialSpec q = candidate_potential(c, spec, model.grid_size, project);
  sl::EigenOptions eo;
  eo.allow_inadmissible = !project;
  const auto es = sl::eigen_system(q, RobinPair{c.h, spec.H}, model.n_modes - 1, eo);
  const auto& t = spec.data.t;
  if (std::is_sorted(t.begin(), t.end()) && std::adjacent_find(t.begin(), t.end()) == t.end()) {
    return fwd::solve_spectral(es, spec.alpha, spec.eta, {spec.x0}, t).row(0);
  }
  // the solver wants a strictly increasing grid; data may come in any order
  std::vector<double> grid = t;
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
  const auto row = fwd::solve_spectral(es, spec.alpha, spec.eta, {spec.x0}, grid).row(0);
  std::vector<double> out(t.size());
  for (std::size_t k = 0; k < t.size(); ++k) {
    out[k] = row[static_cast<std::size_t>(std::lower_bound(grid.begin(), grid.end(), t[k]) - grid.begin())];
  }
  return out;
}

std::vector<double> fd_trace(const PotentialSpec& q, const RobinPair& robin, double alpha, const fwd::DriveSignal& eta,
                             double x0, const std::vector<double>& t_samples, const FdSettings& fd) {
  if (!(x0 >= 0.0 && x0 <= 1.0)) raise(ErrorKind::kDomain, "x0 must lie in [0,1]");
  const auto field = fwd::solve_l1_fd(q, robin, alpha, eta, fd.nx, fd.nt);
  const double pos = x0 * fd.nx;
  const int i = std::min(static_cast<int>(pos), fd.nx - 1);
  const double w = pos - i;
  std::vector<double> at_x(field.t.size());
  for (std::size_t k = 0; k < field.t.size(); ++k) at_x[k] = (1.0 - w) * field.at(i, k) + w * field.at(i + 1, k);
  const double tau = eta.end_time() / fd.nt;
  std::vector<double> out;
  out.reserve(t_samples.size());
  for (double t : t_samples) {
    if (t < 0.0 || t > eta.end_time() * (1 + 1e-12)) raise(ErrorKind::kIncompatibleGrids, "sample time outside drive");
    out.push_back(interp_uniform(at_x, tau, t));
  }
  return out;
}

DataSeries synthesize_data(const PotentialSpec& q_true, double h_true, double H, double alpha,
                           const fwd::DriveSignal& eta, double x0, const std::vector<double>& t_samples,
                           double noise_level, std::uint64_t rng_seed, const FdSettings& fd) {
  if (!q_true.admissible() || h_true < 0.0 || H < 0.0) raise(ErrorKind::kDomain, "truth must be admissible");
  if (!(noise_level >= 0.0)) raise(ErrorKind::kDomain, "noise level must be nonnegative");
  DataSeries ds;
  ds.t = t_samples;
  ds.u = fd_trace(q_true, RobinPair{h_true, H}, alpha, eta, x0, t_samples, fd);
  if (noise_level > 0.0 && !ds.u.empty()) {
    const double sigma = noise_level * std::sqrt(sq_norm(ds.u) / static_cast<double>(ds.u.size()));
    std::mt19937_64 rng(rng_seed);
    std::normal_distribution<double> normal(0.0, sigma);
    for (double& v : ds.u) v += normal(rng);
  }
  return ds;
}

double misfit(const CandidateParam& c, const InverseProblemSpec& spec, double gamma, const ModelSettings& model,
              bool project) {
  if (!(gamma >= 0.0)) raise(ErrorKind::kDomain, "gamma must be nonnegative");
  const auto u = predict(c, spec, model, project);
  double s = 0.0;
  for (std::size_t k = 0; k < u.size(); ++k) {
    const double r = u[k] - spec.data.u[k];
    s += r * r;
  }
  return s + gamma * sq_norm(c.coeffs);
}

double relative_l2_on(const PotentialSpec& q_hat, const PotentialSpec& q_true, double d) {
  constexpr int kSamples = 2000;
  double num = 0.0, den = 0.0;
  for (int i = 0; i <= kSamples; ++i) {
    const double x = d * i / kSamples;
    const double w = (i == 0 || i == kSamples) ? 0.5 : 1.0;
    const double e = q_hat(x) - q_true(x);
    num += w * e * e;
    den += w * q_true(x) * q_true(x);
  }
  if (!(den > 0.0)) return std::sqrt(num * d / kSamples);
  return std::sqrt(num / den);
}

ReconstructionResult reconstruct(const InverseProblemSpec& spec, const CandidateParam& init,
                                 const ReconstructOptions& options) {
  spec.validate();
  if (options.basis_dim < 0 || options.basis_dim > kMaxBasisDim) raise(ErrorKind::kDomain, "basis_dim must lie in [0,16]");
  Layout lay;
  lay.m = options.basis_dim;
  lay.with_h = options.estimate_h;
  lay.fixed_h = init.h;
  CandidateParam start = init;
  start.coeffs.resize(static_cast<std::size_t>(lay.m), 0.0);
  Eigen::VectorXd p = lay.pack(start);

  ReconstructionResult res;
  res.basis_dim = lay.m;
  const auto region = uq::classify_region(spec.d, spec.x0);
  if (region.verdict == uq::Verdict::kUnknown) {
    std::ostringstream os;
    os << "(d, x0) = (" << spec.d << ", " << spec.x0 << ") lies outside the proven uniqueness region; "
       << region.note;
    res.warnings.push_back(os.str());
  }
  GaussNewtonRun run;
  if (options.discrepancy_principle && spec.noise_level > 0.0) {
    const double target = options.discrepancy_factor * spec.noise_level * std::sqrt(sq_norm(spec.data.u));
    for (double gamma = 1e-2;; gamma *= 0.1) {
      run = gauss_newton(lay, p, spec, gamma, options, std::min(options.max_iterations, 20));
      p = run.p;
      if (std::sqrt(run.data_sq) <= target || gamma < 1e-11) break;
    }
    std::ostringstream os;
    os << "gamma chosen by discrepancy principle, data residual " << std::sqrt(run.data_sq) << " vs target "
       << target;
    res.warnings.push_back(os.str());
  } else {
    run = gauss_newton(lay, p, spec, options.gamma, options, options.max_iterations);
  }
  res.param = lay.unpack(run.p);
  res.h_hat = res.param.h;
  res.q_hat = candidate_potential(res.param, spec, kDefaultGridSize, options.project_q);
  res.misfit_history = run.history;
  res.gamma = run.gamma;
  res.iterations = run.iterations;
  res.termination = run.termination;
  res.warnings.insert(res.warnings.end(), run.warnings.begin(), run.warnings.end());
  if (options.truth) {
    ErrorMetrics m;
    m.rel_L2_q = relative_l2_on(res.q_hat, options.truth->q, spec.d);
    m.abs_err_h = std::abs(res.h_hat - options.truth->h);
    res.metrics = m;
  }
  return res;
}

std::string ReconstructionResult::to_json() const {
  json j;
  j["q_hat"] = json::parse(q_hat.to_json());
  j["h_hat"] = h_hat;
  j["coeffs"] = param.coeffs;
  j["misfit_history"] = misfit_history;
  j["regularization"] = {{"gamma", gamma}, {"basis_dim", basis_dim}};
  j["iterations"] = iterations;
  j["termination"] = termination;
  j["warnings"] = warnings;
  if (metrics) j["error_metrics"] = {{"rel_L2_q", metrics->rel_L2_q}, {"abs_err_h", metrics->abs_err_h}};
  return j.dump();
}

std::vector<GapRow> distinguishability_scan(const std::vector<std::pair<Truth, Truth>>& pairs, double d, double H,
                                            double x0, double alpha, const fwd::DriveSignal& eta,
                                            const std::vector<double>& t_samples, const ModelSettings& model,
                                            const FdSettings& fd) {
  auto spectral_trace = [&](const Truth& tr) {
    const auto es = sl::eigen_system(tr.q, RobinPair{tr.h, H}, model.n_modes - 1);
    return fwd::solve_spectral(es, alpha, eta, {x0}, t_samples).row(0);
  };
  std::vector<GapRow> rows;
  for (const auto& [a, b] : pairs) {
    if (max_difference_on(a.q, b.q, d, 1.0) > 1e-12) raise(ErrorKind::kDomain, "pair members differ on [d,1]");
    const auto ua = spectral_trace(a);
    const auto ub = spectral_trace(b);
    const auto fa = fd_trace(a.q, RobinPair{a.h, H}, alpha, eta, x0, t_samples, fd);
    GapRow row;
    for (std::size_t k = 0; k < ua.size(); ++k) {
      row.gap = std::max(row.gap, std::abs(ua[k] - ub[k]));
      row.noise_floor = std::max(row.noise_floor, std::abs(ua[k] - fa[k]));
    }
    rows.push_back(row);
  }
  return rows;
}

TwinSetup twin_example(double noise_level, std::uint64_t seed, const FdSettings& fd) {
  TwinSetup tw;
  const double d = 0.5;
  tw.truth.q = PotentialSpec::sampled([d](double x) { return x < d ? -0.8 * (1.0 - x / d) * (1.0 - x / d) : 0.0; },
                                      kDefaultGridSize);
  tw.truth.h = 0.5;
  auto& s = tw.spec;
  s.alpha = 0.5;
  s.x0 = 0.6;
  s.d = d;
  s.H = 0.0;
  s.q_tail = PotentialSpec::constant(0.0);
  s.noise_level = noise_level;
  s.eta = fwd::DriveSignal::sampled([](double t) { return std::sin(20.0 * t * t); }, 1.0, 1024, "sin(20 t^2)");
  std::vector<double> ts;
  for (int k = 1; k <= 256; ++k) ts.push_back(k / 256.0);
  s.data = synthesize_data(tw.truth.q, tw.truth.h, s.H, s.alpha, s.eta, s.x0, ts, noise_level, seed, fd);
  return tw;
}

MatchReport spectral_match_audit(const sl::EigenSystem& es1, const sl::EigenSystem& es2, double x0, double tol,
                                 double threshold) {
  if (es1.n_max != es2.n_max) raise(ErrorKind::kDomain, "eigen systems must share n_max");
  MatchReport rep;
  for (int n = 0; n < es1.size(); ++n) {
    double sup = 0.0;
    for (double v : es1.efuncs[n]) sup = std::max(sup, std::abs(v));
    const double e1x = es1.efunc_at(n, x0);
    if (std::abs(e1x) <= threshold * sup) continue;
    MatchEntry e;
    e.n = n;
    e.lambda_gap = std::numeric_limits<double>::infinity();
    for (int m = 0; m < es2.size(); ++m) {
      const double gap = std::abs(es1.lambdas[n] - es2.lambdas[m]);
      if (gap < e.lambda_gap) {
        e.lambda_gap = gap;
        e.m = m;
      }
    }
    const double p1 = es1.efuncs[n].back() * e1x;
    const double p2 = es2.efuncs[e.m].back() * es2.efunc_at(e.m, x0);
    e.product_gap = std::abs(p1 - p2);
    e.matched = e.lambda_gap <= tol && e.product_gap <= tol;
    if (!e.matched && e.lambda_gap > tol) e.m = -1;
    ++rep.audited;
    if (e.matched) ++rep.matched;
    rep.entries.push_back(e);
  }
  return rep;
}

}  // namespace fracsl::inv
