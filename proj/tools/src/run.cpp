#include "fracsl/cli/run.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <numbers>
#include <random>
#include <sstream>

#include "fracsl/cli/plot.hpp"
#include "fracsl/error.hpp"
#include "fracsl/forward.hpp"
#include "fracsl/inverse.hpp"
#include "fracsl/mittleff.hpp"
#include "fracsl/sl_core.hpp"
#include "fracsl/uniqueness.hpp"
#include "fracsl/weyl.hpp"

#ifndef FRACSL_VERSION
#define FRACSL_VERSION "0.0.0"
#endif

namespace fracsl::cli {
namespace {

namespace fs = std::filesystem;
using std::numbers::pi;

class Session {
 public:
  Session(fs::path dir, const json& params, std::uint64_t seed) : dir_(std::move(dir)), p(params), seed(seed) {}

  void write(const std::string& name, const std::function<void(std::ostream&)>& body) {
    std::ofstream out(dir_ / name, std::ios::binary);
    out.precision(17);
    body(out);
    if (!out) throw std::runtime_error("cannot write " + (dir_ / name).string());
  }

  void write_text(const std::string& name, const std::string& text) {
    write(name, [&](std::ostream& os) { os << text; });
  }

  void plot_csv(const std::string& csv, const PlotSpec& spec, const std::string& svg) {
    plot(dir_ / csv, spec, dir_ / svg);
  }

  void check(const std::string& name, double value, double threshold) {
    checks.push_back({name, value <= threshold, value, threshold, "<="});
  }
  void check_ge(const std::string& name, double value, double threshold) {
    checks.push_back({name, value >= threshold, value, threshold, ">="});
  }
  void check_equal(const std::string& name, double value, double expected) {
    checks.push_back({name, value == expected, value, expected, "=="});
  }

  const fs::path& dir() const { return dir_; }

 private:
  fs::path dir_;

 public:
  const json& p;
  std::uint64_t seed;
  std::vector<Check> checks;
};

RobinPair robin_of(const json& p, const char* h = "h", const char* H = "H") {
  return {p.value(h, 0.0), p.value(H, 0.0)};
}

std::vector<double> uniform_grid(double T, int n) {
  std::vector<double> t(n + 1);
  for (int i = 0; i <= n; ++i) t[i] = T * i / n;
  return t;
}

std::vector<double> geometric(double lo, double hi, int count) {
  std::vector<double> v(count);
  for (int i = 0; i < count; ++i) v[i] = lo * std::pow(hi / lo, count == 1 ? 0.0 : static_cast<double>(i) / (count - 1));
  return v;
}

// Bilinear interpolation of a space-time field at (x, t).
double field_at(const fwd::SpaceTimeField& f, double x, double t) {
  auto locate = [](const std::vector<double>& g, double v, std::size_t& i, double& w) {
    if (g.size() == 1) {
      i = 0;
      w = 0.0;
      return;
    }
    const auto it = std::upper_bound(g.begin(), g.end(), v);
    i = static_cast<std::size_t>(std::clamp<std::ptrdiff_t>(it - g.begin() - 1, 0, static_cast<std::ptrdiff_t>(g.size()) - 2));
    w = std::clamp((v - g[i]) / (g[i + 1] - g[i]), 0.0, 1.0);
  };
  std::size_t i = 0, j = 0;
  double wx = 0.0, wt = 0.0;
  locate(f.x, x, i, wx);
  locate(f.t, t, j, wt);
  const std::size_t i1 = f.x.size() == 1 ? i : i + 1, j1 = f.t.size() == 1 ? j : j + 1;
  return (1 - wx) * ((1 - wt) * f.at(i, j) + wt * f.at(i, j1)) + wx * ((1 - wt) * f.at(i1, j) + wt * f.at(i1, j1));
}

fwd::SpaceTimeField resample(const fwd::SpaceTimeField& f, const std::vector<double>& xs, const std::vector<double>& ts) {
  fwd::SpaceTimeField out = f;
  out.x = xs;
  out.t = ts;
  out.values.assign(xs.size() * ts.size(), 0.0);
  for (std::size_t i = 0; i < xs.size(); ++i) {
    for (std::size_t j = 0; j < ts.size(); ++j) out.at(i, j) = field_at(f, xs[i], ts[j]);
  }
  return out;
}

double max_abs_diff(const fwd::SpaceTimeField& a, const fwd::SpaceTimeField& b) {
  double m = 0.0;
  for (std::size_t k = 0; k < a.values.size(); ++k) m = std::max(m, std::abs(a.values[k] - b.values[k]));
  return m;
}

std::string label(double x) {
  std::ostringstream os;
  os << x;
  return os.str();
}

// ---------------------------------------------------------------------------

void write_eigen_tables(Session& s, const sl::EigenSystem& es, const std::string& prefix) {
  s.write(prefix + "eigenvalues.csv", [&](std::ostream& os) {
    os << "n,lambda,k,beta,residual,sign_changes\n";
    for (int n = 0; n < es.size(); ++n) {
      os << n << ',' << es.lambdas[n] << ',' << es.k[n] << ',' << es.beta[n] << ',' << es.residuals[n] << ','
         << es.sign_changes[n] << '\n';
    }
  });
  const int shown = std::min(es.size(), 4);
  s.write(prefix + "eigenfunctions.csv", [&](std::ostream& os) {
    os << 'x';
    for (int n = 0; n < shown; ++n) os << ",e" << n;
    os << '\n';
    for (int i = 0; i <= es.grid_size; ++i) {
      os << static_cast<double>(i) / es.grid_size;
      for (int n = 0; n < shown; ++n) os << ',' << es.efuncs[n][i];
      os << '\n';
    }
  });
  PlotSpec spec;
  spec.x = "x";
  for (int n = 0; n < shown; ++n) spec.y.push_back("e" + std::to_string(n));
  spec.title = "leading eigenfunctions";
  s.plot_csv(prefix + "eigenfunctions.csv", spec, prefix + "eigenfunctions.svg");
}

void cmd_eigensolve(Session& s) {
  const auto q = build_potential(s.p["potential"]);
  sl::EigenOptions opts;
  opts.grid_size = s.p.value("grid_size", 0);
  const auto es = sl::eigen_system(q, robin_of(s.p), s.p["n_max"].get<int>(), opts);
  write_eigen_tables(s, es, "");
  s.check("orthonormality_defect", sl::orthonormality_defect(es), 1e-8);
  int wrong = 0;
  for (int n = 0; n < es.size(); ++n) wrong += es.sign_changes[n] != n;
  s.check_equal("oscillation_count_mismatches", wrong, 0);
}

struct ForwardCase {
  fwd::SpaceTimeField spectral;
  fwd::SpaceTimeField fd;
  double rel_diff = 0.0;
  double budget = 0.0;
};

// Spectral and L1-FD traces at xs on the drive grid; budget is the FD gap under doubling nx and nt.
ForwardCase cross_validate(Session& s, const PotentialSpec& q, const RobinPair& r, double alpha,
                           const fwd::DriveSignal& eta, const std::vector<double>& xs, int n_modes, int nx,
                           bool with_budget, const std::string& prefix) {
  const auto& tg = eta.t();
  const auto es = sl::eigen_system(q, r, n_modes - 1);
  ForwardCase out;
  out.spectral = fwd::solve_spectral(es, alpha, eta, xs, tg);
  const int nt = eta.intervals();
  out.fd = resample(fwd::solve_l1_fd(q, r, alpha, eta, nx, nt), xs, tg);
  s.write(prefix + "spectral.csv", [&](std::ostream& os) { out.spectral.write_csv(os); });
  s.write(prefix + "l1fd.csv", [&](std::ostream& os) { out.fd.write_csv(os); });
  const double scale = std::max(out.spectral.max_abs(), 1e-300);
  out.rel_diff = max_abs_diff(out.spectral, out.fd) / scale;
  if (with_budget) {
    const auto fd2 = resample(fwd::solve_l1_fd(q, r, alpha, eta, 2 * nx, 2 * nt), xs, tg);
    out.budget = max_abs_diff(out.fd, fd2) / scale;
  }
  return out;
}

void write_traces(Session& s, const std::vector<std::pair<std::string, const fwd::SpaceTimeField*>>& fields,
                  std::size_t xi, const std::string& name) {
  const auto& t = fields.front().second->t;
  s.write(name + ".csv", [&](std::ostream& os) {
    os << 't';
    for (const auto& f : fields) os << ',' << f.first;
    os << '\n';
    for (std::size_t j = 0; j < t.size(); ++j) {
      os << t[j];
      for (const auto& f : fields) os << ',' << f.second->at(xi, j);
      os << '\n';
    }
  });
  PlotSpec spec;
  spec.x = "t";
  for (const auto& f : fields) spec.y.push_back(f.first);
  spec.title = "u(x, t) at x = " + label(fields.front().second->x[xi]);
  s.plot_csv(name + ".csv", spec, name + ".svg");
}

void cmd_forward(Session& s) {
  const auto q = build_potential(s.p["potential"]);
  const RobinPair r = robin_of(s.p);
  const double alpha = s.p["alpha"];
  const auto eta = build_drive(s.p["drive"]);
  const auto xs = s.p["x_points"].get<std::vector<double>>();
  const std::string method = s.p["method"];
  const int n_modes = s.p["n_modes"], nx = s.p["nx"];
  s.write("drive.csv", [&](std::ostream& os) { eta.write_csv(os); });
  if (method == "both") {
    const auto c = cross_validate(s, q, r, alpha, eta, xs, n_modes, nx, s.p["refinement_budget"].get<bool>(), "");
    const double tol = s.p["tolerance"];
    s.check("spectral_vs_l1fd_relative", c.rel_diff, tol + c.budget);
    s.write("cross_validation.json", [&](std::ostream& os) {
      os << json{{"relative_difference", c.rel_diff}, {"refinement_budget", c.budget}, {"tolerance", tol}}.dump(2)
         << '\n';
    });
    write_traces(s, {{"spectral", &c.spectral}, {"l1fd", &c.fd}}, xs.size() - 1, "trace");
    return;
  }
  fwd::SpaceTimeField f;
  if (method == "spectral") {
    f = fwd::solve_spectral(sl::eigen_system(q, r, n_modes - 1), alpha, eta, xs, eta.t());
  } else {
    f = resample(fwd::solve_l1_fd(q, r, alpha, eta, nx, eta.intervals()), xs, eta.t());
  }
  s.write(method + ".csv", [&](std::ostream& os) { f.write_csv(os); });
  write_traces(s, {{method, &f}}, xs.size() - 1, "trace");
}

double primitive_scale(const fwd::SpaceTimeField& f) {
  double acc = 0.0, m = 0.0;
  for (std::size_t j = 1; j < f.t.size(); ++j) {
    acc += 0.5 * (f.t[j] - f.t[j - 1]) * (f.at(0, j) + f.at(0, j - 1));
    m = std::max(m, std::abs(acc));
  }
  return m;
}

void cmd_kernel(Session& s) {
  const auto q = build_potential(s.p["potential"]);
  const RobinPair r = robin_of(s.p);
  const double alpha = s.p["alpha"], x = s.p["x"];
  const int n_modes = s.p["n_modes"];
  const auto es = sl::eigen_system(q, r, n_modes - 1);
  std::optional<fwd::DriveSignal> eta;
  if (s.p.contains("drive")) eta = build_drive(s.p["drive"]);
  const auto tg = eta ? eta->t() : uniform_grid(s.p["t_max"].get<double>(), s.p["nt"].get<int>());
  const auto k = fwd::kernel_K(es, alpha, x, tg, n_modes);
  s.write("kernel.csv", [&](std::ostream& os) {
    os << "t,K,primitive\n";
    for (std::size_t j = 0; j < k.t.size(); ++j) os << k.t[j] << ',' << k.values[j] << ',' << k.primitive[j] << '\n';
  });
  PlotSpec spec;
  spec.x = "t";
  spec.y = {"primitive"};
  spec.title = "running integral of K(x, t) at x = " + label(x);
  s.plot_csv("kernel.csv", spec, "kernel_primitive.svg");
  if (eta) {
    const auto field = fwd::solve_spectral(es, alpha, *eta, {x}, tg);
    const double res = fwd::duhamel_residual(field, k, *eta);
    const double scale = std::max(primitive_scale(field), 1e-300);
    s.check("duhamel_relative_residual", res / scale, s.p["duhamel_tolerance"].get<double>());
    s.write("duhamel.json", [&](std::ostream& os) {
      os << json{{"residual", res}, {"scale", scale}, {"kernel_tail_bound", k.tail_bound}}.dump(2) << '\n';
    });
  }
}

void write_scan(Session& s, const std::vector<weyl::ScanPoint>& pts, const std::string& name, const std::string& title) {
  s.write(name + ".csv", [&](std::ostream& os) { weyl::write_scan_csv(os, pts); });
  s.write(name + "_abs.csv", [&](std::ostream& os) {
    os << "abs_lambda,magnitude\n";
    for (const auto& pnt : pts) os << std::abs(pnt.lambda) << ',' << std::abs(pnt.value) << '\n';
  });
  PlotSpec spec;
  spec.x = "abs_lambda";
  spec.y = {"magnitude"};
  spec.log_x = spec.log_y = true;
  spec.title = title;
  s.plot_csv(name + "_abs.csv", spec, name + ".svg");
}

void cmd_weyl_scan(Session& s) {
  const std::string scan = s.p["scan"];
  const double H = s.p["H"];
  if (scan == "m") {
    const auto q = build_potential(s.p["potential"]);
    const auto ray = weyl::ComplexRay::geometric(s.p["y_min"], s.p["y_max"], s.p["count"], s.p["angle"]);
    const auto fit = weyl::m_asymptotic_scan(q, s.p["h"].get<double>(), s.p["x"].get<double>(), ray);
    write_scan(s, fit.samples, "m_scan", "|m_-(x, lambda)| along the ray");
    s.write_text("m_fit.json", fit.to_json() + "\n");
    // m_- grows like sqrt(-lambda) along non-real rays
    s.check("m_exponent_deviation_from_half", std::abs(fit.exponent - 0.5), 0.05);
    return;
  }
  const auto q1 = build_potential(s.p["q1"]);
  const auto q2 = build_potential(s.p["q2"]);
  const double h1 = s.p["h1"], h2 = s.p["h2"], d = s.p["d"];
  if (scan == "F") {
    const int n_max = s.p["n_modes"].get<int>() - 1;
    const auto es = sl::eigen_system(q1, {h1, H}, n_max);
    weyl::ProductSpec product;
    product.spectrum = es.lambdas;
    weyl::FOptions opts;
    opts.tail_correction = true;
    opts.tail_shift = es.lambdas.back() - n_max * n_max * pi * pi;
    const auto ys = geometric(s.p["y_min"], s.p["y_max"], s.p["count"]);
    const auto res = weyl::F_scan(q1, q2, h1, h2, d, ys, product, opts);
    write_scan(s, res.points, "F_scan", "|F(iy)|");
    s.write("F_fit.json", [&](std::ostream& os) {
      os << json{{"loglog_slope", res.loglog_slope}, {"growth_exponent", res.growth_exponent}}.dump(2) << '\n';
    });
    s.check("F_loglog_slope", res.loglog_slope, 0.0);
    return;
  }
  // Wronskian constancy on [d,1]; lambda stays within 0.05 rad of the positive axis because
  // U is a difference of products of size exp(2 |Im sqrt(lambda)|)
  const int count = s.p["count"];
  const double step = s.p["y_max"].get<double>() / count;
  double worst = 0.0;
  s.write("wronskian.csv", [&](std::ostream& os) {
    os << "re_lambda,im_lambda,abs_U1,max_defect\n";
    for (int k = 0; k < count; ++k) {
      const weyl::cdouble lam = std::polar(1.0 + step * k, k % 2 ? -0.05 : 0.05);
      const auto U = weyl::wronskian_trace(q1, q2, h1, h2, lam);
      const int n = static_cast<int>(U.size()) - 1;
      double defect = 0.0;
      for (int i = static_cast<int>(std::ceil(d * n - 1e-9)); i <= n; ++i) {
        defect = std::max(defect, std::abs(U[i] - U[n]) / (1.0 + std::abs(U[n])));
      }
      worst = std::max(worst, defect);
      os << lam.real() << ',' << lam.imag() << ',' << std::abs(U[n]) << ',' << defect << '\n';
    }
  });
  s.check("wronskian_constancy_defect", worst, 1e-8);
}

void cmd_counting(Session& s) {
  const auto q = build_potential(s.p["potential"]);
  const RobinPair r = robin_of(s.p);
  const double x0 = s.p["x0"], tau = s.p["tau"];
  const auto es = sl::eigen_system(q, r, s.p["n_max"].get<int>());
  const auto split = uq::lambda_set(es, x0, tau);
  // counts are only meaningful below the largest computed eigenvalue
  const double s_max = std::min(s.p["s_max"].get<double>(), es.lambdas.back());
  const double s_min = std::min(s.p["s_min"].get<double>(), 0.5 * s_max);
  const auto grid = geometric(s_min, s_max, s.p["s_count"]);
  const auto bound = uq::counting_bound_check(split.lambda, x0, grid);
  s.write("counting.csv", [&](std::ostream& os) { bound.write_csv(os); });
  s.write("audit.csv", [&](std::ostream& os) {
    os << "n,lambda,value_at_x0,sup_norm,in_lambda,near_threshold\n";
    for (const auto& a : split.audit) {
      os << a.index << ',' << a.lambda << ',' << a.value_at_x0 << ',' << a.sup_norm << ',' << a.in_lambda << ','
         << a.near_threshold << '\n';
    }
  });
  PlotSpec spec;
  spec.x = "s";
  spec.y = {"count", "bound"};
  spec.log_x = true;
  spec.title = "counting function of Lambda and its lower bound";
  s.plot_csv("counting.csv", spec, "counting.svg");
  int worst_row = -1;
  double worst_margin = 0.0;
  for (std::size_t i = 0; i < bound.rows.size(); ++i) {
    if (!bound.rows[i].in_window) continue;
    const double margin = bound.rows[i].count - bound.rows[i].bound;
    if (worst_row < 0 || margin < worst_margin) {
      worst_margin = margin;
      worst_row = static_cast<int>(i);
    }
  }
  s.check_ge("counting_bound_margin", worst_margin, 0.0);
  json report = {{"lambda_size", split.lambda.size()},
                 {"complement_size", split.complement.size()},
                 {"factor", bound.factor},
                 {"s_window", {s_min, s_max}},
                 {"bound_pass", bound.pass}};
  if (s.p.contains("A")) {
    const auto dens = uq::density_criterion(split.lambda, s.p["A"].get<double>(), grid);
    s.check_ge("density_estimate", dens.estimate, dens.threshold);
    report["density"] = {{"estimate", dens.estimate}, {"threshold", dens.threshold}, {"implied_d_max", dens.implied_d_max}};
  }
  if (s.p["inclusion"].get<bool>()) {
    const auto inc = uq::complement_inclusion_check(es, x0, r, q, tau);
    int bad = 0;
    for (const auto& e : inc.entries) bad += !e.ok;
    s.check_equal("complement_inclusion_failures", bad, 0);
    report["inclusion"] = {{"entries", inc.entries.size()}, {"failures", bad}, {"tolerance", inc.tolerance}};
  }
  s.write("report.json", [&](std::ostream& os) { os << report.dump(2) << '\n'; });
}

int count_occurrences(const std::string& text, const std::string& needle) {
  int n = 0;
  for (std::size_t pos = text.find(needle); pos != std::string::npos; pos = text.find(needle, pos + 1)) ++n;
  return n;
}

void region_map_into(Session& s, int res, const std::optional<uq::Certificate>& cert, const std::string& prefix) {
  const auto map = uq::region_map(res, cert);
  s.write(prefix + "region_map.csv", [&](std::ostream& os) { map.write_csv(os); });
  PlotSpec spec;
  spec.kind = "heatmap";
  spec.x = "x0";
  spec.y = {"d"};
  spec.z = "verdict";
  spec.title = "uniqueness verdicts";
  s.plot_csv(prefix + "region_map.csv", spec, prefix + "region_map.svg");
  const auto rows = CsvTable::read(s.dir() / (prefix + "region_map.csv")).rows.size();
  std::ifstream in(s.dir() / (prefix + "region_map.svg"));
  const std::string svg((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  s.check_equal(prefix + "region_map_rows", static_cast<double>(rows), static_cast<double>(res) * res);
  s.check_equal(prefix + "region_map_rects", count_occurrences(svg, "<rect "), static_cast<double>(res) * res);
}

void cmd_region_map(Session& s) {
  std::optional<uq::Certificate> cert;
  if (s.p.contains("certificate")) cert = uq::Certificate{s.p["certificate"]["A"], s.p["certificate"]["B"]};
  region_map_into(s, s.p["resolution"], cert, "");
}

void cmd_reconstruct(Session& s) {
  const double noise = s.p["noise_level"];
  const inv::FdSettings fd{s.p["fd_nx"].get<int>(), s.p["fd_nt"].get<int>()};
  const auto twin = inv::twin_example(noise, s.seed, fd);
  inv::ReconstructOptions opts;
  opts.basis_dim = s.p["basis_dim"];
  opts.gamma = s.p["gamma"];
  opts.discrepancy_principle = s.p.contains("discrepancy") ? s.p["discrepancy"].get<bool>() : noise > 0.0;
  opts.discrepancy_factor = s.p["discrepancy_factor"];
  opts.estimate_h = s.p["estimate_h"];
  opts.max_iterations = s.p["max_iterations"];
  opts.truth = twin.truth;
  inv::CandidateParam init;
  init.coeffs.assign(opts.basis_dim, 0.0);
  if (!opts.estimate_h) init.h = twin.truth.h;
  s.write_text("problem.json", twin.spec.to_json() + "\n");
  s.write("data.csv", [&](std::ostream& os) { twin.spec.data.write_csv(os); });
  const auto res = inv::reconstruct(twin.spec, init, opts);
  s.write_text("result.json", res.to_json() + "\n");
  s.write("misfit.csv", [&](std::ostream& os) {
    os << "iteration,misfit\n";
    for (std::size_t i = 0; i < res.misfit_history.size(); ++i) os << i << ',' << res.misfit_history[i] << '\n';
  });
  s.write("q_hat.csv", [&](std::ostream& os) {
    os << "x,q_hat,q_true\n";
    const int n = res.q_hat.grid_size();
    for (int i = 0; i <= n; ++i) {
      const double x = res.q_hat.node(i);
      os << x << ',' << res.q_hat.samples()[i] << ',' << twin.truth.q(x) << '\n';
    }
  });
  PlotSpec qs;
  qs.x = "x";
  qs.y = {"q_hat", "q_true"};
  qs.title = "reconstructed and true potential";
  s.plot_csv("q_hat.csv", qs, "q_hat.svg");
  bool positive = !res.misfit_history.empty();
  for (double m : res.misfit_history) positive = positive && m > 0.0;
  if (positive) {
    PlotSpec ms;
    ms.x = "iteration";
    ms.y = {"misfit"};
    ms.log_y = true;
    ms.title = "penalized misfit";
    s.plot_csv("misfit.csv", ms, "misfit.svg");
  }
  s.check("rel_L2_q", res.metrics->rel_L2_q, s.p["rel_l2_threshold"].get<double>());
  s.check("abs_err_h", res.metrics->abs_err_h, s.p["h_threshold"].get<double>());
}

// Random admissible members: q = -a (1 - x/d)^p on [0,d], zero on [d,1].
PotentialSpec power_well(double a, double p, double d) {
  return PotentialSpec::sampled([=](double x) { return x < d ? -a * std::pow(1.0 - x / d, p) : 0.0; });
}

void cmd_distinguish(Session& s) {
  const int n_pairs = s.p["pairs"];
  const double d = s.p["d"], x0 = s.p["x0"], alpha = s.p["alpha"], h = s.p["h"], H = s.p["H"];
  const double amp = s.p["amplitude"];
  const auto eta = build_drive(s.p["drive"]);
  const double T = eta.end_time();
  std::mt19937_64 rng(s.seed);
  std::uniform_real_distribution<double> ua(0.1 * amp, amp), up(1.0, 3.0);
  struct Draw {
    double a1, p1, a2, p2;
  };
  std::vector<Draw> draws;
  std::vector<std::pair<inv::Truth, inv::Truth>> pairs;
  while (static_cast<int>(pairs.size()) < n_pairs) {
    Draw dr{ua(rng), up(rng), ua(rng), up(rng)};
    auto t1 = inv::Truth{power_well(dr.a1, dr.p1, d), h};
    auto t2 = inv::Truth{power_well(dr.a2, dr.p2, d), h};
    // keep pairs visibly distinct on [0,d]
    if (max_difference_on(t1.q, t2.q, 0.0, d) < 0.1 * amp) continue;
    draws.push_back(dr);
    pairs.emplace_back(std::move(t1), std::move(t2));
  }
  // control: one member paired with itself
  pairs.emplace_back(pairs.front().first, pairs.front().first);
  std::vector<double> ts(s.p["samples"].get<int>());
  for (std::size_t k = 0; k < ts.size(); ++k) ts[k] = T * static_cast<double>(k + 1) / ts.size();
  const auto rows = inv::distinguishability_scan(pairs, d, H, x0, alpha, eta, ts, {},
                                                 {s.p["fd_nx"].get<int>(), s.p["fd_nt"].get<int>()});
  double min_ratio = 1e300;
  s.write("gaps.csv", [&](std::ostream& os) {
    os << "pair,a1,p1,a2,p2,gap,noise_floor,ratio\n";
    for (int i = 0; i < n_pairs; ++i) {
      const double ratio = rows[i].gap / rows[i].noise_floor;
      min_ratio = std::min(min_ratio, ratio);
      os << i << ',' << draws[i].a1 << ',' << draws[i].p1 << ',' << draws[i].a2 << ',' << draws[i].p2 << ','
         << rows[i].gap << ',' << rows[i].noise_floor << ',' << ratio << '\n';
    }
  });
  const auto& control = rows.back();
  s.write("control.json", [&](std::ostream& os) {
    os << json{{"gap", control.gap}, {"noise_floor", control.noise_floor}}.dump(2) << '\n';
  });
  s.check_ge("min_gap_over_noise_floor", min_ratio, s.p["margin"].get<double>());
  s.check("identical_pair_gap", control.gap, control.noise_floor);
}

// ---------------------------------------------------------------------------

void cmd_verify_all(Session& s) {
  const auto q0 = PotentialSpec::constant(0.0);
  std::vector<std::string> lines;

  // closed-form Neumann spectrum
  const auto es = sl::eigen_system(q0, {0.0, 0.0}, 50);
  write_eigen_tables(s, es, "reference_");
  double lam_err = 0.0, f_err = 0.0;
  for (int n = 1; n <= 50; ++n) lam_err = std::max(lam_err, std::abs(es.lambdas[n] / (n * n * pi * pi) - 1.0));
  for (int n = 0; n <= 50; ++n) {
    for (int i = 0; i <= es.grid_size; ++i) {
      const double x = static_cast<double>(i) / es.grid_size;
      const double exact = n == 0 ? 1.0 : std::sqrt(2.0) * std::cos(n * pi * x);
      f_err = std::max(f_err, std::abs(es.efuncs[n][i] - exact));
    }
  }
  s.check("reference_lambda0_abs", std::abs(es.lambdas[0]), 1e-8);
  s.check("reference_lambda_rel", lam_err, 1e-8);
  s.check("reference_efunc_max", f_err, 1e-6);
  s.check("reference_orthonormality", sl::orthonormality_defect(es), 1e-8);

  // counting laws
  std::vector<double> squares;
  for (int n = 1; n <= 2000; ++n) squares.push_back(n * n * pi * pi);
  const uq::CountedSet full(squares, uq::SetLabel::kFullSpectrum);
  s.check("weyl_law_relative", std::abs(uq::counting(full, 1e6) / 1e3 * pi - 1.0), 0.05);
  const auto split = uq::lambda_set(es, 0.5);
  const double top = es.lambdas.back();
  {
    // least-squares slope of N_Lambda against sqrt(s) over the upper part of the computed spectrum
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const int m = 400;
    for (int i = 0; i < m; ++i) {
      const double r = std::sqrt(top) * (0.2 + 0.8 * i / (m - 1.0));
      const double c = uq::counting(split.lambda, r * r);
      sx += r;
      sy += c;
      sxx += r * r;
      sxy += r * c;
    }
    const double slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
    s.check("half_point_lambda_slope_relative", std::abs(slope * 2.0 * pi - 1.0), 0.05);
  }
  const auto grid = geometric(100.0, top, 41);
  for (double x0 : {0.5, 1.0 / 3.0, 1.0 / std::sqrt(2.0)}) {
    const auto rep = uq::counting_bound_check(uq::lambda_set(es, x0).lambda, x0, grid);
    s.check_equal("counting_bound_x0_" + label(x0), rep.pass ? 1.0 : 0.0, 1.0);
  }

  // Mittag-Leffler spot values
  double ml_err = 0.0;
  for (double x : {0.0, 0.5, 2.0, 7.5, 20.0, 45.0}) ml_err = std::max(ml_err, std::abs(ml::ml(1.0, 1.0, -x) - std::exp(-x)));
  s.check("ml_exponential_abs", ml_err, 1e-12);

  // forward solvers on q = 0
  const auto ramp = fwd::DriveSignal::sampled([](double t) { return t; }, 1.0, 256, "t");
  const std::vector<double> xs = {0.0, 0.25, 0.5, 0.75, 1.0};
  const auto c = cross_validate(s, q0, {0.0, 0.0}, 0.5, ramp, xs, 64, 128, true, "reference_");
  s.check("forward_cross_validation", c.rel_diff, 1e-3 + c.budget);

  const auto sq = fwd::DriveSignal::sampled([](double t) { return t * t; }, 1.0, 512, "t^2");
  const auto es64 = sl::eigen_system(q0, {0.0, 0.0}, 63);
  const auto field = fwd::solve_spectral(es64, 0.5, sq, {0.5}, sq.t());
  const auto k = fwd::kernel_K(es64, 0.5, 0.5, sq.t(), 64);
  s.check("duhamel_relative", fwd::duhamel_residual(field, k, sq) / primitive_scale(field), 1e-4);

  region_map_into(s, 10, std::nullopt, "reference_");

  const auto fit = weyl::m_asymptotic_scan(q0, 0.0, 0.5, weyl::ComplexRay::geometric(100.0, 1600.0, 12, pi / 2));
  s.check("m_exponent_deviation_from_half", std::abs(fit.exponent - 0.5), 0.05);

  s.write("summary.csv", [&](std::ostream& os) {
    os << "check,value,threshold,relation,pass\n";
    for (const auto& ch : s.checks) {
      os << ch.name << ',' << ch.value << ',' << ch.threshold << ',' << ch.relation << ',' << ch.pass << '\n';
    }
  });
}

const std::map<std::string, std::function<void(Session&)>>& commands() {
  static const std::map<std::string, std::function<void(Session&)>> table = {
      {"eigensolve", cmd_eigensolve}, {"forward", cmd_forward},       {"kernel", cmd_kernel},
      {"weyl-scan", cmd_weyl_scan},   {"counting", cmd_counting},     {"region-map", cmd_region_map},
      {"reconstruct", cmd_reconstruct}, {"distinguish", cmd_distinguish}, {"verify-all", cmd_verify_all}};
  return table;
}

}  // namespace

std::string tool_version() { return FRACSL_VERSION; }

RunManifest run(const ExperimentConfig& config, const fs::path& out_dir) {
  RunManifest m;
  m.version = tool_version();
  m.command = config.command;
  m.seed = config.seed;
  m.threads = thread_count();
  m.config_sha256 = sha256_hex(json{{"command", config.command}, {"parameters", config.parameters}, {"seed", config.seed}}.dump());
  m.started = utc_now();
  fs::create_directories(out_dir);
  Session session(out_dir, config.parameters, config.seed);
  try {
    commands().at(config.command)(session);
    m.checks = session.checks;
    const bool ok = std::all_of(m.checks.begin(), m.checks.end(), [](const Check& c) { return c.pass; });
    m.status = ok ? "pass" : "check_failed";
    m.exit_code = ok ? kExitPass : kExitCheckFailed;
  } catch (const Error& e) {
    m.checks = session.checks;
    m.status = "numerical_error";
    m.exit_code = kExitNumericalError;
    m.error_kind = std::string(to_string(e.kind()));
    m.error = e.what();
  }
  m.files = digest_directory(out_dir);
  m.finished = utc_now();
  std::ofstream out(out_dir / kManifestName, std::ios::binary);
  out << m.to_json().dump(2) << '\n';
  return m;
}

}  // namespace fracsl::cli
