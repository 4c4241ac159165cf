#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "fracsl/forward.hpp"
#include "fracsl/potential.hpp"
#include "fracsl/sl_core.hpp"

namespace fracsl::inv {

struct DataSeries {
  std::vector<double> t;
  std::vector<double> u;

  void write_csv(std::ostream& os) const;
};

struct InverseProblemSpec {
  double alpha = 0.5;
  double x0 = 0.6;
  double d = 0.5;
  PotentialSpec q_tail;  ///< only its values on [d,1] are used
  double H = 0.0;
  fwd::DriveSignal eta;
  DataSeries data;
  double noise_level = 0.0;

  void validate() const;
  std::string to_json() const;
  static InverseProblemSpec from_json(const std::string& text);
};

/// Cosine-basis coefficients of q on [0,d] plus the left Robin coefficient.
struct CandidateParam {
  std::vector<double> coeffs;
  double h = 0.1;
};

inline constexpr int kMaxBasisDim = 16;

/// Spectral forward model used inside the inversion.
struct ModelSettings {
  int grid_size = 256;
  int n_modes = 32;
};

/// q(x) = q_tail(d) + sum_m c_m (cos(m pi (d - x) / (2d)) - 1) on [0,d], q_tail on [d,1].
/// Every basis function vanishes at d; the slope at 0 is left free.
PotentialSpec candidate_potential(const CandidateParam& c, const InverseProblemSpec& spec, int grid_size,
                                  bool project = false);

/// Model prediction u(x0, t_k) at the data times.
std::vector<double> predict(const CandidateParam& c, const InverseProblemSpec& spec, const ModelSettings& model = {},
                            bool project = false);

struct FdSettings {
  int nx = 256;
  int nt = 512;
};

/// u(x0, t_k) from the finite-difference solver, interpolated linearly in x and t.
std::vector<double> fd_trace(const PotentialSpec& q, const RobinPair& robin, double alpha, const fwd::DriveSignal& eta,
                             double x0, const std::vector<double>& t_samples, const FdSettings& fd = {});

DataSeries synthesize_data(const PotentialSpec& q_true, double h_true, double H, double alpha,
                           const fwd::DriveSignal& eta, double x0, const std::vector<double>& t_samples,
                           double noise_level, std::uint64_t rng_seed, const FdSettings& fd = {});

double misfit(const CandidateParam& c, const InverseProblemSpec& spec, double gamma, const ModelSettings& model = {},
              bool project = false);

struct Truth {
  PotentialSpec q;
  double h = 0.0;
};

struct ReconstructOptions {
  int basis_dim = 8;
  double gamma = 1e-10;
  bool discrepancy_principle = false;  ///< choose gamma by Morozov's rule from spec.noise_level
  double discrepancy_factor = 1.0;
  bool estimate_h = true;
  bool project_q = true;
  double jacobian_step = 1e-6;
  int max_iterations = 200;
  double gradient_tol = 1e-8;
  double step_tol = 1e-10;
  double rank_condition_limit = 1e12;
  ModelSettings model{};
  std::optional<Truth> truth;
};

struct ErrorMetrics {
  double rel_L2_q = 0.0;  ///< on [0,d]
  double abs_err_h = 0.0;
};

struct ReconstructionResult {
  PotentialSpec q_hat;
  double h_hat = 0.0;
  CandidateParam param;
  std::vector<double> misfit_history;  ///< penalized misfit after each accepted step, starting at init
  double gamma = 0.0;
  int basis_dim = 0;
  int iterations = 0;
  std::string termination;
  std::vector<std::string> warnings;
  std::optional<ErrorMetrics> metrics;

  std::string to_json() const;
};

ReconstructionResult reconstruct(const InverseProblemSpec& spec, const CandidateParam& init,
                                 const ReconstructOptions& options = {});

/// rel_L2 of q_hat against q_true on [0,d].
double relative_l2_on(const PotentialSpec& q_hat, const PotentialSpec& q_true, double d);

struct GapRow {
  double gap = 0.0;          ///< max_t |u_1(x0,t) - u_2(x0,t)|
  double noise_floor = 0.0;  ///< max_t |u_spectral - u_fd| for the first member
};

std::vector<GapRow> distinguishability_scan(const std::vector<std::pair<Truth, Truth>>& pairs, double d, double H,
                                            double x0, double alpha, const fwd::DriveSignal& eta,
                                            const std::vector<double>& t_samples, const ModelSettings& model = {},
                                            const FdSettings& fd = {});

struct MatchEntry {
  int n = 0;
  int m = -1;  ///< matched index in the second system, -1 if none
  double lambda_gap = 0.0;
  double product_gap = 0.0;
  bool matched = false;
};

struct MatchReport {
  std::vector<MatchEntry> entries;  ///< audited modes only
  int audited = 0;
  int matched = 0;
};

struct TwinSetup {
  InverseProblemSpec spec;
  Truth truth;
};

/// Twin experiment: alpha=1/2, d=1/2, x0=0.6, H=0, q* = -0.8 (1-x/d)^2 on [0,d] glued to 0,
/// h*=1/2, drive sin(20 t^2) on [0,1], 256 equispaced samples of FD data.
TwinSetup twin_example(double noise_level = 0.0, std::uint64_t seed = 0, const FdSettings& fd = {256, 4096});

MatchReport spectral_match_audit(const sl::EigenSystem& es1, const sl::EigenSystem& es2, double x0, double tol,
                                 double threshold = 1e-6);

}  // namespace fracsl::inv
