#pragma once

#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "fracsl/potential.hpp"
#include "fracsl/sl_core.hpp"

namespace fracsl::fwd {

/// Boundary drive eta(t) on an increasing time grid, evaluated piecewise
/// linearly. eta(0) = 0 is required.
class DriveSignal {
 public:
  DriveSignal() = default;
  DriveSignal(std::vector<double> t, std::vector<double> values, std::string description = {});

  /// Samples f on n uniform intervals of [0, T].
  static DriveSignal sampled(const std::function<double(double)>& f, double T, int n, std::string description = {});

  const std::vector<double>& t() const noexcept { return t_; }
  const std::vector<double>& values() const noexcept { return values_; }
  const std::string& description() const noexcept { return description_; }
  double end_time() const noexcept { return t_.back(); }
  int intervals() const noexcept { return static_cast<int>(t_.size()) - 1; }

  double operator()(double t) const;
  double max_abs() const noexcept;
  /// Largest |slope| of the interpolant.
  double max_slope() const noexcept;
  /// Uniform step, or 0 if the grid is not uniform.
  double uniform_step() const noexcept;

  /// Same drive with values zeroed after t_cut (used for causality checks).
  DriveSignal truncated(double t_cut) const;
  DriveSignal scaled(double factor) const;

  void write_csv(std::ostream& os) const;
  static DriveSignal read_csv(std::istream& is, std::string description = {});

 private:
  std::vector<double> t_;
  std::vector<double> values_;
  std::string description_;
};

enum class Method { kSpectral, kL1Fd };

std::string to_string(Method m);

/// u(x,t) on a tensor grid; values are stored x-major: u(i, j) = values[i * nt + j].
struct SpaceTimeField {
  std::vector<double> x;
  std::vector<double> t;
  std::vector<double> values;
  Method method = Method::kSpectral;
  int n_modes = 0;  ///< spectral truncation
  int nx = 0;       ///< finite-difference resolution
  int nt = 0;
  double tail_bound = 0.0;  ///< spectral truncation bound on |u|, 0 for FD

  double& at(std::size_t i, std::size_t j) { return values[i * t.size() + j]; }
  double at(std::size_t i, std::size_t j) const { return values[i * t.size() + j]; }
  std::vector<double> row(std::size_t i) const;
  double max_abs() const noexcept;

  void write_csv(std::ostream& os) const;
};

struct SpectralOptions {
  int n_modes = -1;              ///< -1 uses every mode in the eigen system
  bool tail_correction = true;   ///< add the quasi-static remainder of the truncated series
  double shift = 1.0;            ///< c in the shifted Green's function G_c
  double tail_tolerance = -1.0;  ///< -1 selects 1e-2 * max|eta|
};

/// Eigenfunction-series solution of the fractional Robin problem driven by eta at x=1.
SpaceTimeField solve_spectral(const sl::EigenSystem& es, double alpha, const DriveSignal& eta,
                              const std::vector<double>& x_points, const std::vector<double>& t_grid,
                              const SpectralOptions& opts = {});

struct KernelTrace {
  double x = 0.0;
  std::vector<double> t;
  std::vector<double> values;     ///< K(x,t)
  std::vector<double> primitive;  ///< int_0^t K(x,s) ds
  int n_modes = 0;
  double tail_bound = 0.0;
};

struct KernelOptions {
  bool tail_correction = true;
  double shift = 1.0;
  double tail_tolerance = -1.0;  ///< negative disables the TruncationTooCoarse check
};

KernelTrace kernel_K(const sl::EigenSystem& es, double alpha, double x, const std::vector<double>& t_grid,
                     int n_modes, const KernelOptions& opts = {});

/// max_t |int_0^t u(x,s) ds - (K(x,.) * eta)(t)| for the first x of the field.
double duhamel_residual(const SpaceTimeField& field, const KernelTrace& kernel, const DriveSignal& eta);

/// Implicit L1 / central-difference solution on (nx+1) x (nt+1) uniform nodes of [0,1] x [0,T].
SpaceTimeField solve_l1_fd(const PotentialSpec& q, const RobinPair& robin, double alpha, const DriveSignal& eta,
                           int nx, int nt);

/// Remainder R_N(x) = G_c(x) - sum_{n<N} e_n(x) e_n(1) / (lambda_n + c).
double quasi_static_remainder(const sl::EigenSystem& es, int n_modes, double x, double c);

}  // namespace fracsl::fwd
