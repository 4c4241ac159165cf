#pragma once

#include <complex>
#include <span>
#include <utility>
#include <vector>

#include "fracsl/potential.hpp"

namespace fracsl::sl {

using cdouble = std::complex<double>;

enum class Side { kLeft, kRight };

struct IvpOptions {
  double rel_tol = 1e-11;
  double overflow_guard = 1e250;
  int max_refinement_depth = 12;
};

/// Solution of -y'' - q y = lambda y on the uniform grid x_i = i / grid_size,
/// started from x=0 (phi: y(0)=1, y'(0)=h) or from x=1 (psi: y(1)=1, y'(1)=-H).
template <class T>
struct BasicTrace {
  T lambda{};
  std::vector<T> values;
  std::vector<T> derivs;
  Side side = Side::kLeft;

  int grid_size() const noexcept { return static_cast<int>(values.size()) - 1; }
  double x(int i) const noexcept { return static_cast<double>(i) / grid_size(); }
};

using SolutionTrace = BasicTrace<cdouble>;
using RealTrace = BasicTrace<double>;

SolutionTrace solve_ivp_left(const PotentialSpec& q, double h, cdouble lambda, int grid_size,
                             const IvpOptions& opts = {});
SolutionTrace solve_ivp_right(const PotentialSpec& q, double H, cdouble lambda, int grid_size,
                              const IvpOptions& opts = {});
RealTrace solve_ivp_left(const PotentialSpec& q, double h, double lambda, int grid_size,
                         const IvpOptions& opts = {});
RealTrace solve_ivp_right(const PotentialSpec& q, double H, double lambda, int grid_size,
                          const IvpOptions& opts = {});

/// Value and derivative of phi(.;lambda) at a single point x (integrates [0,x]
/// on a grid of the potential's resolution).
std::pair<cdouble, cdouble> phi_at(const PotentialSpec& q, double h, cdouble lambda, double x,
                                   const IvpOptions& opts = {});

/// Characteristic function Delta(lambda) = -phi'(1;lambda) - H phi(1;lambda).
cdouble char_delta(const PotentialSpec& q, const RobinPair& robin, cdouble lambda, int grid_size = 0);
double char_delta(const PotentialSpec& q, const RobinPair& robin, double lambda, int grid_size = 0);

struct EigenOptions {
  int grid_size = 0;  ///< 0 selects the potential's own grid
  IvpOptions ivp{};
  double residual_tol = 1e-9;  ///< |Delta(lambda_n)| <= residual_tol * (1 + |lambda_n|)
  bool allow_inadmissible = false;
};

struct EigenSystem {
  std::vector<double> lambdas;
  std::vector<std::vector<double>> efuncs;   ///< e_n at grid nodes, unit L2 norm, e_n(0) > 0
  std::vector<std::vector<double>> ederivs;  ///< e_n' at grid nodes
  std::vector<double> k;                     ///< norming constants 1/phi_n(1)
  std::vector<double> beta;                  ///< int_0^1 phi_n^2
  std::vector<double> residuals;             ///< |Delta(lambda_n)|
  std::vector<int> sign_changes;             ///< interior sign changes of e_n
  int n_max = -1;
  int grid_size = 0;
  int ivp_solves = 0;
  PotentialSpec q;  ///< operator data the system was computed for
  RobinPair robin;

  int size() const noexcept { return static_cast<int>(lambdas.size()); }
  /// e_n(x) by cubic Hermite interpolation from nodal values and slopes.
  double efunc_at(int n, double x) const;
};

EigenSystem eigen_system(const PotentialSpec& q, const RobinPair& robin, int n_max,
                         const EigenOptions& opts = {});

/// Eigenvalues of the two Dirichlet-split problems: Robin(h) at 0 with y(x0)=0,
/// and y(x0)=0 with Robin(H) at 1.
struct SplitSpectra {
  std::vector<double> mu_minus;
  std::vector<double> mu_plus;
};

SplitSpectra split_spectra(const PotentialSpec& q, double x0, const RobinPair& robin, int n_max,
                           const EigenOptions& opts = {});

/// Count of eigenvalues strictly below lambda, from the Pruefer angle at x=1.
int count_below(const PotentialSpec& q, const RobinPair& robin, double lambda, int grid_size = 0);

struct AsymptoticsReport {
  std::vector<double> r;  ///< r_n = (sqrt(lambda_n) - n pi) n for n = 1..
  int window_first = 0;
  int window_last = 0;
  double max_abs_upper = 0.0;
  double slope = 0.0;
  double slope_stderr = 0.0;
  double relative_growth = 0.0;
  bool pass = false;
};

/// Boundedness test for a sequence indexed by n over [first, last]: least-squares
/// slope of |r_n| and the growth it implies across the window.
AsymptoticsReport bounded_sequence_report(std::vector<double> r, int offset, int first, int last);

AsymptoticsReport verify_asymptotics(const EigenSystem& es);

/// Composite trapezoid on a uniform grid with the first Euler-Maclaurin end
/// correction, using known end derivatives of the integrand.
double corrected_trapezoid(std::span<const double> f, double step, double df_start, double df_end);

/// Orthonormality defect max |<e_m, e_n> - delta_mn|.
double orthonormality_defect(const EigenSystem& es);

}  // namespace fracsl::sl
