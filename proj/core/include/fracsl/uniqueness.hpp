#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "fracsl/potential.hpp"
#include "fracsl/sl_core.hpp"

namespace fracsl::uq {

enum class SetLabel { kFullSpectrum, kLambdaSet, kLambdaComplement, kMuMinus, kMuPlus };

std::string to_string(SetLabel label);

struct CountedSet {
  std::vector<double> values;  ///< strictly increasing
  SetLabel label = SetLabel::kFullSpectrum;

  CountedSet() = default;
  CountedSet(std::vector<double> v, SetLabel l);
  std::size_t size() const noexcept { return values.size(); }
};

/// N(s) = #{a_n <= s}.
int counting(const CountedSet& set, double s);

inline constexpr double kDefaultTau = 1e-6;

struct ModeAudit {
  int index = 0;
  double lambda = 0.0;
  double value_at_x0 = 0.0;  ///< |e_n(x0)|
  double sup_norm = 0.0;     ///< max over the grid of |e_n|
  bool in_lambda = false;
  bool near_threshold = false;  ///< within a factor 100 of the cut
};

struct LambdaSplit {
  CountedSet lambda;
  CountedSet complement;
  std::vector<ModeAudit> audit;
};

/// Mode n joins Lambda iff |e_n(x0)| > tau * max|e_n|.
LambdaSplit lambda_set(const sl::EigenSystem& es, double x0, double tau = kDefaultTau);

struct InclusionEntry {
  double lambda = 0.0;
  double dist_minus = 0.0;
  double dist_plus = 0.0;
  bool ok = false;
};

struct InclusionReport {
  std::vector<InclusionEntry> entries;
  double tolerance = 0.0;
  bool pass = true;
};

/// Checks Lambda^c against both split Dirichlet spectra at x0.
InclusionReport complement_inclusion_check(const sl::EigenSystem& es, double x0, const RobinPair& robin,
                                           const PotentialSpec& q, double tau = kDefaultTau,
                                           double match_tol = 1e-6);

struct BoundRow {
  double s = 0.0;
  int count = 0;
  double bound = 0.0;
  bool in_window = false;
};

struct CountingBoundReport {
  std::vector<BoundRow> rows;
  double factor = 0.0;  ///< 1 - min{1-x0, x0}
  bool pass = false;

  void write_csv(std::ostream& os) const;
};

/// N_Lambda(s) >= (1 - min{1-x0, x0}) sqrt(s) / pi on the upper half of s_grid.
CountingBoundReport counting_bound_check(const CountedSet& lambda, double x0, const std::vector<double>& s_grid);

struct DensityReport {
  double estimate = 0.0;   ///< min of N(s) s^{-1/2} over the upper half of s_grid
  double threshold = 0.0;  ///< A / pi
  double implied_d_max = 0.0;
  bool pass = false;
};

DensityReport density_criterion(const CountedSet& lambda, double A, const std::vector<double>& s_grid);

enum class Verdict { kTheorem1CaseI, kTheorem1CaseII, kTheorem2Conditional, kUnknown };

std::string to_string(Verdict v);

struct Certificate {
  double A = 0.0;
  double B = 0.0;
};

struct RegionVerdict {
  double d = 0.0;
  double x0 = 0.0;
  Verdict verdict = Verdict::kUnknown;
  std::string note;
};

RegionVerdict classify_region(double d, double x0, const std::optional<Certificate>& cert = std::nullopt);

struct RegionMap {
  int resolution = 0;
  std::vector<RegionVerdict> cells;  ///< row-major in d, then x0

  void write_csv(std::ostream& os) const;
};

/// Verdicts at cell centres ((i+1/2)/r, (j+1/2)/r).
RegionMap region_map(int resolution, const std::optional<Certificate>& cert = std::nullopt);

}  // namespace fracsl::uq
