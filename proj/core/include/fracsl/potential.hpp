#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

namespace fracsl {

inline constexpr int kDefaultGridSize = 2048;

/// Continuous potential q on [0,1], stored as samples on a uniform grid and
/// evaluated by piecewise-linear interpolation.
class PotentialSpec {
 public:
  PotentialSpec() = default;
  explicit PotentialSpec(std::vector<double> samples);

  static PotentialSpec constant(double value, int grid_size = kDefaultGridSize);
  static PotentialSpec sampled(const std::function<double(double)>& f, int grid_size = kDefaultGridSize);

  int grid_size() const noexcept { return static_cast<int>(samples_.size()) - 1; }
  double step() const noexcept { return 1.0 / grid_size(); }
  std::span<const double> samples() const noexcept { return samples_; }
  double node(int i) const noexcept { return static_cast<double>(i) / grid_size(); }

  double operator()(double x) const noexcept;

  /// -q >= 0 everywhere.
  bool admissible() const noexcept;
  double max_abs() const noexcept;
  double max_value() const noexcept;
  double min_value() const noexcept;

  /// Pointwise shift q - c.
  PotentialSpec shifted(double c) const;

  /// Max |q1 - q2| over sample points in [a,b], comparing by interpolation
  /// when grids differ.
  friend double max_difference_on(const PotentialSpec& q1, const PotentialSpec& q2, double a, double b);

  std::string to_json() const;
  static PotentialSpec from_json(const std::string& text);

 private:
  std::vector<double> samples_;
};

struct RobinPair {
  double h = 0.0;
  double H = 0.0;

  bool admissible() const noexcept { return h >= 0.0 && H >= 0.0; }
};

}  // namespace fracsl
