#include "fracsl/potential.hpp"

#include <algorithm>
#include <cmath>

#include <json.hpp>

#include "fracsl/error.hpp"

namespace fracsl {

PotentialSpec::PotentialSpec(std::vector<double> samples) : samples_(std::move(samples)) {
  if (samples_.size() < 2) raise(ErrorKind::kDomain, "potential needs at least two samples");
  for (double v : samples_) {
    if (!std::isfinite(v)) raise(ErrorKind::kDomain, "potential samples must be finite");
  }
}

PotentialSpec PotentialSpec::constant(double value, int grid_size) {
  if (grid_size < 1) raise(ErrorKind::kDomain, "grid_size must be positive");
  return PotentialSpec(std::vector<double>(static_cast<std::size_t>(grid_size) + 1, value));
}

PotentialSpec PotentialSpec::sampled(const std::function<double(double)>& f, int grid_size) {
  if (grid_size < 1) raise(ErrorKind::kDomain, "grid_size must be positive");
  std::vector<double> s(static_cast<std::size_t>(grid_size) + 1);
  for (int i = 0; i <= grid_size; ++i) s[i] = f(static_cast<double>(i) / grid_size);
  return PotentialSpec(std::move(s));
}

double PotentialSpec::operator()(double x) const noexcept {
  const int n = grid_size();
  const double pos = std::clamp(x, 0.0, 1.0) * n;
  const int i = std::min(static_cast<int>(pos), n - 1);
  const double w = pos - i;
  return (1.0 - w) * samples_[i] + w * samples_[i + 1];
}

bool PotentialSpec::admissible() const noexcept {
  return std::all_of(samples_.begin(), samples_.end(), [](double v) { return v <= 0.0; });
}

double PotentialSpec::max_abs() const noexcept {
  double m = 0.0;
  for (double v : samples_) m = std::max(m, std::abs(v));
  return m;
}

double PotentialSpec::max_value() const noexcept { return *std::max_element(samples_.begin(), samples_.end()); }
double PotentialSpec::min_value() const noexcept { return *std::min_element(samples_.begin(), samples_.end()); }

PotentialSpec PotentialSpec::shifted(double c) const {
  std::vector<double> s = samples_;
  for (double& v : s) v -= c;
  return PotentialSpec(std::move(s));
}

double max_difference_on(const PotentialSpec& q1, const PotentialSpec& q2, double a, double b) {
  const int n = std::max(q1.grid_size(), q2.grid_size());
  double worst = 0.0;
  for (int i = 0; i <= n; ++i) {
    const double x = static_cast<double>(i) / n;
    if (x < a - 1e-14 || x > b + 1e-14) continue;
    worst = std::max(worst, std::abs(q1(x) - q2(x)));
  }
  return worst;
}

std::string PotentialSpec::to_json() const {
  nlohmann::json j;
  j["grid_size"] = grid_size();
  j["samples"] = samples_;
  return j.dump();
}

PotentialSpec PotentialSpec::from_json(const std::string& text) {
  const auto j = nlohmann::json::parse(text);
  const int n = j.at("grid_size").get<int>();
  auto s = j.at("samples").get<std::vector<double>>();
  if (static_cast<int>(s.size()) != n + 1) {
    raise(ErrorKind::kDomain, "samples must have grid_size+1 entries");
  }
  return PotentialSpec(std::move(s));
}

}  // namespace fracsl
