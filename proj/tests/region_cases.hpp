#pragma once

// Hand-enumerated (d, x0, certificate) cases and the verdict the set
// definitions dictate for each. Shared by the unit tests and the acceptance run.

#include <array>
#include <optional>

#include "fracsl/uniqueness.hpp"

namespace cases {

struct RegionCase {
  double d;
  double x0;
  std::optional<fracsl::uq::Certificate> cert;
  fracsl::uq::Verdict expected;
};

using fracsl::uq::Certificate;
using V = fracsl::uq::Verdict;

inline const std::array<RegionCase, 12> kRegionCases{{
    {0.6, 0.7, std::nullopt, V::kTheorem1CaseI},
    {0.4, 0.1, std::nullopt, V::kTheorem1CaseII},
    {0.4, 0.3, Certificate{0.9, 0.2}, V::kTheorem2Conditional},
    {0.5, 0.5, std::nullopt, V::kTheorem1CaseI},               // diagonal
    {0.2, 0.0, std::nullopt, V::kTheorem1CaseII},              // x0 = 0
    {0.45, 0.05, std::nullopt, V::kTheorem1CaseII},            // just below 1 - 2d = 0.1
    {0.34, 0.33, Certificate{0.9, 0.2}, V::kTheorem2Conditional},
    {0.4, 0.3, std::nullopt, V::kUnknown},                     // theorem-2 window, no certificate
    {0.4, 0.3, Certificate{0.7, 0.2}, V::kUnknown},            // A < 2d
    {0.4, 0.3, Certificate{0.9, 0.05}, V::kUnknown},           // B < 1/2 - d, only the weak variant holds
    {0.7, 0.2, Certificate{1.5, 1.0}, V::kUnknown},            // d >= 1/2
    {0.3, 0.29, Certificate{0.9, 0.3}, V::kTheorem1CaseII},    // d < 1/3: x0 < min{d, 1-2d}
}};

}  // namespace cases
