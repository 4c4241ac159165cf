#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <set>
#include <sstream>
#include <vector>

#include "fracsl/error.hpp"
#include "fracsl/uniqueness.hpp"
#include "region_cases.hpp"

using namespace fracsl;
using std::numbers::pi;

namespace {

const PotentialSpec kZero = PotentialSpec::constant(0.0);

uq::CountedSet squares(int first, int last, double scale = 1.0) {
  std::vector<double> v;
  for (int n = first; n <= last; ++n) v.push_back(scale * n * n * pi * pi);
  return {v, uq::SetLabel::kFullSpectrum};
}

std::vector<double> geometric(double lo, double hi, int count) {
  std::vector<double> s;
  for (int i = 0; i < count; ++i) s.push_back(lo * std::pow(hi / lo, static_cast<double>(i) / (count - 1)));
  return s;
}

const sl::EigenSystem& free_system() {
  static const auto es = sl::eigen_system(kZero, {0, 0}, 120);
  return es;
}

}  // namespace

TEST(Counting, Enumeration) {
  const auto set = squares(0, 2000);
  EXPECT_EQ(uq::counting(set, 100.0), 4);
  EXPECT_EQ(uq::counting(set, -1.0), 0);
  EXPECT_EQ(uq::counting(squares(1, 10), 5.0), 0);
  EXPECT_EQ(uq::counting(set, set.values.back()), static_cast<int>(set.size()));
  int prev = 0;
  for (double s = 0.0; s < 1e5; s += 37.0) {
    const int c = uq::counting(set, s);
    EXPECT_GE(c, prev);
    prev = c;
  }
  EXPECT_THROW(uq::CountedSet({1.0, 1.0}, uq::SetLabel::kFullSpectrum), Error);
}

TEST(Counting, WeylSlope) {
  const auto set = squares(0, 2000);
  for (double s : {1e3, 1e4, 1e5, 1e6}) EXPECT_NEAR(uq::counting(set, s) / std::sqrt(s), 1.0 / pi, 1.0 / std::sqrt(s) + 1e-12);
  EXPECT_NEAR(uq::counting(set, 1e6) / 1e3, 1.0 / pi, 0.05 / pi);
}

TEST(LambdaSet, HalfPointKeepsEvenModes) {
  const auto split = uq::lambda_set(free_system(), 0.5);
  ASSERT_EQ(split.lambda.size() + split.complement.size(), 121u);
  for (std::size_t k = 0; k < split.lambda.size(); ++k)
    EXPECT_NEAR(split.lambda.values[k], 4.0 * k * k * pi * pi, 1e-8 * (1 + split.lambda.values[k]));
  for (std::size_t k = 0; k < split.complement.size(); ++k) {
    const double m = 2.0 * k + 1;
    EXPECT_NEAR(split.complement.values[k], m * m * pi * pi, 1e-8 * m * m * pi * pi);
  }
  EXPECT_EQ(split.lambda.label, uq::SetLabel::kLambdaSet);
  EXPECT_EQ(split.complement.label, uq::SetLabel::kLambdaComplement);
  for (const auto& a : split.audit) EXPECT_FALSE(a.near_threshold) << a.index;
}

TEST(LambdaSet, IrrationalAndThirdPointsKeepEverything) {
  for (double x0 : {1.0 / std::sqrt(2.0), 1.0 / 3.0}) {
    const auto split = uq::lambda_set(free_system(), x0);
    EXPECT_EQ(split.complement.size(), 0u) << x0;
    EXPECT_EQ(split.lambda.size(), 121u);
  }
}

TEST(LambdaSet, PartitionAndTauStability) {
  const auto& es = free_system();
  for (double x0 : {0.0, 0.25, 0.5, 0.6}) {
    const auto a = uq::lambda_set(es, x0, 1e-6);
    const auto b = uq::lambda_set(es, x0, 5e-7);
    std::multiset<double> all(a.lambda.values.begin(), a.lambda.values.end());
    all.insert(a.complement.values.begin(), a.complement.values.end());
    EXPECT_EQ(all, std::multiset<double>(es.lambdas.begin(), es.lambdas.end()));
    EXPECT_EQ(a.lambda.values, b.lambda.values);
    EXPECT_EQ(a.complement.values, b.complement.values);
  }
}

TEST(Inclusion, ComplementSitsInBothSplitSpectra) {
  const auto& es = free_system();
  const auto rep = uq::complement_inclusion_check(es, 0.5, {0, 0}, kZero);
  EXPECT_TRUE(rep.pass);
  EXPECT_EQ(rep.entries.size(), 60u);
  for (const auto& e : rep.entries) {
    EXPECT_LE(e.dist_minus, 1e-6 * (1 + e.lambda));
    EXPECT_LE(e.dist_plus, 1e-6 * (1 + e.lambda));
  }
  const auto empty = uq::complement_inclusion_check(es, 1.0 / std::sqrt(2.0), {0, 0}, kZero);
  EXPECT_TRUE(empty.pass);
  EXPECT_TRUE(empty.entries.empty());

  const auto shifted = PotentialSpec::constant(-0.3);
  const auto es2 = sl::eigen_system(shifted, {0, 0}, 40);
  const auto rep2 = uq::complement_inclusion_check(es2, 0.5, {0, 0}, shifted);
  EXPECT_TRUE(rep2.pass);
  EXPECT_EQ(rep2.entries.size(), 20u);
}

TEST(CountingBound, Cases) {
  const auto grid = geometric(100.0, 1e5, 41);
  // case (ii): Lambda = {4 n^2 pi^2}
  const auto even = squares(0, 400, 4.0);
  const auto half = uq::counting_bound_check(even, 0.5, grid);
  EXPECT_TRUE(half.pass);
  EXPECT_DOUBLE_EQ(half.factor, 0.5);
  // case (i): the full spectrum clears the bound at every x0
  const auto full = squares(0, 400);
  for (double x0 : {0.1, 1.0 / 3.0, 1.0 / std::sqrt(2.0), 0.9})
    EXPECT_TRUE(uq::counting_bound_check(full, x0, grid).pass) << x0;
  // a set thinned to every third square is too sparse for x0 = 1/2
  std::vector<double> sparse;
  for (int n = 0; n <= 400; n += 3) sparse.push_back(n * n * pi * pi);
  EXPECT_FALSE(uq::counting_bound_check({sparse, uq::SetLabel::kLambdaSet}, 0.5, grid).pass);

  // only the upper half of the grid is judged
  const auto low = uq::counting_bound_check(full, 0.5, geometric(1.0, 1e4, 20));
  int judged = 0;
  for (const auto& r : low.rows) judged += r.in_window;
  EXPECT_EQ(judged, 10);
  std::ostringstream os;
  low.write_csv(os);
  EXPECT_EQ(os.str().rfind("s,count,bound", 0), 0u);
}

TEST(Density, Cases) {
  const auto grid = geometric(1e3, 1e6, 31);
  const auto full = squares(0, 1000);
  const auto even = squares(0, 1000, 4.0);
  const auto i = uq::density_criterion(full, 0.99, grid);
  EXPECT_TRUE(i.pass);
  EXPECT_NEAR(i.estimate, 1.0 / pi, 0.01);
  EXPECT_DOUBLE_EQ(i.implied_d_max, 0.495);
  const auto ii = uq::density_criterion(even, 0.49, grid);
  EXPECT_TRUE(ii.pass);
  EXPECT_DOUBLE_EQ(ii.implied_d_max, 0.245);
  const auto bad = uq::density_criterion(even, 0.6, grid);
  EXPECT_FALSE(bad.pass);
  EXPECT_NEAR(bad.estimate, 0.5 / pi, 0.01);
  EXPECT_DOUBLE_EQ(bad.threshold, 0.6 / pi);
}

TEST(Classifier, EnumeratedCases) {
  for (const auto& c : cases::kRegionCases) {
    const auto v = uq::classify_region(c.d, c.x0, c.cert);
    EXPECT_EQ(v.verdict, c.expected) << "d=" << c.d << " x0=" << c.x0 << " " << v.note;
  }
  const auto weak = uq::classify_region(0.4, 0.3, uq::Certificate{0.9, 0.05});
  EXPECT_NE(weak.note.find("-1/4-d holds"), std::string::npos);
  EXPECT_THROW(uq::classify_region(1.0, 0.5), Error);
  EXPECT_THROW(uq::classify_region(0.0, 0.5), Error);
  EXPECT_THROW(uq::classify_region(0.5, 1.5), Error);
}

TEST(Classifier, DiagonalAndUpperBand) {
  for (int i = 1; i < 100; ++i) {
    const double d = i / 100.0;
    EXPECT_EQ(uq::classify_region(d, d).verdict, uq::Verdict::kTheorem1CaseI);
    if (d >= 0.5)
      for (double x0 = 0.0; x0 < d - 1e-9; x0 += 0.05) EXPECT_EQ(uq::classify_region(d, x0).verdict, uq::Verdict::kUnknown);
  }
}

TEST(RegionMap, PartitionAndTheorem2Measure) {
  const uq::Certificate cert{0.99, 0.2};
  const auto map = uq::region_map(100, cert);
  ASSERT_EQ(map.cells.size(), 10000u);
  int t2 = 0;
  for (std::size_t k = 0; k < map.cells.size(); ++k) {
    const auto& c = map.cells[k];
    EXPECT_NEAR(c.d, (k / 100 + 0.5) / 100.0, 1e-12);
    EXPECT_NEAR(c.x0, (k % 100 + 0.5) / 100.0, 1e-12);
    const bool i = c.d <= c.x0;
    const bool ii = c.d < 0.5 && c.x0 < std::min(c.d, 1 - 2 * c.d);
    EXPECT_FALSE(i && ii);
    if (c.verdict == uq::Verdict::kTheorem2Conditional) {
      ++t2;
      EXPECT_FALSE(i || ii);
    }
  }
  EXPECT_GT(t2, 0);
  const auto plain = uq::region_map(100);
  for (const auto& c : plain.cells) EXPECT_NE(c.verdict, uq::Verdict::kTheorem2Conditional);
  EXPECT_THROW(uq::region_map(5), Error);
  std::ostringstream os;
  uq::region_map(10).write_csv(os);
  int lines = 0;
  for (char ch : os.str()) lines += ch == '\n';
  EXPECT_EQ(lines, 101);
}
