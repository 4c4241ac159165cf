#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <vector>

#include "fracsl/error.hpp"
#include "fracsl/forward.hpp"

using namespace fracsl;
using fwd::DriveSignal;
using std::numbers::pi;

namespace {

const PotentialSpec kZero = PotentialSpec::constant(0.0);

PotentialSpec well() {
  return PotentialSpec::sampled([](double x) { return x < 0.5 ? -0.8 * (1 - 2 * x) * (1 - 2 * x) : 0.0; });
}

std::vector<double> uniform(double T, int n) {
  std::vector<double> t(static_cast<std::size_t>(n) + 1);
  for (int j = 0; j <= n; ++j) t[j] = T * j / n;
  return t;
}

// Heat equation u_t = u_xx, u_x(0) = 0, u_x(1) = t, u(x,0) = 0, summed in closed form.
double heat_ramp(double x, double t) {
  double u = 0.5 * t * t + t * (0.5 * x * x - 1.0 / 6) + x * x * x * x / 24 - x * x / 12 + 7.0 / 360;
  for (int n = 1; n < 200; ++n) {
    const double lam = n * n * pi * pi;
    u += 2.0 * (n % 2 ? -1.0 : 1.0) * std::cos(n * pi * x) * std::exp(-lam * t) / (lam * lam);
  }
  return u;
}

double max_abs(const std::vector<double>& v) {
  double m = 0.0;
  for (double a : v) m = std::max(m, std::abs(a));
  return m;
}

// Max-norm gap between a spectral field and an FD field sampled at the same (x, t).
double gap(const fwd::SpaceTimeField& s, const fwd::SpaceTimeField& fd) {
  const int nx = fd.nx, ratio = fd.nt / (static_cast<int>(s.t.size()) - 1);
  double g = 0.0;
  for (std::size_t p = 0; p < s.x.size(); ++p) {
    const auto i = static_cast<std::size_t>(std::lround(s.x[p] * nx));
    for (std::size_t j = 0; j < s.t.size(); ++j) g = std::max(g, std::abs(s.at(p, j) - fd.at(i, j * ratio)));
  }
  return g;
}

double fd_self_gap(const fwd::SpaceTimeField& a, const fwd::SpaceTimeField& b, const std::vector<double>& xs) {
  double g = 0.0;
  for (double x : xs) {
    const auto i = static_cast<std::size_t>(std::lround(x * a.nx));
    const auto k = static_cast<std::size_t>(std::lround(x * b.nx));
    for (int j = 0; j <= a.nt; ++j) g = std::max(g, std::abs(a.at(i, j) - b.at(k, 2 * j)));
  }
  return g;
}

const std::vector<double> kX{0.0, 0.25, 0.5, 0.75, 1.0};

}  // namespace

TEST(Drive, ContractAndCsvRoundTrip) {
  EXPECT_THROW(DriveSignal({0.0, 1.0}, {0.5, 1.0}), Error);
  EXPECT_THROW(DriveSignal({0.0, 1.0, 0.5}, {0.0, 1.0, 2.0}), Error);
  EXPECT_THROW(DriveSignal({0.0, 1.0}, {0.0}), Error);
  const auto d = DriveSignal::sampled([](double t) { return std::sin(3 * t); }, 2.0, 40);
  EXPECT_EQ(d.intervals(), 40);
  EXPECT_NEAR(d.uniform_step(), 0.05, 1e-15);
  EXPECT_NEAR(d(0.025), 0.5 * std::sin(0.15), 1e-15);
  std::stringstream ss;
  d.write_csv(ss);
  const auto back = DriveSignal::read_csv(ss);
  ASSERT_EQ(back.values().size(), d.values().size());
  for (std::size_t i = 0; i < d.values().size(); ++i) EXPECT_EQ(back.values()[i], d.values()[i]);
  const auto cut = d.truncated(1.0);
  EXPECT_EQ(cut(1.5), 0.0);
  EXPECT_EQ(cut(0.5), d(0.5));
}

TEST(Spectral, ZeroDriveAndZeroStart) {
  const auto es = sl::eigen_system(well(), {0.5, 1.0}, 63);
  const auto zero = DriveSignal(uniform(1.0, 64), std::vector<double>(65, 0.0));
  const auto u0 = fwd::solve_spectral(es, 0.5, zero, kX, zero.t());
  EXPECT_EQ(max_abs(u0.values), 0.0);
  const auto fd0 = fwd::solve_l1_fd(well(), {0.5, 1.0}, 0.5, zero, 64, 64);
  EXPECT_EQ(max_abs(fd0.values), 0.0);

  const auto eta = DriveSignal::sampled([](double t) { return t * t; }, 1.0, 64);
  const auto u = fwd::solve_spectral(es, 0.5, eta, kX, eta.t());
  const auto fd = fwd::solve_l1_fd(well(), {0.5, 1.0}, 0.5, eta, 64, 64);
  for (std::size_t p = 0; p < kX.size(); ++p) EXPECT_EQ(u.at(p, 0), 0.0);
  for (int i = 0; i <= 64; ++i) EXPECT_EQ(fd.at(i, 0), 0.0);
}

TEST(Spectral, LinearInDrive) {
  const auto es = sl::eigen_system(well(), {0.5, 1.0}, 63);
  const auto eta = DriveSignal::sampled([](double t) { return std::sin(4 * t) * t; }, 1.0, 128);
  const auto a = fwd::solve_spectral(es, 0.6, eta, kX, eta.t());
  const auto b = fwd::solve_spectral(es, 0.6, eta.scaled(2.0), kX, eta.t());
  for (std::size_t i = 0; i < a.values.size(); ++i) EXPECT_NEAR(b.values[i], 2.0 * a.values[i], 1e-12);
}

TEST(Spectral, Causal) {
  const auto es = sl::eigen_system(well(), {0.5, 1.0}, 63);
  const auto eta = DriveSignal::sampled([](double t) { return t * (2 - t); }, 2.0, 128);
  const auto full = fwd::solve_spectral(es, 0.5, eta, kX, eta.t());
  const auto cut = fwd::solve_spectral(es, 0.5, eta.truncated(1.0), kX, eta.t());
  const auto fd_full = fwd::solve_l1_fd(well(), {0.5, 1.0}, 0.5, eta, 64, 128);
  const auto fd_cut = fwd::solve_l1_fd(well(), {0.5, 1.0}, 0.5, eta.truncated(1.0), 64, 128);
  for (std::size_t p = 0; p < kX.size(); ++p)
    for (int j = 0; j <= 64; ++j) EXPECT_NEAR(full.at(p, j), cut.at(p, j), 1e-13);
  for (int i = 0; i <= 64; ++i)
    for (int j = 0; j <= 64; ++j) EXPECT_EQ(fd_full.at(i, j), fd_cut.at(i, j));
  double later = 0.0;
  for (std::size_t p = 0; p < kX.size(); ++p) later = std::max(later, std::abs(full.at(p, 128) - cut.at(p, 128)));
  EXPECT_GT(later, 1e-3);
}

TEST(Spectral, HeatEquationClosedForm) {
  const auto es = sl::eigen_system(kZero, {0, 0}, 63);
  const auto eta = DriveSignal::sampled([](double t) { return t; }, 1.0, 50);
  const auto u = fwd::solve_spectral(es, 1.0, eta, kX, eta.t());
  double err = 0.0, scale = 0.0;
  for (std::size_t p = 0; p < kX.size(); ++p)
    for (std::size_t j = 0; j < eta.t().size(); ++j) {
      const double ref = heat_ramp(kX[p], eta.t()[j]);
      err = std::max(err, std::abs(u.at(p, j) - ref));
      scale = std::max(scale, std::abs(ref));
    }
  EXPECT_LE(err, 1e-7 * scale);
  EXPECT_LE(err, u.tail_bound + 1e-12);
}

TEST(Spectral, ModeDoublingWithinTailBound) {
  const auto es = sl::eigen_system(well(), {0.5, 1.0}, 127);
  const auto eta = DriveSignal::sampled([](double t) { return t * t; }, 1.0, 64);
  fwd::SpectralOptions o;
  o.n_modes = 32;
  const auto a = fwd::solve_spectral(es, 0.5, eta, kX, eta.t(), o);
  o.n_modes = 64;
  const auto b = fwd::solve_spectral(es, 0.5, eta, kX, eta.t(), o);
  double d = 0.0;
  for (std::size_t i = 0; i < a.values.size(); ++i) d = std::max(d, std::abs(a.values[i] - b.values[i]));
  EXPECT_LE(d, a.tail_bound);
  EXPECT_LT(b.tail_bound, a.tail_bound);
}

TEST(Spectral, RejectsCoarseTruncationAndBadGrids) {
  const auto es = sl::eigen_system(well(), {0.5, 1.0}, 63);
  const auto eta = DriveSignal::sampled([](double t) { return t; }, 1.0, 64);
  fwd::SpectralOptions o;
  o.n_modes = 2;
  o.tail_correction = false;
  try {
    fwd::solve_spectral(es, 0.5, eta, kX, eta.t(), o);
    ADD_FAILURE() << "expected TruncationTooCoarse";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kTruncationTooCoarse);
  }
  try {
    fwd::solve_spectral(es, 0.5, eta, kX, uniform(2.0, 10));
    ADD_FAILURE() << "expected IncompatibleGrids";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kIncompatibleGrids);
  }
}

TEST(QuasiStatic, RemainderMatchesGreenFunction) {
  // G_c(x) = cosh(sqrt(c) x) / (sqrt(c) sinh sqrt(c)) for q = 0, h = H = 0
  const auto es = sl::eigen_system(kZero, {0, 0}, 40);
  const double c = 1.0;
  for (double x : {0.0, 0.3, 1.0}) {
    const double g = std::cosh(x) / std::sinh(1.0);
    EXPECT_NEAR(fwd::quasi_static_remainder(es, 0, x, c), g, 1e-9);
    double tail = 0.0;
    constexpr int kLast = 2000000;
    for (int n = 20; n < kLast; ++n) {
      const double k = n * pi;
      tail += 2.0 * (n % 2 ? -1.0 : 1.0) * std::cos(k * x) / (k * k + c);
    }
    // at x = 1 the terms do not alternate; add sum_{n >= kLast} 2 / (n pi)^2
    if (x == 1.0) tail += 2.0 / (pi * pi * (kLast - 0.5));
    EXPECT_NEAR(fwd::quasi_static_remainder(es, 20, x, c), tail, 1e-9);
  }
}

TEST(L1Fd, BackwardEulerConvergesToHeatSolution) {
  const auto eta = DriveSignal::sampled([](double t) { return t; }, 1.0, 256);
  double prev = 1.0;
  for (auto [nx, nt] : {std::pair{32, 64}, {64, 128}, {128, 256}}) {
    const auto fd = fwd::solve_l1_fd(kZero, {0, 0}, 1.0, eta, nx, nt);
    double err = 0.0;
    for (int i = 0; i <= nx; i += nx / 4)
      for (int j = 0; j <= nt; ++j) err = std::max(err, std::abs(fd.at(i, j) - heat_ramp(fd.x[i], fd.t[j])));
    EXPECT_LT(err, 0.6 * prev);
    prev = err;
  }
  EXPECT_LT(prev, 5e-3);
}

TEST(L1Fd, SelfRefinementShrinks) {
  const auto eta = DriveSignal::sampled([](double t) { return t * t; }, 1.0, 512);
  std::vector<fwd::SpaceTimeField> runs;
  for (int k = 0; k < 4; ++k) runs.push_back(fwd::solve_l1_fd(well(), {0.5, 1.0}, 0.5, eta, 32 << k, 64 << k));
  double prev = 1.0;
  for (int k = 0; k < 3; ++k) {
    const double g = fd_self_gap(runs[k], runs[k + 1], kX);
    EXPECT_LT(g, prev);
    prev = g;
  }
  EXPECT_THROW(fwd::solve_l1_fd(kZero, {0, 0}, 0.5, eta, 16, 64), Error);
}

class CrossValidation : public ::testing::TestWithParam<double> {};

TEST_P(CrossValidation, SpectralAgreesWithFiniteDifferences) {
  const double alpha = GetParam();
  const auto q = well();
  const RobinPair robin{0.5, 1.0};
  const auto es = sl::eigen_system(q, robin, 63);
  const int nx = 128, nt = 256;
  const auto eta = DriveSignal::sampled([](double t) { return t * t * (1.5 - t); }, 1.0, nt);
  const auto u = fwd::solve_spectral(es, alpha, eta, kX, eta.t());
  const auto fd = fwd::solve_l1_fd(q, robin, alpha, eta, nx, nt);
  const auto fd2 = fwd::solve_l1_fd(q, robin, alpha, eta, 2 * nx, 2 * nt);
  const double scale = max_abs(u.values);
  const double budget = fd_self_gap(fd, fd2, kX) / scale;
  EXPECT_LE(gap(u, fd) / scale, 1e-3 + budget) << "budget " << budget;
}

INSTANTIATE_TEST_SUITE_P(Orders, CrossValidation, ::testing::Values(0.3, 0.5, 0.7, 1.0));

TEST(Kernel, StartsAtZeroAndMatchesPowerLaw) {
  const auto es = sl::eigen_system(kZero, {0, 0}, 63);
  const auto t = uniform(2.0, 40);
  for (double a : {0.4, 0.8}) {
    const auto k = fwd::kernel_K(es, a, 0.3, t, 64);
    EXPECT_EQ(k.values.front(), 0.0);
    EXPECT_EQ(k.primitive.front(), 0.0);
    fwd::KernelOptions raw;
    raw.tail_correction = false;
    const auto k0 = fwd::kernel_K(es, a, 0.3, t, 1, raw);
    for (std::size_t i = 0; i < t.size(); ++i) {
      EXPECT_NEAR(k0.values[i], std::pow(t[i], a) / std::tgamma(a + 1), 1e-13);
      EXPECT_NEAR(k0.primitive[i], std::pow(t[i], a + 1) / std::tgamma(a + 2), 1e-13);
    }
  }
}

TEST(Kernel, BoundedAndStableUnderModeDoubling) {
  const auto es = sl::eigen_system(well(), {0.5, 1.0}, 127);
  std::vector<double> t{0.0};
  for (double v = 1e-2; v <= 1e3; v *= 1.5) t.push_back(v);
  const auto a = fwd::kernel_K(es, 0.5, 0.6, t, 64);
  const auto b = fwd::kernel_K(es, 0.5, 0.6, t, 128);
  for (std::size_t i = 0; i < t.size(); ++i) {
    EXPECT_TRUE(std::isfinite(a.values[i]));
    EXPECT_NEAR(a.values[i], b.values[i], a.tail_bound + 1e-12);
  }
  // h > 0 leaves no zero mode, so K settles at the static Green's function value
  EXPECT_NEAR(a.values.back(), a.values[a.values.size() - 2], 1e-2 * std::abs(a.values.back()));
}

TEST(Duhamel, ResidualSmallAndDecreasesUnderRefinement) {
  const auto es = sl::eigen_system(kZero, {0, 0}, 63);
  const std::vector<double> x{0.5};
  double prev = 0.0;
  for (int nt : {128, 256, 512}) {
    const auto eta = DriveSignal::sampled([](double t) { return t * t; }, 1.0, nt);
    const auto u = fwd::solve_spectral(es, 0.5, eta, x, eta.t());
    const auto k = fwd::kernel_K(es, 0.5, 0.5, eta.t(), 64);
    double scale = 0.0, acc = 0.0;
    for (int j = 1; j <= nt; ++j) {
      acc += 0.5 * (u.at(0, j - 1) + u.at(0, j)) / nt;
      scale = std::max(scale, std::abs(acc));
    }
    const double r = fwd::duhamel_residual(u, k, eta);
    if (nt == 512) EXPECT_LE(r, 1e-4 * scale);
    if (prev > 0.0) EXPECT_LE(r, 0.5 * prev * 1.05);
    prev = r;
  }
  const auto zero = DriveSignal(uniform(1.0, 64), std::vector<double>(65, 0.0));
  const auto u0 = fwd::solve_spectral(es, 0.5, zero, x, zero.t());
  EXPECT_EQ(fwd::duhamel_residual(u0, fwd::kernel_K(es, 0.5, 0.5, zero.t(), 64), zero), 0.0);
}
