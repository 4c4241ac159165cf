#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <vector>

#include "fracsl/error.hpp"
#include "fracsl/inverse.hpp"
#include "fracsl/uniqueness.hpp"

using namespace fracsl;

namespace {

const inv::FdSettings kFd{64, 256};

struct Problem {
  inv::InverseProblemSpec spec;
  inv::CandidateParam truth;
};

std::vector<double> sample_times(int k) {
  std::vector<double> t;
  for (int i = 1; i <= k; ++i) t.push_back(static_cast<double>(i) / k);
  return t;
}

// Small case-i problem; data from the spectral model at a truth inside the basis.
Problem crime_problem() {
  Problem p;
  auto& s = p.spec;
  s.alpha = 0.5;
  s.d = 0.5;
  s.x0 = 0.6;
  s.H = 0.0;
  s.q_tail = PotentialSpec::constant(0.0, 256);
  s.eta = fwd::DriveSignal::sampled([](double t) { return t * t; }, 1.0, 128);
  s.data.t = sample_times(32);
  s.data.u.assign(32, 0.0);
  p.truth.coeffs = {0.4, 0.1, 0.05};
  p.truth.h = 0.5;
  s.data.u = inv::predict(p.truth, s);
  return p;
}

double norm2(const std::vector<double>& v) { return std::inner_product(v.begin(), v.end(), v.begin(), 0.0); }

}  // namespace

TEST(Candidate, GluedAdmissibleBasis) {
  const auto p = crime_problem();
  const auto q = inv::candidate_potential(p.truth, p.spec, 256);
  EXPECT_TRUE(q.admissible());
  EXPECT_NEAR(q(0.5), 0.0, 1e-12);
  EXPECT_EQ(q(0.8), 0.0);
  EXPECT_NEAR(q(0.0), -0.4 - 0.1 * 2 - 0.05, 1e-12);
  inv::CandidateParam neg{{-0.5}, 0.1};
  EXPECT_FALSE(inv::candidate_potential(neg, p.spec, 256).admissible());
  EXPECT_TRUE(inv::candidate_potential(neg, p.spec, 256, true).admissible());
  inv::CandidateParam big{std::vector<double>(17, 0.0), 0.1};
  EXPECT_THROW(inv::candidate_potential(big, p.spec, 256), Error);
}

TEST(Synthesis, ExactDeterministicAndCalibrated) {
  const auto p = crime_problem();
  const auto q = inv::candidate_potential(p.truth, p.spec, 512);
  const auto t = sample_times(64);
  const auto clean = inv::synthesize_data(q, 0.5, 0.0, 0.5, p.spec.eta, 0.6, t, 0.0, 1, kFd);
  EXPECT_EQ(clean.u, inv::fd_trace(q, {0.5, 0.0}, 0.5, p.spec.eta, 0.6, t, kFd));
  const auto a = inv::synthesize_data(q, 0.5, 0.0, 0.5, p.spec.eta, 0.6, t, 0.01, 7, kFd);
  const auto b = inv::synthesize_data(q, 0.5, 0.0, 0.5, p.spec.eta, 0.6, t, 0.01, 7, kFd);
  EXPECT_EQ(a.u, b.u);
  const double signal = std::sqrt(norm2(clean.u));
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const auto n = inv::synthesize_data(q, 0.5, 0.0, 0.5, p.spec.eta, 0.6, t, 0.01, seed, kFd);
    std::vector<double> diff(t.size());
    for (std::size_t k = 0; k < t.size(); ++k) diff[k] = n.u[k] - clean.u[k];
    const double rel = std::sqrt(norm2(diff)) / signal;
    EXPECT_GE(rel, 0.005) << seed;
    EXPECT_LE(rel, 0.02) << seed;
  }
  EXPECT_THROW(inv::synthesize_data(PotentialSpec::constant(0.2), 0.5, 0.0, 0.5, p.spec.eta, 0.6, t, 0.0, 1, kFd), Error);
}

TEST(Misfit, ZeroAtTruthInverseCrime) {
  const auto p = crime_problem();
  EXPECT_LE(inv::misfit(p.truth, p.spec, 0.0), 1e-24 * norm2(p.spec.data.u));
}

TEST(Misfit, WithinSolverBudgetOnFdData) {
  auto p = crime_problem();
  const auto q = inv::candidate_potential(p.truth, p.spec, 2048);
  p.spec.data = inv::synthesize_data(q, p.truth.h, 0.0, 0.5, p.spec.eta, 0.6, p.spec.data.t, 0.0, 0, {256, 1024});
  EXPECT_LE(inv::misfit(p.truth, p.spec, 0.0), 1e-6 * norm2(p.spec.data.u));
  EXPECT_GT(inv::misfit(p.truth, p.spec, 0.0), 0.0);
}

TEST(Misfit, ReorderInvariantAndMonotoneInGamma) {
  auto p = crime_problem();
  inv::CandidateParam c{{0.2, 0.0, 0.1}, 0.3};
  const double base = inv::misfit(c, p.spec, 0.0);
  std::vector<std::size_t> perm(p.spec.data.t.size());
  std::iota(perm.begin(), perm.end(), 0);
  std::mt19937 rng(3);
  std::shuffle(perm.begin(), perm.end(), rng);
  auto shuffled = p.spec;
  for (std::size_t k = 0; k < perm.size(); ++k) {
    shuffled.data.t[k] = p.spec.data.t[perm[k]];
    shuffled.data.u[k] = p.spec.data.u[perm[k]];
  }
  EXPECT_NEAR(inv::misfit(c, shuffled, 0.0), base, 1e-12 * base);
  double prev = base;
  for (double g : {1e-8, 1e-4, 1e-2, 1.0}) {
    const double m = inv::misfit(c, p.spec, g);
    EXPECT_GT(m, prev);
    prev = m;
  }
  EXPECT_THROW(inv::misfit(c, p.spec, -1.0), Error);
}

TEST(Reconstruct, ZeroUnknownSmoke) {
  auto p = crime_problem();
  inv::CandidateParam c0{{}, p.truth.h};
  p.spec.data.u = inv::predict(c0, p.spec);
  inv::ReconstructOptions o;
  o.basis_dim = 0;
  o.estimate_h = false;
  o.gamma = 0.0;
  const auto r = inv::reconstruct(p.spec, c0, o);
  EXPECT_EQ(r.h_hat, p.truth.h);
  EXPECT_TRUE(r.param.coeffs.empty());
  EXPECT_LE(r.misfit_history.back(), 1e-24 * norm2(p.spec.data.u));
}

TEST(Reconstruct, NoiseFreeFixedPoint) {
  const auto p = crime_problem();
  inv::ReconstructOptions o;
  o.basis_dim = 3;
  o.gamma = 0.0;
  const auto r = inv::reconstruct(p.spec, p.truth, o);
  EXPECT_LE(r.iterations, 2) << r.termination;
  for (int m = 0; m < 3; ++m) EXPECT_NEAR(r.param.coeffs[m], p.truth.coeffs[m], 1e-8);
  EXPECT_NEAR(r.h_hat, p.truth.h, 1e-8);
}

TEST(Reconstruct, MonotoneHistoryAndAdmissibleIterates) {
  const auto p = crime_problem();
  inv::ReconstructOptions o;
  o.basis_dim = 3;
  o.max_iterations = 30;
  o.truth = inv::Truth{inv::candidate_potential(p.truth, p.spec, 512), p.truth.h};
  const auto r = inv::reconstruct(p.spec, {{0.0, 0.0, 0.0}, 0.1}, o);
  ASSERT_GE(r.misfit_history.size(), 2u);
  for (std::size_t k = 1; k < r.misfit_history.size(); ++k) EXPECT_LE(r.misfit_history[k], r.misfit_history[k - 1]);
  EXPECT_LT(r.misfit_history.back(), 1e-4 * r.misfit_history.front());
  EXPECT_TRUE(r.q_hat.admissible());
  EXPECT_GE(r.h_hat, 0.0);
  ASSERT_TRUE(r.metrics.has_value());
  EXPECT_LT(r.metrics->abs_err_h, 0.05);
  EXPECT_NE(r.to_json().find("\"termination\""), std::string::npos);
  EXPECT_TRUE(r.warnings.empty());
}

TEST(Reconstruct, WarnsOutsideUniquenessRegion) {
  auto p = crime_problem();
  p.spec.d = 0.7;
  p.spec.x0 = 0.3;
  ASSERT_EQ(uq::classify_region(0.7, 0.3).verdict, uq::Verdict::kUnknown);
  inv::ReconstructOptions o;
  o.basis_dim = 1;
  o.max_iterations = 1;
  const auto r = inv::reconstruct(p.spec, {{0.0}, 0.1}, o);
  EXPECT_FALSE(r.warnings.empty());
}

TEST(Serialization, SpecRoundTrip) {
  const auto p = crime_problem();
  const auto back = inv::InverseProblemSpec::from_json(p.spec.to_json());
  EXPECT_EQ(back.alpha, p.spec.alpha);
  EXPECT_EQ(back.x0, p.spec.x0);
  EXPECT_EQ(back.d, p.spec.d);
  EXPECT_EQ(back.data.u, p.spec.data.u);
  EXPECT_EQ(back.eta.values(), p.spec.eta.values());
  EXPECT_EQ(back.to_json(), p.spec.to_json());
  auto bad = p.spec;
  bad.data.t.push_back(5.0);
  bad.data.u.push_back(0.0);
  EXPECT_THROW(bad.validate(), Error);
}

TEST(MatchAudit, IdenticalAndShifted) {
  const auto q = PotentialSpec::sampled([](double x) { return -0.5 * x * (1 - x); });
  const auto es = sl::eigen_system(q, {0.5, 0.2}, 30);
  const auto same = inv::spectral_match_audit(es, es, 0.6, 1e-12);
  EXPECT_GT(same.audited, 0);
  EXPECT_EQ(same.matched, same.audited);
  const auto es2 = sl::eigen_system(q.shifted(0.1), {0.5, 0.2}, 30, {.allow_inadmissible = true});
  const auto shifted = inv::spectral_match_audit(es, es2, 0.6, 1e-3);
  EXPECT_EQ(shifted.audited, same.audited);
  EXPECT_EQ(shifted.matched, 0);
  for (const auto& e : shifted.entries) EXPECT_NEAR(e.lambda_gap, 0.1, 1e-7);
}

TEST(Distinguishability, GapsAgainstNoiseFloor) {
  const double d = 0.5;
  const auto zero = PotentialSpec::constant(0.0);
  const auto bump = PotentialSpec::sampled([d](double x) {
    return x < d ? -0.5 * std::pow(std::sin(std::numbers::pi * x / d), 2) : 0.0;
  });
  const auto eta = fwd::DriveSignal::sampled([](double t) { return t * t; }, 1.0, 256);
  const auto t = sample_times(64);
  const std::vector<std::pair<inv::Truth, inv::Truth>> pairs{
      {{zero, 0.5}, {bump, 0.5}},
      {{zero, 0.0}, {zero, 1.0}},
      {{bump, 0.5}, {bump, 0.5}},
  };
  const auto rows = inv::distinguishability_scan(pairs, d, 0.0, 0.6, 0.5, eta, t, {}, {128, 1024});
  ASSERT_EQ(rows.size(), 3u);
  EXPECT_GT(rows[0].gap, 10 * rows[0].noise_floor);
  EXPECT_GT(rows[1].gap, 10 * rows[1].noise_floor);
  EXPECT_LE(rows[2].gap, rows[2].noise_floor);
  const std::vector<std::pair<inv::Truth, inv::Truth>> unmatched{{{zero, 0.5}, {PotentialSpec::constant(-0.1), 0.5}}};
  EXPECT_THROW(inv::distinguishability_scan(unmatched, d, 0.0, 0.6, 0.5, eta, t), Error);
}
