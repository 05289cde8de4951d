// Copyright 2026 The mposterior Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <sstream>
#include <vector>

#include "mposterior/error.hpp"
#include "mposterior/inference.hpp"
#include "mposterior/posterior.hpp"
#include "support/fixtures.hpp"

namespace mpost {
namespace {

using testing::exponential_draws;
using testing::normal_draws;

double weighted_score(const LossModel& l, const WeightedSample& s, double t) {
  double acc = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) acc += s.weights()[i] * l.psi(s.points()[i], t);
  return acc;
}

double objective(const LossModel& l, const WeightedSample& s, double t) {
  double acc = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) acc += s.weights()[i] * l.rho(s.points()[i], t);
  return acc;
}

TEST(MEstimate, ConstantSample) {
  const WeightedSample s(std::vector<double>(25, 1.234));
  const MEstimate e = m_estimate_1d(huber_loss(1.0), s, {-10.0, 10.0});
  ASSERT_TRUE(e.converged);
  EXPECT_NEAR(e.theta_hat, 1.234, 1e-9);
}

TEST(MEstimate, CheckLossMedian) {
  auto xs = normal_draws(21, 4);
  const WeightedSample s(xs);
  const MEstimate e = m_estimate_1d(check_loss(0.5), s, default_bracket(check_loss(0.5), s));
  ASSERT_TRUE(e.converged);
  std::sort(xs.begin(), xs.end());
  EXPECT_NEAR(e.theta_hat, xs[10], 1e-8);
  EXPECT_LE(e.bracket_width, 1e-8);
}

TEST(MEstimate, ScoreVanishesAtRoot) {
  const WeightedSample s(normal_draws(200, 5), std::vector<double>(200, 0.7));
  for (const LossModel& l : {huber_loss(1.0), squared_loss(), huber_loss(0.3)}) {
    const MEstimate e = m_estimate_1d(l, s, default_bracket(l, s));
    ASSERT_TRUE(e.converged);
    EXPECT_LE(std::abs(weighted_score(l, s, e.theta_hat)), 1e-8 * (1.0 + s.total_weight()));
  }
}

TEST(MEstimate, RedescendingGlobalMinimum) {
  auto xs = normal_draws(15, 6);
  for (int i = 0; i < 5; ++i) xs.push_back(40.0 + 0.1 * i);
  const WeightedSample s(xs);
  const LossModel l = reweighted_gaussian_loss(3.0, 1.0);
  const MEstimate e = m_estimate_1d(l, s, default_bracket(l, s));
  ASSERT_TRUE(e.converged);
  EXPECT_LT(std::abs(e.theta_hat), 1.5);
  const double lo = *std::min_element(xs.begin(), xs.end()) - 3.0;
  const double hi = *std::max_element(xs.begin(), xs.end()) + 3.0;
  double best = kInf;
  for (double t : linspace(lo, hi, 200001)) best = std::min(best, objective(l, s, t));
  EXPECT_LE(e.objective_value, best + 1e-9);
}

TEST(MEstimate, BruteForceScanAgreement) {
  for (std::uint64_t seed = 1; seed <= 4; ++seed) {
    const WeightedSample s(normal_draws(static_cast<int>(5 + 4 * seed), seed));
    for (const LossModel& l : {huber_loss(1.0), check_loss(0.3), absolute_loss()}) {
      const auto br = default_bracket(l, s);
      const MEstimate e = m_estimate_1d(l, s, br);
      const auto grid = linspace(br.first, br.second, 1000000);
      double best = kInf, arg = 0.0;
      for (double t : grid) {
        const double v = objective(l, s, t);
        if (v < best) best = v, arg = t;
      }
      EXPECT_NEAR(e.theta_hat, arg, 1.01 * (grid[1] - grid[0])) << l.name();
    }
  }
}

TEST(MEstimate, WeightScalingLeavesRootUnchanged) {
  const auto xs = normal_draws(60, 8);
  const LossModel l = huber_loss(1.0);
  const WeightedSample unit(xs);
  const double base = m_estimate_1d(l, unit, default_bracket(l, unit)).theta_hat;
  for (double k : {0.1, 3.0, 50.0}) {
    const WeightedSample w(xs, std::vector<double>(xs.size(), k));
    EXPECT_NEAR(m_estimate_1d(l, w, default_bracket(l, w)).theta_hat, base, 1e-9);
  }
}

TEST(MEstimate, Errors) {
  const WeightedSample s(normal_draws(10, 9));
  EXPECT_THROW(m_estimate_1d(huber_loss(1.0), s, {50.0, 60.0}), BracketingError);
  EXPECT_THROW(m_estimate_1d(huber_loss(1.0), s, {1.0, 1.0}), InvalidArgument);
}

TEST(MEstimate, ExponentialHuberBiasAndCorrection) {
  const LossModel loss = exponential_huber_loss(1.0);
  const auto reference = exponential_draws(1000000, 1001);
  const LossModel corrected = bias_correct(loss, estimate_bias(loss, reference, 1.0));
  const WeightedSample big(exponential_draws(10000, 1002));
  const auto br = default_bracket(loss, big);
  const double raw = m_estimate_1d(loss, big, br).theta_hat;
  const double fixed = m_estimate_1d(corrected, big, br).theta_hat;
  EXPECT_GT(std::abs(raw - 1.0), 5.0 * bootstrap_se(loss, big, br, 200, 1003));
  EXPECT_LT(std::abs(fixed - 1.0), 3.0 * bootstrap_se(corrected, big, br, 200, 1004));
}

TEST(QuantileRegression, InterceptOnly) {
  auto ys = normal_draws(31, 12);
  const DesignMatrix d = DesignMatrix::intercept_only(ys.size());
  const auto beta = quantile_regression_fit(d, ys, 0.5);
  ASSERT_EQ(beta.size(), 1u);
  std::sort(ys.begin(), ys.end());
  EXPECT_NEAR(beta[0], ys[15], 1e-6);
}

TEST(QuantileRegression, LowerQuartileFlatRegion) {
  std::vector<double> ys;
  for (int i = 1; i <= 20; ++i) ys.push_back(i);
  const DesignMatrix d = DesignMatrix::intercept_only(ys.size());
  const auto beta = quantile_regression_fit(d, ys, 0.25);
  EXPECT_NEAR(beta[0], 5.25, 0.76);
  double best = kInf;
  for (double b : linspace(0.0, 21.0, 210001)) {
    const std::vector<double> bb = {b};
    best = std::min(best, check_objective(d, ys, 0.25, bb));
  }
  EXPECT_LE(check_objective(d, ys, 0.25, beta), best + 1e-9);
}

TEST(QuantileRegression, ExactFit) {
  const std::size_t n = 30;
  DesignMatrix d(n, 3);
  std::vector<double> ys(n);
  const double beta_star[] = {1.5, -2.0, 0.25};
  const auto xs = normal_draws(static_cast<int>(2 * n), 13);
  for (std::size_t i = 0; i < n; ++i) {
    d(i, 0) = 1.0;
    d(i, 1) = xs[2 * i];
    d(i, 2) = xs[2 * i + 1];
    ys[i] = beta_star[0] + beta_star[1] * d(i, 1) + beta_star[2] * d(i, 2);
  }
  for (double tau : {0.2, 0.5, 0.8}) {
    const auto beta = quantile_regression_fit(d, ys, tau);
    for (int j = 0; j < 3; ++j) EXPECT_NEAR(beta[static_cast<std::size_t>(j)], beta_star[j], 1e-6);
  }
}

TEST(QuantileRegression, Errors) {
  DesignMatrix d(10, 2);
  std::vector<double> ys(10);
  for (std::size_t i = 0; i < 10; ++i) {
    d(i, 0) = 1.0;
    d(i, 1) = 2.0;
    ys[i] = static_cast<double>(i);
  }
  try {
    quantile_regression_fit(d, ys, 0.5);
    FAIL() << "expected RankDeficientError";
  } catch (const RankDeficientError& e) {
    EXPECT_EQ(e.deficient_columns(), 1);
  }
  const DesignMatrix one = DesignMatrix::intercept_only(10);
  EXPECT_THROW(quantile_regression_fit(one, ys, 0.0), InvalidArgument);
  EXPECT_THROW(quantile_regression_fit(DesignMatrix::intercept_only(1), std::vector<double>{1.0},
                                       0.5),
               InvalidArgument);
}

TEST(MhSample, StandardNormalTarget) {
  const auto target = [](double t) { return -0.5 * t * t; };
  const Chain c = mh_sample(target, 0.0, 200000, 2.4, 7);
  EXPECT_EQ(c.draws.size(), 200000u);
  EXPECT_EQ(c.burn_in, 40000);
  EXPECT_EQ(c.seed, 7u);
  EXPECT_GT(c.acceptance_rate, 0.0);
  EXPECT_LT(c.acceptance_rate, 1.0);
  const auto kept = c.kept();
  double mean = 0.0, var = 0.0;
  for (double x : kept) mean += x;
  mean /= static_cast<double>(kept.size());
  for (double x : kept) var += (x - mean) * (x - mean);
  var /= static_cast<double>(kept.size() - 1);
  EXPECT_NEAR(mean, 0.0, 0.02);
  EXPECT_NEAR(var, 1.0, 0.05);
}

TEST(MhSample, AcceptanceRateIsExactFraction) {
  const auto target = [](double t) { return -std::abs(t); };
  const Chain c = mh_sample(target, 0.0, 5000, 1.0, 0, 3);
  int moves = 0;
  for (std::size_t i = 1; i < c.draws.size(); ++i) moves += c.draws[i] != c.draws[i - 1];
  const double lower = static_cast<double>(moves) / 5000.0;
  EXPECT_GE(c.acceptance_rate, lower);
  EXPECT_LE(c.acceptance_rate, lower + 1.0 / 5000.0);
  EXPECT_EQ(c.acceptance_rate * 5000.0, std::round(c.acceptance_rate * 5000.0));
}

TEST(MhSample, Deterministic) {
  const auto target = [](double t) { return -0.5 * t * t; };
  const Chain a = mh_sample(target, 0.3, 10000, 1.0, 42);
  const Chain b = mh_sample(target, 0.3, 10000, 1.0, 42);
  EXPECT_EQ(a.draws, b.draws);
  EXPECT_EQ(a.acceptance_rate, b.acceptance_rate);
  const Chain c = mh_sample(target, 0.3, 10000, 1.0, 43);
  EXPECT_NE(a.draws, c.draws);
}

TEST(MhSample, Errors) {
  const auto target = [](double t) { return t > 0.0 ? 0.0 : -kInf; };
  EXPECT_THROW(mh_sample(target, -1.0, 100, 1.0, 1), InvalidArgument);
  EXPECT_THROW(mh_sample(target, 1.0, 100, 0.0, 1), InvalidArgument);
  EXPECT_THROW(mh_sample(target, 1.0, 100, 1.0, 100, 1), InvalidArgument);
  EXPECT_THROW(mh_sample(target, 1.0, 0, 1.0, 0, 1), InvalidArgument);
}

TEST(MhSample, HuberPosteriorMatchesGrid) {
  const WeightedSample s(normal_draws(1000, 14));
  const LossModel l = huber_loss(1.0);
  const PriorModel prior = flat_prior();
  const GridPosterior post = build_posterior(l, prior, s);
  const double gm = posterior_mean(post), gv = posterior_variance(post);
  const Chain c = mh_sample(make_log_unnorm(l, prior, s), gm, 200000, 2.4 * std::sqrt(gv), 15);
  const auto kept = c.kept();
  const MeanSe m = batch_means(kept);
  std::vector<double> sq(kept.size());
  for (std::size_t i = 0; i < kept.size(); ++i) sq[i] = (kept[i] - gm) * (kept[i] - gm);
  const MeanSe v = batch_means(sq);
  EXPECT_LT(std::abs(m.mean - gm), 3.0 * m.se);
  EXPECT_LT(std::abs(v.mean - gv), 3.0 * v.se);
}

TEST(MhSample, ProposalScaleRobustness) {
  const WeightedSample s(normal_draws(200, 16));
  const LossModel l = huber_loss(1.0);
  const GridPosterior post = build_posterior(l, flat_prior(), s);
  const double sd = std::sqrt(posterior_variance(post));
  std::vector<MeanSe> est;
  std::uint64_t seed = 100;
  for (double f : {0.5, 1.0, 2.0}) {
    const Chain c = mh_sample(make_log_unnorm(l, flat_prior(), s), posterior_mean(post), 100000,
                              f * sd, seed++);
    est.push_back(batch_means(c.kept()));
  }
  for (std::size_t i = 0; i < est.size(); ++i) {
    for (std::size_t j = i + 1; j < est.size(); ++j) {
      const double combined = std::hypot(est[i].se, est[j].se);
      EXPECT_LT(std::abs(est[i].mean - est[j].mean), 3.0 * combined);
    }
  }
}

TEST(Chain, CsvExport) {
  const Chain c = mh_sample([](double t) { return -0.5 * t * t; }, 0.0, 10, 1.0, 0, 1);
  std::ostringstream os;
  write_csv(os, c);
  const std::string text = os.str();
  EXPECT_EQ(text.rfind("iter,theta\n", 0), 0u);
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 11);
}

}  // namespace
}  // namespace mpost
