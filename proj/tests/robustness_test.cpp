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
#include "mposterior/posterior.hpp"
#include "mposterior/robustness.hpp"
#include "support/fixtures.hpp"

namespace mpost {
namespace {

using testing::kPifSeed;
using testing::normal_draws;
using testing::normal_sample;

const PriorModel kPrior = gaussian_prior(0.0, 1.0);

const InfluenceEngine& huber_engine() {
  static const InfluenceEngine e(huber_loss(1.0), kPrior, normal_sample(100, kPifSeed));
  return e;
}

const InfluenceEngine& squared_engine() {
  static const InfluenceEngine e(squared_loss(), kPrior, normal_sample(100, kPifSeed));
  return e;
}

double rel(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-12); }

GridPosterior contaminated(const InfluenceEngine& e, double x0, double eps) {
  return posterior_from_log_unnorm(e.posterior().grid(), e.contaminated_log_unnorm(x0, eps));
}

TEST(PifExact, IdenticalSampleGivesZero) {
  const double a = 0.8;
  const InfluenceEngine e(huber_loss(1.0), kPrior, WeightedSample(std::vector<double>(12, a)));
  for (double t : {-1.0, 0.0, 0.5, 0.8, 2.0}) {
    EXPECT_NEAR(e.pif(a, t), 0.0, 1e-12);
    EXPECT_NEAR(e.pif_fd(a, t, 1e-5), 0.0, 1e-8);
  }
  EXPECT_NEAR(e.moment_if(1, a), 0.0, 1e-10);
  EXPECT_NEAR(e.quantile_if(0.5, a), 0.0, 1e-8);
}

TEST(PifExact, MatchesOracleOnHuberFixture) {
  const InfluenceEngine& e = huber_engine();
  EXPECT_LT(rel(e.pif(2.0, 0.1), e.pif_fd(2.0, 0.1, 1e-5)), 1e-3);
  const WeightedSample s = normal_sample(100, kPifSeed);
  EXPECT_LT(rel(pif_exact(huber_loss(1.0), kPrior, s, 2.0, 0.1),
                pif_fd_oracle(huber_loss(1.0), kPrior, s, 2.0, 0.1)),
            1e-3);
  const auto qs = std::vector<double>{0.05, 0.25, 0.5, 0.75, 0.95};
  const auto thetas = quantiles(e.posterior(), qs);
  for (double x0 : {-6.0, -1.0, 0.3, 2.0, 25.0}) {
    for (double t : thetas) EXPECT_LT(rel(e.pif(x0, t), e.pif_fd(x0, t, 1e-5)), 1e-3);
  }
}

TEST(PifExact, SquaredLossGrowsWithoutBound) {
  const InfluenceEngine& e = squared_engine();
  std::vector<double> mags;
  for (double x0 : {10.0, 1e2, 1e3, 1e4}) mags.push_back(std::abs(e.pif(x0, 0.1)));
  for (std::size_t i = 1; i < mags.size(); ++i) EXPECT_GT(mags[i], mags[i - 1]);
  EXPECT_GT(mags.back() / mags.front(), 1e2);
}

TEST(PifExact, SquaredLossIsAffineInX0) {
  const InfluenceEngine& e = squared_engine();
  const double t = 0.1;
  const double a = e.pif(1.0, t) - e.pif(0.0, t);
  for (double x0 : {-50.0, 3.0, 700.0}) {
    EXPECT_NEAR(e.pif(x0, t), e.pif(0.0, t) + a * x0, 1e-9 * (1.0 + std::abs(a * x0)));
  }
}

TEST(PifFd, RichardsonStability) {
  const InfluenceEngine& e = huber_engine();
  for (double x0 : {-3.0, 2.0, 10.0}) {
    for (double t : {0.0, 0.1, 0.2}) {
      EXPECT_LT(rel(e.pif_fd(x0, t, 5e-5), e.pif_fd(x0, t, 1e-4)), 1e-5);
    }
  }
  EXPECT_THROW(e.pif_fd(1.0, 0.0, 0.0), InvalidArgument);
  EXPECT_THROW(e.pif_fd(1.0, 0.0, 2e-3), InvalidArgument);
}

TEST(PifBound, DominatesOnGrid) {
  const InfluenceEngine& e = huber_engine();
  const auto& grid = e.posterior().grid();
  const auto x0s = linspace(-20.0, 20.0, 20);
  std::vector<double> us;
  for (int j = 1; j <= 20; ++j) us.push_back(j / 21.0);
  for (double t : quantiles(e.posterior(), us)) {
    for (double x0 : x0s) EXPECT_GE(e.pif_bound(t), std::abs(e.pif(x0, t)));
  }
  EXPECT_LT(e.pif_bound(grid.front()), 1e-12);
  EXPECT_LT(e.pif_bound(grid.back()), 1e-12);
}

TEST(PifBound, LinearInDeclaredBound) {
  const WeightedSample s = normal_sample(100, kPifSeed);
  const InfluenceEngine a(huber_loss(1.0), kPrior, s);
  const InfluenceEngine b(with_score_bound(huber_loss(1.0), 2.0), kPrior, s);
  for (double t : {-0.1, 0.05, 0.3}) EXPECT_EQ(b.pif_bound(t), 2.0 * a.pif_bound(t));
  EXPECT_THROW(squared_engine().pif_bound(0.1), UndefinedError);
}

TEST(MomentIf, MatchesFiniteDifference) {
  const InfluenceEngine& e = huber_engine();
  const double eps = 1e-5;
  for (double x0 : {-4.0, 2.0, 15.0}) {
    const double fd =
        (moment(contaminated(e, x0, eps), 1) - moment(contaminated(e, x0, -eps), 1)) / (2 * eps);
    EXPECT_LT(rel(e.moment_if(1, x0), fd), 1e-3);
  }
  EXPECT_THROW(e.moment_if(0, 1.0), InvalidArgument);
}

TEST(MomentIf, SquaredLossMeanInfluenceUnbounded) {
  const InfluenceEngine& e = squared_engine();
  double prev = 0.0;
  for (double x0 : {10.0, 1e2, 1e3}) {
    const double v = std::abs(e.moment_if(1, x0));
    EXPECT_GT(v, prev);
    prev = v;
  }
}

TEST(QuantileIf, MatchesFiniteDifference) {
  const InfluenceEngine& e = huber_engine();
  const double eps = 1e-5;
  for (double x0 : {-3.0, 2.0}) {
    const double fd = (quantile(contaminated(e, x0, eps), 0.5) -
                       quantile(contaminated(e, x0, -eps), 0.5)) /
                      (2 * eps);
    EXPECT_LT(rel(e.quantile_if(0.5, x0), fd), 2e-3);
  }
}

TEST(QuantileIf, AntisymmetricOnSymmetricFixture) {
  auto xs = normal_draws(30, 88);
  const std::size_t n = xs.size();
  for (std::size_t i = 0; i < n; ++i) xs.push_back(-xs[i]);
  const InfluenceEngine e(huber_loss(1.0), kPrior, WeightedSample(xs));
  for (double x0 : {0.7, 2.5, 9.0}) {
    EXPECT_NEAR(e.quantile_if(0.5, x0), -e.quantile_if(0.5, -x0), 1e-6);
  }
}

TEST(ZeroIntegral, HoldsForEveryX0) {
  const std::vector<const InfluenceEngine*> engines = {&huber_engine(), &squared_engine()};
  const InfluenceEngine rwg(reweighted_gaussian_loss(1.0, 1.0), kPrior,
                            normal_sample(100, kPifSeed));
  const InfluenceEngine chk(check_loss(0.3), kPrior, normal_sample(100, kPifSeed));
  for (const InfluenceEngine* e : {engines[0], engines[1], &rwg, &chk}) {
    for (double x0 : {-100.0, -2.0, 0.0, 1.0, 4.0, 1e3}) {
      const auto v = e->pif_on_grid(x0);
      double sup = 0.0;
      for (double p : v) sup = std::max(sup, std::abs(p));
      EXPECT_LT(std::abs(trapezoid(v, e->posterior().step())), 1e-6 * (1.0 + sup));
    }
  }
}

TEST(SupScan, HuberPlateau) {
  const InfluenceEngine& e = huber_engine();
  const std::vector<double> theta = {0.1};
  const PIFCurve c = sup_pif_scan(e, {-1e6, 1e6}, theta);
  EXPECT_LT(std::abs(c.argsup_x0), 1e6);
  double sup = 0.0;
  for (double v : c.values) sup = std::max(sup, std::abs(v));
  EXPECT_EQ(c.sup_abs, sup);
  const PlateauCertificate cert = plateau_certificate(e, {-1e6, 1e6}, theta, 10.0, 1e-6);
  EXPECT_TRUE(cert.plateau) << cert.relative_change;
}

TEST(SupScan, ReweightedGaussianPlateau) {
  const InfluenceEngine e(reweighted_gaussian_loss(1.0, 1.0), kPrior,
                          normal_sample(100, kPifSeed));
  const PlateauCertificate cert = plateau_certificate(e, {-1e6, 1e6}, {0.1}, 10.0, 1e-6);
  EXPECT_TRUE(cert.plateau) << cert.relative_change;
}

TEST(SupScan, SquaredLossMatchesAffineClosedForm) {
  const InfluenceEngine& e = squared_engine();
  const WeightedSample s = normal_sample(100, kPifSeed);
  double xbar = 0.0;
  for (double x : s.points()) xbar += x / 100.0;
  const double t = 0.1;
  const double mu = posterior_mean(e.posterior());
  const double slope = 100.0 * e.posterior().density_at(t) * std::abs(t - mu);
  double prev = 0.0;
  for (double R : {1e2, 1e3, 1e4, 1e5, 1e6, 1e7}) {
    const double sup = sup_pif_scan(e, {-R, R}, {t}).sup_abs;
    EXPECT_LT(rel(sup, slope * (R + std::abs(xbar))), 1e-6) << R;
    EXPECT_GT(sup, prev);
    prev = sup;
  }
  const PlateauCertificate cert = plateau_certificate(e, {-1e6, 1e6}, {t});
  EXPECT_FALSE(cert.plateau);
  const double affine = (1e7 + std::abs(xbar)) / (1e6 + std::abs(xbar));
  EXPECT_LT(rel(cert.sup_extended / cert.sup_base, affine), 1e-9);
}

TEST(InfluenceEngine, Errors) {
  const auto xs = normal_draws(10, 3);
  EXPECT_THROW(InfluenceEngine(huber_loss(1.0), kPrior,
                               WeightedSample(xs, std::vector<double>(xs.size(), 2.0))),
               InvalidArgument);
  EXPECT_THROW(InfluenceEngine(huber_skip_loss(), flat_prior(), WeightedSample(xs)),
               DivergenceError);
  const InfluenceEngine eh(exponential_huber_loss(1.0),
                           restrict_support(gaussian_prior(1.0, 1.0), {0.0, kInf, true}),
                           WeightedSample(testing::exponential_draws(50, 4)));
  EXPECT_THROW(eh.pif(-1.0, 1.0), DomainError);
  EXPECT_GT(eh.reference_theta(), 0.0);
}

TEST(PifCurve, CsvLongFormat) {
  const PIFCurve c = sup_pif_scan(huber_engine(), {-5.0, 5.0}, {0.0, 0.1},
                                  ScanResolution{11, 10.0, 1});
  std::ostringstream os;
  write_csv(os, c);
  const std::string text = os.str();
  EXPECT_EQ(text.rfind("x0,theta,pif\n", 0), 0u);
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), static_cast<long>(1 + 11 * 2));
}

}  // namespace
}  // namespace mpost
