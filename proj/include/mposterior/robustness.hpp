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

#pragma once

#include <ostream>
#include <utility>
#include <vector>

#include "mposterior/loss.hpp"
#include "mposterior/posterior.hpp"
#include "mposterior/prior.hpp"
#include "mposterior/sample.hpp"

namespace mpost {

/// Posterior influence functions for a fixed (loss, prior, sample).
///
/// The clean posterior and the empirical mean of the recentred loss
/// rho(x, theta) - rho(x, theta_ref) are tabulated once; every query reuses
/// that grid for its inner integrals. theta_ref is 0 when it lies in the
/// loss domain and the posterior median otherwise; the choice cancels in
/// every returned quantity.
class InfluenceEngine {
 public:
  InfluenceEngine(LossModel loss, PriorModel prior, WeightedSample sample,
                  const BuildOptions& options = {});

  const GridPosterior& posterior() const { return post_; }
  const LossModel& loss() const { return loss_; }
  double reference_theta() const { return theta_ref_; }

  /// Exact influence of a point mass at x0 on the posterior density at theta.
  double pif(double x0, double theta) const;
  /// pif at every grid point.
  std::vector<double> pif_on_grid(double x0) const;

  /// Central difference in the contamination mass of the contaminated
  /// posterior density, normalized on the clean grid.
  double pif_fd(double x0, double theta, double eps) const;

  /// log pi(theta) - n [(1 - eps) E_Fn rho + eps rho(x0, theta)] on the clean
  /// grid, up to a theta-free constant. eps may be negative.
  std::vector<double> contaminated_log_unnorm(double x0, double eps) const;

  /// 2 B n p(theta) (|theta| + E|theta|). Throws UndefinedError without a
  /// declared score bound.
  double pif_bound(double theta) const;

  double moment_if(int k, double x0) const;
  double quantile_if(double tau, double x0) const;

 private:
  double recentred(double x, double theta) const;
  double mean_recentred(double theta) const;
  double g(double x0, double theta) const;
  double g_mean(double x0) const;

  LossModel loss_;
  PriorModel prior_;
  WeightedSample sample_;
  GridPosterior post_;
  double theta_ref_ = 0.0;
  std::vector<double> mean_rbar_;     // E_Fn rho-bar on the grid
  double abs_mean_ = 0.0;              // E|theta|
};

double pif_exact(const LossModel& loss, const PriorModel& prior, const WeightedSample& sample,
                 double x0, double theta);

double pif_fd_oracle(const LossModel& loss, const PriorModel& prior,
                     const WeightedSample& sample, double x0, double theta, double eps = 1e-5);

double pif_bound(const InfluenceEngine& engine, double theta);

double moment_if(const LossModel& loss, const PriorModel& prior, const WeightedSample& sample,
                 int k, double x0);

double quantile_if(const LossModel& loss, const PriorModel& prior,
                   const WeightedSample& sample, double tau, double x0);

struct PIFCurve {
  std::vector<double> x0_grid;
  std::vector<double> theta_grid;
  /// values[i * theta_grid.size() + j] = PIF(x0_grid[i], theta_grid[j]).
  std::vector<double> values;
  double sup_abs = 0.0;
  double argsup_x0 = 0.0;
  double argsup_theta = 0.0;

  double at(std::size_t i, std::size_t j) const { return values[i * theta_grid.size() + j]; }
};

struct ScanResolution {
  /// Uniform points on [-core_half_width, core_half_width] (clipped to the
  /// scan range).
  int core_points = 401;
  double core_half_width = 10.0;
  /// Log-spaced points per side between the core and the range end.
  int tail_points = 200;
};

/// x0 scan grid: a uniform core plus log-spaced tails reaching both ends
/// of `range`. Ranges that contain one another share their core points.
std::vector<double> scan_grid(std::pair<double, double> range, const ScanResolution& res);

PIFCurve sup_pif_scan(const InfluenceEngine& engine, std::pair<double, double> x0_range,
                      const std::vector<double>& theta_grid, const ScanResolution& res = {});

PIFCurve sup_pif_scan(const LossModel& loss, const PriorModel& prior,
                      const WeightedSample& sample, std::pair<double, double> x0_range,
                      std::pair<double, double> theta_range, int theta_points,
                      const ScanResolution& res = {});

struct PlateauCertificate {
  double sup_base = 0.0;
  double sup_extended = 0.0;
  double relative_change = 0.0;
  bool plateau = false;  // relative_change < tolerance
};

/// Compares sup|PIF| over x0_range and over the range scaled by `factor`.
PlateauCertificate plateau_certificate(const InfluenceEngine& engine,
                                       std::pair<double, double> x0_range,
                                       const std::vector<double>& theta_grid,
                                       double factor = 10.0, double tolerance = 1e-3,
                                       const ScanResolution& res = {});

/// Long format x0, theta, pif.
void write_csv(std::ostream& out, const PIFCurve& curve);

}  // namespace mpost
