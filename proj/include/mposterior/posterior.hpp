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

#include <functional>
#include <ostream>
#include <span>
#include <vector>

#include "mposterior/loss.hpp"
#include "mposterior/numeric.hpp"
#include "mposterior/prior.hpp"
#include "mposterior/sample.hpp"

namespace mpost {

using LogDensityFn = std::function<double(double theta)>;

struct BuildOptions {
  /// Odd, at least 201.
  int grid_points = 4001;
  /// Widest range the adaptive search may reach before flagging divergence.
  double range_cap = 1e8;
  /// Endpoints must sit this many log units below the maximum.
  double tail_drop = 46.0;
  /// Passes of the trim-and-refine stage that follows range expansion.
  int max_refinements = 64;
};

/// Normalized 1-D density tabulated on a uniform theta grid.
class GridPosterior {
 public:
  /// `exact` evaluates the same log-unnormalized density off the grid; when
  /// absent, off-grid values interpolate log_unnorm linearly.
  GridPosterior(std::vector<double> grid, std::vector<double> log_unnorm,
                bool divergent, LogDensityFn exact = {});

  const std::vector<double>& grid() const { return grid_; }
  const std::vector<double>& log_unnorm() const { return log_unnorm_; }
  const std::vector<double>& density() const { return density_; }
  const std::vector<double>& cdf() const { return cdf_; }
  std::size_t size() const { return grid_.size(); }
  double step() const { return step_; }
  double lower() const { return grid_.front(); }
  double upper() const { return grid_.back(); }
  double log_normalizer() const { return log_peak_ + log_mass_; }
  /// Set when the range cap was reached before the tails became negligible,
  /// or when a bounded loss meets a flat prior on an unbounded domain.
  bool divergent() const { return divergent_; }

  /// Normalized log density at an arbitrary theta (-inf off the grid when
  /// no exact evaluator is attached).
  double log_density_at(double theta) const;
  double density_at(double theta) const;
  /// Linear interpolation of the tabulated cdf, clamped to [0, 1].
  double cdf_at(double theta) const;

 private:
  std::vector<double> grid_;
  std::vector<double> log_unnorm_;
  std::vector<double> density_;
  std::vector<double> cdf_;
  double step_ = 0.0;
  // log normalizer = log_peak_ + log_mass_, kept apart so that densities
  // stay accurate when log_unnorm is far from zero.
  double log_peak_ = 0.0;
  double log_mass_ = 0.0;
  bool divergent_ = false;
  LogDensityFn exact_;
};

/// log pi(theta) - sum_i alpha_i rho(x_i, theta), for theta in the loss domain.
double log_unnorm(const LossModel& loss, const PriorModel& prior,
                  const WeightedSample& sample, double theta);

/// Closure over copies of the inputs that evaluates log_unnorm.
LogDensityFn make_log_unnorm(const LossModel& loss, const PriorModel& prior,
                             const WeightedSample& sample);

/// Builds the weighted M-posterior with an adaptive range: expansion from
/// the data range until both tails are negligible, then trim-and-refine
/// passes that concentrate the grid on the bulk of the mass.
GridPosterior build_posterior(const LossModel& loss, const PriorModel& prior,
                              const WeightedSample& sample,
                              const BuildOptions& options = {});

/// Same adaptive procedure for an arbitrary log density. `anchors` are
/// points where mass may concentrate; their values join the maximum used by
/// the tail criterion.
GridPosterior build_posterior(const LogDensityFn& log_unnorm_fn, const Interval& domain,
                              double initial_lower, double initial_upper,
                              std::span<const double> anchors,
                              const BuildOptions& options = {});

/// Fixed range [lower, upper]; never flagged divergent.
GridPosterior build_posterior_on_range(const LossModel& loss, const PriorModel& prior,
                                       const WeightedSample& sample, double lower,
                                       double upper, int grid_points);

/// Wraps externally computed log-unnormalized values.
GridPosterior posterior_from_log_unnorm(std::vector<double> grid,
                                        std::vector<double> log_unnorm);

/// Throws DivergenceError when the posterior is flagged divergent.
double moment(const GridPosterior& post, int k);
/// Moment of the tabulated density regardless of the divergence flag.
double truncated_moment(const GridPosterior& post, int k);
double truncated_abs_moment(const GridPosterior& post, int k);
double posterior_mean(const GridPosterior& post);
double posterior_variance(const GridPosterior& post);

/// Left tau-quantile with linear interpolation of the cdf inside a cell.
double quantile(const GridPosterior& post, double tau);

/// Quantiles at ascending probabilities `us` in one sweep of the cdf.
std::vector<double> quantiles(const GridPosterior& post, std::span<const double> us);

/// Wasserstein-2 distance from the quantile functions sampled at the
/// midpoints of `u_points` equal cells of (0, 1).
double w2_distance(const GridPosterior& p, const GridPosterior& q, int u_points = 4001);

/// Total variation distance to N(mean, variance), counting normal mass that
/// falls outside the grid.
double tv_distance_to_normal(const GridPosterior& p, double mean, double variance);

/// Columns theta, log_unnorm, density, cdf.
void write_csv(std::ostream& out, const GridPosterior& post);

}  // namespace mpost
