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

#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "mposterior/loss.hpp"
#include "mposterior/posterior.hpp"
#include "mposterior/prior.hpp"
#include "mposterior/sample.hpp"

namespace mpost {

enum class Side { plus, minus, split };

/// Replace the m highest-index points by +M, -M, or m_plus at +M and the
/// rest at -M, for each magnitude M of the ladder.
struct ContaminationSpec {
  int m = 0;
  Side side = Side::plus;
  int m_plus = 0;  // used by Side::split
  std::vector<double> magnitudes = {1e2, 1e3, 1e4, 1e5, 1e6};

  /// Throws InvalidArgument unless the spec fits a sample of size n.
  void validate(std::size_t n) const;
};

WeightedSample contaminate(const WeightedSample& sample, const ContaminationSpec& spec,
                           double magnitude);

struct BreakdownCell {
  int m = 0;
  double magnitude = 0.0;
  /// W2 (or functional displacement) to the clean posterior; empty when the
  /// contaminated posterior is divergent.
  std::optional<double> distance;
  std::optional<double> mean_shift;
  bool divergent = false;
};

struct BreakdownRow {
  int m = 0;
  /// Log-log slope of distance against magnitude over the top three rungs.
  std::optional<double> slope;
  bool top_divergent = false;
  bool broken = false;
  /// m = n/2 under an improper flat prior; excluded from epsilon_hat.
  bool boundary = false;
};

struct BreakdownReport {
  std::size_t n = 0;
  std::string measure = "w2";
  /// Divergence is certified only along the swept ladders.
  std::string certificate = "ladder surrogate";
  std::vector<BreakdownCell> cells;  // ordered by m, then magnitude
  std::vector<BreakdownRow> rows;    // ordered by m
  /// Smallest broken m / n along the swept contamination ladders.
  std::optional<double> epsilon_hat;

  const BreakdownRow& row(int m) const;
  std::vector<const BreakdownCell*> cells_for(int m) const;
};

struct SweepOptions {
  int u_points = 4001;
  BuildOptions build;
  double slope_threshold = 0.8;
};

/// Declares m broken when the top rung diverges or the top-three log-log
/// slope exceeds the threshold.
BreakdownReport breakdown_sweep(const LossModel& loss, const PriorModel& prior,
                                const WeightedSample& sample, std::span<const int> m_values,
                                const ContaminationSpec& spec_template,
                                const SweepOptions& options = {});

/// Lower bound on the displacement over the three supported sides.
BreakdownReport worst_side_sweep(const LossModel& loss, const PriorModel& prior,
                                 const WeightedSample& sample, std::span<const int> m_values,
                                 const ContaminationSpec& spec_template,
                                 const SweepOptions& options = {});

struct Functional {
  enum class Kind { mean, quantile } kind = Kind::mean;
  double tau = 0.5;

  static Functional mean() { return {Kind::mean, 0.5}; }
  static Functional quantile_at(double tau) { return {Kind::quantile, tau}; }
  double evaluate(const GridPosterior& post) const;
};

/// Same sweep tracking |functional(contaminated) - functional(clean)|.
BreakdownReport functional_breakdown(const LossModel& loss, const PriorModel& prior,
                                     const WeightedSample& sample, Functional functional,
                                     std::span<const int> m_values,
                                     const ContaminationSpec& spec_template,
                                     const SweepOptions& options = {});

/// sum over the contaminated sample of rho(x, theta) - rho(x, 0), per theta.
std::vector<double> compute_delta(const LossModel& loss, const WeightedSample& clean,
                                  const WeightedSample& contaminated,
                                  std::span<const double> theta_grid);

/// Columns m, magnitude, w2, mean_shift, divergent.
void write_csv(std::ostream& out, const BreakdownReport& report);

}  // namespace mpost
