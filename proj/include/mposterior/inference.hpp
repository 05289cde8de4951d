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

#include <cstdint>
#include <functional>
#include <ostream>
#include <span>
#include <utility>
#include <vector>

#include "mposterior/loss.hpp"
#include "mposterior/sample.hpp"

namespace mpost {

struct MEstimate {
  double theta_hat = 0.0;
  double objective_value = 0.0;
  bool converged = false;
  int iterations = 0;
  /// Width of the final bracket around theta_hat.
  double bracket_width = 0.0;
};

/// Weighted M-estimate. Convex losses: bisection on the weighted score sum.
/// Otherwise a 4096-cell scan of the objective followed by golden-section
/// refinement around the best cell.
MEstimate m_estimate_1d(const LossModel& loss, const WeightedSample& sample,
                        std::pair<double, double> bracket);

/// Data range padded by three MADs (at least 1), clipped to the loss domain.
std::pair<double, double> default_bracket(const LossModel& loss, const WeightedSample& sample);

/// Standard deviation of m_estimate_1d over bootstrap resamples.
double bootstrap_se(const LossModel& loss, const WeightedSample& sample,
                    std::pair<double, double> bracket, int replicates, std::uint64_t seed);

/// Dense row-major n x d matrix.
class DesignMatrix {
 public:
  DesignMatrix(std::size_t rows, std::size_t cols);
  static DesignMatrix intercept_only(std::size_t rows);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }
  std::span<const double> row(std::size_t i) const { return {data_.data() + i * cols_, cols_}; }

 private:
  std::size_t rows_;
  std::size_t cols_;
  std::vector<double> data_;
};

/// sum_i rho_tau(y_i - x_i' beta).
double check_objective(const DesignMatrix& design, std::span<const double> responses,
                       double tau, std::span<const double> beta);

/// Minimizes the check-loss objective: IRLS with a shrinking smoothing
/// floor, then exact coordinate descent until no step gains more than 1e-10.
/// Throws RankDeficientError for designs without full column rank.
std::vector<double> quantile_regression_fit(const DesignMatrix& design,
                                            std::span<const double> responses, double tau);

struct Chain {
  std::vector<double> draws;  // every step, burn-in included
  double acceptance_rate = 0.0;
  std::uint64_t seed = 0;
  int burn_in = 0;

  std::span<const double> kept() const {
    return std::span<const double>(draws).subspan(static_cast<std::size_t>(burn_in));
  }
};

/// Gaussian random-walk Metropolis. A target that throws DomainError at a
/// proposal is treated as having zero density there.
Chain mh_sample(const std::function<double(double)>& log_target, double init, int steps,
                double proposal_sd, int burn_in, std::uint64_t seed);

/// Burn-in of 20% of steps.
Chain mh_sample(const std::function<double(double)>& log_target, double init, int steps,
                double proposal_sd, std::uint64_t seed);

/// Columns iter, theta.
void write_csv(std::ostream& out, const Chain& chain);

}  // namespace mpost
