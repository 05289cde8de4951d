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
#include <string>
#include <vector>

#include "mposterior/loss.hpp"
#include "mposterior/posterior.hpp"
#include "mposterior/prior.hpp"
#include "mposterior/sample.hpp"

namespace mpost {

struct WeightsMode {
  enum class Kind { unit, constant, random_gamma, fixed_sequence };

  Kind kind = Kind::unit;
  double alpha = 1.0;   // constant
  double kappa = 1.0;   // random_gamma shape
  double lambda = 1.0;  // random_gamma rate
  std::vector<double> sequence;

  static WeightsMode unit() { return {}; }
  static WeightsMode constant(double alpha);
  static WeightsMode random_gamma(double kappa, double lambda);
  static WeightsMode fixed_sequence(std::vector<double> weights);

  std::string describe() const;
};

/// Attaches weights to `points`. random_gamma draws from Gamma(kappa, rate
/// lambda) with a generator seeded by `seed`; fixed_sequence uses the first
/// points.size() entries.
WeightedSample apply_weights(std::vector<double> points, const WeightsMode& mode,
                             std::uint64_t seed);

/// Weighted mean of d psi / d theta at theta_hat. Uses psi_dtheta where the
/// loss declares it and a central difference of psi elsewhere. Throws
/// DomainError when the result is not positive.
double estimate_v(const LossModel& loss, const WeightedSample& sample, double theta_hat);

struct BvmGap {
  double tv = 0.0;
  double theta_hat = 0.0;
  double v_hat = 0.0;
  double posterior_variance = 0.0;
  /// 1 / (v_hat * sum of weights).
  double normal_variance = 0.0;
};

/// TV between the weighted M-posterior and N(theta_hat, 1 / (v_hat abar n)).
BvmGap bvm_gap(const LossModel& loss, const PriorModel& prior, const WeightedSample& sample,
               const BuildOptions& options = {});

BvmGap bvm_gap(const LossModel& loss, const PriorModel& prior, std::vector<double> points,
               const WeightsMode& mode, std::uint64_t weight_seed,
               const BuildOptions& options = {});

using DataGenerator = std::function<std::vector<double>(int n, std::uint64_t seed)>;

struct BvmRecord {
  int n = 0;
  int replication = 0;
  std::uint64_t seed = 0;
  BvmGap gap;
};

struct BvmReport {
  std::vector<int> n_ladder;
  WeightsMode weights_mode;
  std::vector<BvmRecord> records;  // ordered by (n, replication)
  std::vector<double> tv_mean, tv_min, tv_max;
  std::vector<double> theta_hat_mean;
  std::vector<double> v_hat_mean;
};

/// Replication r draws data with seed + r; random weights use a stream
/// derived from the same seed.
BvmReport bvm_sweep(const LossModel& loss, const PriorModel& prior,
                    const DataGenerator& generator, const std::vector<int>& n_ladder,
                    const WeightsMode& mode, int replications, std::uint64_t seed,
                    const BuildOptions& options = {});

/// Columns n, replication, tv, theta_hat, v_hat.
void write_csv(std::ostream& out, const BvmReport& report);

}  // namespace mpost
