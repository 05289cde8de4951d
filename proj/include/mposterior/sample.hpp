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

#include <span>
#include <vector>

namespace mpost {

/// Data points with nonnegative per-point weights (all 1 by default).
class WeightedSample {
 public:
  explicit WeightedSample(std::vector<double> points);
  WeightedSample(std::vector<double> points, std::vector<double> weights);

  std::span<const double> points() const { return points_; }
  std::span<const double> weights() const { return weights_; }
  std::size_t size() const { return points_.size(); }
  double total_weight() const { return total_weight_; }
  double mean_weight() const { return total_weight_ / static_cast<double>(size()); }
  bool has_unit_weights() const;

  WeightedSample with_points(std::vector<double> points) const;
  WeightedSample with_weights(std::vector<double> weights) const;

 private:
  std::vector<double> points_;
  std::vector<double> weights_;
  double total_weight_ = 0.0;
};

}  // namespace mpost
