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

#include "mposterior/sample.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

#include "mposterior/error.hpp"

namespace mpost {

WeightedSample::WeightedSample(std::vector<double> points)
    : WeightedSample(points, std::vector<double>(points.size(), 1.0)) {}

WeightedSample::WeightedSample(std::vector<double> points, std::vector<double> weights)
    : points_(std::move(points)), weights_(std::move(weights)) {
  if (points_.empty()) throw InvalidArgument("sample needs at least one point");
  if (points_.size() != weights_.size()) {
    throw InvalidArgument("points and weights differ in length");
  }
  for (double x : points_) {
    if (!std::isfinite(x)) throw InvalidArgument("sample points must be finite");
  }
  for (double w : weights_) {
    if (!(w >= 0.0) || !std::isfinite(w)) {
      throw InvalidArgument("weights must be finite and nonnegative");
    }
    total_weight_ += w;
  }
}

bool WeightedSample::has_unit_weights() const {
  return std::all_of(weights_.begin(), weights_.end(), [](double w) { return w == 1.0; });
}

WeightedSample WeightedSample::with_points(std::vector<double> points) const {
  return WeightedSample(std::move(points), weights_);
}

WeightedSample WeightedSample::with_weights(std::vector<double> weights) const {
  return WeightedSample(points_, std::move(weights));
}

}  // namespace mpost
