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
#include <random>
#include <vector>

#include "mposterior/sample.hpp"

namespace mpost::testing {

inline std::vector<double> normal_draws(int n, std::uint64_t seed, double mean = 0.0,
                                        double sd = 1.0) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> dist(mean, sd);
  std::vector<double> out(static_cast<std::size_t>(n));
  for (auto& x : out) x = dist(rng);
  return out;
}

inline std::vector<double> exponential_draws(int n, std::uint64_t seed, double rate = 1.0) {
  std::mt19937_64 rng(seed);
  std::exponential_distribution<double> dist(rate);
  std::vector<double> out(static_cast<std::size_t>(n));
  for (auto& x : out) x = dist(rng);
  return out;
}

inline WeightedSample normal_sample(int n, std::uint64_t seed) {
  return WeightedSample(normal_draws(n, seed));
}

/// n = 100 standard normal draws used by the influence-function checks.
inline constexpr std::uint64_t kPifSeed = 20260101;
/// n = 20 standard normal draws used by the breakdown checks.
inline constexpr std::uint64_t kBreakdownSeed = 20260220;

}  // namespace mpost::testing
