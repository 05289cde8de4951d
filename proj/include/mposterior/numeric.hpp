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

#include <limits>
#include <span>
#include <vector>

namespace mpost {

inline constexpr double kInf = std::numeric_limits<double>::infinity();
inline constexpr double kLog2Pi = 1.8378770664093454836;

/// Closed or open interval of the real line; infinite ends are allowed.
struct Interval {
  double lower = -kInf;
  double upper = kInf;
  bool lower_open = false;
  bool upper_open = false;

  bool contains(double v) const;
  Interval intersect(const Interval& other) const;
  static Interval real_line() { return {}; }
};

/// n equally spaced points from a to b inclusive (n >= 2).
std::vector<double> linspace(double a, double b, int n);

/// Trapezoid rule on a uniform grid with spacing h.
double trapezoid(std::span<const double> values, double h);

/// log of the trapezoid integral of exp(log_values) with spacing h.
double log_trapezoid_exp(std::span<const double> log_values, double h);

double normal_pdf(double x, double mean, double variance);
double normal_cdf(double x, double mean, double variance);

/// Sample quantile with linear interpolation between order statistics
/// (type-7 definition). `sorted` must be ascending.
double sorted_quantile(std::span<const double> sorted, double p);

double median(std::vector<double> values);
double interquartile_range(std::vector<double> values);
/// Median absolute deviation about the median (unscaled).
double mad(std::vector<double> values);

struct MeanSe {
  double mean = 0.0;
  double se = 0.0;
};

/// Mean and standard error for independent draws.
MeanSe mean_and_se(std::span<const double> draws);

/// Mean and batch-means standard error for autocorrelated draws.
MeanSe batch_means(std::span<const double> draws, int batches = 50);

/// Least-squares slope of log(y) against log(x).
double log_log_slope(std::span<const double> x, std::span<const double> y);

}  // namespace mpost
