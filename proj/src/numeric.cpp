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

#include "mposterior/numeric.hpp"

#include <algorithm>
#include <cmath>

#include "mposterior/error.hpp"

namespace mpost {

bool Interval::contains(double v) const {
  if (lower_open ? v <= lower : v < lower) return false;
  if (upper_open ? v >= upper : v > upper) return false;
  return true;
}

Interval Interval::intersect(const Interval& other) const {
  Interval out = *this;
  if (other.lower > out.lower ||
      (other.lower == out.lower && other.lower_open)) {
    out.lower = other.lower;
    out.lower_open = other.lower_open;
  }
  if (other.upper < out.upper ||
      (other.upper == out.upper && other.upper_open)) {
    out.upper = other.upper;
    out.upper_open = other.upper_open;
  }
  return out;
}

std::vector<double> linspace(double a, double b, int n) {
  if (n < 2) throw InvalidArgument("linspace needs at least two points");
  std::vector<double> out(static_cast<size_t>(n));
  const double h = (b - a) / (n - 1);
  for (int i = 0; i < n; ++i) out[i] = a + h * i;
  out.back() = b;
  return out;
}

double trapezoid(std::span<const double> values, double h) {
  if (values.size() < 2) return 0.0;
  double s = 0.5 * (values.front() + values.back());
  for (size_t i = 1; i + 1 < values.size(); ++i) s += values[i];
  return s * h;
}

double log_trapezoid_exp(std::span<const double> log_values, double h) {
  const double top = *std::max_element(log_values.begin(), log_values.end());
  if (!std::isfinite(top)) return top;
  std::vector<double> scaled(log_values.size());
  for (size_t i = 0; i < log_values.size(); ++i) {
    scaled[i] = std::exp(log_values[i] - top);
  }
  return top + std::log(trapezoid(scaled, h));
}

double normal_pdf(double x, double mean, double variance) {
  const double z = x - mean;
  return std::exp(-0.5 * z * z / variance - 0.5 * (kLog2Pi + std::log(variance)));
}

double normal_cdf(double x, double mean, double variance) {
  return 0.5 * std::erfc(-(x - mean) / std::sqrt(2.0 * variance));
}

double sorted_quantile(std::span<const double> sorted, double p) {
  if (sorted.empty()) throw InvalidArgument("quantile of an empty sequence");
  const double pos = p * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<size_t>(std::floor(pos));
  const size_t hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

double median(std::vector<double> values) {
  std::sort(values.begin(), values.end());
  return sorted_quantile(values, 0.5);
}

double interquartile_range(std::vector<double> values) {
  std::sort(values.begin(), values.end());
  return sorted_quantile(values, 0.75) - sorted_quantile(values, 0.25);
}

double mad(std::vector<double> values) {
  const double m = median(values);
  for (double& v : values) v = std::abs(v - m);
  return median(std::move(values));
}

MeanSe mean_and_se(std::span<const double> draws) {
  if (draws.empty()) throw InvalidArgument("no draws");
  const double n = static_cast<double>(draws.size());
  double mean = 0.0;
  for (double d : draws) mean += d;
  mean /= n;
  double ss = 0.0;
  for (double d : draws) ss += (d - mean) * (d - mean);
  const double var = draws.size() > 1 ? ss / (n - 1.0) : 0.0;
  return {mean, std::sqrt(var / n)};
}

MeanSe batch_means(std::span<const double> draws, int batches) {
  if (batches < 2 || draws.size() < static_cast<size_t>(2 * batches)) {
    return mean_and_se(draws);
  }
  const size_t len = draws.size() / static_cast<size_t>(batches);
  std::vector<double> means;
  means.reserve(static_cast<size_t>(batches));
  for (int b = 0; b < batches; ++b) {
    double s = 0.0;
    for (size_t i = 0; i < len; ++i) s += draws[b * len + i];
    means.push_back(s / static_cast<double>(len));
  }
  MeanSe overall = mean_and_se(draws);
  overall.se = mean_and_se(means).se;
  return overall;
}

double log_log_slope(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) {
    throw InvalidArgument("slope needs matching sequences of length >= 2");
  }
  const double n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  std::vector<double> lx(x.size()), ly(y.size());
  for (size_t i = 0; i < x.size(); ++i) {
    lx[i] = std::log(x[i]);
    ly[i] = std::log(std::max(y[i], 1e-300));
    mx += lx[i];
    my += ly[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0.0, sxx = 0.0;
  for (size_t i = 0; i < x.size(); ++i) {
    sxy += (lx[i] - mx) * (ly[i] - my);
    sxx += (lx[i] - mx) * (lx[i] - mx);
  }
  return sxy / sxx;
}

}  // namespace mpost
