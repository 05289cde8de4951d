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

#include "mposterior/robustness.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

#include "mposterior/csv.hpp"
#include "mposterior/error.hpp"
#include "mposterior/numeric.hpp"
#include "mposterior/parallel.hpp"

namespace mpost {

InfluenceEngine::InfluenceEngine(LossModel loss, PriorModel prior, WeightedSample sample,
                                 const BuildOptions& options)
    : loss_(std::move(loss)),
      prior_(std::move(prior)),
      sample_(std::move(sample)),
      post_(build_posterior(loss_, prior_, sample_, options)) {
  if (!sample_.has_unit_weights()) {
    throw InvalidArgument("influence functions are defined for unit-weight samples");
  }
  if (post_.divergent()) {
    throw DivergenceError("posterior flagged divergent: influence functions unavailable");
  }
  const auto xs = sample_.points();
  const bool zero_ok = std::all_of(xs.begin(), xs.end(),
                                   [this](double x) { return loss_.in_domain(x, 0.0); });
  theta_ref_ = zero_ok ? 0.0 : quantile(post_, 0.5);

  const auto& grid = post_.grid();
  mean_rbar_.resize(grid.size());
  parallel_for(grid.size(), [&](std::size_t j) { mean_rbar_[j] = mean_recentred(grid[j]); });
  abs_mean_ = truncated_abs_moment(post_, 1);
}

double InfluenceEngine::recentred(double x, double theta) const {
  return loss_.rho_increment(x, theta, theta_ref_);
}

double InfluenceEngine::mean_recentred(double theta) const {
  const auto xs = sample_.points();
  double s = 0.0;
  for (double x : xs) s += recentred(x, theta);
  return s / static_cast<double>(xs.size());
}

double InfluenceEngine::g(double x0, double theta) const {
  return mean_recentred(theta) - recentred(x0, theta);
}

double InfluenceEngine::g_mean(double x0) const {
  const auto& grid = post_.grid();
  const auto& dens = post_.density();
  std::vector<double> v(grid.size());
  for (std::size_t j = 0; j < grid.size(); ++j) {
    v[j] = dens[j] * (mean_rbar_[j] - recentred(x0, grid[j]));
  }
  return trapezoid(v, post_.step());
}

double InfluenceEngine::pif(double x0, double theta) const {
  const double n = static_cast<double>(sample_.size());
  return n * post_.density_at(theta) * (g(x0, theta) - g_mean(x0));
}

std::vector<double> InfluenceEngine::pif_on_grid(double x0) const {
  const auto& grid = post_.grid();
  const auto& dens = post_.density();
  const double n = static_cast<double>(sample_.size());
  std::vector<double> gv(grid.size());
  for (std::size_t j = 0; j < grid.size(); ++j) gv[j] = mean_rbar_[j] - recentred(x0, grid[j]);
  std::vector<double> weighted(grid.size());
  for (std::size_t j = 0; j < grid.size(); ++j) weighted[j] = dens[j] * gv[j];
  const double gbar = trapezoid(weighted, post_.step());
  std::vector<double> out(grid.size());
  for (std::size_t j = 0; j < grid.size(); ++j) out[j] = n * dens[j] * (gv[j] - gbar);
  return out;
}

std::vector<double> InfluenceEngine::contaminated_log_unnorm(double x0, double eps) const {
  const double n = static_cast<double>(sample_.size());
  const auto& grid = post_.grid();
  std::vector<double> lu(grid.size());
  for (std::size_t j = 0; j < grid.size(); ++j) {
    const double t = grid[j];
    lu[j] = prior_.log_density(t) -
            n * ((1.0 - eps) * mean_rbar_[j] + eps * recentred(x0, t));
  }
  return lu;
}

double InfluenceEngine::pif_fd(double x0, double theta, double eps) const {
  if (!(eps > 0.0 && eps <= 1e-3)) throw InvalidArgument("eps must lie in (0, 1e-3]");
  const double n = static_cast<double>(sample_.size());
  const double clean_t = mean_recentred(theta);
  const double point_t = recentred(x0, theta);
  const double prior_t = prior_.log_density(theta);

  auto density = [&](double e) {
    auto lu = contaminated_log_unnorm(x0, e);
    const double peak = *std::max_element(lu.begin(), lu.end());
    for (auto& v : lu) v = std::exp(v - peak);
    const double mass = trapezoid(lu, post_.step());
    const double lu_t = prior_t - n * ((1.0 - e) * clean_t + e * point_t);
    return std::exp(lu_t - peak) / mass;
  };
  return (density(eps) - density(-eps)) / (2.0 * eps);
}

double InfluenceEngine::pif_bound(double theta) const {
  if (!loss_.score_bound()) {
    throw UndefinedError("influence bound is undefined for a loss without a score bound");
  }
  const double n = static_cast<double>(sample_.size());
  return 2.0 * *loss_.score_bound() * n * post_.density_at(theta) *
         (std::abs(theta) + abs_mean_);
}

double InfluenceEngine::moment_if(int k, double x0) const {
  if (k < 1) throw InvalidArgument("moment order must be positive");
  const auto values = pif_on_grid(x0);
  const auto& grid = post_.grid();
  std::vector<double> v(grid.size());
  for (std::size_t j = 0; j < grid.size(); ++j) v[j] = std::pow(grid[j], k) * values[j];
  return trapezoid(v, post_.step());
}

double InfluenceEngine::quantile_if(double tau, double x0) const {
  const double t = quantile(post_, tau);
  const double pt = post_.density_at(t);
  if (!(pt >= 1e-12)) {
    throw DegenerateDenominatorError("posterior density at the quantile is numerically zero");
  }
  const auto values = pif_on_grid(x0);
  const auto& grid = post_.grid();
  const double h = post_.step();
  const double pos = (t - grid.front()) / h;
  const auto cell = std::min(static_cast<std::size_t>(std::max(pos, 0.0)), grid.size() - 2);
  double below = 0.0;
  for (std::size_t j = 1; j <= cell; ++j) below += 0.5 * h * (values[j - 1] + values[j]);
  const double next = below + 0.5 * h * (values[cell] + values[cell + 1]);
  const double frac = pos - static_cast<double>(cell);
  const double integral = (1.0 - frac) * below + frac * next;
  return -integral / pt;
}

double pif_exact(const LossModel& loss, const PriorModel& prior, const WeightedSample& sample,
                 double x0, double theta) {
  return InfluenceEngine(loss, prior, sample).pif(x0, theta);
}

double pif_fd_oracle(const LossModel& loss, const PriorModel& prior,
                     const WeightedSample& sample, double x0, double theta, double eps) {
  return InfluenceEngine(loss, prior, sample).pif_fd(x0, theta, eps);
}

double pif_bound(const InfluenceEngine& engine, double theta) { return engine.pif_bound(theta); }

double moment_if(const LossModel& loss, const PriorModel& prior, const WeightedSample& sample,
                 int k, double x0) {
  return InfluenceEngine(loss, prior, sample).moment_if(k, x0);
}

double quantile_if(const LossModel& loss, const PriorModel& prior,
                   const WeightedSample& sample, double tau, double x0) {
  return InfluenceEngine(loss, prior, sample).quantile_if(tau, x0);
}

std::vector<double> scan_grid(std::pair<double, double> range, const ScanResolution& res) {
  const auto [lo, hi] = range;
  if (!(lo < hi)) throw InvalidArgument("scan range must satisfy lower < upper");
  if (res.core_points < 2 || res.tail_points < 1 || !(res.core_half_width > 0.0)) {
    throw InvalidArgument("invalid scan resolution");
  }
  const double c = res.core_half_width;
  std::vector<double> out;
  const double core_lo = std::max(lo, -c);
  const double core_hi = std::min(hi, c);
  if (lo < -c) {
    const double a = std::log(-lo), b = std::log(c);
    for (int i = 0; i < res.tail_points; ++i) {
      out.push_back(-std::exp(a + (b - a) * i / res.tail_points));
    }
    out.front() = lo;
  }
  if (core_lo < core_hi) {
    const auto core = linspace(core_lo, core_hi, res.core_points);
    out.insert(out.end(), core.begin(), core.end());
  }
  if (hi > c) {
    const double a = std::log(c), b = std::log(hi);
    for (int i = 1; i <= res.tail_points; ++i) {
      out.push_back(std::exp(a + (b - a) * i / res.tail_points));
    }
    out.back() = hi;
  }
  return out;
}

PIFCurve sup_pif_scan(const InfluenceEngine& engine, std::pair<double, double> x0_range,
                      const std::vector<double>& theta_grid, const ScanResolution& res) {
  if (theta_grid.empty()) throw InvalidArgument("theta grid is empty");
  PIFCurve curve;
  curve.x0_grid = scan_grid(x0_range, res);
  curve.theta_grid = theta_grid;
  const std::size_t nt = theta_grid.size();
  curve.values.assign(curve.x0_grid.size() * nt, 0.0);
  parallel_for(curve.x0_grid.size(), [&](std::size_t i) {
    for (std::size_t j = 0; j < nt; ++j) {
      curve.values[i * nt + j] = engine.pif(curve.x0_grid[i], theta_grid[j]);
    }
  });
  for (std::size_t i = 0; i < curve.x0_grid.size(); ++i) {
    for (std::size_t j = 0; j < nt; ++j) {
      const double a = std::abs(curve.values[i * nt + j]);
      if (a > curve.sup_abs) {
        curve.sup_abs = a;
        curve.argsup_x0 = curve.x0_grid[i];
        curve.argsup_theta = theta_grid[j];
      }
    }
  }
  return curve;
}

PIFCurve sup_pif_scan(const LossModel& loss, const PriorModel& prior,
                      const WeightedSample& sample, std::pair<double, double> x0_range,
                      std::pair<double, double> theta_range, int theta_points,
                      const ScanResolution& res) {
  const InfluenceEngine engine(loss, prior, sample);
  const auto thetas = theta_points == 1 ? std::vector<double>{theta_range.first}
                                        : linspace(theta_range.first, theta_range.second,
                                                   theta_points);
  return sup_pif_scan(engine, x0_range, thetas, res);
}

PlateauCertificate plateau_certificate(const InfluenceEngine& engine,
                                       std::pair<double, double> x0_range,
                                       const std::vector<double>& theta_grid, double factor,
                                       double tolerance, const ScanResolution& res) {
  PlateauCertificate cert;
  cert.sup_base = sup_pif_scan(engine, x0_range, theta_grid, res).sup_abs;
  cert.sup_extended =
      sup_pif_scan(engine, {x0_range.first * factor, x0_range.second * factor}, theta_grid, res)
          .sup_abs;
  cert.relative_change = std::abs(cert.sup_extended - cert.sup_base) /
                         std::max(cert.sup_base, 1e-300);
  cert.plateau = cert.relative_change < tolerance;
  return cert;
}

void write_csv(std::ostream& out, const PIFCurve& curve) {
  CsvWriter w(out, {"x0", "theta", "pif"});
  for (std::size_t i = 0; i < curve.x0_grid.size(); ++i) {
    for (std::size_t j = 0; j < curve.theta_grid.size(); ++j) {
      w.cell(curve.x0_grid[i]).cell(curve.theta_grid[j]).cell(curve.at(i, j));
      w.end_row();
    }
  }
}

}  // namespace mpost
