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

#include "mposterior/posterior.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>

#include "mposterior/csv.hpp"
#include "mposterior/error.hpp"
#include "mposterior/parallel.hpp"

namespace mpost {
namespace {

std::string theta_text(double theta) { return format_real(theta); }

std::vector<double> evaluate(const LogDensityFn& f, const std::vector<double>& grid) {
  std::vector<double> out(grid.size());
  parallel_for(grid.size(), [&](std::size_t i) {
    double v;
    try {
      v = f(grid[i]);
    } catch (const DomainError& e) {
      throw EvaluationError(std::string("log density undefined at theta=") +
                            theta_text(grid[i]) + ": " + e.what());
    }
    if (!std::isfinite(v)) {
      throw EvaluationError("non-finite log density at theta=" + theta_text(grid[i]));
    }
    out[i] = v;
  });
  return out;
}

struct Range {
  double lower;
  double upper;
  bool lower_clipped;
  bool upper_clipped;
};

Range clip_to(double lo, double hi, const Interval& dom) {
  Range r{lo, hi, false, false};
  if (std::isfinite(dom.lower) && lo <= dom.lower) {
    const double offset = dom.lower_open ? 1e-9 * std::max(hi - dom.lower, 1e-300) : 0.0;
    r.lower = dom.lower + offset;
    r.lower_clipped = true;
  }
  if (std::isfinite(dom.upper) && hi >= dom.upper) {
    const double offset = dom.upper_open ? 1e-9 * std::max(dom.upper - r.lower, 1e-300) : 0.0;
    r.upper = dom.upper - offset;
    r.upper_clipped = true;
  }
  if (!(r.lower < r.upper)) throw InvalidArgument("empty parameter range after clipping");
  return r;
}

struct Anchor {
  double theta;
  double value;
};

std::vector<Anchor> evaluate_anchors(const LogDensityFn& f, const Interval& dom,
                                     std::span<const double> anchors) {
  std::vector<Anchor> out;
  for (double a : anchors) {
    if (!std::isfinite(a) || !dom.contains(a)) continue;
    double v;
    try {
      v = f(a);
    } catch (const Error&) {
      continue;
    }
    if (std::isfinite(v)) out.push_back({a, v});
  }
  return out;
}

struct Tabulation {
  Range range;
  std::vector<double> grid;
  std::vector<double> values;
  double top = -kInf;  // max over grid values and anchors
};

Tabulation tabulate(const LogDensityFn& f, const Range& range, int points,
                    const std::vector<Anchor>& anchors) {
  Tabulation t{range, linspace(range.lower, range.upper, points), {}, -kInf};
  t.values = evaluate(f, t.grid);
  t.top = *std::max_element(t.values.begin(), t.values.end());
  for (const auto& a : anchors) t.top = std::max(t.top, a.value);
  return t;
}

bool tails_negligible(const Tabulation& t, const std::vector<Anchor>& anchors,
                      double drop) {
  const double threshold = t.top - drop;
  const bool left = t.range.lower_clipped || t.values.front() <= threshold;
  const bool right = t.range.upper_clipped || t.values.back() <= threshold;
  if (!left || !right) return false;
  for (const auto& a : anchors) {
    if (a.value > threshold && (a.theta < t.range.lower || a.theta > t.range.upper)) {
      return false;
    }
  }
  return true;
}

}  // namespace

GridPosterior::GridPosterior(std::vector<double> grid, std::vector<double> log_unnorm,
                             bool divergent, LogDensityFn exact)
    : grid_(std::move(grid)),
      log_unnorm_(std::move(log_unnorm)),
      divergent_(divergent),
      exact_(std::move(exact)) {
  if (grid_.size() < 2 || grid_.size() != log_unnorm_.size()) {
    throw InvalidArgument("grid and log density must match and hold at least two points");
  }
  step_ = (grid_.back() - grid_.front()) / static_cast<double>(grid_.size() - 1);
  if (!(step_ > 0.0)) throw InvalidArgument("grid must be strictly increasing");
  log_peak_ = *std::max_element(log_unnorm_.begin(), log_unnorm_.end());
  if (!std::isfinite(log_peak_)) throw EvaluationError("posterior normalizer is not finite");
  density_.resize(grid_.size());
  for (std::size_t i = 0; i < grid_.size(); ++i) {
    density_[i] = std::exp(log_unnorm_[i] - log_peak_);
  }
  const double mass = trapezoid(density_, step_);
  log_mass_ = std::log(mass);
  for (auto& d : density_) d /= mass;
  cdf_.resize(grid_.size());
  cdf_[0] = 0.0;
  for (std::size_t i = 1; i < grid_.size(); ++i) {
    cdf_[i] = cdf_[i - 1] + 0.5 * step_ * (density_[i - 1] + density_[i]);
  }
}

double GridPosterior::log_density_at(double theta) const {
  if (exact_) return (exact_(theta) - log_peak_) - log_mass_;
  if (theta < grid_.front() || theta > grid_.back()) return -kInf;
  const double pos = (theta - grid_.front()) / step_;
  const auto i = std::min(static_cast<std::size_t>(pos), grid_.size() - 2);
  const double frac = pos - static_cast<double>(i);
  return (1.0 - frac) * (log_unnorm_[i] - log_peak_) + frac * (log_unnorm_[i + 1] - log_peak_) -
         log_mass_;
}

double GridPosterior::density_at(double theta) const {
  return std::exp(log_density_at(theta));
}

double GridPosterior::cdf_at(double theta) const {
  if (theta <= grid_.front()) return 0.0;
  if (theta >= grid_.back()) return std::min(cdf_.back(), 1.0);
  const double pos = (theta - grid_.front()) / step_;
  const auto i = std::min(static_cast<std::size_t>(pos), grid_.size() - 2);
  const double frac = pos - static_cast<double>(i);
  return std::clamp((1.0 - frac) * cdf_[i] + frac * cdf_[i + 1], 0.0, 1.0);
}

double log_unnorm(const LossModel& loss, const PriorModel& prior,
                  const WeightedSample& sample, double theta) {
  const auto xs = sample.points();
  const auto ws = sample.weights();
  double total = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (ws[i] == 0.0) continue;
    total += ws[i] * loss.rho(xs[i], theta);
  }
  return prior.log_density(theta) - total;
}

LogDensityFn make_log_unnorm(const LossModel& loss, const PriorModel& prior,
                             const WeightedSample& sample) {
  return [loss, prior, sample](double theta) { return log_unnorm(loss, prior, sample, theta); };
}

GridPosterior build_posterior(const LogDensityFn& f, const Interval& domain,
                              double initial_lower, double initial_upper,
                              std::span<const double> anchor_points,
                              const BuildOptions& options) {
  if (options.grid_points < 201 || options.grid_points % 2 == 0) {
    throw InvalidArgument("grid_points must be odd and at least 201");
  }
  if (!(options.range_cap > 0.0)) throw InvalidArgument("range_cap must be positive");
  if (!(initial_lower < initial_upper)) throw InvalidArgument("initial range is empty");

  const auto anchors = evaluate_anchors(f, domain, anchor_points);
  const double center = 0.5 * (initial_lower + initial_upper);
  double half = 0.5 * (initial_upper - initial_lower);

  // Expansion: double the half-width until both tails are negligible.
  bool divergent = false;
  Tabulation cur;
  for (;;) {
    cur = tabulate(f, clip_to(center - half, center + half, domain), options.grid_points,
                   anchors);
    if (tails_negligible(cur, anchors, options.tail_drop)) break;
    if (cur.range.upper - cur.range.lower >= options.range_cap ||
        half >= 0.5 * options.range_cap) {
      divergent = true;
      break;
    }
    half = std::min(2.0 * half, 0.5 * options.range_cap);
  }

  // Refinement: trim to the hull of non-negligible mass plus one cell.
  if (!divergent) {
    for (int pass = 0; pass < options.max_refinements; ++pass) {
      const double threshold = cur.top - options.tail_drop;
      const double h = (cur.range.upper - cur.range.lower) / (options.grid_points - 1);
      double lo = kInf, hi = -kInf;
      for (std::size_t i = 0; i < cur.grid.size(); ++i) {
        if (cur.values[i] >= threshold) {
          lo = std::min(lo, cur.grid[i]);
          hi = std::max(hi, cur.grid[i]);
        }
      }
      for (const auto& a : anchors) {
        if (a.value >= threshold && a.theta >= cur.range.lower && a.theta <= cur.range.upper) {
          lo = std::min(lo, a.theta);
          hi = std::max(hi, a.theta);
        }
      }
      if (!(lo <= hi)) break;

      bool accepted = false;
      for (double pad : {1.0, 4.0, 16.0}) {
        Range next{std::max(cur.range.lower, lo - pad * h),
                   std::min(cur.range.upper, hi + pad * h), false, false};
        next.lower_clipped = cur.range.lower_clipped && next.lower == cur.range.lower;
        next.upper_clipped = cur.range.upper_clipped && next.upper == cur.range.upper;
        if (!(next.lower < next.upper)) break;
        if (next.upper - next.lower > 0.9 * (cur.range.upper - cur.range.lower)) break;
        Tabulation trial = tabulate(f, next, options.grid_points, anchors);
        if (tails_negligible(trial, anchors, options.tail_drop)) {
          cur = std::move(trial);
          accepted = true;
          break;
        }
      }
      if (!accepted) break;
    }
  }

  return GridPosterior(std::move(cur.grid), std::move(cur.values), divergent, f);
}

GridPosterior build_posterior(const LossModel& loss, const PriorModel& prior,
                              const WeightedSample& sample, const BuildOptions& options) {
  if (!(sample.total_weight() > 0.0)) throw InvalidArgument("all weights are zero");
  std::vector<double> sorted(sample.points().begin(), sample.points().end());
  std::sort(sorted.begin(), sorted.end());
  const double s = std::max(1.0, sorted_quantile(sorted, 0.75) - sorted_quantile(sorted, 0.25));

  std::vector<double> anchors;
  const std::size_t n = sorted.size();
  const std::size_t count = std::min<std::size_t>(n, 64);
  for (std::size_t j = 0; j < count; ++j) {
    const std::size_t idx = count == 1 ? 0 : j * (n - 1) / (count - 1);
    anchors.push_back(sorted[idx]);
  }
  anchors.push_back(sorted_quantile(sorted, 0.5));
  double mean = 0.0;
  for (double x : sorted) mean += x;
  anchors.push_back(mean / static_cast<double>(n));
  if (prior.center()) anchors.push_back(*prior.center());

  const Interval domain = loss.theta_domain().intersect(prior.support());
  GridPosterior post = build_posterior(make_log_unnorm(loss, prior, sample), domain,
                                       sorted.front() - s, sorted.back() + s, anchors, options);
  // A bounded loss under a flat prior stays above a positive constant on an
  // unbounded domain, however far below the peak that constant sits.
  const bool unbounded = std::isinf(domain.lower) || std::isinf(domain.upper);
  if (!post.divergent() && unbounded && loss.upper_bound() &&
      prior.tail_class() == TailClass::flat && !prior.is_proper()) {
    auto f = make_log_unnorm(loss, prior, sample);
    return GridPosterior(post.grid(), post.log_unnorm(), true, std::move(f));
  }
  return post;
}

GridPosterior build_posterior_on_range(const LossModel& loss, const PriorModel& prior,
                                       const WeightedSample& sample, double lower,
                                       double upper, int grid_points) {
  if (!(lower < upper)) throw InvalidArgument("empty range");
  auto f = make_log_unnorm(loss, prior, sample);
  auto grid = linspace(lower, upper, grid_points);
  auto values = evaluate(f, grid);
  return GridPosterior(std::move(grid), std::move(values), false, std::move(f));
}

GridPosterior posterior_from_log_unnorm(std::vector<double> grid,
                                        std::vector<double> log_unnorm) {
  return GridPosterior(std::move(grid), std::move(log_unnorm), false);
}

double truncated_moment(const GridPosterior& post, int k) {
  if (k < 1) throw InvalidArgument("moment order must be positive");
  const auto& g = post.grid();
  const auto& d = post.density();
  std::vector<double> v(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) v[i] = std::pow(g[i], k) * d[i];
  return trapezoid(v, post.step());
}

double truncated_abs_moment(const GridPosterior& post, int k) {
  if (k < 1) throw InvalidArgument("moment order must be positive");
  const auto& g = post.grid();
  const auto& d = post.density();
  std::vector<double> v(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) v[i] = std::pow(std::abs(g[i]), k) * d[i];
  return trapezoid(v, post.step());
}

double moment(const GridPosterior& post, int k) {
  if (post.divergent()) {
    throw DivergenceError("posterior flagged divergent: moments unavailable");
  }
  return truncated_moment(post, k);
}

double posterior_mean(const GridPosterior& post) { return moment(post, 1); }

double posterior_variance(const GridPosterior& post) {
  const double m = moment(post, 1);
  const auto& g = post.grid();
  const auto& d = post.density();
  std::vector<double> v(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) v[i] = (g[i] - m) * (g[i] - m) * d[i];
  return trapezoid(v, post.step());
}

std::vector<double> quantiles(const GridPosterior& post, std::span<const double> us) {
  if (post.divergent()) {
    throw DivergenceError("posterior flagged divergent: quantiles unavailable");
  }
  const auto& g = post.grid();
  const auto& c = post.cdf();
  std::vector<double> out;
  out.reserve(us.size());
  std::size_t i = 1;
  double prev = 0.0;
  for (double u : us) {
    if (!(u > 0.0 && u < 1.0)) throw InvalidArgument("quantile level must lie in (0, 1)");
    if (u < prev) throw InvalidArgument("quantile levels must be ascending");
    prev = u;
    while (i < c.size() && c[i] < u) ++i;
    if (i >= c.size()) {
      out.push_back(g.back());
      continue;
    }
    const double lo = c[i - 1], hi = c[i];
    out.push_back(g[i - 1] + post.step() * (u - lo) / (hi - lo));
  }
  return out;
}

double quantile(const GridPosterior& post, double tau) {
  const double u[] = {tau};
  return quantiles(post, u).front();
}

double w2_distance(const GridPosterior& p, const GridPosterior& q, int u_points) {
  if (u_points < 1001) throw InvalidArgument("u_points must be at least 1001");
  std::vector<double> us(static_cast<std::size_t>(u_points));
  for (int j = 0; j < u_points; ++j) us[j] = (j + 0.5) / u_points;
  const auto qp = quantiles(p, us);
  const auto qq = quantiles(q, us);
  double s = 0.0;
  for (std::size_t j = 0; j < us.size(); ++j) s += (qp[j] - qq[j]) * (qp[j] - qq[j]);
  return std::sqrt(s / u_points);
}

double tv_distance_to_normal(const GridPosterior& p, double mean, double variance) {
  if (!(variance > 0.0)) throw InvalidArgument("normal variance must be positive");
  const auto& g = p.grid();
  const auto& d = p.density();
  std::vector<double> diff(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) {
    diff[i] = std::abs(d[i] - normal_pdf(g[i], mean, variance));
  }
  const double outside =
      normal_cdf(g.front(), mean, variance) + (1.0 - normal_cdf(g.back(), mean, variance));
  return std::clamp(0.5 * trapezoid(diff, p.step()) + 0.5 * outside, 0.0, 1.0);
}

void write_csv(std::ostream& out, const GridPosterior& post) {
  CsvWriter w(out, {"theta", "log_unnorm", "density", "cdf"});
  for (std::size_t i = 0; i < post.size(); ++i) {
    w.cell(post.grid()[i]).cell(post.log_unnorm()[i]).cell(post.density()[i]).cell(post.cdf()[i]);
    w.end_row();
  }
}

}  // namespace mpost
