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

#include "mposterior/breakdown.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "mposterior/csv.hpp"
#include "mposterior/error.hpp"
#include "mposterior/parallel.hpp"

namespace mpost {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Distance between the clean and a contaminated posterior; empty when the
// contaminated posterior is divergent.
using Measure = std::function<std::optional<double>(const GridPosterior& clean,
                                                    const GridPosterior& dirty)>;

struct Sweep {
  const LossModel& loss;
  const PriorModel& prior;
  const WeightedSample& sample;
  const SweepOptions& options;
};

bool is_boundary(const PriorModel& prior, std::size_t n, int m) {
  return !prior.is_proper() && prior.tail_class() == TailClass::flat &&
         2 * static_cast<std::size_t>(m) == n;
}

void check_m_values(std::span<const int> m_values, const ContaminationSpec& spec, std::size_t n) {
  if (m_values.empty()) throw InvalidArgument("breakdown sweep needs at least one m");
  for (int m : m_values) {
    ContaminationSpec s = spec;
    s.m = m;
    if (s.side == Side::split) s.m_plus = std::min(s.m_plus, m);
    s.validate(n);
  }
}

ContaminationSpec spec_for(const ContaminationSpec& tmpl, int m) {
  ContaminationSpec s = tmpl;
  s.m = m;
  if (s.side == Side::split) s.m_plus = std::min(s.m_plus, m);
  return s;
}

BreakdownRow classify(int m, const std::vector<BreakdownCell>& cells,
                      std::span<const double> magnitudes, double threshold) {
  BreakdownRow row;
  row.m = m;
  row.top_divergent = cells.back().divergent;
  std::vector<double> xs, ys;
  const std::size_t first = cells.size() > 3 ? cells.size() - 3 : 0;
  for (std::size_t i = first; i < cells.size(); ++i) {
    if (cells[i].distance) {
      xs.push_back(magnitudes[i]);
      ys.push_back(*cells[i].distance);
    }
  }
  if (xs.size() >= 2) row.slope = log_log_slope(xs, ys);
  row.broken = row.top_divergent || (row.slope && *row.slope > threshold);
  return row;
}

void finalize(BreakdownReport& report) {
  for (const auto& row : report.rows) {
    if (row.broken && !row.boundary) {
      const double e = static_cast<double>(row.m) / static_cast<double>(report.n);
      if (!report.epsilon_hat || e < *report.epsilon_hat) report.epsilon_hat = e;
    }
  }
}

BreakdownReport run_sweep(const Sweep& sw, std::span<const int> m_values,
                          const ContaminationSpec& tmpl, const Measure& measure,
                          std::string measure_name) {
  const std::size_t n = sw.sample.size();
  check_m_values(m_values, tmpl, n);
  const GridPosterior clean = build_posterior(sw.loss, sw.prior, sw.sample, sw.options.build);
  if (clean.divergent()) {
    throw DivergenceError("clean posterior is divergent; breakdown sweep aborted");
  }
  const double clean_mean = posterior_mean(clean);

  const std::size_t k = tmpl.magnitudes.size();
  std::vector<BreakdownCell> cells(m_values.size() * k);
  parallel_for(cells.size(), [&](std::size_t idx) {
    const int m = m_values[idx / k];
    const double mag = tmpl.magnitudes[idx % k];
    const WeightedSample dirty = contaminate(sw.sample, spec_for(tmpl, m), mag);
    const GridPosterior post = build_posterior(sw.loss, sw.prior, dirty, sw.options.build);
    BreakdownCell& cell = cells[idx];
    cell.m = m;
    cell.magnitude = mag;
    cell.divergent = post.divergent();
    if (!cell.divergent) {
      cell.distance = measure(clean, post);
      cell.mean_shift = posterior_mean(post) - clean_mean;
    }
  });

  BreakdownReport report;
  report.n = n;
  report.measure = std::move(measure_name);
  report.cells = std::move(cells);
  for (std::size_t i = 0; i < m_values.size(); ++i) {
    std::vector<BreakdownCell> row_cells(report.cells.begin() + static_cast<long>(i * k),
                                         report.cells.begin() + static_cast<long>((i + 1) * k));
    BreakdownRow row =
        classify(m_values[i], row_cells, tmpl.magnitudes, sw.options.slope_threshold);
    row.boundary = is_boundary(sw.prior, n, m_values[i]);
    report.rows.push_back(row);
  }
  finalize(report);
  return report;
}

}  // namespace

void ContaminationSpec::validate(std::size_t n) const {
  if (m < 0 || static_cast<std::size_t>(m) > n) {
    throw InvalidArgument("contamination count m must satisfy 0 <= m <= n");
  }
  if (side == Side::split && (m_plus < 0 || m_plus > m)) {
    throw InvalidArgument("split contamination needs 0 <= m_plus <= m");
  }
  if (magnitudes.empty()) throw InvalidArgument("magnitude ladder is empty");
  for (std::size_t i = 0; i < magnitudes.size(); ++i) {
    if (!std::isfinite(magnitudes[i]) || magnitudes[i] <= 0.0) {
      throw InvalidArgument("ladder magnitudes must be finite and positive");
    }
    if (i > 0 && magnitudes[i] <= magnitudes[i - 1]) {
      throw InvalidArgument("ladder magnitudes must be strictly increasing");
    }
  }
}

WeightedSample contaminate(const WeightedSample& sample, const ContaminationSpec& spec,
                           double magnitude) {
  spec.validate(sample.size());
  std::vector<double> pts(sample.points().begin(), sample.points().end());
  const std::size_t n = pts.size();
  const std::size_t m = static_cast<std::size_t>(spec.m);
  for (std::size_t j = 0; j < m; ++j) {
    const std::size_t i = n - m + j;
    switch (spec.side) {
      case Side::plus:
        pts[i] = magnitude;
        break;
      case Side::minus:
        pts[i] = -magnitude;
        break;
      case Side::split:
        pts[i] = j < static_cast<std::size_t>(spec.m_plus) ? magnitude : -magnitude;
        break;
    }
  }
  return sample.with_points(std::move(pts));
}

const BreakdownRow& BreakdownReport::row(int m) const {
  for (const auto& r : rows) {
    if (r.m == m) return r;
  }
  throw InvalidArgument("no row for m = " + std::to_string(m));
}

std::vector<const BreakdownCell*> BreakdownReport::cells_for(int m) const {
  std::vector<const BreakdownCell*> out;
  for (const auto& c : cells) {
    if (c.m == m) out.push_back(&c);
  }
  return out;
}

BreakdownReport breakdown_sweep(const LossModel& loss, const PriorModel& prior,
                                const WeightedSample& sample, std::span<const int> m_values,
                                const ContaminationSpec& spec_template,
                                const SweepOptions& options) {
  const int u_points = options.u_points;
  Measure w2 = [u_points](const GridPosterior& a, const GridPosterior& b) {
    return std::optional<double>(w2_distance(a, b, u_points));
  };
  return run_sweep({loss, prior, sample, options}, m_values, spec_template, w2, "w2");
}

BreakdownReport worst_side_sweep(const LossModel& loss, const PriorModel& prior,
                                 const WeightedSample& sample, std::span<const int> m_values,
                                 const ContaminationSpec& spec_template,
                                 const SweepOptions& options) {
  ContaminationSpec plus = spec_template, minus = spec_template;
  plus.side = Side::plus;
  minus.side = Side::minus;
  std::vector<BreakdownReport> parts;
  parts.push_back(breakdown_sweep(loss, prior, sample, m_values, plus, options));
  parts.push_back(breakdown_sweep(loss, prior, sample, m_values, minus, options));
  // Even split, one m at a time since m_plus depends on m.
  {
    BreakdownReport split;
    split.n = sample.size();
    for (int m : m_values) {
      ContaminationSpec s = spec_template;
      s.side = Side::split;
      s.m_plus = m / 2;
      const int one[] = {m};
      BreakdownReport r = breakdown_sweep(loss, prior, sample, one, s, options);
      split.cells.insert(split.cells.end(), r.cells.begin(), r.cells.end());
      split.rows.insert(split.rows.end(), r.rows.begin(), r.rows.end());
    }
    parts.push_back(std::move(split));
  }

  BreakdownReport out = parts.front();
  out.measure = "w2 (max over plus, minus, split)";
  out.epsilon_hat.reset();
  const std::size_t k = spec_template.magnitudes.size();
  for (std::size_t c = 0; c < out.cells.size(); ++c) {
    for (std::size_t p = 1; p < parts.size(); ++p) {
      const BreakdownCell& other = parts[p].cells[c];
      BreakdownCell& cell = out.cells[c];
      if (other.divergent) {
        cell.divergent = true;
        cell.distance.reset();
        cell.mean_shift.reset();
      } else if (!cell.divergent && *other.distance > *cell.distance) {
        cell.distance = other.distance;
        cell.mean_shift = other.mean_shift;
      }
    }
  }
  for (std::size_t i = 0; i < out.rows.size(); ++i) {
    std::vector<BreakdownCell> row_cells(out.cells.begin() + static_cast<long>(i * k),
                                         out.cells.begin() + static_cast<long>((i + 1) * k));
    const bool boundary = out.rows[i].boundary;
    out.rows[i] =
        classify(out.rows[i].m, row_cells, spec_template.magnitudes, options.slope_threshold);
    out.rows[i].boundary = boundary;
  }
  finalize(out);
  return out;
}

double Functional::evaluate(const GridPosterior& post) const {
  switch (kind) {
    case Kind::mean:
      return posterior_mean(post);
    case Kind::quantile:
      return quantile(post, tau);
  }
  throw InvalidArgument("unknown functional");
}

BreakdownReport functional_breakdown(const LossModel& loss, const PriorModel& prior,
                                     const WeightedSample& sample, Functional functional,
                                     std::span<const int> m_values,
                                     const ContaminationSpec& spec_template,
                                     const SweepOptions& options) {
  if (functional.kind == Functional::Kind::quantile &&
      !(functional.tau > 0.0 && functional.tau < 1.0)) {
    throw InvalidArgument("quantile level must lie in (0, 1)");
  }
  Measure shift = [functional](const GridPosterior& a, const GridPosterior& b) {
    return std::optional<double>(std::abs(functional.evaluate(b) - functional.evaluate(a)));
  };
  std::string name = functional.kind == Functional::Kind::mean
                         ? std::string("mean")
                         : "quantile(" + format_real(functional.tau) + ")";
  return run_sweep({loss, prior, sample, options}, m_values, spec_template, shift,
                   std::move(name));
}

std::vector<double> compute_delta(const LossModel& loss, const WeightedSample& clean,
                                  const WeightedSample& contaminated,
                                  std::span<const double> theta_grid) {
  if (!loss.is_location_form()) {
    throw InvalidArgument("compute_delta needs a location-form loss, got " + loss.name());
  }
  if (clean.size() != contaminated.size()) {
    throw InvalidArgument("clean and contaminated samples differ in size");
  }
  const auto pts = contaminated.points();
  std::vector<double> base(pts.size());
  for (std::size_t i = 0; i < pts.size(); ++i) base[i] = loss.rho(pts[i], 0.0);
  std::vector<double> out(theta_grid.size());
  for (std::size_t j = 0; j < theta_grid.size(); ++j) {
    double s = 0.0;
    for (std::size_t i = 0; i < pts.size(); ++i) s += loss.rho(pts[i], theta_grid[j]) - base[i];
    out[j] = s;
  }
  return out;
}

void write_csv(std::ostream& out, const BreakdownReport& report) {
  CsvWriter w(out, {"m", "magnitude", "w2", "mean_shift", "divergent"});
  for (const auto& c : report.cells) {
    w.cell(c.m)
        .cell(c.magnitude)
        .cell(c.distance.value_or(kNaN))
        .cell(c.mean_shift.value_or(kNaN))
        .cell(c.divergent ? 1 : 0);
    w.end_row();
  }
}

}  // namespace mpost
