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

#include "mposterior/bvm.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <random>

#include "mposterior/csv.hpp"
#include "mposterior/error.hpp"
#include "mposterior/inference.hpp"
#include "mposterior/parallel.hpp"

namespace mpost {

WeightsMode WeightsMode::constant(double alpha) {
  if (!(alpha > 0.0) || !std::isfinite(alpha)) {
    throw InvalidArgument("constant weight must be positive and finite");
  }
  WeightsMode m;
  m.kind = Kind::constant;
  m.alpha = alpha;
  return m;
}

WeightsMode WeightsMode::random_gamma(double kappa, double lambda) {
  if (!(kappa > 0.0) || !(lambda > 0.0)) {
    throw InvalidArgument("gamma weights need positive shape and rate");
  }
  WeightsMode m;
  m.kind = Kind::random_gamma;
  m.kappa = kappa;
  m.lambda = lambda;
  return m;
}

WeightsMode WeightsMode::fixed_sequence(std::vector<double> weights) {
  if (weights.empty()) throw InvalidArgument("fixed weight sequence is empty");
  WeightsMode m;
  m.kind = Kind::fixed_sequence;
  m.sequence = std::move(weights);
  return m;
}

std::string WeightsMode::describe() const {
  switch (kind) {
    case Kind::unit:
      return "unit";
    case Kind::constant:
      return "constant(" + format_real(alpha) + ")";
    case Kind::random_gamma:
      return "random_gamma(" + format_real(kappa) + "," + format_real(lambda) + ")";
    case Kind::fixed_sequence:
      return "fixed_sequence";
  }
  return "unknown";
}

WeightedSample apply_weights(std::vector<double> points, const WeightsMode& mode,
                             std::uint64_t seed) {
  const std::size_t n = points.size();
  std::vector<double> w(n, 1.0);
  switch (mode.kind) {
    case WeightsMode::Kind::unit:
      break;
    case WeightsMode::Kind::constant:
      std::fill(w.begin(), w.end(), mode.alpha);
      break;
    case WeightsMode::Kind::random_gamma: {
      std::mt19937_64 rng(seed);
      std::gamma_distribution<double> gamma(mode.kappa, 1.0 / mode.lambda);
      for (auto& wi : w) wi = gamma(rng);
      break;
    }
    case WeightsMode::Kind::fixed_sequence:
      if (mode.sequence.size() < n) {
        throw InvalidArgument("fixed weight sequence shorter than the sample");
      }
      std::copy_n(mode.sequence.begin(), n, w.begin());
      break;
  }
  return WeightedSample(std::move(points), std::move(w));
}

double estimate_v(const LossModel& loss, const WeightedSample& sample, double theta_hat) {
  const double h = 1e-5 * (1.0 + std::abs(theta_hat));
  const auto xs = sample.points();
  const auto ws = sample.weights();
  double acc = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (ws[i] == 0.0) continue;
    std::optional<double> d;
    if (loss.has_psi_dtheta()) d = loss.psi_dtheta(xs[i], theta_hat);
    if (!d) d = (loss.psi(xs[i], theta_hat + h) - loss.psi(xs[i], theta_hat - h)) / (2.0 * h);
    acc += ws[i] * *d;
  }
  const double v = acc / sample.total_weight();
  if (!(v > 0.0)) {
    throw DomainError("nonpositive curvature estimate; the limiting normal is undefined");
  }
  return v;
}

BvmGap bvm_gap(const LossModel& loss, const PriorModel& prior, const WeightedSample& sample,
               const BuildOptions& options) {
  const MEstimate est = m_estimate_1d(loss, sample, default_bracket(loss, sample));
  if (!est.converged) throw EvaluationError("M-estimate did not converge");
  BvmGap gap;
  gap.theta_hat = est.theta_hat;
  gap.v_hat = estimate_v(loss, sample, est.theta_hat);
  gap.normal_variance = 1.0 / (gap.v_hat * sample.total_weight());
  const GridPosterior post = build_posterior(loss, prior, sample, options);
  if (post.divergent()) throw DivergenceError("posterior is divergent; no BvM comparison");
  gap.posterior_variance = posterior_variance(post);
  gap.tv = tv_distance_to_normal(post, gap.theta_hat, gap.normal_variance);
  return gap;
}

BvmGap bvm_gap(const LossModel& loss, const PriorModel& prior, std::vector<double> points,
               const WeightsMode& mode, std::uint64_t weight_seed, const BuildOptions& options) {
  return bvm_gap(loss, prior, apply_weights(std::move(points), mode, weight_seed), options);
}

BvmReport bvm_sweep(const LossModel& loss, const PriorModel& prior,
                    const DataGenerator& generator, const std::vector<int>& n_ladder,
                    const WeightsMode& mode, int replications, std::uint64_t seed,
                    const BuildOptions& options) {
  if (n_ladder.empty()) throw InvalidArgument("sample-size ladder is empty");
  for (std::size_t i = 0; i < n_ladder.size(); ++i) {
    if (n_ladder[i] < 1 || (i > 0 && n_ladder[i] <= n_ladder[i - 1])) {
      throw InvalidArgument("sample-size ladder must be positive and strictly increasing");
    }
  }
  if (replications < 1) throw InvalidArgument("need at least one replication");

  BvmReport report;
  report.n_ladder = n_ladder;
  report.weights_mode = mode;
  const std::size_t reps = static_cast<std::size_t>(replications);
  report.records.resize(n_ladder.size() * reps);
  parallel_for(report.records.size(), [&](std::size_t idx) {
    BvmRecord& rec = report.records[idx];
    rec.n = n_ladder[idx / reps];
    rec.replication = static_cast<int>(idx % reps);
    rec.seed = seed + static_cast<std::uint64_t>(rec.replication);
    std::seed_seq ss{rec.seed, static_cast<std::uint64_t>(rec.n), std::uint64_t{0x77}};
    std::array<std::uint32_t, 2> words{};
    ss.generate(words.begin(), words.end());
    const std::uint64_t weight_seed = (std::uint64_t{words[0]} << 32) | words[1];
    rec.gap = bvm_gap(loss, prior, generator(rec.n, rec.seed), mode, weight_seed, options);
  });

  for (std::size_t i = 0; i < n_ladder.size(); ++i) {
    double sum = 0.0, lo = 1.0, hi = 0.0, th = 0.0, v = 0.0;
    for (std::size_t r = 0; r < reps; ++r) {
      const BvmGap& g = report.records[i * reps + r].gap;
      sum += g.tv;
      lo = std::min(lo, g.tv);
      hi = std::max(hi, g.tv);
      th += g.theta_hat;
      v += g.v_hat;
    }
    const double k = static_cast<double>(reps);
    report.tv_mean.push_back(sum / k);
    report.tv_min.push_back(lo);
    report.tv_max.push_back(hi);
    report.theta_hat_mean.push_back(th / k);
    report.v_hat_mean.push_back(v / k);
  }
  return report;
}

void write_csv(std::ostream& out, const BvmReport& report) {
  CsvWriter w(out, {"n", "replication", "tv", "theta_hat", "v_hat"});
  for (const auto& r : report.records) {
    w.cell(r.n).cell(r.replication).cell(r.gap.tv).cell(r.gap.theta_hat).cell(r.gap.v_hat);
    w.end_row();
  }
}

}  // namespace mpost
