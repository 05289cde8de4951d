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

#include "mposterior/inference.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "mposterior/csv.hpp"
#include "mposterior/error.hpp"
#include "mposterior/numeric.hpp"

namespace mpost {
namespace {

double score_sum(const LossModel& loss, const WeightedSample& s, double theta) {
  const auto xs = s.points();
  const auto ws = s.weights();
  double total = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (ws[i] == 0.0) continue;
    total += ws[i] * loss.psi(xs[i], theta);
  }
  if (!std::isfinite(total)) throw EvaluationError("non-finite score sum");
  return total;
}

double objective(const LossModel& loss, const WeightedSample& s, double theta) {
  const auto xs = s.points();
  const auto ws = s.weights();
  double total = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (ws[i] == 0.0) continue;
    total += ws[i] * loss.rho(xs[i], theta);
  }
  if (!std::isfinite(total)) throw EvaluationError("non-finite objective");
  return total;
}

MEstimate bisect_score(const LossModel& loss, const WeightedSample& s, double lo, double hi) {
  double slo = score_sum(loss, s, lo);
  double shi = score_sum(loss, s, hi);
  if (slo > 0.0 || shi < 0.0) {
    throw BracketingError("weighted score sum does not change sign on the bracket");
  }
  MEstimate est;
  if (slo == 0.0) {
    hi = lo;
  } else if (shi == 0.0) {
    lo = hi;
  }
  while (lo < hi && est.iterations < 400) {
    const double mid = lo + 0.5 * (hi - lo);
    if (mid <= lo || mid >= hi) break;
    ++est.iterations;
    const double sm = score_sum(loss, s, mid);
    if (sm == 0.0) {
      lo = hi = mid;
    } else if (sm < 0.0) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  est.theta_hat = lo + 0.5 * (hi - lo);
  est.bracket_width = hi - lo;
  est.objective_value = objective(loss, s, est.theta_hat);
  est.converged = est.bracket_width <= 1e-10 * std::max(1.0, std::abs(est.theta_hat));
  return est;
}

MEstimate scan_and_refine(const LossModel& loss, const WeightedSample& s, double lo, double hi) {
  constexpr int kCells = 4096;
  const double h = (hi - lo) / kCells;
  int best = 0;
  double best_val = kInf;
  for (int i = 0; i <= kCells; ++i) {
    const double t = i == kCells ? hi : lo + h * i;
    const double v = objective(loss, s, t);
    if (v < best_val) {
      best_val = v;
      best = i;
    }
  }
  double a = std::max(lo, lo + h * (best - 1));
  double b = std::min(hi, lo + h * (best + 1));

  MEstimate est;
  constexpr double kInvPhi = 0.6180339887498949;
  double c = b - kInvPhi * (b - a);
  double d = a + kInvPhi * (b - a);
  double fc = objective(loss, s, c);
  double fd = objective(loss, s, d);
  while (b - a > 1e-12 * std::max(1.0, std::abs(a)) && est.iterations < 200) {
    ++est.iterations;
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - kInvPhi * (b - a);
      fc = objective(loss, s, c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + kInvPhi * (b - a);
      fd = objective(loss, s, d);
    }
  }
  double theta = 0.5 * (a + b);
  double val = objective(loss, s, theta);

  // Score-sign polish inside the refined cell when a root is bracketed.
  const double pa = score_sum(loss, s, a);
  const double pb = score_sum(loss, s, b);
  if (pa < 0.0 && pb > 0.0) {
    double l = a, r = b;
    for (int k = 0; k < 200; ++k) {
      const double mid = l + 0.5 * (r - l);
      if (mid <= l || mid >= r) break;
      (score_sum(loss, s, mid) < 0.0 ? l : r) = mid;
    }
    const double root = l + 0.5 * (r - l);
    const double root_val = objective(loss, s, root);
    if (root_val <= val) {
      theta = root;
      val = root_val;
    }
  }
  if (best_val < val) {
    theta = lo + h * best;
    val = best_val;
  }
  est.theta_hat = theta;
  est.objective_value = val;
  est.bracket_width = b - a;
  est.converged = true;
  return est;
}

double open_offset(double bound, double other) {
  return 1e-9 * std::max(std::abs(other - bound), 1e-300);
}

}  // namespace

MEstimate m_estimate_1d(const LossModel& loss, const WeightedSample& sample,
                        std::pair<double, double> bracket) {
  auto [lo, hi] = bracket;
  if (!(lo < hi)) throw InvalidArgument("bracket must satisfy lower < upper");
  if (!(sample.total_weight() > 0.0)) throw InvalidArgument("all weights are zero");
  const Interval& dom = loss.theta_domain();
  if (lo <= dom.lower) lo = dom.lower + (dom.lower_open ? open_offset(dom.lower, hi) : 0.0);
  if (hi >= dom.upper) hi = dom.upper - (dom.upper_open ? open_offset(dom.upper, lo) : 0.0);
  if (!(lo < hi)) throw InvalidArgument("bracket lies outside the loss domain");
  return loss.is_convex() ? bisect_score(loss, sample, lo, hi)
                          : scan_and_refine(loss, sample, lo, hi);
}

std::pair<double, double> default_bracket(const LossModel& loss, const WeightedSample& sample) {
  std::vector<double> xs(sample.points().begin(), sample.points().end());
  const auto [mn, mx] = std::minmax_element(xs.begin(), xs.end());
  const double pad = std::max(3.0 * mad(xs), 1.0);
  double lo = *mn - pad;
  double hi = *mx + pad;
  const Interval& dom = loss.theta_domain();
  if (lo <= dom.lower) lo = dom.lower + (dom.lower_open ? open_offset(dom.lower, hi) : 0.0);
  if (hi >= dom.upper) hi = dom.upper - (dom.upper_open ? open_offset(dom.upper, lo) : 0.0);
  return {lo, hi};
}

double bootstrap_se(const LossModel& loss, const WeightedSample& sample,
                    std::pair<double, double> bracket, int replicates, std::uint64_t seed) {
  if (replicates < 2) throw InvalidArgument("bootstrap needs at least two replicates");
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> pick(0, sample.size() - 1);
  std::vector<double> estimates;
  estimates.reserve(static_cast<std::size_t>(replicates));
  std::vector<double> xs(sample.size()), ws(sample.size());
  for (int r = 0; r < replicates; ++r) {
    for (std::size_t i = 0; i < sample.size(); ++i) {
      const std::size_t j = pick(rng);
      xs[i] = sample.points()[j];
      ws[i] = sample.weights()[j];
    }
    estimates.push_back(m_estimate_1d(loss, WeightedSample(xs, ws), bracket).theta_hat);
  }
  const auto ms = mean_and_se(estimates);
  return ms.se * std::sqrt(static_cast<double>(replicates));
}

DesignMatrix::DesignMatrix(std::size_t rows, std::size_t cols)
    : rows_(rows), cols_(cols), data_(rows * cols, 0.0) {
  if (rows == 0 || cols == 0) throw InvalidArgument("design matrix must be non-empty");
}

DesignMatrix DesignMatrix::intercept_only(std::size_t rows) {
  DesignMatrix m(rows, 1);
  for (std::size_t i = 0; i < rows; ++i) m(i, 0) = 1.0;
  return m;
}

double check_objective(const DesignMatrix& design, std::span<const double> responses,
                       double tau, std::span<const double> beta) {
  double total = 0.0;
  for (std::size_t i = 0; i < design.rows(); ++i) {
    double fit = 0.0;
    for (std::size_t j = 0; j < design.cols(); ++j) fit += design(i, j) * beta[j];
    const double r = responses[i] - fit;
    total += r * (tau - (r < 0.0 ? 1.0 : 0.0));
  }
  return total;
}

std::vector<double> quantile_regression_fit(const DesignMatrix& design,
                                            std::span<const double> responses, double tau) {
  const std::size_t n = design.rows();
  const std::size_t d = design.cols();
  if (!(tau > 0.0 && tau < 1.0)) throw InvalidArgument("tau must lie in (0, 1)");
  if (responses.size() != n) throw InvalidArgument("responses and design rows differ");
  if (n <= d) throw InvalidArgument("quantile regression needs more rows than columns");

  Eigen::MatrixXd x(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
  Eigen::VectorXd y(static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) {
    y(i) = responses[i];
    for (std::size_t j = 0; j < d; ++j) x(i, j) = design(i, j);
  }
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(x);
  const auto rank = static_cast<std::size_t>(qr.rank());
  if (rank < d) {
    const int missing = static_cast<int>(d - rank);
    throw RankDeficientError("design matrix is rank deficient by " + std::to_string(missing) +
                                 " column(s)",
                             missing);
  }

  Eigen::VectorXd beta = qr.solve(y);
  Eigen::VectorXd w(static_cast<Eigen::Index>(n));
  for (double floor = 1e-2; floor >= 1e-8 * 0.999; floor *= 0.1) {
    for (int it = 0; it < 50; ++it) {
      const Eigen::VectorXd r = y - x * beta;
      for (std::size_t i = 0; i < n; ++i) {
        const double side = r(i) >= 0.0 ? tau : 1.0 - tau;
        w(i) = side / std::max(std::abs(r(i)), floor);
      }
      const Eigen::MatrixXd xtw = x.transpose() * w.asDiagonal();
      const Eigen::VectorXd next = (xtw * x).ldlt().solve(xtw * y);
      const double change = (next - beta).lpNorm<Eigen::Infinity>();
      beta = next;
      if (change <= 1e-12 * (1.0 + beta.lpNorm<Eigen::Infinity>())) break;
    }
  }

  std::vector<double> b(beta.data(), beta.data() + d);
  double current = check_objective(design, responses, tau, b);

  // Exact coordinate descent: each 1-D problem is a weighted quantile.
  struct Knot {
    double z;
    double weight;
  };
  std::vector<Knot> knots;
  for (int sweep = 0; sweep < 1000; ++sweep) {
    bool improved = false;
    for (std::size_t j = 0; j < d; ++j) {
      knots.clear();
      double slope = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        const double xij = design(i, j);
        if (xij == 0.0) continue;
        double partial = responses[i];
        for (std::size_t k = 0; k < d; ++k) {
          if (k != j) partial -= design(i, k) * b[k];
        }
        const double tau_i = xij > 0.0 ? tau : 1.0 - tau;
        knots.push_back({partial / xij, std::abs(xij)});
        slope -= std::abs(xij) * tau_i;
      }
      if (knots.empty()) continue;
      std::sort(knots.begin(), knots.end(), [](const Knot& l, const Knot& r) { return l.z < r.z; });
      double best = knots.back().z;
      for (const auto& k : knots) {
        slope += k.weight;
        if (slope >= 0.0) {
          best = k.z;
          break;
        }
      }
      std::vector<double> trial = b;
      trial[j] = best;
      const double value = check_objective(design, responses, tau, trial);
      if (value < current - 1e-10) {
        b = std::move(trial);
        current = value;
        improved = true;
      }
    }
    if (!improved) break;
  }
  return b;
}

Chain mh_sample(const std::function<double(double)>& log_target, double init, int steps,
                double proposal_sd, int burn_in, std::uint64_t seed) {
  if (steps <= 0 || burn_in < 0 || burn_in >= steps) {
    throw InvalidArgument("need steps > burn_in >= 0");
  }
  if (!(proposal_sd > 0.0)) throw InvalidArgument("proposal_sd must be positive");
  auto safe_target = [&](double t) {
    try {
      return log_target(t);
    } catch (const DomainError&) {
      return -kInf;
    }
  };
  double current = init;
  double current_lp = log_target(init);
  if (!std::isfinite(current_lp)) throw InvalidArgument("log target is not finite at init");

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> step(0.0, proposal_sd);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  Chain chain;
  chain.seed = seed;
  chain.burn_in = burn_in;
  chain.draws.reserve(static_cast<std::size_t>(steps));
  long long accepted = 0;
  for (int s = 0; s < steps; ++s) {
    const double proposal = current + step(rng);
    const double lp = safe_target(proposal);
    const double u = unif(rng);
    if (std::isfinite(lp) && std::log(u) < lp - current_lp) {
      current = proposal;
      current_lp = lp;
      ++accepted;
    }
    chain.draws.push_back(current);
  }
  chain.acceptance_rate = static_cast<double>(accepted) / static_cast<double>(steps);
  return chain;
}

Chain mh_sample(const std::function<double(double)>& log_target, double init, int steps,
                double proposal_sd, std::uint64_t seed) {
  return mh_sample(log_target, init, steps, proposal_sd, steps / 5, seed);
}

void write_csv(std::ostream& out, const Chain& chain) {
  CsvWriter w(out, {"iter", "theta"});
  for (std::size_t i = 0; i < chain.draws.size(); ++i) {
    w.cell(static_cast<long long>(i)).cell(chain.draws[i]);
    w.end_row();
  }
}

}  // namespace mpost
