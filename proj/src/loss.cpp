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

#include "mposterior/loss.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <utility>

#include "mposterior/error.hpp"

namespace mpost {
namespace {

std::string param_name(std::string base, double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return base + "(" + buf + ")";
}

void require_positive(double v, const char* what) {
  if (!(v > 0.0) || !std::isfinite(v)) {
    throw InvalidArgument(std::string(what) + " must be positive and finite");
  }
}

double huber_rho(double r, double c) {
  const double a = std::abs(r);
  return a <= c ? 0.5 * r * r : c * a - 0.5 * c * c;
}

Interval positive_half_line() {
  Interval iv;
  iv.lower = 0.0;
  iv.lower_open = true;
  return iv;
}

}  // namespace

LossModel::LossModel(Parts parts) : p_(std::move(parts)) {
  if (!p_.rho || !p_.psi) throw InvalidArgument("loss needs rho and psi");
}

bool LossModel::in_domain(double x, double theta) const {
  if (!p_.theta_domain.contains(theta)) return false;
  return !p_.domain || p_.domain(x, theta);
}

void LossModel::check(double x, double theta) const {
  if (!in_domain(x, theta)) {
    throw DomainError(p_.name + ": (x, theta) outside the loss domain");
  }
}

double LossModel::rho(double x, double theta) const {
  if (p_.domain) check(x, theta);
  return p_.rho(x, theta);
}

double LossModel::rho_increment(double x, double theta, double theta0) const {
  if (p_.domain) {
    check(x, theta);
    check(x, theta0);
  }
  if (p_.rho_increment) return p_.rho_increment(x, theta, theta0);
  return p_.rho(x, theta) - p_.rho(x, theta0);
}

double LossModel::psi(double x, double theta) const {
  if (p_.domain) check(x, theta);
  return p_.psi(x, theta);
}

std::optional<double> LossModel::psi_dtheta(double x, double theta) const {
  if (!p_.psi_dtheta) return std::nullopt;
  if (p_.domain) check(x, theta);
  return p_.psi_dtheta(x, theta);
}

double LossModel::kink_distance(double x, double theta) const {
  return p_.kink_distance ? p_.kink_distance(x, theta) : kInf;
}

LossModel squared_loss() {
  LossModel::Parts p;
  p.name = "squared";
  p.rho = [](double x, double t) { return 0.5 * (x - t) * (x - t); };
  p.psi = [](double x, double t) { return t - x; };
  p.rho_increment = [](double x, double t, double t0) {
    return 0.5 * (t - t0) * ((t - x) + (t0 - x));
  };
  p.psi_dtheta = [](double, double) { return std::optional<double>(1.0); };
  p.convex = true;
  p.coercive = true;
  p.location_form = true;
  p.symmetric = true;
  p.lower_bound = 0.0;
  return LossModel(std::move(p));
}

LossModel huber_loss(double c) {
  require_positive(c, "huber threshold c");
  LossModel::Parts p;
  p.name = param_name("huber", c);
  p.rho = [c](double x, double t) { return huber_rho(x - t, c); };
  p.psi = [c](double x, double t) { return -std::clamp(x - t, -c, c); };
  p.psi_dtheta = [c](double x, double t) -> std::optional<double> {
    const double a = std::abs(x - t);
    if (a == c) return std::nullopt;
    return a < c ? 1.0 : 0.0;
  };
  p.convex = true;
  p.coercive = true;
  p.location_form = true;
  p.symmetric = true;
  p.score_bound = c;
  p.lower_bound = 0.0;
  p.kink_distance = [c](double x, double t) { return std::abs(std::abs(x - t) - c); };
  return LossModel(std::move(p));
}

LossModel check_loss(double tau) {
  if (!(tau > 0.0 && tau < 1.0)) throw InvalidArgument("check loss tau must lie in (0, 1)");
  LossModel::Parts p;
  p.name = param_name("check", tau);
  p.rho = [tau](double x, double t) {
    const double r = x - t;
    return r * (tau - (r < 0.0 ? 1.0 : 0.0));
  };
  p.psi = [tau](double x, double t) { return x - t >= 0.0 ? -tau : 1.0 - tau; };
  p.psi_dtheta = [](double x, double t) -> std::optional<double> {
    if (x == t) return std::nullopt;
    return 0.0;
  };
  p.convex = true;
  p.coercive = true;
  p.location_form = true;
  p.symmetric = tau == 0.5;
  p.score_bound = std::max(tau, 1.0 - tau);
  p.lower_bound = 0.0;
  p.kink_distance = [](double x, double t) { return std::abs(x - t); };
  return LossModel(std::move(p));
}

LossModel absolute_loss() {
  LossModel::Parts p;
  p.name = "absolute";
  p.rho = [](double x, double t) { return std::abs(x - t); };
  p.psi = [](double x, double t) { return x - t >= 0.0 ? -1.0 : 1.0; };
  p.psi_dtheta = [](double x, double t) -> std::optional<double> {
    if (x == t) return std::nullopt;
    return 0.0;
  };
  p.convex = true;
  p.coercive = true;
  p.location_form = true;
  p.symmetric = true;
  p.score_bound = 1.0;
  p.lower_bound = 0.0;
  p.kink_distance = [](double x, double t) { return std::abs(x - t); };
  return LossModel(std::move(p));
}

LossModel huber_skip_loss() {
  LossModel::Parts p;
  p.name = "huber_skip";
  p.rho = [](double x, double t) {
    const double r = x - t;
    return std::min(r * r, 1.0);
  };
  p.psi = [](double x, double t) {
    const double r = x - t;
    return (r >= -1.0 && r < 1.0) ? -2.0 * r : 0.0;
  };
  p.psi_dtheta = [](double x, double t) -> std::optional<double> {
    const double a = std::abs(x - t);
    if (a == 1.0) return std::nullopt;
    return a < 1.0 ? 2.0 : 0.0;
  };
  p.location_form = true;
  p.symmetric = true;
  p.score_bound = 2.0;
  p.lower_bound = 0.0;
  p.upper_bound = 1.0;
  p.kink_distance = [](double x, double t) { return std::abs(std::abs(x - t) - 1.0); };
  return LossModel(std::move(p));
}

LossModel reweighted_gaussian_loss(double kappa, double lambda) {
  require_positive(kappa, "kappa");
  require_positive(lambda, "lambda");
  const double shift = lambda + 0.5 * kLog2Pi;
  const double log_lambda = std::log(lambda);
  LossModel::Parts p;
  p.name = param_name(param_name("reweighted_gaussian", kappa), lambda);
  p.rho = [=](double x, double t) {
    const double r = x - t;
    return kappa * (std::log(shift + 0.5 * r * r) - log_lambda);
  };
  p.psi = [=](double x, double t) {
    const double r = x - t;
    return kappa * (t - x) / (shift + 0.5 * r * r);
  };
  p.psi_dtheta = [=](double x, double t) -> std::optional<double> {
    const double r = x - t;
    const double a = shift + 0.5 * r * r;
    return kappa * (a - r * r) / (a * a);
  };
  p.coercive = true;
  p.location_form = true;
  p.symmetric = true;
  p.score_bound = kappa / std::sqrt(2.0 * lambda + kLog2Pi);
  p.lower_bound = kappa * (std::log(shift) - log_lambda);
  return LossModel(std::move(p));
}

LossModel reweighted_exponential_loss(double kappa, double lambda) {
  require_positive(kappa, "kappa");
  require_positive(lambda, "lambda");
  const double log_lambda = std::log(lambda);
  LossModel::Parts p;
  p.name = param_name(param_name("reweighted_exponential", kappa), lambda);
  p.rho = [=](double x, double t) {
    return kappa * (std::log(lambda + t * x - std::log(t)) - log_lambda);
  };
  p.psi = [=](double x, double t) {
    return kappa * (x - 1.0 / t) / (lambda + t * x - std::log(t));
  };
  p.psi_dtheta = [=](double x, double t) -> std::optional<double> {
    const double a = lambda + t * x - std::log(t);
    const double u = x - 1.0 / t;
    return kappa * (a / (t * t) - u * u) / (a * a);
  };
  p.domain = [=](double x, double t) {
    return x >= 0.0 && t > 0.0 && lambda + t * x - std::log(t) > 0.0;
  };
  p.theta_domain = positive_half_line();
  return LossModel(std::move(p));
}

LossModel exponential_huber_loss(double c) {
  require_positive(c, "huber threshold c");
  LossModel::Parts p;
  p.name = param_name("exponential_huber", c);
  p.rho = [c](double x, double t) { return huber_rho(t * x - 1.0, c) / x; };
  p.psi = [c](double x, double t) { return std::clamp(t * x - 1.0, -c, c); };
  p.psi_dtheta = [c](double x, double t) -> std::optional<double> {
    const double a = std::abs(t * x - 1.0);
    if (a == c) return std::nullopt;
    return a < c ? x : 0.0;
  };
  p.convex = true;
  p.score_bound = c;
  p.lower_bound = 0.0;
  p.domain = [](double x, double t) { return x > 0.0 && t > 0.0; };
  p.theta_domain = positive_half_line();
  p.kink_distance = [c](double x, double t) {
    return std::abs(std::abs(t * x - 1.0) - c) / x;
  };
  return LossModel(std::move(p));
}

LossModel bias_correct(const LossModel& base, double b_hat) {
  LossModel::Parts p = base.parts();
  p.name = base.name() + "_corrected";
  p.rho = [base, b_hat](double x, double t) { return base.rho(x, t) - b_hat * t; };
  p.psi = [base, b_hat](double x, double t) { return base.psi(x, t) - b_hat; };
  p.rho_increment = [base, b_hat](double x, double t, double t0) {
    return base.rho_increment(x, t, t0) - b_hat * (t - t0);
  };
  if (base.score_bound()) p.score_bound = *base.score_bound() + std::abs(b_hat);
  if (b_hat != 0.0) {
    p.lower_bound.reset();
    p.upper_bound.reset();
    p.location_form = false;
    p.symmetric = false;
  }
  return LossModel(std::move(p));
}

double estimate_bias(const LossModel& loss, std::span<const double> reference_draws,
                     double theta_star) {
  if (reference_draws.empty()) throw InvalidArgument("estimate_bias needs draws");
  double sum = 0.0;
  for (double y : reference_draws) sum += loss.psi(y, theta_star);
  return sum / static_cast<double>(reference_draws.size());
}

LossModel scale_loss(const LossModel& base, double alpha) {
  require_positive(alpha, "loss scale");
  LossModel::Parts p = base.parts();
  p.name = param_name(base.name() + "*", alpha);
  p.rho = [base, alpha](double x, double t) { return alpha * base.rho(x, t); };
  p.psi = [base, alpha](double x, double t) { return alpha * base.psi(x, t); };
  p.rho_increment = [base, alpha](double x, double t, double t0) {
    return alpha * base.rho_increment(x, t, t0);
  };
  if (base.has_psi_dtheta()) {
    p.psi_dtheta = [base, alpha](double x, double t) -> std::optional<double> {
      auto d = base.psi_dtheta(x, t);
      if (!d) return std::nullopt;
      return alpha * *d;
    };
  }
  if (p.score_bound) *p.score_bound *= alpha;
  if (p.lower_bound) *p.lower_bound *= alpha;
  if (p.upper_bound) *p.upper_bound *= alpha;
  return LossModel(std::move(p));
}

LossModel with_score_bound(const LossModel& base, double bound) {
  require_positive(bound, "score bound");
  LossModel::Parts p = base.parts();
  p.score_bound = bound;
  return LossModel(std::move(p));
}

}  // namespace mpost
