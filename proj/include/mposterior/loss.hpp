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

#include <functional>
#include <optional>
#include <span>
#include <string>

#include "mposterior/numeric.hpp"

namespace mpost {

/// A loss rho(x, theta) with score psi = d rho / d theta and the analytic
/// properties the robustness results depend on. Immutable after
/// construction.
///
/// Location losses are written in the residual r = x - theta, so their
/// theta-score carries a sign flip relative to the residual derivative.
/// At kinks psi takes the left limit in theta (the branch that holds for
/// slightly larger residuals) and psi_dtheta reports no value.
class LossModel {
 public:
  using Fn = std::function<double(double x, double theta)>;
  using PartialFn = std::function<std::optional<double>(double x, double theta)>;
  using DomainFn = std::function<bool(double x, double theta)>;
  using IncrementFn = std::function<double(double x, double theta, double theta0)>;

  struct Parts {
    std::string name;
    Fn rho;
    Fn psi;
    PartialFn psi_dtheta;  // may be empty
    bool convex = false;
    bool coercive = false;
    bool location_form = false;
    bool symmetric = false;
    std::optional<double> score_bound;
    std::optional<double> lower_bound;
    std::optional<double> upper_bound;
    DomainFn domain;  // empty means every (x, theta) is admissible
    Interval theta_domain;
    /// Distance in theta from (x, theta) to the nearest non-smooth point.
    Fn kink_distance;  // empty means smooth
    /// rho(x, theta) - rho(x, theta0) without cancellation; empty means
    /// plain subtraction.
    IncrementFn rho_increment;
  };

  explicit LossModel(Parts parts);

  const std::string& name() const { return p_.name; }

  /// Throws DomainError outside the declared domain.
  double rho(double x, double theta) const;
  double psi(double x, double theta) const;
  /// rho(x, theta) - rho(x, theta0).
  double rho_increment(double x, double theta, double theta0) const;
  /// Empty when the loss does not declare a derivative or at a kink.
  std::optional<double> psi_dtheta(double x, double theta) const;

  bool in_domain(double x, double theta) const;
  bool is_convex() const { return p_.convex; }
  bool is_coercive() const { return p_.coercive; }
  bool is_location_form() const { return p_.location_form; }
  bool is_symmetric() const { return p_.symmetric; }
  const std::optional<double>& score_bound() const { return p_.score_bound; }
  const std::optional<double>& lower_bound() const { return p_.lower_bound; }
  const std::optional<double>& upper_bound() const { return p_.upper_bound; }
  const Interval& theta_domain() const { return p_.theta_domain; }
  bool has_psi_dtheta() const { return static_cast<bool>(p_.psi_dtheta); }

  /// +inf for smooth losses.
  double kink_distance(double x, double theta) const;

  const Parts& parts() const { return p_; }

 private:
  void check(double x, double theta) const;

  Parts p_;
};

LossModel squared_loss();
LossModel huber_loss(double c);
LossModel check_loss(double tau);
/// rho = |x - theta|.
LossModel absolute_loss();
LossModel huber_skip_loss();
LossModel reweighted_gaussian_loss(double kappa, double lambda);
LossModel reweighted_exponential_loss(double kappa, double lambda);
LossModel exponential_huber_loss(double c);

/// rho - b_hat * theta.
LossModel bias_correct(const LossModel& base, double b_hat);

/// Mean of psi(draw, theta_star) over the draws.
double estimate_bias(const LossModel& loss, std::span<const double> reference_draws,
                     double theta_star);

/// alpha * rho; identical to giving every observation weight alpha.
LossModel scale_loss(const LossModel& base, double alpha);

/// Copy of `base` with a replaced score-bound declaration.
LossModel with_score_bound(const LossModel& base, double bound);

}  // namespace mpost
