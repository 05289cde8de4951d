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
#include <string>
#include <string_view>

#include "mposterior/numeric.hpp"

namespace mpost {

enum class TailClass { flat, heavy_tailed, exponential_like, lighter_than_exponential };

std::string_view to_string(TailClass t);

/// A log prior density over theta, possibly improper and unnormalized.
/// The tail class is declared by the constructor, not inferred.
class PriorModel {
 public:
  struct Parts {
    std::string name;
    std::function<double(double)> log_density;
    bool proper = false;
    TailClass tail = TailClass::flat;
    std::optional<int> finite_moment_order;  // empty means all moments
    bool upper_bounded = true;
    /// Lipschitz constant of the log density for |theta| > 10, when one exists.
    std::optional<double> tail_lipschitz;
    /// Location the posterior builder probes as a likely mass point.
    std::optional<double> center;
    Interval support;
  };

  explicit PriorModel(Parts parts);

  const std::string& name() const { return p_.name; }
  /// -inf outside the support.
  double log_density(double theta) const;
  bool is_proper() const { return p_.proper; }
  TailClass tail_class() const { return p_.tail; }
  const std::optional<int>& finite_moment_order() const { return p_.finite_moment_order; }
  bool is_upper_bounded() const { return p_.upper_bounded; }
  const std::optional<double>& tail_lipschitz() const { return p_.tail_lipschitz; }
  const std::optional<double>& center() const { return p_.center; }
  const Interval& support() const { return p_.support; }
  const Parts& parts() const { return p_; }

 private:
  Parts p_;
};

/// log density identically `level` (0 by default).
PriorModel flat_prior(double level = 0.0);
PriorModel gaussian_prior(double mu0, double sigma0_sq);
PriorModel laplace_prior(double b, double loc = 0.0);
PriorModel cauchy_prior(double loc, double scale);

/// Adds a constant to the log density.
PriorModel shift_log_density(const PriorModel& base, double c);

/// Restricts the prior to `support`.
PriorModel restrict_support(const PriorModel& base, Interval support);

}  // namespace mpost
