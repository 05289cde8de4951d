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

#include "mposterior/prior.hpp"

#include <cmath>
#include <numbers>
#include <utility>

#include "mposterior/error.hpp"

namespace mpost {

std::string_view to_string(TailClass t) {
  switch (t) {
    case TailClass::flat:
      return "flat";
    case TailClass::heavy_tailed:
      return "heavy_tailed";
    case TailClass::exponential_like:
      return "exponential_like";
    case TailClass::lighter_than_exponential:
      return "lighter_than_exponential";
  }
  return "unknown";
}

PriorModel::PriorModel(Parts parts) : p_(std::move(parts)) {
  if (!p_.log_density) throw InvalidArgument("prior needs a log density");
}

double PriorModel::log_density(double theta) const {
  if (!p_.support.contains(theta)) return -kInf;
  return p_.log_density(theta);
}

PriorModel flat_prior(double level) {
  if (!std::isfinite(level)) throw InvalidArgument("flat prior level must be finite");
  PriorModel::Parts p;
  p.name = "flat";
  p.log_density = [level](double) { return level; };
  p.proper = false;
  p.tail = TailClass::flat;
  p.finite_moment_order.reset();
  p.tail_lipschitz = 0.0;
  return PriorModel(std::move(p));
}

PriorModel gaussian_prior(double mu0, double sigma0_sq) {
  if (!(sigma0_sq > 0.0) || !std::isfinite(sigma0_sq)) {
    throw InvalidArgument("gaussian prior variance must be positive");
  }
  const double log_norm = -0.5 * (kLog2Pi + std::log(sigma0_sq));
  PriorModel::Parts p;
  p.name = "gaussian";
  p.log_density = [=](double t) {
    const double z = t - mu0;
    return log_norm - 0.5 * z * z / sigma0_sq;
  };
  p.proper = true;
  p.tail = TailClass::lighter_than_exponential;
  p.center = mu0;
  return PriorModel(std::move(p));
}

PriorModel laplace_prior(double b, double loc) {
  if (!(b > 0.0) || !std::isfinite(b)) throw InvalidArgument("laplace scale b must be positive");
  const double log_norm = -std::log(2.0 * b);
  PriorModel::Parts p;
  p.name = "laplace";
  p.log_density = [=](double t) { return log_norm - std::abs(t - loc) / b; };
  p.proper = true;
  p.tail = TailClass::exponential_like;
  p.tail_lipschitz = 1.0 / b;
  p.center = loc;
  return PriorModel(std::move(p));
}

PriorModel cauchy_prior(double loc, double scale) {
  if (!(scale > 0.0) || !std::isfinite(scale)) {
    throw InvalidArgument("cauchy scale must be positive");
  }
  const double log_norm = -std::log(std::numbers::pi * scale);
  PriorModel::Parts p;
  p.name = "cauchy";
  p.log_density = [=](double t) {
    const double z = (t - loc) / scale;
    return log_norm - std::log1p(z * z);
  };
  p.proper = true;
  p.tail = TailClass::heavy_tailed;
  p.finite_moment_order = 0;
  p.tail_lipschitz = 1.0 / scale;
  p.center = loc;
  return PriorModel(std::move(p));
}

PriorModel shift_log_density(const PriorModel& base, double c) {
  PriorModel::Parts p = base.parts();
  p.log_density = [base, c](double t) { return base.log_density(t) + c; };
  return PriorModel(std::move(p));
}

PriorModel restrict_support(const PriorModel& base, Interval support) {
  PriorModel::Parts p = base.parts();
  p.support = base.support().intersect(support);
  if (p.support.lower >= p.support.upper) throw InvalidArgument("empty prior support");
  if (p.center && !p.support.contains(*p.center)) p.center.reset();
  p.name = base.name() + "_restricted";
  return PriorModel(std::move(p));
}

}  // namespace mpost
