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


#include "mposterior/cli/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>

#include "mposterior/breakdown.hpp"
#include "mposterior/bvm.hpp"
#include "mposterior/csv.hpp"
#include "mposterior/error.hpp"
#include "mposterior/inference.hpp"
#include "mposterior/parallel.hpp"
#include "mposterior/posterior.hpp"
#include "mposterior/robustness.hpp"

namespace mpost::cli {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

class Output {
 public:
  Output(const ExperimentConfig& config, RunResult& result)
      : dir_(config.out_dir), result_(result) {}

  void write(const std::string& name, const std::function<void(std::ostream&)>& body) {
    const fs::path path = dir_ / name;
    std::ostringstream buf;
    buf.imbue(std::locale::classic());
    body(buf);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out << buf.str();
    if (!out) throw ConfigError("out", "cannot write '" + path.string() + "'");
    result_.files.push_back(name);
  }

  void write_json(const std::string& name, const json& doc) {
    write(name, [&](std::ostream& os) { os << doc.dump(2) << '\n'; });
  }

 private:
  fs::path dir_;
  RunResult& result_;
};

json optional_real(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

std::vector<double> checked_grid(const ExperimentConfig& c, const std::string& prefix) {
  const double lo = param_real(c, prefix + "_min");
  const double hi = param_real(c, prefix + "_max");
  const int points = param_int(c, prefix + "_points");
  if (!(lo < hi)) throw ConfigError("params." + prefix + "_min", "must be below _max");
  if (points < 2) throw ConfigError("params." + prefix + "_points", "need at least 2");
  return linspace(lo, hi, points);
}

Side parse_side(const std::string& s) {
  if (s == "plus") return Side::plus;
  if (s == "minus") return Side::minus;
  if (s == "split") return Side::split;
  throw ConfigError("params.side", "expected plus, minus or split");
}

WeightsMode parse_weights(const ExperimentConfig& c) {
  if (!c.params.contains("weights") || !c.params.at("weights").is_object()) {
    throw ConfigError("params.weights", "expected an object");
  }
  const json& w = c.params.at("weights");
  static const std::set<std::string> keys = {"kind", "alpha", "kappa", "lambda", "sequence"};
  for (const auto& [k, v] : w.items()) {
    if (!keys.count(k)) throw ConfigError("params.weights." + k, "unknown key");
  }
  auto real = [&](const char* key) {
    if (!w.contains(key) || !w.at(key).is_number()) {
      throw ConfigError(std::string("params.weights.") + key, "expected a number");
    }
    return w.at(key).get<double>();
  };
  const std::string kind = w.value("kind", "unit");
  try {
    if (kind == "unit") return WeightsMode::unit();
    if (kind == "constant") return WeightsMode::constant(real("alpha"));
    if (kind == "random_gamma") return WeightsMode::random_gamma(real("kappa"), real("lambda"));
    if (kind == "fixed_sequence") {
      if (!w.contains("sequence") || !w.at("sequence").is_array()) {
        throw ConfigError("params.weights.sequence", "expected an array of numbers");
      }
      return WeightsMode::fixed_sequence(w.at("sequence").get<std::vector<double>>());
    }
  } catch (const InvalidArgument& e) {
    throw ConfigError("params.weights", e.what());
  }
  throw ConfigError("params.weights.kind", "unknown weights kind '" + kind + "'");
}

std::string utc_now() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace

RunResult run_pif(const ExperimentConfig& c) {
  RunResult result;
  Output out(c, result);
  const WeightedSample sample(make_data(c.data));
  const PriorModel prior = make_prior(c.prior);
  const InfluenceEngine gauss(squared_loss(), prior, sample);
  const InfluenceEngine robust(make_loss(c.loss), prior, sample);
  const double theta_fixed = param_real(c, "theta_fixed");
  const double x0_fixed = param_real(c, "x0_fixed");
  const auto x0s = checked_grid(c, "x0");
  const auto thetas = checked_grid(c, "theta");

  std::vector<double> gx(x0s.size()), rx(x0s.size());
  parallel_for(x0s.size(), [&](std::size_t i) {
    gx[i] = gauss.pif(x0s[i], theta_fixed);
    rx[i] = robust.pif(x0s[i], theta_fixed);
  });
  std::vector<double> gt(thetas.size()), rt(thetas.size());
  parallel_for(thetas.size(), [&](std::size_t j) {
    gt[j] = gauss.pif(x0_fixed, thetas[j]);
    rt[j] = robust.pif(x0_fixed, thetas[j]);
  });

  out.write("pif_vs_x0.csv", [&](std::ostream& os) {
    CsvWriter w(os, {"x0", "theta", "pif_gaussian", "pif_robust"});
    for (std::size_t i = 0; i < x0s.size(); ++i) {
      w.cell(x0s[i]).cell(theta_fixed).cell(gx[i]).cell(rx[i]);
      w.end_row();
    }
  });
  out.write("pif_vs_theta.csv", [&](std::ostream& os) {
    CsvWriter w(os, {"theta", "x0", "pif_gaussian", "pif_robust"});
    for (std::size_t j = 0; j < thetas.size(); ++j) {
      w.cell(thetas[j]).cell(x0_fixed).cell(gt[j]).cell(rt[j]);
      w.end_row();
    }
  });

  auto sup = [](const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s = std::max(s, std::abs(x));
    return s;
  };
  result.summary = {{"n", sample.size()},
                    {"robust_loss", robust.loss().name()},
                    {"sup_abs_vs_x0", {{"gaussian", sup(gx)}, {"robust", sup(rx)}}},
                    {"sup_abs_vs_theta", {{"gaussian", sup(gt)}, {"robust", sup(rt)}}}};
  return result;
}

RunResult run_bias(const ExperimentConfig& c) {
  RunResult result;
  Output out(c, result);
  const LossModel loss = make_loss(c.loss);
  const PriorModel prior = make_prior(c.prior);
  const double theta_star = param_real(c, "theta_star");
  const int reference_draws = param_int(c, "reference_draws");
  const int reps = param_int(c, "bootstrap_replicates");
  const int mh_n = param_int(c, "mh_n");
  const int mh_steps = param_int(c, "mh_steps");
  const double scale = param_real(c, "proposal_scale");
  auto trace_n = param_ints(c, "trace_n");
  if (reference_draws < 2) throw ConfigError("params.reference_draws", "need at least 2");
  if (trace_n.empty()) throw ConfigError("params.trace_n", "must not be empty");
  for (std::size_t i = 0; i < trace_n.size(); ++i) {
    if (trace_n[i] < 2 || (i > 0 && trace_n[i] <= trace_n[i - 1])) {
      throw ConfigError("params.trace_n", "must be strictly increasing and at least 2");
    }
  }
  if (!(scale > 0.0)) throw ConfigError("params.proposal_scale", "must be > 0");

  const auto reference = make_data(c.data, reference_draws, c.seed + 1);
  std::vector<double> psis(reference.size());
  for (std::size_t i = 0; i < reference.size(); ++i) psis[i] = loss.psi(reference[i], theta_star);
  const MeanSe b = mean_and_se(psis);
  const LossModel corrected = bias_correct(loss, b.mean);

  const auto full = make_data(c.data, trace_n.back(), c.seed + 2);
  struct Rung {
    double raw = 0.0, raw_se = 0.0, fixed = 0.0, fixed_se = 0.0;
  };
  std::vector<Rung> rungs(trace_n.size());
  parallel_for(trace_n.size(), [&](std::size_t i) {
    const WeightedSample s(std::vector<double>(full.begin(), full.begin() + trace_n[i]));
    const auto bracket = default_bracket(loss, s);
    const MEstimate raw = m_estimate_1d(loss, s, bracket);
    const MEstimate fixed = m_estimate_1d(corrected, s, bracket);
    if (!raw.converged || !fixed.converged) throw EvaluationError("M-estimate did not converge");
    rungs[i] = {raw.theta_hat, bootstrap_se(loss, s, bracket, reps, c.seed + 3),
                fixed.theta_hat, bootstrap_se(corrected, s, bracket, reps, c.seed + 4)};
  });
  out.write("estimator_trace.csv", [&](std::ostream& os) {
    CsvWriter w(os, {"n", "theta_hat_uncorrected", "se_uncorrected", "theta_hat_corrected",
                     "se_corrected"});
    for (std::size_t i = 0; i < rungs.size(); ++i) {
      w.cell(trace_n[i]).cell(rungs[i].raw).cell(rungs[i].raw_se).cell(rungs[i].fixed);
      w.cell(rungs[i].fixed_se);
      w.end_row();
    }
  });

  const WeightedSample mid(make_data(c.data, mh_n, c.seed + 5));
  json chains = json::object();
  std::vector<Chain> runs;
  std::uint64_t chain_seed = c.seed + 6;
  for (const auto* l : {&loss, &corrected}) {
    const GridPosterior post = build_posterior(*l, prior, mid);
    if (post.divergent()) throw DivergenceError("bias-experiment posterior is divergent");
    const double gm = posterior_mean(post), gv = posterior_variance(post);
    Chain chain = mh_sample(make_log_unnorm(*l, prior, mid), gm, mh_steps,
                            scale * std::sqrt(gv), chain_seed++);
    const auto kept = chain.kept();
    const MeanSe cm = batch_means(kept);
    std::vector<double> sq(kept.size());
    for (std::size_t i = 0; i < kept.size(); ++i) sq[i] = (kept[i] - gm) * (kept[i] - gm);
    const MeanSe cv = batch_means(sq);
    chains[l == &loss ? "uncorrected" : "corrected"] = {
        {"seed", chain.seed},           {"burn_in", chain.burn_in},
        {"acceptance_rate", chain.acceptance_rate},
        {"grid_mean", gm},              {"grid_variance", gv},
        {"chain_mean", cm.mean},        {"chain_mean_se", cm.se},
        {"chain_variance", cv.mean},    {"chain_variance_se", cv.se}};
    runs.push_back(std::move(chain));
  }
  out.write("mh_draws.csv", [&](std::ostream& os) {
    CsvWriter w(os, {"iter", "uncorrected", "corrected"});
    for (std::size_t i = 0; i < runs[0].draws.size(); ++i) {
      w.cell(static_cast<long long>(i)).cell(runs[0].draws[i]).cell(runs[1].draws[i]);
      w.end_row();
    }
  });

  const Rung& last = rungs.back();
  result.summary = {{"theta_star", theta_star},
                    {"B_bar", b.mean},
                    {"B_se", b.se},
                    {"reference_draws", reference_draws},
                    {"n", trace_n.back()},
                    {"theta_hat_uncorrected", last.raw},
                    {"se_uncorrected", last.raw_se},
                    {"theta_hat_corrected", last.fixed},
                    {"se_corrected", last.fixed_se},
                    {"mh_n", mh_n},
                    {"chains", chains}};
  out.write_json("bias_summary.json", result.summary);
  return result;
}

RunResult run_breakdown(const ExperimentConfig& c) {
  RunResult result;
  Output out(c, result);
  const LossModel loss = make_loss(c.loss);
  const WeightedSample sample(make_data(c.data));
  const auto m_values = param_ints(c, "m_values");
  const auto density_m = param_ints(c, "density_m");
  const double density_magnitude = param_real(c, "density_magnitude");
  if (!(density_magnitude > 0.0)) throw ConfigError("params.density_magnitude", "must be > 0");
  ContaminationSpec spec;
  spec.side = parse_side(param_string(c, "side"));
  spec.magnitudes = param_reals(c, "magnitudes");
  try {
    spec.validate(sample.size());
    for (int m : m_values) {
      ContaminationSpec s = spec;
      s.m = m;
      s.m_plus = m / 2;
      s.validate(sample.size());
    }
    for (int m : density_m) {
      ContaminationSpec s = spec;
      s.m = m;
      s.m_plus = m / 2;
      s.validate(sample.size());
    }
  } catch (const InvalidArgument& e) {
    throw ConfigError("params", e.what());
  }
  if (m_values.empty()) throw ConfigError("params.m_values", "must not be empty");

  const json& priors = c.params.at("priors");
  if (!priors.is_array() || priors.empty()) {
    throw ConfigError("params.priors", "expected a nonempty array of prior objects");
  }
  std::set<std::string> labels;
  json per_prior = json::array();
  for (std::size_t p = 0; p < priors.size(); ++p) {
    const std::string field = "params.priors[" + std::to_string(p) + "]";
    const PriorSpec ps = parse_prior(priors[p], field);
    const PriorModel prior = make_prior(ps);
    std::string label = ps.name;
    if (!labels.insert(label).second) {
      label += "_" + std::to_string(p);
      labels.insert(label);
    }

    const BreakdownReport report = breakdown_sweep(loss, prior, sample, m_values, spec);
    out.write("breakdown_" + label + ".csv", [&](std::ostream& os) { write_csv(os, report); });

    const GridPosterior clean = build_posterior(loss, prior, sample);
    out.write("posterior_" + label + "_clean.csv", [&](std::ostream& os) { write_csv(os, clean); });
    json densities = json::array();
    for (int m : density_m) {
      ContaminationSpec s = spec;
      s.m = m;
      s.m_plus = m / 2;
      const GridPosterior post =
          build_posterior(loss, prior, contaminate(sample, s, density_magnitude));
      out.write("posterior_" + label + "_m" + std::to_string(m) + ".csv",
                [&](std::ostream& os) { write_csv(os, post); });
      densities.push_back({{"m", m},
                           {"divergent", post.divergent()},
                           {"w2", post.divergent() ? json(nullptr) : json(w2_distance(clean, post))}});
    }

    json rows = json::array();
    for (const auto& r : report.rows) {
      rows.push_back({{"m", r.m},
                      {"slope", optional_real(r.slope)},
                      {"top_divergent", r.top_divergent},
                      {"broken", r.broken},
                      {"boundary", r.boundary}});
    }
    json cells = json::array();
    for (const auto& cell : report.cells) {
      cells.push_back({{"m", cell.m},
                       {"magnitude", cell.magnitude},
                       {"w2", optional_real(cell.distance)},
                       {"divergent", cell.divergent}});
    }
    per_prior.push_back({{"prior", label},
                         {"tail_class", std::string(to_string(prior.tail_class()))},
                         {"epsilon_hat", optional_real(report.epsilon_hat)},
                         {"certificate", report.certificate},
                         {"rows", rows},
                         {"cells", cells},
                         {"densities", densities}});
  }

  result.summary = {{"n", sample.size()},
                    {"loss", loss.name()},
                    {"density_magnitude", density_magnitude},
                    {"priors", per_prior}};
  out.write_json("breakdown_summary.json", result.summary);
  return result;
}

RunResult run_bvm(const ExperimentConfig& c) {
  RunResult result;
  Output out(c, result);
  const LossModel loss = make_loss(c.loss);
  const PriorModel prior = make_prior(c.prior);
  const WeightsMode mode = parse_weights(c);
  const auto ladder = param_ints(c, "n_ladder");
  const int replications = param_int(c, "replications");
  const DataSpec data = c.data;
  const DataGenerator gen = [data](int n, std::uint64_t seed) { return make_data(data, n, seed); };
  BvmReport report;
  try {
    report = bvm_sweep(loss, prior, gen, ladder, mode, replications, c.seed);
  } catch (const InvalidArgument& e) {
    throw ConfigError("params", e.what());
  }
  out.write("bvm.csv", [&](std::ostream& os) { write_csv(os, report); });

  json rows = json::array();
  bool decreasing = true;
  for (std::size_t i = 0; i < ladder.size(); ++i) {
    if (i > 0 && !(report.tv_mean[i] < report.tv_mean[i - 1])) decreasing = false;
    rows.push_back({{"n", ladder[i]},
                    {"tv_mean", report.tv_mean[i]},
                    {"tv_min", report.tv_min[i]},
                    {"tv_max", report.tv_max[i]},
                    {"theta_hat_mean", report.theta_hat_mean[i]},
                    {"v_hat_mean", report.v_hat_mean[i]}});
  }
  result.summary = {{"loss", loss.name()},
                    {"weights", mode.describe()},
                    {"replications", replications},
                    {"tv_strictly_decreasing", decreasing},
                    {"ladder", rows}};
  out.write_json("bvm_summary.json", result.summary);
  return result;
}

RunResult run_fit(const ExperimentConfig& c) {
  RunResult result;
  Output out(c, result);
  const LossModel loss = make_loss(c.loss);
  const auto points = make_data(c.data);
  std::string method = param_string(c, "method");
  if (method == "auto") method = c.loss.name == "check" ? "quantile_regression" : "m_estimate";
  json doc = {{"method", method}, {"loss", loss.name()}, {"n", points.size()}};
  if (method == "quantile_regression") {
    if (c.loss.name != "check") {
      throw ConfigError("params.method", "quantile_regression needs the check loss");
    }
    const DesignMatrix design = DesignMatrix::intercept_only(points.size());
    const auto beta = quantile_regression_fit(design, points, c.loss.tau);
    doc["theta_hat"] = beta[0];
    doc["objective_value"] = check_objective(design, points, c.loss.tau, beta);
    doc["converged"] = true;
  } else if (method == "m_estimate") {
    const WeightedSample sample(points);
    const MEstimate est = m_estimate_1d(loss, sample, default_bracket(loss, sample));
    if (!est.converged) throw EvaluationError("M-estimate did not converge");
    doc["theta_hat"] = est.theta_hat;
    doc["objective_value"] = est.objective_value;
    doc["converged"] = est.converged;
    doc["iterations"] = est.iterations;
  } else {
    throw ConfigError("params.method", "expected auto, m_estimate or quantile_regression");
  }
  result.summary = doc;
  out.write_json("fit.json", doc);
  return result;
}

RunResult run_sample(const ExperimentConfig& c) {
  RunResult result;
  Output out(c, result);
  const LossModel loss = make_loss(c.loss);
  const PriorModel prior = make_prior(c.prior);
  const WeightedSample sample(make_data(c.data));
  const int steps = param_int(c, "steps");
  const int burn_in = param_int(c, "burn_in");
  const double scale = param_real(c, "proposal_scale");
  if (steps < 1 || burn_in < 0 || burn_in >= steps) {
    throw ConfigError("params.burn_in", "need steps > burn_in >= 0");
  }
  if (!(scale > 0.0)) throw ConfigError("params.proposal_scale", "must be > 0");
  const GridPosterior post = build_posterior(loss, prior, sample);
  if (post.divergent()) throw DivergenceError("posterior is divergent; no proposal scale");
  const double gm = posterior_mean(post), gv = posterior_variance(post);
  const double proposal_sd = scale * std::sqrt(gv);
  const Chain chain =
      mh_sample(make_log_unnorm(loss, prior, sample), gm, steps, proposal_sd, burn_in, c.seed + 1);
  out.write("chain.csv", [&](std::ostream& os) { write_csv(os, chain); });
  const MeanSe cm = batch_means(chain.kept());
  result.summary = {{"seed", chain.seed},
                    {"steps", steps},
                    {"burn_in", chain.burn_in},
                    {"proposal_sd", proposal_sd},
                    {"acceptance_rate", chain.acceptance_rate},
                    {"chain_mean", cm.mean},
                    {"chain_mean_se", cm.se},
                    {"grid_mean", gm},
                    {"grid_variance", gv}};
  out.write_json("chain.json", result.summary);
  return result;
}

RunResult run_experiment(const ExperimentConfig& c) {
  std::error_code ec;
  fs::create_directories(c.out_dir, ec);
  if (ec || !fs::is_directory(c.out_dir)) {
    throw ConfigError("out", "cannot create directory '" + c.out_dir + "'");
  }
  set_max_threads(c.threads);
  const std::string started = utc_now();
  const auto t0 = std::chrono::steady_clock::now();

  json manifest = {{"experiment", c.experiment},
                   {"seed", c.seed},
                   {"library_version", MPOSTERIOR_VERSION},
                   {"threads", max_threads()},
                   {"config", c.resolved},
                   {"started_utc", started}};
  auto finish = [&](const RunResult& r) {
    manifest["files"] = r.files;
    manifest["summary"] = r.summary;
    manifest["wall_clock_seconds"] =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::ofstream os(fs::path(c.out_dir) / "manifest.json", std::ios::binary | std::ios::trunc);
    os << manifest.dump(2) << '\n';
  };

  static const std::map<std::string, std::function<RunResult(const ExperimentConfig&)>> table = {
      {"pif", run_pif}, {"bias", run_bias}, {"breakdown", run_breakdown},
      {"bvm", run_bvm}, {"fit", run_fit},   {"sample", run_sample}};
  const auto it = table.find(c.experiment);
  if (it == table.end()) throw ConfigError("experiment", "unknown experiment '" + c.experiment + "'");
  try {
    RunResult r = it->second(c);
    manifest["status"] = "ok";
    finish(r);
    return r;
  } catch (const std::exception& e) {
    manifest["status"] = "failed";
    manifest["error"] = e.what();
    manifest["exit_code"] = exit_code_for(e);
    finish(RunResult{});
    throw;
  }
}

int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const ConfigError*>(&e) || dynamic_cast<const InvalidArgument*>(&e) ||
      dynamic_cast<const nlohmann::json::exception*>(&e)) {
    return kExitConfig;
  }
  return kExitNumeric;
}

}  // namespace mpost::cli
