/*
 * Copyright 2026 The SDG Audit Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */
#include "sdgaudit/audit.hpp"

#include <cmath>
#include <fstream>

#include "sdgaudit/error.hpp"
#include "sdgaudit/io.hpp"
#include "sdgaudit/rng.hpp"
#include "sdgaudit/version.hpp"

namespace sdgaudit {

namespace {

// Seed-derivation tags; distinct constants keep the per-run streams apart.
constexpr std::uint64_t kTagDirection = 0xd1;
constexpr std::uint64_t kTagProbeStage = 0xe1;
constexpr std::uint64_t kTagTestStage = 0xe2;
constexpr std::uint64_t kTagTrain = 0x71;
constexpr std::uint64_t kTagSample = 0x72;

std::uint64_t train_seed_for(const GeneratorConfig& gen, std::uint64_t stage_seed,
                             std::uint64_t side, std::uint64_t run) {
  if (gen.train_seed_policy == TrainSeedPolicy::kFixed) return gen.fixed_train_seed;
  return derive_seed(stage_seed, {kTagTrain, side, run});
}

struct StageResult {
  // Mean empirical distribution difference (plus minus minus) over runs.
  Eigen::VectorXd mean_delta;
  std::vector<double> g_plus;   // projections onto the stage direction
  std::vector<double> g_minus;
  std::optional<double> max_realization_deviation;
};

// Runs `runs` independent train+sample pairs on both extremal endpoints.
StageResult run_stage(const GeneratorConfig& gen, const ExtremalPair& pair,
                      const SafeSpace& ss, int runs, std::uint64_t n_sym,
                      std::uint64_t stage_seed, nlohmann::json* seed_log) {
  const auto cells = static_cast<Eigen::Index>(ss.schema().total_cells());
  StageResult result;
  result.mean_delta = Eigen::VectorXd::Zero(cells);

  nlohmann::json train_seeds_plus = nlohmann::json::array();
  nlohmann::json train_seeds_minus = nlohmann::json::array();
  nlohmann::json sample_seeds_plus = nlohmann::json::array();
  nlohmann::json sample_seeds_minus = nlohmann::json::array();

  for (int k = 0; k < runs; ++k) {
    const auto run = static_cast<std::uint64_t>(k);
    for (int side = 0; side < 2; ++side) {
      const bool is_plus = side == 0;
      const ThetaVector& endpoint = is_plus ? pair.theta_plus : pair.theta_minus;
      const std::uint64_t tseed =
          train_seed_for(gen, stage_seed, static_cast<std::uint64_t>(side), run);
      const std::uint64_t sseed =
          derive_seed(stage_seed, {kTagSample, static_cast<std::uint64_t>(side), run});

      std::optional<TrainedModel> model;
      try {
        model = train_on_theta(gen, endpoint, ss, tseed);
      } catch (const Error& e) {
        throw Error(e.code(), "training run " + std::to_string(k) + " (" +
                                  (is_plus ? "plus" : "minus") +
                                  " side) failed: " + e.what());
      }
      if (model->realization_deviation) {
        result.max_realization_deviation =
            std::max(result.max_realization_deviation.value_or(0.0),
                     *model->realization_deviation);
      }
      const Dataset synthetic = generate(*model, n_sym, sseed);
      const ThetaVector synthetic_theta = theta_of_dataset(synthetic);
      const double g = pair.direction.beta.dot(synthetic_theta.as_vector());
      if (is_plus) {
        result.mean_delta += synthetic_theta.as_vector();
        result.g_plus.push_back(g);
        train_seeds_plus.push_back(tseed);
        sample_seeds_plus.push_back(sseed);
      } else {
        result.mean_delta -= synthetic_theta.as_vector();
        result.g_minus.push_back(g);
        train_seeds_minus.push_back(tseed);
        sample_seeds_minus.push_back(sseed);
      }
    }
  }
  result.mean_delta /= static_cast<double>(runs);

  if (seed_log != nullptr) {
    (*seed_log)["train_seeds_plus"] = train_seeds_plus;
    (*seed_log)["train_seeds_minus"] = train_seeds_minus;
    (*seed_log)["sample_seeds_plus"] = sample_seeds_plus;
    (*seed_log)["sample_seeds_minus"] = sample_seeds_minus;
  }
  return result;
}

nlohmann::json doubles_json(const Eigen::VectorXd& v) {
  return std::vector<double>(v.data(), v.data() + v.size());
}

}  // namespace

void AuditConfig::validate() const {
  if (k1 < 2 || k2 < 2) {
    throw Error("invalid-argument", "k1 and k2 must be at least 2");
  }
  if (n_sym == 0) throw Error("invalid-argument", "n_sym must be at least 1");
  if (alpha_level <= 0.0 || alpha_level >= 1.0) {
    throw Error("invalid-argument", "alpha level must lie in (0, 1)");
  }
  if (retries < 0) throw Error("invalid-argument", "retries must be >= 0");
  if (probe_directions < 1) {
    throw Error("invalid-argument", "need at least one probe direction");
  }
}

std::string to_string(Verdict v) {
  return v == Verdict::kViolationDetected ? "violation-detected" : "no-evidence";
}

double g_stat(const Direction& dir, const Dataset& d) {
  const ThetaVector theta = theta_of_dataset(d);
  if (dir.beta.size() != static_cast<Eigen::Index>(theta.size())) {
    throw Error("schema-mismatch", "direction dimension does not match dataset schema");
  }
  return dir.beta.dot(theta.as_vector());
}

CoefficientEstimate estimate_coefficients(const GeneratorConfig& gen,
                                          const ExtremalPair& pair,
                                          const SafeSpace& ss,
                                          const AuditConfig& cfg,
                                          std::uint64_t run_seed,
                                          nlohmann::json* run_log) {
  cfg.validate();
  const StageResult stage =
      run_stage(gen, pair, ss, cfg.k1, cfg.n_sym, run_seed, run_log);
  const double span = pair.span();

  CoefficientEstimate est;
  est.probe_direction = pair.direction;
  est.s_span = span;
  est.a_hat = (ss.perp_basis().transpose() * stage.mean_delta) / span;
  if (run_log != nullptr) {
    (*run_log)["g_plus"] = stage.g_plus;
    (*run_log)["g_minus"] = stage.g_minus;
    if (stage.max_realization_deviation) {
      (*run_log)["max_realization_deviation"] = *stage.max_realization_deviation;
    }
  }
  return est;
}

Direction critical_direction(const CoefficientEstimate& est, const SafeSpace& ss) {
  if (est.a_hat.norm() == 0.0) {
    throw Error("no-variation-signal",
                "estimated coefficients are exactly zero in every direction");
  }
  return direction_from_coords(ss, est.a_hat);
}

AuditReport audit(const GeneratorCard& card, const GeneratorConfig& gen,
                  const Dataset* d_start, const AuditConfig& cfg) {
  cfg.validate();
  const SafeSpace ss = safespace_from_descriptor(card.safespace_descriptor, card.schema);
  const SafeStatistics psi{ss.fingerprint(), card.psi};

  AuditReport report;
  report.card_fingerprint = card.fingerprint();
  report.metadata = {{"created_at", iso8601_now()},
                     {"tool", kToolName},
                     {"tool_version", kToolVersion}};
  report.log["config"] = {{"k1", cfg.k1},
                          {"k2", cfg.k2},
                          {"n_sym", cfg.n_sym},
                          {"alpha_level", cfg.alpha_level},
                          {"direction_seed", cfg.direction_seed},
                          {"retries", cfg.retries},
                          {"probe_directions", cfg.probe_directions}};
  report.log["generator"] = gen.to_json();

  const StartMode mode = d_start ? StartMode::kFromDataset : StartMode::kMaxEntropy;
  report.log["start_mode"] = to_string(mode);
  const ThetaVector start = starting_theta(ss, psi, mode, d_start);

  if (ss.dim_perp() == 0) {
    report.verdict = Verdict::kNoEvidence;
    report.p_value = 1.0;
    report.log["flags"] = {"phi-is-everything"};
    report.log["interpretation"] =
        "no evidence of violation: the released span covers the whole "
        "statistic space, so there is nothing left to leak";
    return report;
  }

  // Probe stage: find extremal endpoints along random directions (fresh
  // direction on a degenerate start) and estimate response coefficients.
  Eigen::VectorXd a_hat_sum = Eigen::VectorXd::Zero(ss.dim_perp());
  std::optional<CoefficientEstimate> first_estimate;
  nlohmann::json probes = nlohmann::json::array();
  int attempt = 0;
  for (int probe = 0; probe < cfg.probe_directions; ++probe) {
    std::optional<ExtremalPair> pair;
    std::uint64_t used_seed = 0;
    while (!pair) {
      if (attempt > cfg.retries + cfg.probe_directions - 1) {
        throw Error("no-interior-start",
                    "all probe directions hit the simplex boundary at the "
                    "starting distribution");
      }
      used_seed = derive_seed(cfg.direction_seed,
                              {kTagDirection, static_cast<std::uint64_t>(attempt)});
      ++attempt;
      const Direction dir = random_direction(ss, used_seed);
      try {
        pair = extremal_pair(start, dir);
      } catch (const Error& e) {
        if (e.code() != "degenerate-start") throw;
      }
    }
    nlohmann::json probe_log;
    probe_log["direction_seed"] = used_seed;
    probe_log["alpha_plus"] = pair->alpha_plus;
    probe_log["alpha_minus"] = pair->alpha_minus;
    const std::uint64_t stage_seed =
        derive_seed(cfg.direction_seed,
                    {kTagProbeStage, static_cast<std::uint64_t>(probe)});
    CoefficientEstimate est =
        estimate_coefficients(gen, *pair, ss, cfg, stage_seed, &probe_log);
    probes.push_back(std::move(probe_log));
    a_hat_sum += est.a_hat;
    if (!first_estimate) first_estimate = std::move(est);
  }
  report.log["probe_stage"] = probes;

  CoefficientEstimate estimate = *first_estimate;
  estimate.a_hat = a_hat_sum / static_cast<double>(cfg.probe_directions);
  report.coefficient = estimate;

  if (estimate.a_hat.norm() == 0.0) {
    report.verdict = Verdict::kNoEvidence;
    report.p_value = 1.0;
    report.log["flags"] = {"no-variation-signal"};
    report.log["interpretation"] =
        "no evidence of violation: no direction of variation could be "
        "estimated (this does not certify decomposability)";
    return report;
  }

  // Test stage: fresh extremal pair and fresh runs along the critical
  // direction, then a two-sided mean-equality test.
  const Direction beta_star = critical_direction(estimate, ss);
  report.beta_star = beta_star;
  const ExtremalPair test_pair = extremal_pair(start, beta_star);

  nlohmann::json test_log;
  test_log["alpha_plus"] = test_pair.alpha_plus;
  test_log["alpha_minus"] = test_pair.alpha_minus;
  const std::uint64_t test_seed = derive_seed(cfg.direction_seed, {kTagTestStage});
  const StageResult stage =
      run_stage(gen, test_pair, ss, cfg.k2, cfg.n_sym, test_seed, &test_log);
  if (stage.max_realization_deviation) {
    test_log["max_realization_deviation"] = *stage.max_realization_deviation;
  }
  report.log["test_stage"] = test_log;

  report.samples_plus = stage.g_plus;
  report.samples_minus = stage.g_minus;

  const WelchResult welch = welch_t_test(report.samples_plus, report.samples_minus);
  report.t_statistic = welch.t;
  report.p_value = welch.p;
  if (welch.degenerate) report.log["flags"] = {"degenerate-t-test"};
  report.verdict = welch.p < cfg.alpha_level ? Verdict::kViolationDetected
                                             : Verdict::kNoEvidence;
  report.log["interpretation"] =
      report.verdict == Verdict::kViolationDetected
          ? "violation detected: the generator's output depends on statistics "
            "outside the declared safe span"
          : "no evidence of violation (this does not certify that the "
            "generator is decomposable)";
  return report;
}

nlohmann::json AuditReport::to_json() const {
  nlohmann::json j;
  j["card_fingerprint"] = card_fingerprint;
  if (coefficient) {
    j["coefficient"] = {{"a_hat", doubles_json(coefficient->a_hat)},
                        {"probe_direction", coefficient->probe_direction.to_json()},
                        {"s_span", coefficient->s_span}};
  }
  if (beta_star) j["beta_star"] = beta_star->to_json();
  j["samples_plus"] = samples_plus;
  j["samples_minus"] = samples_minus;
  j["t_statistic"] = t_statistic;
  j["p_value"] = p_value;
  j["verdict"] = to_string(verdict);
  j["log"] = log;
  j["metadata"] = metadata;
  return j;
}

AuditReport AuditReport::from_json(const nlohmann::json& j) {
  AuditReport r;
  r.card_fingerprint = j.at("card_fingerprint").get<std::string>();
  r.samples_plus = j.at("samples_plus").get<std::vector<double>>();
  r.samples_minus = j.at("samples_minus").get<std::vector<double>>();
  r.t_statistic = j.at("t_statistic").get<double>();
  r.p_value = j.at("p_value").get<double>();
  r.verdict = j.at("verdict").get<std::string>() == "violation-detected"
                  ? Verdict::kViolationDetected
                  : Verdict::kNoEvidence;
  r.log = j.value("log", nlohmann::json::object());
  r.metadata = j.value("metadata", nlohmann::json::object());
  return r;
}

void dump_test_distributions(const AuditReport& report,
                             const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("io-error", "cannot write '" + path.string() + "'");
  out << "side,run_index,g_value\n";
  out.precision(17);
  for (std::size_t i = 0; i < report.samples_plus.size(); ++i) {
    out << "plus," << i << ',' << report.samples_plus[i] << '\n';
  }
  for (std::size_t i = 0; i < report.samples_minus.size(); ++i) {
    out << "minus," << i << ',' << report.samples_minus[i] << '\n';
  }
}

}  // namespace sdgaudit
