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
#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "sdgaudit/dataset.hpp"
#include "sdgaudit/extremal.hpp"
#include "sdgaudit/generator.hpp"
#include "sdgaudit/safe_space.hpp"
#include "sdgaudit/stats.hpp"

namespace sdgaudit {

struct AuditConfig {
  int k1 = 10;  // training runs per extremal side in the probe stage
  int k2 = 10;  // training runs per extremal side in the test stage
  std::uint64_t n_sym = 100000;  // synthetic records per run
  double alpha_level = 0.05;
  std::uint64_t direction_seed = 0;
  int retries = 5;  // fresh-direction retries on degenerate starts
  // Probe directions averaged in the first stage. 1 is the faithful
  // procedure; higher values are an experimental variance reduction.
  int probe_directions = 1;

  void validate() const;
};

// Slope estimates of the generator's response along every tracked complement
// coordinate, from one extremal pair.
struct CoefficientEstimate {
  Eigen::VectorXd a_hat;
  Direction probe_direction;
  double s_span = 0.0;  // signed distance between the extremal endpoints
};

enum class Verdict { kViolationDetected, kNoEvidence };

std::string to_string(Verdict v);

struct AuditReport {
  std::string card_fingerprint;
  std::optional<CoefficientEstimate> coefficient;
  std::optional<Direction> beta_star;
  std::vector<double> samples_plus;   // g along beta_star, one per test run
  std::vector<double> samples_minus;
  double t_statistic = 0.0;
  double p_value = 1.0;
  Verdict verdict = Verdict::kNoEvidence;
  nlohmann::json log;       // seeds, step sizes, per-run values, flags
  nlohmann::json metadata;  // timestamps only; excluded from comparisons

  nlohmann::json to_json() const;
  static AuditReport from_json(const nlohmann::json& j);

  // CI contract: 0 = no evidence, 3 = violation detected.
  int exit_code() const { return verdict == Verdict::kViolationDetected ? 3 : 0; }
};

// Projection of a dataset's empirical statistics onto a direction.
double g_stat(const Direction& dir, const Dataset& d);

// Trains k1 models per extremal side, samples one synthetic dataset each,
// and regresses the per-coordinate response against the signed endpoint
// positions. run_seed drives the per-run training/sampling seeds.
CoefficientEstimate estimate_coefficients(const GeneratorConfig& gen,
                                          const ExtremalPair& pair,
                                          const SafeSpace& ss,
                                          const AuditConfig& cfg,
                                          std::uint64_t run_seed,
                                          nlohmann::json* run_log = nullptr);

// Unit direction of apparent variation: a_hat normalized onto the sphere.
Direction critical_direction(const CoefficientEstimate& est, const SafeSpace& ss);

// The full audit: probe a random complement direction, estimate response
// coefficients, re-test along the critical direction with fresh runs, and
// decide by a two-sided Welch test at cfg.alpha_level.
AuditReport audit(const GeneratorCard& card, const GeneratorConfig& gen,
                  const Dataset* d_start, const AuditConfig& cfg);

// Writes the test-stage samples as CSV (side,run_index,g_value).
void dump_test_distributions(const AuditReport& report,
                             const std::filesystem::path& path);

}  // namespace sdgaudit
