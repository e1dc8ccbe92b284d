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
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "sdgaudit/dataset.hpp"
#include "sdgaudit/marginal.hpp"
#include "sdgaudit/safe_space.hpp"
#include "sdgaudit/theta.hpp"

namespace sdgaudit {

enum class GeneratorKind {
  kIpf,           // honest: fits only the declared workload marginals
  kIpfDishonest,  // fits the workload plus extra leak marginals
  kIpfMix,        // (1-lambda) * honest IPF + lambda * training distribution
  kEmpirical,     // returns the training distribution itself
  kBlackbox,      // external command behind the train/sample protocol
};

std::string to_string(GeneratorKind kind);
GeneratorKind generator_kind_from_string(const std::string& s);

enum class TrainSeedPolicy { kPerRunFresh, kFixed };

struct BlackboxSpec {
  std::string command;              // invoked with --train/--n/--seed/--out
  std::uint64_t train_n = 100000;   // records rendered from theta for training
  std::uint64_t fit_n = 100000;     // synthetic rows requested to estimate the model
};

struct GeneratorConfig {
  GeneratorKind kind = GeneratorKind::kIpf;
  // Marginals the generator fits; defaults to the safe space's workload.
  std::optional<Workload> workload;
  // Extra marginals a dishonest generator also fits.
  std::optional<Workload> leak_workload;
  double ipf_tol = 1e-9;
  int ipf_max_iters = 1000;
  TrainSeedPolicy train_seed_policy = TrainSeedPolicy::kPerRunFresh;
  std::uint64_t fixed_train_seed = 0;
  double leak_fraction = 0.0;  // kIpfMix only
  std::optional<BlackboxSpec> blackbox;

  void validate(const SafeSpace& ss) const;
  nlohmann::json to_json() const;
  static GeneratorConfig from_json(const nlohmann::json& j, const Schema& schema);
};

struct IpfResult {
  ThetaVector fitted;
  int iters_used = 0;
  bool converged = false;
};

// Iterative proportional fitting from the uniform start: cycles through the
// target marginals, rescaling each marginal's cell group to its target, until
// every fitted marginal is within tol of its target (max norm) or max_iters
// sweeps elapse. Converges to the maximum-entropy distribution consistent
// with the targets.
IpfResult fit_ipf(const std::vector<std::pair<MarginalSpec, std::vector<double>>>& targets,
                  const Schema& schema, double tol = 1e-9, int max_iters = 1000);

struct TrainedModel {
  GeneratorConfig config;
  ThetaVector fitted;
  std::uint64_t train_seed = 0;
  int iters_used = 0;
  bool converged = true;
  // Max marginal deviation introduced when theta had to be rendered to
  // records for an external generator.
  std::optional<double> realization_deviation;

  nlohmann::json to_json() const;
};

TrainedModel train(const GeneratorConfig& config, const Dataset& d,
                   const SafeSpace& ss, std::uint64_t train_seed);
// Same contract, but trains directly on a distribution. IPF-family
// generators consume its marginals; the blackbox adapter renders it to
// records first.
TrainedModel train_on_theta(const GeneratorConfig& config, const ThetaVector& theta,
                            const SafeSpace& ss, std::uint64_t train_seed);

Dataset generate(const TrainedModel& model, std::uint64_t n, std::uint64_t sample_seed);

struct GeneratorCard {
  Schema schema;
  nlohmann::json safespace_descriptor;  // workload + fingerprint (+ sampling)
  Eigen::VectorXd psi;
  nlohmann::json generator_descriptor;
  nlohmann::json metadata;  // timestamps and free-form provenance only

  std::string safespace_fingerprint() const {
    return safespace_descriptor.at("fingerprint").get<std::string>();
  }
  // Content hash over everything except metadata.
  std::string fingerprint() const;
  nlohmann::json to_json() const;
  static GeneratorCard from_json(const nlohmann::json& j);
};

GeneratorCard make_card(const Dataset& d_real, const SafeSpace& ss,
                        const GeneratorConfig& config);

}  // namespace sdgaudit
