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
#include "sdgaudit/generator.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>

#include "sdgaudit/csv.hpp"
#include "sdgaudit/error.hpp"
#include "sdgaudit/io.hpp"
#include "sdgaudit/rng.hpp"
#include "sdgaudit/version.hpp"

namespace sdgaudit {

namespace {

constexpr double kZeroTarget = 1e-15;

// Residual norms of a marginal's indicator rows against an orthonormal basis;
// nonzero residual means the marginal carries information outside the span.
bool marginal_outside_span(const Schema& schema, const MarginalSpec& spec,
                           const Eigen::MatrixXd& phi) {
  MarginalIndexer indexer(schema, spec);
  const auto cells = static_cast<Eigen::Index>(schema.total_cells());
  for (std::size_t g = 0; g < indexer.group_count(); ++g) {
    Eigen::VectorXd row = Eigen::VectorXd::Zero(cells);
    for (Eigen::Index c = 0; c < cells; ++c) {
      if (indexer.group_of_cell(static_cast<std::uint64_t>(c)) ==
          static_cast<std::uint32_t>(g)) {
        row(c) = 1.0;
      }
    }
    row -= phi * (phi.transpose() * row);
    if (row.norm() > 1e-10) return true;
  }
  return false;
}

Workload training_workload(const GeneratorConfig& config, const SafeSpace& ss) {
  const Workload& w = config.workload ? *config.workload : ss.workload();
  if (w.schema.fingerprint() != ss.schema().fingerprint()) {
    throw Error("schema-mismatch", "generator workload schema differs from safe space");
  }
  return w;
}

std::vector<std::pair<MarginalSpec, std::vector<double>>> marginal_targets(
    const ThetaVector& theta, const std::vector<MarginalSpec>& specs) {
  std::vector<std::pair<MarginalSpec, std::vector<double>>> targets;
  targets.reserve(specs.size());
  for (const auto& spec : specs) {
    targets.emplace_back(spec, marginal_of_theta(theta, spec));
  }
  return targets;
}

TrainedModel train_blackbox(const GeneratorConfig& config, const Dataset& train_data,
                            std::uint64_t train_seed) {
  const BlackboxSpec& bb = *config.blackbox;
  const auto train_path = unique_temp_path("sdgaudit-bb-train", ".csv");
  const auto out_path = unique_temp_path("sdgaudit-bb-out", ".csv");
  const auto log_path = unique_temp_path("sdgaudit-bb-log", ".txt");

  IngestConfig plain;  // integer-encoded, with header
  write_csv(train_data, train_path, plain);

  const std::string cmdline = bb.command + " --train '" + train_path.string() +
                              "' --n " + std::to_string(bb.fit_n) + " --seed " +
                              std::to_string(train_seed) + " --out '" +
                              out_path.string() + "' > '" + log_path.string() +
                              "' 2>&1";
  const int rc = std::system(cmdline.c_str());

  std::string diagnostics;
  if (std::filesystem::exists(log_path)) {
    diagnostics = read_text_file(log_path);
    std::filesystem::remove(log_path);
  }
  std::filesystem::remove(train_path);
  if (rc != 0) {
    std::filesystem::remove(out_path);
    throw Error("blackbox-failure", "generator command exited with status " +
                                        std::to_string(rc) + ": " + diagnostics);
  }
  Dataset synthetic = ingest_csv(out_path, train_data.schema(), plain);
  std::filesystem::remove(out_path);
  if (synthetic.empty()) {
    throw Error("blackbox-failure", "generator command produced no rows");
  }

  TrainedModel model{config, theta_of_dataset(synthetic), train_seed, 0, true,
                     std::nullopt};
  return model;
}

}  // namespace

std::string to_string(GeneratorKind kind) {
  switch (kind) {
    case GeneratorKind::kIpf: return "ipf";
    case GeneratorKind::kIpfDishonest: return "ipf-dishonest";
    case GeneratorKind::kIpfMix: return "ipf-mix";
    case GeneratorKind::kEmpirical: return "empirical";
    case GeneratorKind::kBlackbox: return "blackbox";
  }
  throw Error("invalid-argument", "unknown generator kind");
}

GeneratorKind generator_kind_from_string(const std::string& s) {
  if (s == "ipf") return GeneratorKind::kIpf;
  if (s == "ipf-dishonest") return GeneratorKind::kIpfDishonest;
  if (s == "ipf-mix") return GeneratorKind::kIpfMix;
  if (s == "empirical") return GeneratorKind::kEmpirical;
  if (s == "blackbox") return GeneratorKind::kBlackbox;
  throw Error("invalid-argument", "unknown generator kind '" + s + "'");
}

void GeneratorConfig::validate(const SafeSpace& ss) const {
  const Workload w = training_workload(*this, ss);
  if (kind == GeneratorKind::kIpfDishonest) {
    if (!leak_workload || leak_workload->marginals.empty()) {
      throw Error("invalid-argument", "dishonest generator needs a leak workload");
    }
    if (leak_workload->schema.fingerprint() != ss.schema().fingerprint()) {
      throw Error("schema-mismatch", "leak workload schema differs from safe space");
    }
    Eigen::MatrixXd phi;
    if (!workload && !ss.perp_is_sampled()) {
      phi = ss.phi_basis();
    } else {
      const Eigen::MatrixXd mat = workload_matrix(w);
      Eigen::BDCSVD<Eigen::MatrixXd> svd(mat, Eigen::ComputeThinV);
      Eigen::Index rank = 0;
      const auto& sv = svd.singularValues();
      while (rank < sv.size() && sv(rank) > 1e-10 * sv(0)) ++rank;
      phi = svd.matrixV().leftCols(rank);
    }
    bool leaks = false;
    for (const auto& spec : leak_workload->marginals) {
      if (marginal_outside_span(ss.schema(), spec, phi)) {
        leaks = true;
        break;
      }
    }
    if (!leaks) {
      throw Error("invalid-argument",
                  "leak workload lies entirely inside the declared span");
    }
  }
  if (kind == GeneratorKind::kIpfMix &&
      (leak_fraction < 0.0 || leak_fraction > 1.0)) {
    throw Error("invalid-argument", "leak fraction must lie in [0, 1]");
  }
  if (kind == GeneratorKind::kBlackbox &&
      (!blackbox || blackbox->command.empty())) {
    throw Error("invalid-argument", "blackbox generator needs a command");
  }
}

nlohmann::json GeneratorConfig::to_json() const {
  nlohmann::json j;
  j["kind"] = to_string(kind);
  if (workload) j["workload"] = workload->to_json();
  if (leak_workload) j["leak_workload"] = leak_workload->to_json();
  j["ipf_tol"] = ipf_tol;
  j["ipf_max_iters"] = ipf_max_iters;
  j["train_seed_policy"] =
      train_seed_policy == TrainSeedPolicy::kPerRunFresh ? "per-run-fresh" : "fixed";
  if (train_seed_policy == TrainSeedPolicy::kFixed) {
    j["fixed_train_seed"] = fixed_train_seed;
  }
  if (kind == GeneratorKind::kIpfMix) j["leak_fraction"] = leak_fraction;
  if (blackbox) {
    j["blackbox"] = {{"command", blackbox->command},
                     {"train_n", blackbox->train_n},
                     {"fit_n", blackbox->fit_n}};
  }
  return j;
}

GeneratorConfig GeneratorConfig::from_json(const nlohmann::json& j,
                                           const Schema& schema) {
  GeneratorConfig cfg;
  cfg.kind = generator_kind_from_string(j.at("kind").get<std::string>());
  if (j.contains("workload")) {
    cfg.workload = Workload::from_json(j["workload"], schema);
  }
  if (j.contains("leak_workload")) {
    cfg.leak_workload = Workload::from_json(j["leak_workload"], schema);
  }
  cfg.ipf_tol = j.value("ipf_tol", 1e-9);
  cfg.ipf_max_iters = j.value("ipf_max_iters", 1000);
  const std::string policy = j.value("train_seed_policy", "per-run-fresh");
  if (policy == "per-run-fresh") {
    cfg.train_seed_policy = TrainSeedPolicy::kPerRunFresh;
  } else if (policy == "fixed") {
    cfg.train_seed_policy = TrainSeedPolicy::kFixed;
  } else {
    throw Error("invalid-argument", "unknown train seed policy '" + policy + "'");
  }
  cfg.fixed_train_seed = j.value("fixed_train_seed", 0ULL);
  cfg.leak_fraction = j.value("leak_fraction", 0.0);
  if (j.contains("blackbox")) {
    BlackboxSpec bb;
    bb.command = j["blackbox"].at("command").get<std::string>();
    bb.train_n = j["blackbox"].value("train_n", 100000ULL);
    bb.fit_n = j["blackbox"].value("fit_n", 100000ULL);
    cfg.blackbox = bb;
  }
  return cfg;
}

IpfResult fit_ipf(const std::vector<std::pair<MarginalSpec, std::vector<double>>>& targets,
                  const Schema& schema, double tol, int max_iters) {
  if (targets.empty()) {
    throw Error("invalid-argument", "need at least one target marginal");
  }
  std::vector<MarginalIndexer> indexers;
  indexers.reserve(targets.size());
  for (const auto& [spec, values] : targets) {
    indexers.emplace_back(schema, spec);
    if (values.size() != indexers.back().group_count()) {
      throw Error("invalid-argument", "target marginal has the wrong arity");
    }
    double sum = 0.0;
    for (double v : values) {
      if (!std::isfinite(v) || v < -1e-12) {
        throw Error("invalid-argument", "target marginal entries must be >= 0");
      }
      sum += v;
    }
    if (std::abs(sum - 1.0) > 1e-6) {
      throw Error("invalid-argument", "target marginal must sum to 1");
    }
  }

  const std::uint64_t cells = schema.total_cells();
  std::vector<double> values(cells, 1.0 / static_cast<double>(cells));

  // Cells under a zero target entry can never carry mass; clamp them once and
  // let the multiplicative updates skip them.
  for (std::size_t t = 0; t < targets.size(); ++t) {
    const auto& target = targets[t].second;
    for (std::uint64_t c = 0; c < cells; ++c) {
      if (target[indexers[t].group_of_cell(c)] < kZeroTarget) values[c] = 0.0;
    }
  }

  bool zero_conflict = false;
  bool converged = false;
  int sweep = 0;
  std::vector<double> current;
  while (sweep < max_iters) {
    ++sweep;
    for (std::size_t t = 0; t < targets.size(); ++t) {
      const auto& target = targets[t].second;
      const auto& indexer = indexers[t];
      current.assign(indexer.group_count(), 0.0);
      for (std::uint64_t c = 0; c < cells; ++c) {
        current[indexer.group_of_cell(c)] += values[c];
      }
      for (std::uint64_t c = 0; c < cells; ++c) {
        const auto g = indexer.group_of_cell(c);
        if (current[g] > 0.0) {
          values[c] *= target[g] / current[g];
        } else if (target[g] >= kZeroTarget) {
          zero_conflict = true;
        }
      }
    }
    double residual = 0.0;
    for (std::size_t t = 0; t < targets.size(); ++t) {
      const auto& target = targets[t].second;
      const auto& indexer = indexers[t];
      current.assign(indexer.group_count(), 0.0);
      for (std::uint64_t c = 0; c < cells; ++c) {
        current[indexer.group_of_cell(c)] += values[c];
      }
      for (std::size_t g = 0; g < current.size(); ++g) {
        residual = std::max(residual, std::abs(current[g] - target[g]));
      }
    }
    if (residual < tol) {
      converged = true;
      break;
    }
  }

  if (!converged && zero_conflict) {
    throw Error("inconsistent-targets",
                "a zero target entry conflicts with positive mass demanded by "
                "another target");
  }

  const double mass = stable_sum(values);
  if (mass <= 0.0) {
    throw Error("inconsistent-targets", "all mass was clamped away by zero targets");
  }
  for (double& v : values) v /= mass;
  return IpfResult{ThetaVector(schema, std::move(values)), sweep, converged};
}

nlohmann::json TrainedModel::to_json() const {
  nlohmann::json j;
  j["generator"] = config.to_json();
  j["fitted"] = fitted.to_json();
  j["train_seed"] = train_seed;
  j["iters_used"] = iters_used;
  j["converged"] = converged;
  if (realization_deviation) j["realization_deviation"] = *realization_deviation;
  return j;
}

TrainedModel train_on_theta(const GeneratorConfig& config, const ThetaVector& theta,
                            const SafeSpace& ss, std::uint64_t train_seed) {
  if (theta.schema().fingerprint() != ss.schema().fingerprint()) {
    throw Error("schema-mismatch", "training distribution schema differs from safe space");
  }
  config.validate(ss);

  switch (config.kind) {
    case GeneratorKind::kIpf: {
      const Workload w = training_workload(config, ss);
      auto result = fit_ipf(marginal_targets(theta, w.marginals), ss.schema(),
                            config.ipf_tol, config.ipf_max_iters);
      return TrainedModel{config, std::move(result.fitted), train_seed,
                          result.iters_used, result.converged, std::nullopt};
    }
    case GeneratorKind::kIpfDishonest: {
      const Workload w = training_workload(config, ss);
      std::vector<MarginalSpec> specs = w.marginals;
      for (const auto& leak : config.leak_workload->marginals) {
        const bool duplicate =
            std::any_of(specs.begin(), specs.end(),
                        [&](const MarginalSpec& m) { return m.same_set(leak); });
        if (!duplicate) specs.push_back(leak);
      }
      auto result = fit_ipf(marginal_targets(theta, specs), ss.schema(),
                            config.ipf_tol, config.ipf_max_iters);
      return TrainedModel{config, std::move(result.fitted), train_seed,
                          result.iters_used, result.converged, std::nullopt};
    }
    case GeneratorKind::kIpfMix: {
      const Workload w = training_workload(config, ss);
      auto result = fit_ipf(marginal_targets(theta, w.marginals), ss.schema(),
                            config.ipf_tol, config.ipf_max_iters);
      const double lambda = config.leak_fraction;
      std::vector<double> mixed(theta.size());
      for (std::uint64_t c = 0; c < theta.size(); ++c) {
        mixed[c] = (1.0 - lambda) * result.fitted[c] + lambda * theta[c];
      }
      return TrainedModel{config, ThetaVector(ss.schema(), std::move(mixed)),
                          train_seed, result.iters_used, result.converged,
                          std::nullopt};
    }
    case GeneratorKind::kEmpirical:
      return TrainedModel{config, theta, train_seed, 0, true, std::nullopt};
    case GeneratorKind::kBlackbox: {
      const Dataset rendered = realize_dataset(theta, config.blackbox->train_n,
                                               derive_seed(train_seed, {0x7261}));
      TrainedModel model = train_blackbox(config, rendered, train_seed);
      const ThetaVector rendered_theta = theta_of_dataset(rendered);
      double deviation = 0.0;
      for (const auto& m : training_workload(config, ss).marginals) {
        const auto a = marginal_of_theta(theta, m);
        const auto b = marginal_of_theta(rendered_theta, m);
        for (std::size_t g = 0; g < a.size(); ++g) {
          deviation = std::max(deviation, std::abs(a[g] - b[g]));
        }
      }
      model.realization_deviation = deviation;
      return model;
    }
  }
  throw Error("invalid-argument", "unknown generator kind");
}

TrainedModel train(const GeneratorConfig& config, const Dataset& d,
                   const SafeSpace& ss, std::uint64_t train_seed) {
  if (config.kind == GeneratorKind::kBlackbox) {
    // Blackbox generators consume the records as-is.
    if (d.schema().fingerprint() != ss.schema().fingerprint()) {
      throw Error("schema-mismatch", "dataset schema differs from safe space");
    }
    config.validate(ss);
    return train_blackbox(config, d, train_seed);
  }
  return train_on_theta(config, theta_of_dataset(d), ss, train_seed);
}

Dataset generate(const TrainedModel& model, std::uint64_t n, std::uint64_t sample_seed) {
  return sample_iid(model.fitted, n, sample_seed);
}

std::string GeneratorCard::fingerprint() const {
  nlohmann::json j = to_json();
  j.erase("metadata");
  return fnv1a_hex(j.dump());
}

nlohmann::json GeneratorCard::to_json() const {
  nlohmann::json j;
  j["psi"] = std::vector<double>(psi.data(), psi.data() + psi.size());
  j["workload"] = safespace_descriptor.at("workload");
  j["schema_fingerprint"] = schema.fingerprint();
  j["schema"] = schema.to_json();
  j["safespace"] = safespace_descriptor;
  j["generator"] = generator_descriptor;
  j["metadata"] = metadata;
  return j;
}

GeneratorCard GeneratorCard::from_json(const nlohmann::json& j) {
  GeneratorCard card;
  card.schema = Schema::from_json(j.at("schema"));
  if (j.at("schema_fingerprint").get<std::string>() != card.schema.fingerprint()) {
    throw Error("fingerprint-mismatch", "card schema does not match its fingerprint");
  }
  card.safespace_descriptor = j.at("safespace");
  const auto psi_values = j.at("psi").get<std::vector<double>>();
  card.psi = Eigen::Map<const Eigen::VectorXd>(psi_values.data(),
                                               static_cast<Eigen::Index>(psi_values.size()));
  card.generator_descriptor = j.at("generator");
  card.metadata = j.value("metadata", nlohmann::json::object());
  return card;
}

GeneratorCard make_card(const Dataset& d_real, const SafeSpace& ss,
                        const GeneratorConfig& config) {
  config.validate(ss);
  const SafeStatistics stats = phi_of_theta(ss, theta_of_dataset(d_real));
  GeneratorCard card;
  card.schema = ss.schema();
  card.safespace_descriptor = ss.descriptor_json();
  card.psi = stats.psi;
  card.generator_descriptor = config.to_json();
  card.metadata = {{"created_at", iso8601_now()},
                   {"tool", kToolName},
                   {"tool_version", kToolVersion}};
  return card;
}

}  // namespace sdgaudit
