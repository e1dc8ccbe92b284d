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
#include "sdgaudit/safe_space.hpp"

#include <algorithm>
#include <numeric>

#include "sdgaudit/error.hpp"
#include "sdgaudit/rng.hpp"

namespace sdgaudit {

namespace {

std::string safespace_canonical(const Workload& w,
                                const std::optional<PerpSampling>& sampling) {
  std::string canon = w.schema.fingerprint();
  canon += '|';
  canon += w.canonical_key();
  if (sampling) {
    canon += "|sampled|";
    std::vector<std::string> keys;
    for (const auto& p : sampling->probe_specs) keys.push_back(p.canonical_key());
    std::sort(keys.begin(), keys.end());
    for (const auto& k : keys) {
      canon += k;
      canon += '\x1e';
    }
    canon += std::to_string(sampling->count);
    canon += '|';
    canon += std::to_string(sampling->seed);
  }
  return canon;
}

Eigen::Index rank_from_singular_values(const Eigen::VectorXd& sv) {
  if (sv.size() == 0) return 0;
  const double cutoff = kRankThreshold * sv(0);
  Eigen::Index rank = 0;
  while (rank < sv.size() && sv(rank) > cutoff) ++rank;
  return rank;
}

}  // namespace

nlohmann::json PerpSampling::to_json() const {
  nlohmann::json probes = nlohmann::json::array();
  for (const auto& p : probe_specs) probes.push_back(p.attributes);
  return {{"probes", probes}, {"count", count}, {"seed", seed}};
}

PerpSampling PerpSampling::from_json(const nlohmann::json& j) {
  PerpSampling s;
  for (const auto& p : j.at("probes")) {
    s.probe_specs.push_back(MarginalSpec{p.get<std::vector<std::string>>()});
  }
  s.count = j.at("count").get<std::size_t>();
  s.seed = j.at("seed").get<std::uint64_t>();
  return s;
}

SafeSpace::SafeSpace(Workload workload, Eigen::MatrixXd phi_basis,
                     Eigen::MatrixXd perp_basis, std::optional<PerpSampling> sampling)
    : workload_(std::move(workload)),
      phi_basis_(std::move(phi_basis)),
      perp_basis_(std::move(perp_basis)),
      sampling_(std::move(sampling)) {
  fingerprint_ = fnv1a_hex(safespace_canonical(workload_, sampling_));
}

nlohmann::json SafeSpace::descriptor_json() const {
  nlohmann::json j;
  j["workload"] = workload_.to_json();
  j["fingerprint"] = fingerprint_;
  j["dim_phi"] = dim_phi();
  j["dim_perp"] = dim_perp();
  j["perp_is_sampled"] = perp_is_sampled();
  if (sampling_) j["perp_sampling"] = sampling_->to_json();
  return j;
}

SafeSpace build_safespace(const Workload& w, std::uint64_t max_cells) {
  const std::uint64_t cells = w.schema.total_cells();
  if (cells > max_cells) {
    throw Error("domain-too-large",
                "domain has " + std::to_string(cells) + " cells (cap " +
                    std::to_string(max_cells) +
                    "); use sample_perp_subspace on a restricted schema");
  }
  const Eigen::MatrixXd mat = workload_matrix(w);

  // One full SVD yields both subspaces: the leading right singular vectors
  // span the indicator row space, the trailing ones its null space.
  Eigen::BDCSVD<Eigen::MatrixXd> svd(mat, Eigen::ComputeFullV);
  const Eigen::Index rank = rank_from_singular_values(svd.singularValues());
  const Eigen::MatrixXd& v = svd.matrixV();

  Eigen::MatrixXd phi = v.leftCols(rank);
  Eigen::MatrixXd perp = v.rightCols(v.cols() - rank);
  return SafeSpace(w, std::move(phi), std::move(perp), std::nullopt);
}

SafeSpace sample_perp_subspace(const Workload& w,
                               const std::vector<MarginalSpec>& probe_specs,
                               std::size_t count, std::uint64_t seed) {
  if (probe_specs.empty() || count == 0) {
    throw Error("invalid-argument", "need at least one probe spec and count >= 1");
  }
  std::size_t max_workload_width = 0;
  for (const auto& m : w.marginals) {
    max_workload_width = std::max(max_workload_width, m.width());
  }
  for (const auto& p : probe_specs) {
    p.validate(w.schema);
    if (p.width() <= max_workload_width) {
      throw Error("invalid-argument",
                  "probe marginals must be strictly wider than workload marginals");
    }
  }

  const Eigen::MatrixXd mat = workload_matrix(w);
  Eigen::BDCSVD<Eigen::MatrixXd> svd(mat, Eigen::ComputeThinV);
  const Eigen::Index rank = rank_from_singular_values(svd.singularValues());
  const Eigen::MatrixXd phi = svd.matrixV().leftCols(rank);

  // Pool all probe rows as (indexer, group) pairs, then draw `count` of them
  // without replacement.
  std::vector<MarginalIndexer> indexers;
  std::vector<std::pair<std::size_t, std::uint32_t>> pool;
  for (std::size_t pi = 0; pi < probe_specs.size(); ++pi) {
    indexers.emplace_back(w.schema, probe_specs[pi]);
    for (std::size_t g = 0; g < indexers.back().group_count(); ++g) {
      pool.emplace_back(pi, static_cast<std::uint32_t>(g));
    }
  }
  std::vector<std::size_t> order(pool.size());
  std::iota(order.begin(), order.end(), 0);
  Rng rng(seed);
  rng.shuffle(order);
  const std::size_t take = std::min(count, pool.size());

  const auto cells = static_cast<Eigen::Index>(w.schema.total_cells());
  Eigen::MatrixXd residuals(cells, static_cast<Eigen::Index>(take));
  Eigen::Index kept = 0;
  for (std::size_t s = 0; s < take; ++s) {
    const auto [pi, g] = pool[order[s]];
    Eigen::VectorXd row = Eigen::VectorXd::Zero(cells);
    for (Eigen::Index c = 0; c < cells; ++c) {
      if (indexers[pi].group_of_cell(static_cast<std::uint64_t>(c)) == g) row(c) = 1.0;
    }
    row -= phi * (phi.transpose() * row);
    if (row.norm() < 1e-10) continue;
    residuals.col(kept++) = row;
  }
  if (kept == 0) {
    throw Error("probes-inside-phi",
                "all probe rows lie inside the released span; nothing to test");
  }

  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(residuals.leftCols(kept));
  qr.setThreshold(kRankThreshold);
  const Eigen::Index perp_rank = qr.rank();
  Eigen::MatrixXd perp =
      qr.householderQ() * Eigen::MatrixXd::Identity(cells, perp_rank);

  return SafeSpace(w, phi, std::move(perp),
                   PerpSampling{probe_specs, count, seed});
}

SafeSpace safespace_from_descriptor(const nlohmann::json& descriptor,
                                    const Schema& schema, std::uint64_t max_cells) {
  const Workload w = Workload::from_json(descriptor.at("workload"), schema);
  SafeSpace ss = descriptor.contains("perp_sampling")
                     ? [&] {
                         const auto s = PerpSampling::from_json(descriptor["perp_sampling"]);
                         return sample_perp_subspace(w, s.probe_specs, s.count, s.seed);
                       }()
                     : build_safespace(w, max_cells);
  if (descriptor.contains("fingerprint") &&
      descriptor["fingerprint"].get<std::string>() != ss.fingerprint()) {
    throw Error("fingerprint-mismatch",
                "safe-space descriptor does not reproduce its fingerprint");
  }
  return ss;
}

SafeStatistics phi_of_theta(const SafeSpace& ss, const ThetaVector& theta) {
  if (theta.schema().fingerprint() != ss.schema().fingerprint()) {
    throw Error("fingerprint-mismatch", "theta and safe space use different schemas");
  }
  return SafeStatistics{ss.fingerprint(), ss.phi_basis().transpose() * theta.as_vector()};
}

Eigen::VectorXd perp_component(const SafeSpace& ss, const ThetaVector& theta) {
  if (theta.schema().fingerprint() != ss.schema().fingerprint()) {
    throw Error("fingerprint-mismatch", "theta and safe space use different schemas");
  }
  return ss.perp_basis().transpose() * theta.as_vector();
}

}  // namespace sdgaudit
