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
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "sdgaudit/marginal.hpp"
#include "sdgaudit/schema.hpp"
#include "sdgaudit/theta.hpp"

namespace sdgaudit {

// Relative singular-value threshold for rank decisions.
inline constexpr double kRankThreshold = 1e-10;
// Cell cap for the full-basis decomposition; larger domains must use
// sample_perp_subspace on a restricted schema.
inline constexpr std::uint64_t kDefaultSafeSpaceCellCap = 4096;

struct PerpSampling {
  std::vector<MarginalSpec> probe_specs;
  std::size_t count = 0;
  std::uint64_t seed = 0;

  nlohmann::json to_json() const;
  static PerpSampling from_json(const nlohmann::json& j);
};

// The released statistic space: an orthonormal basis of the span of the
// workload's indicator rows (phi) and an orthonormal basis of its orthogonal
// complement (perp), both in cell coordinates. When the complement is too
// large to enumerate, perp holds a seeded random sub-basis instead and
// perp_is_sampled is set.
class SafeSpace {
 public:
  SafeSpace() = default;
  SafeSpace(Workload workload, Eigen::MatrixXd phi_basis, Eigen::MatrixXd perp_basis,
            std::optional<PerpSampling> sampling);

  const Schema& schema() const { return workload_.schema; }
  const Workload& workload() const { return workload_; }
  const Eigen::MatrixXd& phi_basis() const { return phi_basis_; }
  const Eigen::MatrixXd& perp_basis() const { return perp_basis_; }
  Eigen::Index dim_phi() const { return phi_basis_.cols(); }
  Eigen::Index dim_perp() const { return perp_basis_.cols(); }
  bool perp_is_sampled() const { return sampling_.has_value(); }
  const std::optional<PerpSampling>& sampling() const { return sampling_; }
  const std::string& fingerprint() const { return fingerprint_; }

  nlohmann::json descriptor_json() const;  // workload + sampling + fingerprint

 private:
  Workload workload_;
  Eigen::MatrixXd phi_basis_;
  Eigen::MatrixXd perp_basis_;
  std::optional<PerpSampling> sampling_;
  std::string fingerprint_;
};

// Coordinates of a distribution's safe statistics in the phi basis.
struct SafeStatistics {
  std::string safespace_fingerprint;
  Eigen::VectorXd psi;
};

// Full orthonormal decomposition of cell space into the workload's row space
// and its complement. Errors with "domain-too-large" above max_cells.
SafeSpace build_safespace(const Workload& w,
                          std::uint64_t max_cells = kDefaultSafeSpaceCellCap);

// Scalable alternative: spans perp with the projections of `count` probe
// marginal rows drawn uniformly (seeded) from the probe specs' pooled rows.
// Probe specs must be strictly wider than every workload marginal.
SafeSpace sample_perp_subspace(const Workload& w,
                               const std::vector<MarginalSpec>& probe_specs,
                               std::size_t count, std::uint64_t seed);

// Rebuilds a safe space from a serialized descriptor and checks the
// fingerprint round-trips.
SafeSpace safespace_from_descriptor(const nlohmann::json& descriptor,
                                    const Schema& schema,
                                    std::uint64_t max_cells = kDefaultSafeSpaceCellCap);

SafeStatistics phi_of_theta(const SafeSpace& ss, const ThetaVector& theta);
Eigen::VectorXd perp_component(const SafeSpace& ss, const ThetaVector& theta);

}  // namespace sdgaudit
