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
#include <span>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "sdgaudit/schema.hpp"

namespace sdgaudit {

// Kahan-compensated sum; keeps probability-mass checks accurate on large
// cell domains.
double stable_sum(std::span<const double> values);

// Full normalized contingency table over a schema's cell domain: the
// exhaustive statistic parameterization of a distribution (or of a dataset
// via its empirical distribution). Entries are nonnegative and sum to one;
// construction renormalizes drift up to kSumTolerance and rejects anything
// worse. Immutable after construction.
class ThetaVector {
 public:
  static constexpr double kSumTolerance = 1e-12;
  // Negative float noise at or above this is clamped to zero.
  static constexpr double kNegativeClamp = -1e-14;

  ThetaVector(Schema schema, std::vector<double> values,
              std::optional<std::uint64_t> sample_size_hint = std::nullopt);

  static ThetaVector uniform(const Schema& schema);
  static ThetaVector point_mass(const Schema& schema, std::uint64_t cell);

  const Schema& schema() const { return schema_; }
  const std::vector<double>& values() const { return values_; }
  double operator[](std::uint64_t cell) const { return values_[cell]; }
  std::uint64_t size() const { return values_.size(); }
  std::optional<std::uint64_t> sample_size_hint() const { return sample_size_hint_; }

  Eigen::Map<const Eigen::VectorXd> as_vector() const {
    return Eigen::Map<const Eigen::VectorXd>(values_.data(),
                                             static_cast<Eigen::Index>(values_.size()));
  }

  nlohmann::json to_json() const;
  static ThetaVector from_json(const nlohmann::json& j, const Schema& schema);

 private:
  Schema schema_;
  std::vector<double> values_;
  std::optional<std::uint64_t> sample_size_hint_;
};

}  // namespace sdgaudit
