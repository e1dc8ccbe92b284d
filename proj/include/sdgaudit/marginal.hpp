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
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "sdgaudit/dataset.hpp"
#include "sdgaudit/schema.hpp"
#include "sdgaudit/theta.hpp"

namespace sdgaudit {

// An ordered subset of schema attributes naming one k-way marginal table.
struct MarginalSpec {
  std::vector<std::string> attributes;

  std::size_t width() const { return attributes.size(); }
  void validate(const Schema& schema) const;
  // Set equality (order-insensitive).
  bool same_set(const MarginalSpec& other) const;
  std::string canonical_key() const;  // sorted names joined; for hashing
};

// Maps full-table cells to marginal table entries for one spec. The marginal
// entry index is row-major over the spec's attributes in spec order.
class MarginalIndexer {
 public:
  MarginalIndexer(const Schema& schema, const MarginalSpec& spec);

  std::size_t group_count() const { return group_count_; }
  std::uint32_t group_of_cell(std::uint64_t cell) const { return table_[cell]; }
  const std::vector<std::uint32_t>& table() const { return table_; }

 private:
  std::size_t group_count_;
  std::vector<std::uint32_t> table_;
};

// A declared collection of marginals over one schema; the released workload.
struct Workload {
  Schema schema;
  std::vector<MarginalSpec> marginals;

  Workload() = default;
  Workload(Schema schema_in, std::vector<MarginalSpec> marginals_in);

  // Sorted, order-insensitive content key used in fingerprints.
  std::string canonical_key() const;
  nlohmann::json to_json() const;  // list of attribute-name lists
  static Workload from_json(const nlohmann::json& j, const Schema& schema);
};

// All k-way marginals over the given attributes (in schema order).
std::vector<MarginalSpec> all_k_way(const Schema& schema,
                                    const std::vector<std::string>& attributes,
                                    std::size_t k);

std::vector<double> marginal_of_theta(const ThetaVector& theta,
                                      const MarginalSpec& spec);
std::vector<double> marginal_of_dataset(const Dataset& d, const MarginalSpec& spec);

// Stacked 0/1 indicator rows, one per (marginal, value tuple); row * theta
// equals the corresponding marginal entry.
Eigen::MatrixXd workload_matrix(const Workload& w);

}  // namespace sdgaudit
