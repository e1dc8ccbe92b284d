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
#include <span>
#include <vector>

#include "sdgaudit/schema.hpp"
#include "sdgaudit/theta.hpp"

namespace sdgaudit {

// A list of records over a schema, stored row-major in one flat buffer.
// Record components are category indices, validated on append.
class Dataset {
 public:
  explicit Dataset(Schema schema) : schema_(std::move(schema)) {}
  Dataset(Schema schema, const std::vector<std::vector<std::uint32_t>>& records);

  const Schema& schema() const { return schema_; }
  std::size_t size() const {
    return schema_.attribute_count() == 0 ? 0 : flat_.size() / schema_.attribute_count();
  }
  bool empty() const { return flat_.empty(); }

  void reserve(std::size_t n) { flat_.reserve(n * schema_.attribute_count()); }
  void append(std::span<const std::uint32_t> record);

  std::span<const std::uint32_t> record(std::size_t i) const {
    const std::size_t d = schema_.attribute_count();
    return {flat_.data() + i * d, d};
  }
  std::uint64_t cell_index(std::size_t i) const { return schema_.cell_index(record(i)); }

 private:
  Schema schema_;
  std::vector<std::uint32_t> flat_;
};

// Empirical distribution of a dataset: cell counts divided by record count.
ThetaVector theta_of_dataset(const Dataset& d);

// Integer realization of a distribution: exactly n records whose cell counts
// are the largest-remainder rounding of n*theta. Records are emitted in cell
// order; the seed breaks remainder ties only.
Dataset realize_dataset(const ThetaVector& theta, std::uint64_t n, std::uint64_t seed);

// n records drawn i.i.d. from theta; deterministic given the seed.
Dataset sample_iid(const ThetaVector& theta, std::uint64_t n, std::uint64_t seed);

}  // namespace sdgaudit
