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
#include <string>
#include <vector>

#include <json.hpp>

namespace sdgaudit {

struct Attribute {
  std::string name;
  std::uint32_t cardinality = 0;

  bool operator==(const Attribute&) const = default;
};

// Ordered list of categorical attributes. Fixes the bijection between value
// tuples and flat cell indices: row-major in declaration order, the last
// attribute varying fastest. Immutable after construction.
class Schema {
 public:
  Schema() = default;
  explicit Schema(std::vector<Attribute> attributes);

  const std::vector<Attribute>& attributes() const { return attributes_; }
  std::size_t attribute_count() const { return attributes_.size(); }
  std::uint64_t total_cells() const { return total_cells_; }

  // Position of a named attribute; throws "schema-mismatch" if unknown.
  std::size_t index_of(const std::string& name) const;
  bool has_attribute(const std::string& name) const;

  std::uint64_t cell_index(std::span<const std::uint32_t> record) const;
  void decode_cell(std::uint64_t index, std::span<std::uint32_t> out) const;
  std::vector<std::uint32_t> cell_of(std::uint64_t index) const;

  // Stable content hash over (names, cardinalities); 16 hex digits.
  const std::string& fingerprint() const { return fingerprint_; }

  bool operator==(const Schema& other) const {
    return attributes_ == other.attributes_;
  }

  nlohmann::json to_json() const;
  static Schema from_json(const nlohmann::json& j);

 private:
  std::vector<Attribute> attributes_;
  std::uint64_t total_cells_ = 0;
  std::string fingerprint_;
};

// FNV-1a 64-bit over a byte string, rendered as 16 hex digits.
std::string fnv1a_hex(const std::string& bytes);

}  // namespace sdgaudit
