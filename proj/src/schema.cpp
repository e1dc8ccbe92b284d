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
#include "sdgaudit/schema.hpp"

#include <set>

#include "sdgaudit/error.hpp"

namespace sdgaudit {

std::string fnv1a_hex(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= static_cast<std::uint64_t>(c);
    h *= 0x100000001b3ULL;
  }
  static const char* digits = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) {
    out[static_cast<std::size_t>(i)] = digits[h & 0xf];
    h >>= 4;
  }
  return out;
}

Schema::Schema(std::vector<Attribute> attributes)
    : attributes_(std::move(attributes)) {
  if (attributes_.empty()) {
    throw Error("invalid-schema", "schema must declare at least one attribute");
  }
  std::set<std::string> seen;
  total_cells_ = 1;
  std::string canon;
  for (const auto& a : attributes_) {
    if (a.cardinality < 2) {
      throw Error("invalid-schema",
                  "attribute '" + a.name + "' must have cardinality >= 2");
    }
    if (!seen.insert(a.name).second) {
      throw Error("invalid-schema", "duplicate attribute name '" + a.name + "'");
    }
    constexpr std::uint64_t kCellLimit = 1ULL << 62;
    if (total_cells_ > kCellLimit / a.cardinality) {
      throw Error("domain-too-large", "total cell count overflows");
    }
    total_cells_ *= a.cardinality;
    canon += a.name;
    canon += '\x1f';
    canon += std::to_string(a.cardinality);
    canon += '\x1e';
  }
  fingerprint_ = fnv1a_hex(canon);
}

std::size_t Schema::index_of(const std::string& name) const {
  for (std::size_t i = 0; i < attributes_.size(); ++i) {
    if (attributes_[i].name == name) return i;
  }
  throw Error("schema-mismatch", "unknown attribute '" + name + "'");
}

bool Schema::has_attribute(const std::string& name) const {
  for (const auto& a : attributes_) {
    if (a.name == name) return true;
  }
  return false;
}

std::uint64_t Schema::cell_index(std::span<const std::uint32_t> record) const {
  if (record.size() != attributes_.size()) {
    throw Error("schema-mismatch", "record arity does not match schema");
  }
  std::uint64_t index = 0;
  for (std::size_t i = 0; i < attributes_.size(); ++i) {
    if (record[i] >= attributes_[i].cardinality) {
      throw Error("schema-mismatch",
                  "value " + std::to_string(record[i]) + " out of range for '" +
                      attributes_[i].name + "'");
    }
    index = index * attributes_[i].cardinality + record[i];
  }
  return index;
}

void Schema::decode_cell(std::uint64_t index, std::span<std::uint32_t> out) const {
  for (std::size_t i = attributes_.size(); i-- > 0;) {
    const std::uint64_t card = attributes_[i].cardinality;
    out[i] = static_cast<std::uint32_t>(index % card);
    index /= card;
  }
}

std::vector<std::uint32_t> Schema::cell_of(std::uint64_t index) const {
  std::vector<std::uint32_t> out(attributes_.size());
  decode_cell(index, out);
  return out;
}

nlohmann::json Schema::to_json() const {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& a : attributes_) {
    arr.push_back({{"name", a.name}, {"cardinality", a.cardinality}});
  }
  return arr;
}

Schema Schema::from_json(const nlohmann::json& j) {
  std::vector<Attribute> attrs;
  for (const auto& item : j) {
    attrs.push_back(Attribute{item.at("name").get<std::string>(),
                              item.at("cardinality").get<std::uint32_t>()});
  }
  return Schema(std::move(attrs));
}

}  // namespace sdgaudit
