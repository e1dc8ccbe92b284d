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
#include "sdgaudit/marginal.hpp"

#include <algorithm>
#include <set>

#include "sdgaudit/error.hpp"

namespace sdgaudit {

void MarginalSpec::validate(const Schema& schema) const {
  if (attributes.empty()) {
    throw Error("invalid-marginal", "marginal must name at least one attribute");
  }
  std::set<std::string> seen;
  for (const auto& name : attributes) {
    schema.index_of(name);  // throws schema-mismatch if unknown
    if (!seen.insert(name).second) {
      throw Error("invalid-marginal", "duplicate attribute '" + name + "' in marginal");
    }
  }
}

bool MarginalSpec::same_set(const MarginalSpec& other) const {
  if (attributes.size() != other.attributes.size()) return false;
  std::set<std::string> a(attributes.begin(), attributes.end());
  std::set<std::string> b(other.attributes.begin(), other.attributes.end());
  return a == b;
}

std::string MarginalSpec::canonical_key() const {
  std::vector<std::string> sorted = attributes;
  std::sort(sorted.begin(), sorted.end());
  std::string key;
  for (const auto& s : sorted) {
    key += s;
    key += '\x1f';
  }
  return key;
}

MarginalIndexer::MarginalIndexer(const Schema& schema, const MarginalSpec& spec) {
  spec.validate(schema);
  const std::size_t k = spec.width();
  std::vector<std::size_t> attr_index(k);
  group_count_ = 1;
  for (std::size_t j = 0; j < k; ++j) {
    attr_index[j] = schema.index_of(spec.attributes[j]);
    group_count_ *= schema.attributes()[attr_index[j]].cardinality;
  }

  const std::uint64_t cells = schema.total_cells();
  table_.resize(cells);
  std::vector<std::uint32_t> tuple(schema.attribute_count());
  for (std::uint64_t c = 0; c < cells; ++c) {
    schema.decode_cell(c, tuple);
    std::uint64_t g = 0;
    for (std::size_t j = 0; j < k; ++j) {
      g = g * schema.attributes()[attr_index[j]].cardinality + tuple[attr_index[j]];
    }
    table_[c] = static_cast<std::uint32_t>(g);
  }
}

Workload::Workload(Schema schema_in, std::vector<MarginalSpec> marginals_in)
    : schema(std::move(schema_in)), marginals(std::move(marginals_in)) {
  if (marginals.empty()) {
    throw Error("invalid-workload", "workload must contain at least one marginal");
  }
  for (std::size_t i = 0; i < marginals.size(); ++i) {
    marginals[i].validate(schema);
    for (std::size_t j = 0; j < i; ++j) {
      if (marginals[i].same_set(marginals[j])) {
        throw Error("invalid-workload", "duplicate marginal in workload");
      }
    }
  }
}

std::string Workload::canonical_key() const {
  std::vector<std::string> keys;
  keys.reserve(marginals.size());
  for (const auto& m : marginals) keys.push_back(m.canonical_key());
  std::sort(keys.begin(), keys.end());
  std::string out;
  for (const auto& k : keys) {
    out += k;
    out += '\x1e';
  }
  return out;
}

nlohmann::json Workload::to_json() const {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& m : marginals) arr.push_back(m.attributes);
  return arr;
}

Workload Workload::from_json(const nlohmann::json& j, const Schema& schema) {
  std::vector<MarginalSpec> specs;
  for (const auto& entry : j) {
    specs.push_back(MarginalSpec{entry.get<std::vector<std::string>>()});
  }
  return Workload(schema, std::move(specs));
}

std::vector<MarginalSpec> all_k_way(const Schema& schema,
                                    const std::vector<std::string>& attributes,
                                    std::size_t k) {
  std::vector<std::size_t> idx;
  idx.reserve(attributes.size());
  for (const auto& name : attributes) idx.push_back(schema.index_of(name));
  std::sort(idx.begin(), idx.end());

  if (k == 0 || k > idx.size()) {
    throw Error("invalid-marginal", "k-way width out of range");
  }
  std::vector<MarginalSpec> out;
  std::vector<std::size_t> pick(k);
  // iterate all k-combinations in lexicographic order
  for (std::size_t j = 0; j < k; ++j) pick[j] = j;
  for (;;) {
    MarginalSpec spec;
    for (std::size_t j = 0; j < k; ++j) {
      spec.attributes.push_back(schema.attributes()[idx[pick[j]]].name);
    }
    out.push_back(std::move(spec));
    std::size_t j = k;
    while (j-- > 0) {
      if (pick[j] + (k - j) < idx.size()) {
        ++pick[j];
        for (std::size_t l = j + 1; l < k; ++l) pick[l] = pick[l - 1] + 1;
        break;
      }
      if (j == 0) return out;
    }
  }
}

std::vector<double> marginal_of_theta(const ThetaVector& theta,
                                      const MarginalSpec& spec) {
  MarginalIndexer indexer(theta.schema(), spec);
  std::vector<double> out(indexer.group_count(), 0.0);
  for (std::uint64_t c = 0; c < theta.size(); ++c) {
    out[indexer.group_of_cell(c)] += theta[c];
  }
  return out;
}

std::vector<double> marginal_of_dataset(const Dataset& d, const MarginalSpec& spec) {
  if (d.empty()) throw Error("empty-dataset", "marginal of empty dataset");
  MarginalIndexer indexer(d.schema(), spec);
  std::vector<double> out(indexer.group_count(), 0.0);
  for (std::size_t i = 0; i < d.size(); ++i) {
    out[indexer.group_of_cell(d.cell_index(i))] += 1.0;
  }
  const double n = static_cast<double>(d.size());
  for (double& v : out) v /= n;
  return out;
}

Eigen::MatrixXd workload_matrix(const Workload& w) {
  const auto cells = static_cast<Eigen::Index>(w.schema.total_cells());
  std::vector<MarginalIndexer> indexers;
  indexers.reserve(w.marginals.size());
  Eigen::Index rows = 0;
  for (const auto& m : w.marginals) {
    indexers.emplace_back(w.schema, m);
    rows += static_cast<Eigen::Index>(indexers.back().group_count());
  }
  Eigen::MatrixXd mat = Eigen::MatrixXd::Zero(rows, cells);
  Eigen::Index offset = 0;
  for (const auto& indexer : indexers) {
    for (Eigen::Index c = 0; c < cells; ++c) {
      mat(offset + indexer.group_of_cell(static_cast<std::uint64_t>(c)), c) = 1.0;
    }
    offset += static_cast<Eigen::Index>(indexer.group_count());
  }
  return mat;
}

}  // namespace sdgaudit
