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
#include "sdgaudit/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "sdgaudit/error.hpp"
#include "sdgaudit/rng.hpp"

namespace sdgaudit {

Dataset::Dataset(Schema schema, const std::vector<std::vector<std::uint32_t>>& records)
    : schema_(std::move(schema)) {
  reserve(records.size());
  for (const auto& r : records) append(r);
}

void Dataset::append(std::span<const std::uint32_t> record) {
  if (record.size() != schema_.attribute_count()) {
    throw Error("schema-mismatch", "record arity does not match schema");
  }
  for (std::size_t i = 0; i < record.size(); ++i) {
    if (record[i] >= schema_.attributes()[i].cardinality) {
      throw Error("schema-mismatch",
                  "value " + std::to_string(record[i]) + " out of range for '" +
                      schema_.attributes()[i].name + "'");
    }
  }
  flat_.insert(flat_.end(), record.begin(), record.end());
}

ThetaVector theta_of_dataset(const Dataset& d) {
  if (d.empty()) {
    throw Error("empty-dataset", "cannot take the empirical distribution of an empty dataset");
  }
  const std::uint64_t cells = d.schema().total_cells();
  std::vector<double> counts(cells, 0.0);
  for (std::size_t i = 0; i < d.size(); ++i) counts[d.cell_index(i)] += 1.0;
  const double n = static_cast<double>(d.size());
  for (double& c : counts) c /= n;
  return ThetaVector(d.schema(), std::move(counts), d.size());
}

Dataset realize_dataset(const ThetaVector& theta, std::uint64_t n, std::uint64_t seed) {
  if (n == 0) throw Error("empty-request", "cannot realize a dataset of zero records");
  const std::uint64_t cells = theta.size();

  std::vector<std::uint64_t> counts(cells);
  std::vector<double> remainders(cells);
  std::uint64_t assigned = 0;
  for (std::uint64_t c = 0; c < cells; ++c) {
    const double exact = static_cast<double>(n) * theta[c];
    counts[c] = static_cast<std::uint64_t>(std::floor(exact));
    remainders[c] = exact - std::floor(exact);
    assigned += counts[c];
  }

  if (assigned < n) {
    std::uint64_t leftover = n - assigned;
    // Seeded permutation orders cells with equal remainders.
    std::vector<std::uint64_t> order(cells);
    std::iota(order.begin(), order.end(), 0);
    Rng rng(seed);
    rng.shuffle(order);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::uint64_t a, std::uint64_t b) {
                       return remainders[a] > remainders[b];
                     });
    for (std::uint64_t c : order) {
      if (leftover == 0) break;
      if (remainders[c] <= 0.0) continue;
      ++counts[c];
      --leftover;
    }
    // Float drift can starve the remainder pool; top up the heaviest cells.
    for (std::uint64_t c : order) {
      if (leftover == 0) break;
      ++counts[c];
      --leftover;
    }
  }

  Dataset out(theta.schema());
  out.reserve(n);
  std::vector<std::uint32_t> tuple(theta.schema().attribute_count());
  for (std::uint64_t c = 0; c < cells; ++c) {
    if (counts[c] == 0) continue;
    theta.schema().decode_cell(c, tuple);
    for (std::uint64_t k = 0; k < counts[c]; ++k) out.append(tuple);
  }
  return out;
}

Dataset sample_iid(const ThetaVector& theta, std::uint64_t n, std::uint64_t seed) {
  if (n == 0) throw Error("empty-request", "cannot sample zero records");
  const std::uint64_t cells = theta.size();

  std::vector<double> cdf(cells);
  double acc = 0.0;
  for (std::uint64_t c = 0; c < cells; ++c) {
    acc += theta[c];
    cdf[c] = acc;
  }
  cdf[cells - 1] = 1.0;

  // Decode each cell once; sampling then only copies tuples.
  const std::size_t d = theta.schema().attribute_count();
  std::vector<std::uint32_t> decoded(cells * d);
  for (std::uint64_t c = 0; c < cells; ++c) {
    theta.schema().decode_cell(c, {decoded.data() + c * d, d});
  }

  Rng rng(seed);
  Dataset out(theta.schema());
  out.reserve(n);
  for (std::uint64_t i = 0; i < n; ++i) {
    const std::size_t c = rng.categorical_from_cdf(cdf);
    out.append({decoded.data() + c * d, d});
  }
  return out;
}

}  // namespace sdgaudit
