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
#include "sdgaudit/theta.hpp"

#include <cmath>

#include "sdgaudit/error.hpp"

namespace sdgaudit {

double stable_sum(std::span<const double> values) {
  double sum = 0.0;
  double carry = 0.0;
  for (double v : values) {
    const double y = v - carry;
    const double t = sum + y;
    carry = (t - sum) - y;
    sum = t;
  }
  return sum;
}

ThetaVector::ThetaVector(Schema schema, std::vector<double> values,
                         std::optional<std::uint64_t> sample_size_hint)
    : schema_(std::move(schema)),
      values_(std::move(values)),
      sample_size_hint_(sample_size_hint) {
  if (values_.size() != schema_.total_cells()) {
    throw Error("invalid-theta",
                "expected " + std::to_string(schema_.total_cells()) +
                    " cells, got " + std::to_string(values_.size()));
  }
  for (double& v : values_) {
    if (!std::isfinite(v) || v < kNegativeClamp) {
      throw Error("invalid-theta", "cell value " + std::to_string(v) +
                                       " is negative or non-finite");
    }
    if (v < 0.0) v = 0.0;
  }
  const double sum = stable_sum(values_);
  if (std::abs(sum - 1.0) > kSumTolerance) {
    throw Error("invalid-theta",
                "cell mass sums to " + std::to_string(sum) + ", not 1");
  }
  if (sum != 1.0 && sum > 0.0) {
    for (double& v : values_) v /= sum;
  }
}

ThetaVector ThetaVector::uniform(const Schema& schema) {
  const auto m = schema.total_cells();
  return ThetaVector(schema,
                     std::vector<double>(m, 1.0 / static_cast<double>(m)));
}

ThetaVector ThetaVector::point_mass(const Schema& schema, std::uint64_t cell) {
  std::vector<double> v(schema.total_cells(), 0.0);
  v.at(cell) = 1.0;
  return ThetaVector(schema, std::move(v));
}

nlohmann::json ThetaVector::to_json() const {
  nlohmann::json j;
  j["schema_fingerprint"] = schema_.fingerprint();
  j["cells"] = values_;
  if (sample_size_hint_) j["sample_size_hint"] = *sample_size_hint_;
  return j;
}

ThetaVector ThetaVector::from_json(const nlohmann::json& j, const Schema& schema) {
  const auto fp = j.at("schema_fingerprint").get<std::string>();
  if (fp != schema.fingerprint()) {
    throw Error("fingerprint-mismatch",
                "theta was serialized for schema " + fp + ", not " +
                    schema.fingerprint());
  }
  std::optional<std::uint64_t> hint;
  if (j.contains("sample_size_hint")) hint = j["sample_size_hint"].get<std::uint64_t>();
  return ThetaVector(schema, j.at("cells").get<std::vector<double>>(), hint);
}

}  // namespace sdgaudit
