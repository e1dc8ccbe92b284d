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

#include <json.hpp>

#include "sdgaudit/dataset.hpp"
#include "sdgaudit/marginal.hpp"

namespace sdgaudit {

// A grouped proportion-difference statistic: within records passing the
// condition, for each category of group_attr, the difference between the
// shares of the two split_attr categories.
struct DerivedStatSpec {
  std::string name;
  std::string group_attr;
  std::string split_attr;  // must be binary
  std::string condition_attr;
  std::uint32_t condition_value = 0;

  void validate(const Schema& schema) const;
};

// Root-mean-square difference between the normalized marginal tables of two
// datasets sharing a schema.
double marginal_rmse(const Dataset& real, const Dataset& sym, const MarginalSpec& m);

struct GapResult {
  double rmse = 0.0;
  int groups_used = 0;
  int groups_skipped = 0;  // empty in either dataset
};

GapResult gap_rmse(const Dataset& real, const Dataset& sym, const DerivedStatSpec& spec);

struct UtilityReport {
  std::vector<std::pair<MarginalSpec, double>> marginal_rmse;
  struct DerivedEntry {
    std::string name;
    double rmse = 0.0;
    int groups_used = 0;
    int groups_skipped = 0;
  };
  std::vector<DerivedEntry> derived_rmse;
  std::uint64_t n_real = 0;
  std::uint64_t n_sym = 0;

  nlohmann::json to_json() const;
  std::string to_csv() const;  // one metric per row
};

UtilityReport utility_report(const Dataset& real, const Dataset& sym,
                             const std::vector<MarginalSpec>& marginals,
                             const std::vector<DerivedStatSpec>& derived);

}  // namespace sdgaudit
