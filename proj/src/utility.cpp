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
#include "sdgaudit/utility.hpp"

#include <array>
#include <cmath>
#include <optional>
#include <sstream>

#include "sdgaudit/error.hpp"

namespace sdgaudit {

namespace {

void require_same_schema(const Dataset& real, const Dataset& sym) {
  if (real.schema().fingerprint() != sym.schema().fingerprint()) {
    throw Error("schema-mismatch", "datasets use different schemas");
  }
}

// gap per group: share of split=0 minus share of split=1 among conditioned
// records; nullopt when the group has no support.
std::vector<std::optional<double>> gaps_of(const Dataset& d,
                                           const DerivedStatSpec& spec) {
  const Schema& schema = d.schema();
  const std::size_t group_idx = schema.index_of(spec.group_attr);
  const std::size_t split_idx = schema.index_of(spec.split_attr);
  const std::size_t cond_idx = schema.index_of(spec.condition_attr);
  const std::uint32_t groups = schema.attributes()[group_idx].cardinality;

  std::vector<std::array<double, 2>> counts(groups, {0.0, 0.0});
  for (std::size_t i = 0; i < d.size(); ++i) {
    const auto rec = d.record(i);
    if (rec[cond_idx] != spec.condition_value) continue;
    counts[rec[group_idx]][rec[split_idx]] += 1.0;
  }
  std::vector<std::optional<double>> gaps(groups);
  for (std::uint32_t g = 0; g < groups; ++g) {
    const double total = counts[g][0] + counts[g][1];
    if (total == 0.0) continue;
    gaps[g] = (counts[g][0] - counts[g][1]) / total;
  }
  return gaps;
}

}  // namespace

void DerivedStatSpec::validate(const Schema& schema) const {
  schema.index_of(group_attr);
  schema.index_of(condition_attr);
  const std::size_t split_idx = schema.index_of(split_attr);
  if (schema.attributes()[split_idx].cardinality != 2) {
    throw Error("invalid-argument",
                "split attribute '" + split_attr + "' must be binary");
  }
  if (condition_value >=
      schema.attributes()[schema.index_of(condition_attr)].cardinality) {
    throw Error("invalid-argument", "condition value out of range");
  }
}

double marginal_rmse(const Dataset& real, const Dataset& sym, const MarginalSpec& m) {
  require_same_schema(real, sym);
  const auto a = marginal_of_dataset(real, m);
  const auto b = marginal_of_dataset(sym, m);
  double sq = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    sq += d * d;
  }
  return std::sqrt(sq / static_cast<double>(a.size()));
}

GapResult gap_rmse(const Dataset& real, const Dataset& sym, const DerivedStatSpec& spec) {
  require_same_schema(real, sym);
  spec.validate(real.schema());

  const auto real_gaps = gaps_of(real, spec);
  const auto sym_gaps = gaps_of(sym, spec);
  GapResult result;
  double sq = 0.0;
  for (std::size_t g = 0; g < real_gaps.size(); ++g) {
    if (!real_gaps[g] || !sym_gaps[g]) {
      ++result.groups_skipped;
      continue;
    }
    const double d = *real_gaps[g] - *sym_gaps[g];
    sq += d * d;
    ++result.groups_used;
  }
  if (result.groups_used == 0) {
    throw Error("no-support", "every group is empty in one of the datasets");
  }
  result.rmse = std::sqrt(sq / static_cast<double>(result.groups_used));
  return result;
}

UtilityReport utility_report(const Dataset& real, const Dataset& sym,
                             const std::vector<MarginalSpec>& marginals,
                             const std::vector<DerivedStatSpec>& derived) {
  require_same_schema(real, sym);
  UtilityReport report;
  report.n_real = real.size();
  report.n_sym = sym.size();
  for (const auto& m : marginals) {
    report.marginal_rmse.emplace_back(m, marginal_rmse(real, sym, m));
  }
  for (const auto& spec : derived) {
    const GapResult r = gap_rmse(real, sym, spec);
    report.derived_rmse.push_back(
        {spec.name, r.rmse, r.groups_used, r.groups_skipped});
  }
  return report;
}

nlohmann::json UtilityReport::to_json() const {
  nlohmann::json j;
  j["n_real"] = n_real;
  j["n_sym"] = n_sym;
  nlohmann::json marg = nlohmann::json::array();
  for (const auto& [spec, rmse] : marginal_rmse) {
    marg.push_back({{"attributes", spec.attributes}, {"rmse", rmse}});
  }
  j["marginal_rmse"] = marg;
  nlohmann::json der = nlohmann::json::array();
  for (const auto& e : derived_rmse) {
    der.push_back({{"name", e.name},
                   {"rmse", e.rmse},
                   {"groups_used", e.groups_used},
                   {"groups_skipped", e.groups_skipped}});
  }
  j["derived_rmse"] = der;
  return j;
}

std::string UtilityReport::to_csv() const {
  std::ostringstream out;
  out.precision(17);
  out << "metric,name,rmse\n";
  for (const auto& [spec, rmse] : marginal_rmse) {
    out << "marginal,";
    for (std::size_t i = 0; i < spec.attributes.size(); ++i) {
      if (i) out << '+';
      out << spec.attributes[i];
    }
    out << ',' << rmse << '\n';
  }
  for (const auto& e : derived_rmse) {
    out << "derived," << e.name << ',' << e.rmse << '\n';
  }
  return out.str();
}

}  // namespace sdgaudit
