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
#include "sdgaudit/csv.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>
#include <vector>

#include "sdgaudit/error.hpp"

namespace sdgaudit {

namespace {

std::vector<std::string> split_line(const std::string& line, char delim) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream ss(line);
  while (std::getline(ss, field, delim)) out.push_back(field);
  if (!line.empty() && line.back() == delim) out.emplace_back();
  return out;
}

std::string strip_cr(std::string s) {
  if (!s.empty() && s.back() == '\r') s.pop_back();
  return s;
}

bool parse_index(const std::string& token, std::uint32_t& out) {
  const char* first = token.data();
  const char* last = token.data() + token.size();
  auto [ptr, ec] = std::from_chars(first, last, out);
  return ec == std::errc() && ptr == last;
}

}  // namespace

Dataset ingest_csv(const std::filesystem::path& path, const Schema& schema,
                   const IngestConfig& cfg) {
  std::ifstream in(path);
  if (!in) throw Error("io-error", "cannot open '" + path.string() + "'");

  const std::size_t d = schema.attribute_count();
  // column_of[i] = file column holding schema attribute i
  std::vector<std::size_t> column_of(d);

  std::string line;
  std::size_t line_no = 0;
  if (cfg.header) {
    if (!std::getline(in, line)) {
      throw Error("schema-mismatch", "file has no header row");
    }
    ++line_no;
    const auto names = split_line(strip_cr(line), cfg.delimiter);
    for (std::size_t i = 0; i < d; ++i) {
      const auto& attr = schema.attributes()[i].name;
      auto it = std::find(names.begin(), names.end(), attr);
      if (it == names.end()) {
        throw Error("schema-mismatch", "missing column '" + attr + "'");
      }
      column_of[i] = static_cast<std::size_t>(it - names.begin());
    }
  } else {
    for (std::size_t i = 0; i < d; ++i) column_of[i] = i;
  }

  Dataset out(schema);
  std::vector<std::uint32_t> record(d);
  while (std::getline(in, line)) {
    ++line_no;
    line = strip_cr(line);
    if (line.empty()) continue;
    const auto fields = split_line(line, cfg.delimiter);
    bool drop = false;
    for (std::size_t i = 0; i < d && !drop; ++i) {
      const auto& attr = schema.attributes()[i];
      if (column_of[i] >= fields.size()) {
        throw Error("schema-mismatch",
                    "row " + std::to_string(line_no) + " has too few columns");
      }
      const std::string& token = fields[column_of[i]];
      auto map_it = cfg.value_maps.find(attr.name);
      std::uint32_t idx = 0;
      bool ok = false;
      if (map_it != cfg.value_maps.end()) {
        auto v = map_it->second.find(token);
        if (v != map_it->second.end()) {
          idx = v->second;
          ok = idx < attr.cardinality;
        }
      } else {
        ok = parse_index(token, idx) && idx < attr.cardinality;
      }
      if (!ok) {
        if (cfg.unknown_policy == IngestConfig::UnknownPolicy::kDropRow) {
          drop = true;
        } else {
          throw Error("unmapped-value", "row " + std::to_string(line_no) +
                                            ", column '" + attr.name +
                                            "': unmapped value '" + token + "'");
        }
      }
      record[i] = idx;
    }
    if (!drop) out.append(record);
  }
  return out;
}

void write_csv(const Dataset& d, const std::filesystem::path& path,
               const IngestConfig& cfg) {
  std::ofstream out(path);
  if (!out) throw Error("io-error", "cannot write '" + path.string() + "'");

  const auto& attrs = d.schema().attributes();
  // index -> raw string, per attribute, where a value map exists
  std::vector<std::vector<std::string>> reverse(attrs.size());
  for (std::size_t i = 0; i < attrs.size(); ++i) {
    auto it = cfg.value_maps.find(attrs[i].name);
    if (it == cfg.value_maps.end()) continue;
    reverse[i].resize(attrs[i].cardinality);
    for (const auto& [token, idx] : it->second) {
      if (idx < attrs[i].cardinality) reverse[i][idx] = token;
    }
  }

  if (cfg.header) {
    for (std::size_t i = 0; i < attrs.size(); ++i) {
      if (i) out << cfg.delimiter;
      out << attrs[i].name;
    }
    out << '\n';
  }
  for (std::size_t r = 0; r < d.size(); ++r) {
    const auto rec = d.record(r);
    for (std::size_t i = 0; i < attrs.size(); ++i) {
      if (i) out << cfg.delimiter;
      if (!reverse[i].empty() && !reverse[i][rec[i]].empty()) {
        out << reverse[i][rec[i]];
      } else {
        out << rec[i];
      }
    }
    out << '\n';
  }
}

}  // namespace sdgaudit
