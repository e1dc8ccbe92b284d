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
#include <filesystem>
#include <map>
#include <string>

#include "sdgaudit/dataset.hpp"
#include "sdgaudit/schema.hpp"

namespace sdgaudit {

// How raw CSV tokens map onto category indices. Attributes without a value
// map must be pre-encoded as integers in [0, cardinality).
struct IngestConfig {
  enum class UnknownPolicy { kReject, kDropRow };

  char delimiter = ',';
  bool header = true;
  UnknownPolicy unknown_policy = UnknownPolicy::kReject;
  std::map<std::string, std::map<std::string, std::uint32_t>> value_maps;
};

// Reads a delimited UTF-8 file into a dataset, preserving row order.
// With a header, schema attributes are matched by column name and extra
// columns are ignored; without one, columns must match the schema in
// declaration order.
Dataset ingest_csv(const std::filesystem::path& path, const Schema& schema,
                   const IngestConfig& cfg);

// Writes a dataset back out, rendering categories through the reverse value
// maps where available and as integers otherwise.
void write_csv(const Dataset& d, const std::filesystem::path& path,
               const IngestConfig& cfg);

}  // namespace sdgaudit
