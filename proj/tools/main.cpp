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

// Command-line front end: declare a schema and workload, generate synthetic
// data with a card, audit any generator against a card, score utility, and
// replay whole experiment grids from a manifest.

#include <atomic>
#include <filesystem>
#include <iostream>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "sdgaudit/audit.hpp"
#include "sdgaudit/csv.hpp"
#include "sdgaudit/error.hpp"
#include "sdgaudit/extremal.hpp"
#include "sdgaudit/generator.hpp"
#include "sdgaudit/io.hpp"
#include "sdgaudit/rng.hpp"
#include "sdgaudit/safe_space.hpp"
#include "sdgaudit/utility.hpp"
#include "sdgaudit/version.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace sdgaudit;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitError = 1;

json provenance(const std::vector<std::string>& argv_copy) {
  return {{"tool", kToolName}, {"version", kToolVersion}, {"command", argv_copy}};
}

struct CsvFlags {
  std::string delimiter = ",";
  bool no_header = false;
  std::string on_unknown = "reject";

  void attach(CLI::App* cmd) {
    cmd->add_option("--delimiter", delimiter, "CSV field delimiter")
        ->default_val(",");
    cmd->add_flag("--no-header", no_header, "CSV files have no header row");
    cmd->add_option("--on-unknown", on_unknown,
                    "unmapped raw values: reject | drop-row")
        ->check(CLI::IsMember({"reject", "drop-row"}));
  }

  void apply(IngestConfig& cfg) const {
    if (delimiter.size() != 1) {
      throw Error("invalid-argument", "delimiter must be a single character");
    }
    cfg.delimiter = delimiter[0];
    cfg.header = !no_header;
    cfg.unknown_policy = on_unknown == "drop-row"
                             ? IngestConfig::UnknownPolicy::kDropRow
                             : IngestConfig::UnknownPolicy::kReject;
  }
};

struct SchemaFile {
  Schema schema;
  IngestConfig ingest;
};

// Schema file: JSON list of {name, cardinality, values?}. A "values" list
// doubles as the value map for ingestion and the rendering for output.
SchemaFile load_schema_file(const fs::path& path, const CsvFlags& flags) {
  const json j = read_json_file(path);
  std::vector<Attribute> attrs;
  IngestConfig ingest;
  for (const auto& item : j) {
    Attribute a{item.at("name").get<std::string>(),
                item.at("cardinality").get<std::uint32_t>()};
    if (item.contains("values")) {
      const auto values = item["values"].get<std::vector<std::string>>();
      if (values.size() != a.cardinality) {
        throw Error("invalid-schema", "attribute '" + a.name + "' declares " +
                                          std::to_string(values.size()) +
                                          " values for cardinality " +
                                          std::to_string(a.cardinality));
      }
      auto& map = ingest.value_maps[a.name];
      for (std::uint32_t i = 0; i < values.size(); ++i) {
        map[values[i]] = i;
      }
    }
    attrs.push_back(std::move(a));
  }
  flags.apply(ingest);
  return SchemaFile{Schema(std::move(attrs)), std::move(ingest)};
}

// Domain size guard applied before any dense table is allocated.
void check_cell_cap(const Schema& schema, std::uint64_t cap) {
  if (schema.total_cells() > cap) {
    throw Error("domain-too-large",
                "schema spans " + std::to_string(schema.total_cells()) +
                    " cells, above the cap of " + std::to_string(cap) +
                    "; restrict the schema or raise --cell-cap");
  }
}

// --generator accepts either a config file or a bare kind name.
GeneratorConfig load_generator_spec(const std::string& spec, const Schema& schema) {
  if (fs::exists(spec)) {
    return GeneratorConfig::from_json(read_json_file(spec), schema);
  }
  GeneratorConfig cfg;
  cfg.kind = generator_kind_from_string(spec);
  if (cfg.kind == GeneratorKind::kIpfDishonest || cfg.kind == GeneratorKind::kBlackbox) {
    throw Error("invalid-argument",
                "generator kind '" + spec + "' needs a config file");
  }
  return cfg;
}

// ---------------------------------------------------------------------------
// generate

struct GenerateArgs {
  std::string schema_path;
  std::string workload_path;
  std::string data_path;
  std::uint64_t n = 0;
  std::uint64_t seed = 0;
  std::string out_dir;
  std::uint64_t cell_cap = 10000000;
  CsvFlags csv;
};

int run_generate(const GenerateArgs& args, const std::vector<std::string>& argv_copy) {
  const SchemaFile sf = load_schema_file(args.schema_path, args.csv);
  check_cell_cap(sf.schema, args.cell_cap);
  const Workload workload =
      Workload::from_json(read_json_file(args.workload_path), sf.schema);
  const Dataset real = ingest_csv(args.data_path, sf.schema, sf.ingest);
  if (real.empty()) throw Error("empty-dataset", "input CSV has no data rows");

  const SafeSpace ss = build_safespace(workload);
  GeneratorConfig config;
  config.kind = GeneratorKind::kIpf;

  GeneratorCard card = make_card(real, ss, config);
  card.metadata["provenance"] = provenance(argv_copy);
  card.metadata["seed"] = args.seed;

  const TrainedModel model =
      train(config, real, ss, derive_seed(args.seed, {0x7472}));
  const Dataset synthetic =
      generate(model, args.n, derive_seed(args.seed, {0x73616d}));

  fs::create_directories(args.out_dir);
  const fs::path out(args.out_dir);
  write_csv(synthetic, out / "synthetic.csv", sf.ingest);
  write_json_file(out / "card.json", card.to_json());
  std::cout << "wrote " << (out / "synthetic.csv").string() << " ("
            << synthetic.size() << " rows) and " << (out / "card.json").string()
            << "\n";
  return kExitOk;
}

// ---------------------------------------------------------------------------
// audit

struct AuditArgs {
  std::string card_path;
  std::string generator_spec;
  std::string data_path;  // optional starting dataset
  std::string out_dir;
  AuditConfig cfg;
  CsvFlags csv;
};

int run_audit(const AuditArgs& args, const std::vector<std::string>& argv_copy) {
  const GeneratorCard card = GeneratorCard::from_json(read_json_file(args.card_path));
  const GeneratorConfig gen = load_generator_spec(args.generator_spec, card.schema);

  std::optional<Dataset> start;
  if (!args.data_path.empty()) {
    IngestConfig ingest;
    args.csv.apply(ingest);
    start = ingest_csv(args.data_path, card.schema, ingest);
  }

  AuditReport report = audit(card, gen, start ? &*start : nullptr, args.cfg);
  json out_json = report.to_json();
  out_json["provenance"] = provenance(argv_copy);

  fs::create_directories(args.out_dir);
  const fs::path out(args.out_dir);
  write_json_file(out / "report.json", out_json);
  dump_test_distributions(report, out / "samples.csv");

  std::cout << "verdict: " << to_string(report.verdict)
            << " (p = " << report.p_value << ")\n";
  return report.exit_code();
}

// ---------------------------------------------------------------------------
// utility

struct UtilityArgs {
  std::string real_path;
  std::string sym_path;
  std::string schema_path;
  std::vector<std::string> marginal_flags;  // "A,B,C"
  std::vector<std::string> gap_flags;       // "name:group:split:cond=idx"
  std::string out_path = "utility.json";
  std::string csv_path;  // optional flattened CSV
  CsvFlags csv;
};

DerivedStatSpec parse_gap_flag(const std::string& flag) {
  std::vector<std::string> parts;
  std::string token;
  std::istringstream ss(flag);
  while (std::getline(ss, token, ':')) parts.push_back(token);
  if (parts.size() != 4 || parts[3].find('=') == std::string::npos) {
    throw Error("invalid-argument",
                "--gap expects NAME:GROUP:SPLIT:CONDATTR=INDEX, got '" + flag + "'");
  }
  DerivedStatSpec spec;
  spec.name = parts[0];
  spec.group_attr = parts[1];
  spec.split_attr = parts[2];
  const auto eq = parts[3].find('=');
  spec.condition_attr = parts[3].substr(0, eq);
  spec.condition_value =
      static_cast<std::uint32_t>(std::stoul(parts[3].substr(eq + 1)));
  return spec;
}

int run_utility(const UtilityArgs& args, const std::vector<std::string>& argv_copy) {
  const SchemaFile sf = load_schema_file(args.schema_path, args.csv);
  const Dataset real = ingest_csv(args.real_path, sf.schema, sf.ingest);
  const Dataset sym = ingest_csv(args.sym_path, sf.schema, sf.ingest);

  std::vector<MarginalSpec> marginals;
  for (const auto& flag : args.marginal_flags) {
    MarginalSpec spec;
    std::string token;
    std::istringstream ss(flag);
    while (std::getline(ss, token, ',')) spec.attributes.push_back(token);
    marginals.push_back(std::move(spec));
  }
  std::vector<DerivedStatSpec> derived;
  for (const auto& flag : args.gap_flags) derived.push_back(parse_gap_flag(flag));

  const UtilityReport report = utility_report(real, sym, marginals, derived);
  json out_json = report.to_json();
  out_json["provenance"] = provenance(argv_copy);
  out_json["metadata"] = {{"created_at", iso8601_now()}};
  write_json_file(args.out_path, out_json);
  if (!args.csv_path.empty()) write_text_file(args.csv_path, report.to_csv());
  std::cout << "wrote " << args.out_path << "\n";
  return kExitOk;
}

// ---------------------------------------------------------------------------
// experiment

struct ExperimentArgs {
  std::string manifest_path;
  std::string out_dir;
  unsigned jobs = 1;
  CsvFlags csv;
};

struct ExperimentCell {
  std::string generator_name;
  std::string honesty;
  std::uint64_t seed = 0;
  GeneratorConfig config;
};

int run_experiment(const ExperimentArgs& args, const std::vector<std::string>& argv_copy) {
  const json manifest = read_json_file(args.manifest_path);
  const std::string application = manifest.value("name", "experiment");

  SchemaFile sf;
  if (manifest.contains("schema_file")) {
    sf = load_schema_file(manifest["schema_file"].get<std::string>(), args.csv);
  } else {
    sf.schema = Schema::from_json(manifest.at("schema"));
    args.csv.apply(sf.ingest);
  }
  const Schema& schema = sf.schema;
  const Workload workload = Workload::from_json(manifest.at("workload"), schema);
  const SafeSpace ss = build_safespace(workload);

  // Real data: a CSV on disk, or a seeded ground-truth draw for
  // self-contained runs.
  std::optional<Dataset> real;
  const json& rd = manifest.at("real_data");
  if (rd.contains("csv")) {
    real = ingest_csv(rd["csv"].get<std::string>(), schema, sf.ingest);
  } else {
    const auto& spec = rd.at("random");
    const auto seed = spec.at("seed").get<std::uint64_t>();
    const auto n = spec.at("n").get<std::uint64_t>();
    Rng rng(derive_seed(seed, {0x67747274}));
    std::vector<double> weights(schema.total_cells());
    for (double& w : weights) w = -std::log(1.0 - rng.uniform01());
    const double total = stable_sum(weights);
    for (double& w : weights) w /= total;
    real = sample_iid(ThetaVector(schema, std::move(weights)), n,
                      derive_seed(seed, {0x64617461}));
  }

  AuditConfig base_cfg;
  if (manifest.contains("audit")) {
    const auto& a = manifest["audit"];
    base_cfg.k1 = a.value("k1", base_cfg.k1);
    base_cfg.k2 = a.value("k2", base_cfg.k2);
    base_cfg.n_sym = a.value("n_sym", base_cfg.n_sym);
    base_cfg.alpha_level = a.value("alpha_level", base_cfg.alpha_level);
    base_cfg.retries = a.value("retries", base_cfg.retries);
    base_cfg.probe_directions = a.value("probe_directions", base_cfg.probe_directions);
  }
  const bool start_from_data = manifest.value("start", "max-entropy") == "from-data";

  GeneratorConfig honest;
  honest.kind = GeneratorKind::kIpf;
  const GeneratorCard card = make_card(*real, ss, honest);

  std::vector<ExperimentCell> cells;
  for (const auto& g : manifest.at("generators")) {
    ExperimentCell base;
    base.generator_name = g.at("name").get<std::string>();
    base.honesty = g.value("honesty", "honest");
    base.config = GeneratorConfig::from_json(g.at("config"), schema);
    for (const auto& s : manifest.at("seeds")) {
      ExperimentCell cell = base;
      cell.seed = s.get<std::uint64_t>();
      cells.push_back(std::move(cell));
    }
  }

  fs::create_directories(args.out_dir);
  const fs::path out(args.out_dir);

  struct CellResult {
    bool failed = false;
    std::string error;
    double p_value = 1.0;
    std::string verdict;
  };
  std::vector<CellResult> results(cells.size());
  std::atomic<std::size_t> next{0};
  std::mutex io_mutex;

  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= cells.size()) return;
      const ExperimentCell& cell = cells[i];
      const std::string stem = "audit_" + cell.generator_name + "_" +
                               cell.honesty + "_seed" + std::to_string(cell.seed);
      try {
        AuditConfig cfg = base_cfg;
        cfg.direction_seed = cell.seed;
        AuditReport report =
            audit(card, cell.config, start_from_data ? &*real : nullptr, cfg);
        json report_json = report.to_json();
        report_json["provenance"] = provenance(argv_copy);
        report_json["cell"] = {{"generator", cell.generator_name},
                               {"honesty", cell.honesty},
                               {"application", application},
                               {"seed", cell.seed}};
        results[i] = {false, "", report.p_value, to_string(report.verdict)};
        std::scoped_lock lock(io_mutex);
        write_json_file(out / (stem + ".json"), report_json);
        dump_test_distributions(report, out / (stem + ".csv"));
      } catch (const std::exception& e) {
        results[i] = {true, e.what(), 1.0, "error"};
        std::scoped_lock lock(io_mutex);
        write_text_file(out / (stem + ".error.txt"), e.what());
      }
    }
  };
  const unsigned jobs = std::max(1u, args.jobs);
  std::vector<std::thread> pool;
  for (unsigned t = 1; t < jobs; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  std::ostringstream summary;
  summary.precision(17);
  summary << "generator,honesty,application,seed,p_value,verdict\n";
  bool any_failed = false;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    const auto& cell = cells[i];
    const auto& r = results[i];
    summary << cell.generator_name << ',' << cell.honesty << ',' << application
            << ',' << cell.seed << ',';
    if (r.failed) {
      summary << ",error\n";
      any_failed = true;
    } else {
      summary << r.p_value << ',' << r.verdict << '\n';
    }
  }
  write_text_file(out / "summary.csv", summary.str());

  json manifest_echo = {{"provenance", provenance(argv_copy)},
                        {"manifest", manifest},
                        {"card_fingerprint", card.fingerprint()},
                        {"metadata", {{"created_at", iso8601_now()}}}};
  write_json_file(out / "experiment.json", manifest_echo);

  std::cout << "wrote " << (out / "summary.csv").string() << " (" << cells.size()
            << " cells)\n";
  return any_failed ? kExitError : kExitOk;
}

// ---------------------------------------------------------------------------
// inspect-card

int run_inspect(const std::string& card_path) {
  const GeneratorCard card = GeneratorCard::from_json(read_json_file(card_path));
  std::cout << "card fingerprint:       " << card.fingerprint() << "\n";
  std::cout << "schema fingerprint:     " << card.schema.fingerprint() << "\n";
  std::cout << "attributes:\n";
  for (const auto& a : card.schema.attributes()) {
    std::cout << "  " << a.name << " (" << a.cardinality << ")\n";
  }
  std::cout << "workload marginals:\n";
  for (const auto& m : card.safespace_descriptor.at("workload")) {
    std::cout << "  ";
    for (std::size_t i = 0; i < m.size(); ++i) {
      if (i) std::cout << " x ";
      std::cout << m[i].get<std::string>();
    }
    std::cout << "\n";
  }
  std::cout << "safe-space fingerprint: " << card.safespace_fingerprint() << "\n";
  std::cout << "dim_phi: " << card.safespace_descriptor.value("dim_phi", -1)
            << ", dim_perp: " << card.safespace_descriptor.value("dim_perp", -1)
            << (card.safespace_descriptor.value("perp_is_sampled", false)
                    ? " (sampled)"
                    : "")
            << "\n";
  std::cout << "psi coordinates:        " << card.psi.size() << "\n";
  std::cout << "generator:              "
            << card.generator_descriptor.value("kind", "?") << "\n";
  if (card.metadata.contains("created_at")) {
    std::cout << "created:                "
              << card.metadata["created_at"].get<std::string>() << "\n";
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  std::vector<std::string> argv_copy(argv, argv + argc);

  CLI::App app{"synthetic data generation with declared safe statistics, "
               "generator cards, and black-box leakage audits"};
  app.set_version_flag("--version", std::string(kToolVersion));
  app.require_subcommand(1);

  GenerateArgs gen_args;
  auto* gen_cmd = app.add_subcommand(
      "generate", "train an honest generator and emit synthetic data + card");
  gen_cmd->add_option("--schema", gen_args.schema_path)->required();
  gen_cmd->add_option("--workload", gen_args.workload_path)->required();
  gen_cmd->add_option("--data", gen_args.data_path, "real data CSV")->required();
  gen_cmd->add_option("--n", gen_args.n, "synthetic rows")->required();
  gen_cmd->add_option("--seed", gen_args.seed)->default_val(0);
  gen_cmd->add_option("--out", gen_args.out_dir)->required();
  gen_cmd->add_option("--cell-cap", gen_args.cell_cap)->default_val(10000000);
  gen_args.csv.attach(gen_cmd);

  AuditArgs audit_args;
  auto* audit_cmd = app.add_subcommand(
      "audit", "leakage audit of a generator against its card");
  audit_cmd->add_option("--card", audit_args.card_path)->required();
  audit_cmd->add_option("--generator", audit_args.generator_spec,
                        "config file, or a kind: ipf | empirical | ipf-mix")
      ->required();
  audit_cmd->add_option("--data", audit_args.data_path,
                        "optional starting dataset CSV (default: max-entropy start)");
  audit_cmd->add_option("--out", audit_args.out_dir)->required();
  audit_cmd->add_option("--k1", audit_args.cfg.k1)->default_val(10);
  audit_cmd->add_option("--k2", audit_args.cfg.k2)->default_val(10);
  audit_cmd->add_option("--n-sym", audit_args.cfg.n_sym)->default_val(100000);
  audit_cmd->add_option("--alpha", audit_args.cfg.alpha_level)->default_val(0.05);
  audit_cmd->add_option("--seed", audit_args.cfg.direction_seed)->default_val(0);
  audit_cmd->add_option("--retries", audit_args.cfg.retries)->default_val(5);
  audit_cmd->add_option("--probe-directions", audit_args.cfg.probe_directions)
      ->default_val(1);
  audit_args.csv.attach(audit_cmd);

  UtilityArgs util_args;
  auto* util_cmd =
      app.add_subcommand("utility", "marginal and derived-statistic RMSE report");
  util_cmd->add_option("--real", util_args.real_path)->required();
  util_cmd->add_option("--sym", util_args.sym_path)->required();
  util_cmd->add_option("--schema", util_args.schema_path)->required();
  util_cmd->add_option("--marginal", util_args.marginal_flags,
                       "comma-joined attribute list; repeatable");
  util_cmd->add_option("--gap", util_args.gap_flags,
                       "NAME:GROUP:SPLIT:CONDATTR=INDEX; repeatable");
  util_cmd->add_option("--out", util_args.out_path)->default_val("utility.json");
  util_cmd->add_option("--csv", util_args.csv_path, "also write a flattened CSV");
  util_args.csv.attach(util_cmd);

  ExperimentArgs exp_args;
  auto* exp_cmd = app.add_subcommand(
      "experiment", "run a manifest's audit grid and tabulate p-values");
  exp_cmd->add_option("--manifest", exp_args.manifest_path)->required();
  exp_cmd->add_option("--out", exp_args.out_dir)->required();
  exp_cmd->add_option("--jobs", exp_args.jobs)->default_val(1);
  exp_args.csv.attach(exp_cmd);

  std::string inspect_card_path;
  auto* inspect_cmd = app.add_subcommand("inspect-card", "print a card summary");
  inspect_cmd->add_option("--card", inspect_card_path)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (gen_cmd->parsed()) return run_generate(gen_args, argv_copy);
    if (audit_cmd->parsed()) return run_audit(audit_args, argv_copy);
    if (util_cmd->parsed()) return run_utility(util_args, argv_copy);
    if (exp_cmd->parsed()) return run_experiment(exp_args, argv_copy);
    if (inspect_cmd->parsed()) return run_inspect(inspect_card_path);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitError;
  }
  return kExitError;
}
