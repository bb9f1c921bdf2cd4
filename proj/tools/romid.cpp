// Copyright 2026 The romid Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "romid/config.hpp"
#include "romid/devicesim.hpp"
#include "romid/oracle_check.hpp"
#include "romid/report.hpp"
#include "romid/settings.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitInput = 2;
constexpr int kExitInvariant = 3;

void write_text(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw romid::IngestError(path, "cannot open for writing");
  out << text;
  if (!out) throw romid::IngestError(path, "write failed");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"romid: find device-identifier channels in unpacked Android ROMs"};
  app.require_subcommand(0, 1);
  bool print_config = false;
  app.add_flag("--print-config", print_config, "Print the default configuration and exit");

  std::string rom, brand, model, out, config_file, jsonl_dir;
  int sdk = -1;
  unsigned threads = 1;
  bool strict = false;
  auto* scan = app.add_subcommand("scan", "Scan one ROM tree and write its findings");
  scan->add_option("--rom", rom, "Unpacked ROM directory")->required();
  scan->add_option("--brand", brand, "Brand name")->required();
  scan->add_option("--model", model, "Model name")->required();
  scan->add_option("--out", out, "Findings JSON file ('-' for stdout)")->required();
  scan->add_option("--config", config_file, "JSON config (see --print-config)");
  scan->add_option("--sdk", sdk, "Override the SDK level from build.prop");
  scan->add_option("--threads", threads, "Worker threads")->check(CLI::Range(1u, 256u));
  scan->add_flag("--strict-selinux", strict, "Require read, getattr, map and open");
  scan->add_option("--jsonl-dir", jsonl_dir, "Also write usages.jsonl here");

  std::vector<std::string> inputs;
  std::string agg_out;
  auto* agg = app.add_subcommand("aggregate", "Fold findings files into a corpus aggregate");
  agg->add_option("--out", agg_out, "Aggregate JSON file ('-' for stdout)")->required();
  agg->add_option("files", inputs, "Findings files")->required()->check(CLI::ExistingFile);

  std::string format = "json", emit_in, emit_out;
  auto* emit = app.add_subcommand("emit", "Render an aggregate as JSON or CSV");
  emit->add_option("--format", format, "json or csv")->check(CLI::IsMember({"json", "csv"}));
  emit->add_option("--in", emit_in, "Aggregate JSON")->required()->check(CLI::ExistingFile);
  emit->add_option("--out", emit_out, "Output file (default stdout)");

  std::size_t seeds = 500;
  std::uint64_t first_seed = 1;
  auto* oracle = app.add_subcommand("oracle-check", "Compare analyzers with device-sim on random devices");
  oracle->add_option("--seeds", seeds, "Number of generated devices");
  oracle->add_option("--first-seed", first_seed, "First seed");
  oracle->add_option("--threads", threads, "Worker threads")->check(CLI::Range(1u, 256u));

  std::string pilot_rom;
  auto* pilot = app.add_subcommand("pilot", "List property-like strings in non-code ROM files");
  pilot->add_option("--rom", pilot_rom, "Unpacked ROM directory")->required();
  pilot->add_option("--config", config_file, "JSON config");

  std::string defs_rom;
  auto* defs = app.add_subcommand("settings-defs", "List Settings definitions of the framework unit");
  defs->add_option("--rom", defs_rom, "Unpacked ROM directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (print_config) {
      std::cout << romid::config_to_json(romid::ScanConfig{});
      return kExitOk;
    }
    if (*scan) {
      romid::ScanConfig cfg = config_file.empty() ? romid::ScanConfig{} : romid::load_config(config_file);
      if (scan->count("--threads")) cfg.threads = threads;
      if (strict) cfg.access.strict = true;
      romid::ScanOptions opts;
      if (sdk >= 0) opts.sdk_override = sdk;
      romid::RomFindings f = romid::scan(rom, brand, model, cfg, opts);
      write_text(out, romid::findings_to_json(f));
      if (!jsonl_dir.empty()) {
        std::filesystem::create_directories(jsonl_dir);
        write_text((std::filesystem::path(jsonl_dir) / "usages.jsonl").string(), romid::usages_to_jsonl(f));
      }
      if (f.partial) std::cerr << "romid: some input files failed to parse; results are partial\n";
      return kExitOk;
    }
    if (*agg) {
      std::vector<std::filesystem::path> files(inputs.begin(), inputs.end());
      write_text(agg_out, romid::aggregate_to_json(romid::aggregate(files)));
      return kExitOk;
    }
    if (*emit) {
      romid::CorpusAggregate a = romid::aggregate_from_json(romid::read_file(emit_in));
      write_text(emit_out, format == "csv" ? romid::aggregate_to_csv(a) : romid::aggregate_to_json(a));
      return kExitOk;
    }
    if (*oracle) {
      auto policy = romid::check_policy_agreement(first_seed, seeds, threads);
      auto settings = romid::check_settings_agreement(first_seed, seeds, threads);
      std::cout << "policy: " << policy.specs << " devices, " << policy.property_checks << " checks, "
                << policy.disagreements.size() << " disagreements\n";
      std::cout << "settings: " << settings.specs << " devices, " << settings.setting_checks << " checks, "
                << settings.disagreements.size() << " disagreements\n";
      for (const auto* r : {&policy, &settings}) {
        for (const auto& d : r->disagreements) {
          std::cout << "  seed " << d.seed << " " << d.key << " " << d.subject << ": analyzer=" << d.analyzer
                    << " oracle=" << d.oracle << "\n";
        }
      }
      return policy.ok() && settings.ok() ? kExitOk : kExitInvariant;
    }
    if (*pilot) {
      romid::ScanConfig cfg = config_file.empty() ? romid::ScanConfig{} : romid::load_config(config_file);
      romid::RomDescriptor d = romid::classify_rom(pilot_rom, "", "");
      std::vector<romid::BinaryStringHit> hits;
      for (const auto& p : d.other_files) {
        auto h = romid::extract_binary_strings(p, cfg.ingest);
        hits.insert(hits.end(), h.begin(), h.end());
      }
      for (const auto& name : romid::scan_property_like_names(hits, cfg.ingest)) std::cout << name << "\n";
      return kExitOk;
    }
    if (*defs) {
      romid::RomDescriptor d = romid::classify_rom(defs_rom, "", "");
      if (!d.framework_unit) {
        std::cerr << "romid: no framework code unit found\n";
        return kExitOk;
      }
      std::vector<romid::IrClass> classes;
      romid::Diagnostics diags;
      for (const auto& e : std::filesystem::recursive_directory_iterator(*d.framework_unit)) {
        if (e.is_regular_file() && e.path().extension() == ".smali") {
          classes.push_back(romid::parse_class(romid::read_file(e.path()), d.relative_path(e.path())));
        }
      }
      std::vector<std::string> lines;
      for (const auto& def : romid::extract_setting_definitions(classes, diags)) {
        std::string ann;
        if (def.annotations.readable) ann += " @Readable";
        if (def.annotations.system_api) ann += " @SystemApi";
        lines.push_back(std::string(romid::to_string(def.ns)) + "\t" + def.name + "\t" + def.field_name + ann);
      }
      std::sort(lines.begin(), lines.end());
      for (const auto& l : lines) std::cout << l << "\n";
      return kExitOk;
    }
    std::cout << app.help();
    return kExitUsage;
  } catch (const romid::InvariantError& e) {
    std::cerr << "romid: internal invariant failed: " << e.what() << "\n";
    return kExitInvariant;
  } catch (const romid::sim::OracleError& e) {
    std::cerr << "romid: oracle error: " << e.what() << "\n";
    return kExitInvariant;
  } catch (const romid::Error& e) {
    std::cerr << "romid: " << e.what() << "\n";
    return kExitInput;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "romid: " << e.what() << "\n";
    return kExitInput;
  }
}
