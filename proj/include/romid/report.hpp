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

// Per-ROM scan pipeline, findings files and corpus aggregation.

#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "romid/config.hpp"
#include "romid/filter.hpp"
#include "romid/ingest.hpp"
#include "romid/selinux.hpp"
#include "romid/service.hpp"
#include "romid/settings.hpp"
#include "romid/usage.hpp"

namespace romid {

inline constexpr int kSchemaVersion = 1;

struct PropertyFinding {
  SensitiveCandidate candidate;
  PropertyVerdict verdict;
};

struct SettingFinding {
  SensitiveCandidate candidate;
  SettingVerdict verdict;
};

struct RomFindings {
  RomDescriptor descriptor;
  std::vector<PropertyFinding> property_findings;  // get operations
  std::vector<SensitiveCandidate> property_writes;
  std::vector<SettingFinding> setting_findings;    // get operations
  std::vector<SensitiveCandidate> setting_writes;
  std::vector<ServiceLeakFinding> service_channels;  // candidate_index into property_findings
  std::vector<DemotedCandidate> demoted;
  std::vector<NeverallowViolation> neverallow_violations;
  std::vector<AllowRule> policy_rules;  // for rendering violations
  std::vector<Usage> usages;
  Diagnostics diagnostics;
  bool partial = false;  // some input file failed to parse
};

struct ScanOptions {
  std::optional<int> sdk_override;
};

// Per-file ingest and parse errors become diagnostics and set `partial`;
// only an unreadable root throws.
RomFindings scan(const std::filesystem::path& rom_root, const std::string& brand,
                 const std::string& model, const ScanConfig& config, const ScanOptions& options = {});

// Canonical findings JSON (sorted keys, two-space indent, trailing newline).
std::string findings_to_json(const RomFindings& findings);
// One JSON object per line.
std::string usages_to_jsonl(const RomFindings& findings);

// Android-version column of an SDK level: "pre_v6", "v7" ... "v14", "v15+",
// or "unknown" for 0.
std::string version_bucket(int sdk);
const std::vector<std::string>& version_buckets();

struct Counts {
  long devices = 0;
  long sensitive_properties = 0;
  long vulnerable_properties = 0;
  long sensitive_settings = 0;
  long vulnerable_settings = 0;
  long sensitive_devices = 0;
  long vulnerable_devices = 0;

  Counts& operator+=(const Counts& o);
  friend bool operator==(const Counts&, const Counts&) = default;
};

using DeviceId = std::pair<std::string, std::string>;  // (brand, model)

struct CorpusAggregate {
  Counts totals;
  std::map<std::string, Counts> per_brand;
  std::map<std::string, Counts> per_version;
  std::map<std::string, std::map<std::string, long>> brand_versions;  // brand -> bucket -> devices
  std::set<std::string> unique_properties;
  std::set<std::string> unique_settings;
  // Vulnerable names -> devices exposing them.
  std::map<std::string, std::set<DeviceId>> property_occurrences;
  std::map<std::string, std::set<DeviceId>> setting_occurrences;

  // Names on at least two devices of one brand: name -> brand -> models.
  std::map<std::string, std::map<std::string, std::set<std::string>>> property_recurrences() const;
  std::map<std::string, std::map<std::string, std::set<std::string>>> setting_recurrences() const;

  void merge(const CorpusAggregate& other);
  friend bool operator==(const CorpusAggregate&, const CorpusAggregate&) = default;
};

// Folds one findings JSON document. Throws SchemaError on a schema_version
// mismatch or missing fields.
CorpusAggregate aggregate_one(const std::string& findings_json);
CorpusAggregate aggregate(const std::vector<std::filesystem::path>& findings_files);

std::string aggregate_to_json(const CorpusAggregate& agg);
CorpusAggregate aggregate_from_json(const std::string& text);
std::string aggregate_to_csv(const CorpusAggregate& agg);

// round(100 * vulnerable / sensitive), halves rounded up; 0 when sensitive is 0.
long percent(long vulnerable, long sensitive);

}  // namespace romid
