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

// Synthetic device model evaluated by brute force. Used as the reference
// for the policy and settings analyzers; shares only data types and text
// parsers with them.

#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <tuple>
#include <vector>

#include "romid/selinux.hpp"
#include "romid/settings.hpp"
#include "romid/usage.hpp"

namespace romid::sim {

class OracleError : public Error {
 public:
  using Error::Error;
};

using SettingKey = std::pair<SettingNamespace, std::string>;

struct SimDeviceSpec {
  int sdk_version = 0;
  std::map<std::string, std::string> properties;
  std::vector<PropertyContextEntry> contexts;
  PolicyModel policy;  // never resolved here
  std::map<SettingKey, std::string> settings;
  std::vector<SettingDefinition> setting_defs;
};

// Index into `entries` of the matching context, scanning every entry.
// A missing "*" entry is treated as "* u:object_r:default_prop:s0", reported
// as index entries.size().
std::size_t brute_force_match(const std::vector<PropertyContextEntry>& entries,
                              const std::string& name);
std::string matched_type(const std::vector<PropertyContextEntry>& entries, const std::string& name);

// (source, target, class, permission)
using Quad = std::tuple<std::string, std::string, std::string, std::string>;

// Set membership by repeated substitution, |sets|+1 rounds. Throws
// OracleError if the memberships have not settled (cyclic input).
std::map<std::string, std::set<std::string>> close_sets(const PolicyModel& policy);
std::set<Quad> expand_rules(const PolicyModel& policy);

bool simulate_property_read(const SimDeviceSpec& spec, const std::string& name,
                            const std::string& subject);

// Expands the policy once for repeated queries against one spec.
class Simulator {
 public:
  explicit Simulator(const SimDeviceSpec& spec);
  bool property_read(const std::string& name, const std::string& subject) const;
  const std::set<Quad>& quads() const { return quads_; }

 private:
  const SimDeviceSpec& spec_;
  std::set<Quad> quads_;
};

bool simulate_setting_read(const SimDeviceSpec& spec, SettingNamespace ns, const std::string& name);

enum class SnapshotLabel { before_reset, after_reset };

struct Snapshot {
  std::map<std::string, std::string> properties;
  std::map<SettingKey, std::string> settings;
  SnapshotLabel label = SnapshotLabel::before_reset;
};

inline constexpr std::size_t kDefaultMinValueLength = 6;

// Keys "property:<name>" and "setting:<Namespace>:<name>", sorted.
std::vector<std::string> reset_diff(const Snapshot& before, const Snapshot& after,
                                    std::size_t min_len = kDefaultMinValueLength);

struct SpecLimits {
  int max_types = 50;
  int max_sets = 10;
  int max_rules = 200;
  int max_properties = 100;
  int max_depth = 3;
  int max_settings = 40;
};

SimDeviceSpec generate_random_spec(std::uint64_t seed, const SpecLimits& limits = {});
// Empty when the spec satisfies the generator contract.
std::vector<std::string> validate_spec(const SimDeviceSpec& spec, const SpecLimits& limits = {});
std::uint64_t structural_hash(const SimDeviceSpec& spec);

// JSON device description; relative file references resolve against
// `base_dir`. Format documented in docs/schema.md.
SimDeviceSpec load_spec(const std::filesystem::path& json_file);
SimDeviceSpec spec_from_json_text(const std::string& text, const std::filesystem::path& base_dir);
Snapshot load_snapshot(const std::filesystem::path& json_file);

}  // namespace romid::sim
