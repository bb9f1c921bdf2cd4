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

// Keyword heuristics, ROM-wide string corroboration and cross-brand spoof
// exclusion over extracted usages.

#pragma once

#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "romid/ingest.hpp"
#include "romid/usage.hpp"

namespace romid {

enum class IdentifierClass { IMEI, MEID, IMSI, ICCID, SerialNumber, WifiMac, BluetoothMac };
inline constexpr IdentifierClass kAllIdentifierClasses[] = {
    IdentifierClass::IMEI,         IdentifierClass::MEID,    IdentifierClass::IMSI,
    IdentifierClass::ICCID,        IdentifierClass::SerialNumber, IdentifierClass::WifiMac,
    IdentifierClass::BluetoothMac};
const char* to_string(IdentifierClass c);
std::optional<IdentifierClass> parse_identifier_class(std::string_view text);

enum class Evidence { name_keyword, context_method_keyword, corroborated_binary, system_component_path };
const char* to_string(Evidence e);

struct KeywordConfig {
  std::map<IdentifierClass, std::vector<std::string>> keywords;
  // Earlier classes win when several match.
  std::vector<IdentifierClass> priority;

  static KeywordConfig defaults();
  // Throws ConfigError for a missing/empty class, a non-lowercase keyword or a
  // priority list that is not a permutation of the seven classes.
  void validate() const;
};

struct SensitiveCandidate {
  std::size_t usage_index = 0;  // into the usage list given to keyword_filter
  Usage usage;
  IdentifierClass identifier = IdentifierClass::IMEI;
  std::set<Evidence> evidence;
  std::string matched_keyword;
  // ROM-relative files whose strings contain the exact name.
  std::vector<std::string> string_locations;
};

struct DemotedCandidate {
  SensitiveCandidate candidate;
  std::string reason;  // "uncorroborated" or "cross-brand-spoof"
};

struct FilterResult {
  std::vector<SensitiveCandidate> retained;
  std::vector<DemotedCandidate> demoted;
};

// Method name of a key "Lfoo;->bar(I)V" -> "bar".
std::string method_name_of_key(std::string_view key);

std::vector<SensitiveCandidate> keyword_filter(std::span<const Usage> usages,
                                               const KeywordConfig& config);

// Exact text -> ROM-relative paths of the files containing it.
class StringIndex {
 public:
  void add(const std::string& text, const std::string& path);
  // Indexes the whole string and each run of [A-Za-z0-9._-].
  void add_hit(const std::string& text, const std::string& path);
  const std::vector<std::string>* find(const std::string& text) const;
  std::size_t size() const { return entries_.size(); }
  // Sorts and deduplicates location lists; call before lookups.
  void finalize();

 private:
  std::unordered_map<std::string, std::vector<std::string>> entries_;
};

// Strings of every non-code, non-policy file in the ROM.
StringIndex build_string_index(const RomDescriptor& rom, const IngestConfig& config,
                               unsigned threads = 1);

struct CorroborationConfig {
  std::vector<std::string> system_path_markers = {"/system/framework", "/system/priv-app",
                                                  "/system_ext", "/vendor"};
};

FilterResult corroborate(std::vector<SensitiveCandidate> candidates, const StringIndex& index,
                         const CorroborationConfig& config = {});

// marker (lowercase) -> brands (lowercase) that legitimately use it.
using BrandMarkers = std::map<std::string, std::vector<std::string>>;
BrandMarkers default_brand_markers();

FilterResult brand_spoof_filter(std::vector<SensitiveCandidate> candidates, std::string_view brand,
                                const BrandMarkers& markers);

}  // namespace romid
