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

#include "romid/filter.hpp"

#include <algorithm>
#include <cctype>

#include "romid/diagnostics.hpp"
#include "romid/parallel.hpp"

namespace romid {

namespace {

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

bool token_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '.' || c == '_' || c == '-';
}

// Texts heuristic 1 may look at: the whole resolved name, or each literal
// fragment of a partial one.
std::vector<std::string> name_texts(const NameResolution& n) {
  std::vector<std::string> out;
  for (const auto& l : n.literals()) out.push_back(lower(l));
  return out;
}

}  // namespace

const char* to_string(IdentifierClass c) {
  switch (c) {
    case IdentifierClass::IMEI: return "IMEI";
    case IdentifierClass::MEID: return "MEID";
    case IdentifierClass::IMSI: return "IMSI";
    case IdentifierClass::ICCID: return "ICCID";
    case IdentifierClass::SerialNumber: return "SerialNumber";
    case IdentifierClass::WifiMac: return "WifiMac";
    case IdentifierClass::BluetoothMac: return "BluetoothMac";
  }
  return "IMEI";
}

std::optional<IdentifierClass> parse_identifier_class(std::string_view text) {
  for (IdentifierClass c : kAllIdentifierClasses) {
    if (text == to_string(c)) return c;
  }
  return std::nullopt;
}

const char* to_string(Evidence e) {
  switch (e) {
    case Evidence::name_keyword: return "name-keyword";
    case Evidence::context_method_keyword: return "context-method-keyword";
    case Evidence::corroborated_binary: return "corroborated-binary";
    case Evidence::system_component_path: return "system-component-path";
  }
  return "name-keyword";
}

KeywordConfig KeywordConfig::defaults() {
  KeywordConfig c;
  c.keywords = {
      {IdentifierClass::IMEI, {"imei"}},
      {IdentifierClass::MEID, {"meid"}},
      {IdentifierClass::IMSI, {"imsi"}},
      {IdentifierClass::ICCID, {"iccid", "simserial"}},
      {IdentifierClass::SerialNumber, {"serialno", "serial_no", "deviceid", "device_id", ".sn", "_sn"}},
      {IdentifierClass::WifiMac, {"wifimac", "wifi_mac", "wlanaddr", "macaddr"}},
      {IdentifierClass::BluetoothMac, {"btmac", "bt_mac", "btaddr", "bluetooth_mac"}},
  };
  c.priority = {IdentifierClass::IMEI,    IdentifierClass::MEID,         IdentifierClass::IMSI,
                IdentifierClass::ICCID,   IdentifierClass::WifiMac,      IdentifierClass::BluetoothMac,
                IdentifierClass::SerialNumber};
  return c;
}

void KeywordConfig::validate() const {
  for (IdentifierClass c : kAllIdentifierClasses) {
    auto it = keywords.find(c);
    if (it == keywords.end() || it->second.empty()) {
      throw ConfigError(std::string("keyword list for ") + to_string(c) + " is empty");
    }
    for (const auto& k : it->second) {
      if (k.empty() || k != lower(k)) {
        throw ConfigError(std::string("keyword '") + k + "' for " + to_string(c) +
                          " must be non-empty lowercase");
      }
    }
  }
  std::vector<IdentifierClass> sorted = priority;
  std::sort(sorted.begin(), sorted.end());
  std::vector<IdentifierClass> all(std::begin(kAllIdentifierClasses), std::end(kAllIdentifierClasses));
  std::sort(all.begin(), all.end());
  if (sorted != all) throw ConfigError("priority must list each identifier class exactly once");
}

std::string method_name_of_key(std::string_view key) {
  auto arrow = key.find("->");
  std::string_view rest = arrow == std::string_view::npos ? key : key.substr(arrow + 2);
  return std::string(rest.substr(0, rest.find('(')));
}

std::vector<SensitiveCandidate> keyword_filter(std::span<const Usage> usages,
                                               const KeywordConfig& config) {
  config.validate();
  std::vector<SensitiveCandidate> out;
  for (std::size_t i = 0; i < usages.size(); ++i) {
    const Usage& u = usages[i];
    std::vector<std::string> names = name_texts(u.name);
    std::vector<std::string> methods;
    for (const auto& chain : u.call_chains) {
      for (const auto& key : chain) methods.push_back(lower(method_name_of_key(key)));
    }
    std::sort(methods.begin(), methods.end());
    methods.erase(std::unique(methods.begin(), methods.end()), methods.end());

    for (IdentifierClass c : config.priority) {
      std::string name_hit;
      std::string chain_hit;
      for (const auto& k : config.keywords.at(c)) {
        if (name_hit.empty() &&
            std::any_of(names.begin(), names.end(),
                        [&](const std::string& t) { return t.find(k) != std::string::npos; })) {
          name_hit = k;
        }
        if (chain_hit.empty() &&
            std::any_of(methods.begin(), methods.end(),
                        [&](const std::string& t) { return t.find(k) != std::string::npos; })) {
          chain_hit = k;
        }
      }
      if (name_hit.empty() && chain_hit.empty()) continue;
      SensitiveCandidate cand;
      cand.usage_index = i;
      cand.usage = u;
      cand.identifier = c;
      if (!name_hit.empty()) cand.evidence.insert(Evidence::name_keyword);
      if (!chain_hit.empty()) cand.evidence.insert(Evidence::context_method_keyword);
      cand.matched_keyword = name_hit.empty() ? chain_hit : name_hit;
      out.push_back(std::move(cand));
      break;
    }
  }
  return out;
}

void StringIndex::add(const std::string& text, const std::string& path) {
  entries_[text].push_back(path);
}

void StringIndex::add_hit(const std::string& text, const std::string& path) {
  add(text, path);
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && !token_char(text[i])) ++i;
    std::size_t start = i;
    while (i < text.size() && token_char(text[i])) ++i;
    if (i > start && !(start == 0 && i == text.size())) add(text.substr(start, i - start), path);
  }
}

const std::vector<std::string>* StringIndex::find(const std::string& text) const {
  auto it = entries_.find(text);
  return it == entries_.end() ? nullptr : &it->second;
}

void StringIndex::finalize() {
  for (auto& [text, paths] : entries_) {
    std::sort(paths.begin(), paths.end());
    paths.erase(std::unique(paths.begin(), paths.end()), paths.end());
  }
}

StringIndex build_string_index(const RomDescriptor& rom, const IngestConfig& config,
                               unsigned threads) {
  std::vector<std::vector<BinaryStringHit>> hits(rom.other_files.size());
  parallel_for(rom.other_files.size(), threads, [&](std::size_t i) {
    hits[i] = extract_binary_strings(rom.other_files[i], config);
  });
  StringIndex index;
  for (std::size_t i = 0; i < hits.size(); ++i) {
    std::string rel = rom.relative_path(rom.other_files[i]);
    for (const auto& h : hits[i]) index.add_hit(h.text, rel);
  }
  index.finalize();
  return index;
}

FilterResult corroborate(std::vector<SensitiveCandidate> candidates, const StringIndex& index,
                         const CorroborationConfig& config) {
  auto under_system = [&](const std::string& path) {
    return std::any_of(config.system_path_markers.begin(), config.system_path_markers.end(),
                       [&](const std::string& m) { return path.find(m) != std::string::npos; });
  };
  FilterResult out;
  for (auto& c : candidates) {
    c.string_locations.clear();
    if (c.usage.name.status == NameResolution::Status::resolved) {
      if (const auto* paths = index.find(c.usage.name.value)) {
        c.evidence.insert(Evidence::corroborated_binary);
        c.string_locations = *paths;
      }
    }
    bool system = under_system(c.usage.source_path) ||
                  std::any_of(c.string_locations.begin(), c.string_locations.end(), under_system);
    if (system) c.evidence.insert(Evidence::system_component_path);
    if (c.evidence.count(Evidence::corroborated_binary) ||
        c.evidence.count(Evidence::system_component_path)) {
      out.retained.push_back(std::move(c));
    } else {
      out.demoted.push_back({std::move(c), "uncorroborated"});
    }
  }
  return out;
}

BrandMarkers default_brand_markers() {
  return {
      {"miui", {"xiaomi", "redmi", "poco"}},
      {"hyperos", {"xiaomi", "redmi", "poco"}},
      {"flyme", {"meizu"}},
      {"meizu", {"meizu"}},
      {"oneplus", {"oneplus"}},
      {"oplus", {"oneplus", "oppo", "realme"}},
      {"coloros", {"oppo", "oneplus", "realme"}},
      {"emui", {"huawei", "honor"}},
      {"magicos", {"honor"}},
      {"funtouch", {"vivo", "iqoo"}},
  };
}

FilterResult brand_spoof_filter(std::vector<SensitiveCandidate> candidates, std::string_view brand,
                                const BrandMarkers& markers) {
  const std::string own = lower(brand);
  FilterResult out;
  for (auto& c : candidates) {
    std::vector<std::string> texts = name_texts(c.usage.name);
    bool spoof = false;
    for (const auto& [marker, brands] : markers) {
      bool present = std::any_of(texts.begin(), texts.end(), [&](const std::string& t) {
        return t.find(lower(marker)) != std::string::npos;
      });
      if (!present) continue;
      bool owned = std::any_of(brands.begin(), brands.end(),
                               [&](const std::string& b) { return lower(b) == own; });
      if (!owned) {
        spoof = true;
        break;
      }
    }
    if (spoof) {
      out.demoted.push_back({std::move(c), "cross-brand-spoof"});
    } else {
      out.retained.push_back(std::move(c));
    }
  }
  return out;
}

}  // namespace romid
