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

#include "romid/config.hpp"

#include <json.hpp>

namespace romid {

namespace {

using nlohmann::json;

void check_keys(const json& j, std::initializer_list<const char*> allowed, const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + " must be an object");
  for (const auto& [k, v] : j.items()) {
    bool ok = false;
    for (const char* a : allowed) ok |= k == a;
    if (!ok) throw ConfigError("unknown config key " + where + "." + k);
  }
}

template <typename T>
void read(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

}  // namespace

ScanConfig config_from_json(const std::string& text) {
  ScanConfig c;
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  try {
    check_keys(j, {"ingest", "usage", "keywords", "priority", "corroboration", "brand_markers",
                   "service", "selinux", "threads"},
               "config");
    if (j.contains("ingest")) {
      const json& s = j["ingest"];
      check_keys(s, {"min_string_length", "property_prefixes"}, "ingest");
      read(s, "min_string_length", c.ingest.min_string_length);
      read(s, "property_prefixes", c.ingest.property_prefixes);
    }
    if (j.contains("usage")) {
      const json& s = j["usage"];
      check_keys(s, {"depth_limit", "path_limit", "max_chains", "max_alternatives"}, "usage");
      read(s, "depth_limit", c.usage.depth_limit);
      read(s, "path_limit", c.usage.path_limit);
      read(s, "max_chains", c.usage.max_chains);
      read(s, "max_alternatives", c.usage.max_alternatives);
      if (c.usage.depth_limit < 1 || c.usage.path_limit < 1) {
        throw ConfigError("usage.depth_limit and usage.path_limit must be positive");
      }
    }
    if (j.contains("keywords")) {
      const json& s = j["keywords"];
      if (!s.is_object()) throw ConfigError("keywords must be an object");
      for (const auto& [k, v] : s.items()) {
        auto cls = parse_identifier_class(k);
        if (!cls) throw ConfigError("unknown identifier class " + k);
        c.keywords.keywords[*cls] = v.get<std::vector<std::string>>();
      }
    }
    if (j.contains("priority")) {
      c.keywords.priority.clear();
      for (const auto& v : j["priority"]) {
        auto cls = parse_identifier_class(v.get<std::string>());
        if (!cls) throw ConfigError("unknown identifier class " + v.get<std::string>());
        c.keywords.priority.push_back(*cls);
      }
    }
    c.keywords.validate();
    if (j.contains("corroboration")) {
      const json& s = j["corroboration"];
      check_keys(s, {"system_path_markers"}, "corroboration");
      read(s, "system_path_markers", c.corroboration.system_path_markers);
    }
    if (j.contains("brand_markers")) {
      c.brand_markers = j["brand_markers"].get<BrandMarkers>();
    }
    if (j.contains("service")) {
      const json& s = j["service"];
      check_keys(s, {"helper_depth"}, "service");
      read(s, "helper_depth", c.service.helper_depth);
    }
    if (j.contains("selinux")) {
      const json& s = j["selinux"];
      check_keys(s, {"subject", "strict"}, "selinux");
      read(s, "subject", c.access.subject);
      read(s, "strict", c.access.strict);
    }
    read(j, "threads", c.threads);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("bad config value: ") + e.what());
  }
  c.usage.threads = c.threads;
  return c;
}

ScanConfig load_config(const std::filesystem::path& file) {
  try {
    return config_from_json(read_file(file));
  } catch (const IngestError& e) {
    throw ConfigError(e.what());
  }
}

std::string config_to_json(const ScanConfig& c) {
  json j;
  j["ingest"] = {{"min_string_length", c.ingest.min_string_length},
                 {"property_prefixes", c.ingest.property_prefixes}};
  j["usage"] = {{"depth_limit", c.usage.depth_limit},
                {"path_limit", c.usage.path_limit},
                {"max_chains", c.usage.max_chains},
                {"max_alternatives", c.usage.max_alternatives}};
  json kw = json::object();
  for (const auto& [cls, words] : c.keywords.keywords) kw[to_string(cls)] = words;
  j["keywords"] = kw;
  json prio = json::array();
  for (auto cls : c.keywords.priority) prio.push_back(to_string(cls));
  j["priority"] = prio;
  j["corroboration"] = {{"system_path_markers", c.corroboration.system_path_markers}};
  j["brand_markers"] = c.brand_markers;
  j["service"] = {{"helper_depth", c.service.helper_depth}};
  j["selinux"] = {{"subject", c.access.subject}, {"strict", c.access.strict}};
  j["threads"] = c.threads;
  return j.dump(2) + "\n";
}

}  // namespace romid
