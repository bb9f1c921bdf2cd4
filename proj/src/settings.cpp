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

#include "romid/settings.hpp"

#include <algorithm>

namespace romid {

namespace {

constexpr std::string_view kSettingsPrefix = "Landroid/provider/Settings$";

struct VersionRow {
  int major;
  int api;
};
constexpr VersionRow kVersions[] = {{5, 21},  {6, 23},  {7, 24},  {8, 26},  {9, 28}, {10, 29},
                                    {11, 30}, {12, 31}, {13, 33}, {14, 34}, {15, 35}};

std::optional<SettingNamespace> namespace_of_class(std::string_view name) {
  if (!name.starts_with(kSettingsPrefix) || !name.ends_with(";")) return std::nullopt;
  return parse_namespace(name.substr(kSettingsPrefix.size(),
                                     name.size() - kSettingsPrefix.size() - 1));
}

}  // namespace

int api_level_for_android_version(int major) {
  for (const auto& row : kVersions) {
    if (row.major == major) return row.api;
  }
  return 0;
}

const char* to_string(SettingReason r) {
  switch (r) {
    case SettingReason::undefined_setting: return "undefined-setting";
    case SettingReason::pre12_no_systemapi: return "pre12-no-systemapi";
    case SettingReason::pre12_systemapi: return "pre12-systemapi";
    case SettingReason::post12_readable: return "post12-readable";
    case SettingReason::post12_not_readable: return "post12-not-readable";
    case SettingReason::both_annotations_system_only: return "both-annotations-system-only";
  }
  return "undefined-setting";
}

std::vector<SettingDefinition> extract_setting_definitions(std::span<const IrClass> classes,
                                                           Diagnostics& diags) {
  std::vector<SettingDefinition> out;
  for (const IrClass& cls : classes) {
    auto ns = namespace_of_class(cls.name);
    if (!ns) continue;
    for (const IrField& f : cls.fields) {
      if (f.type != "Ljava/lang/String;") continue;
      if (!f.string_value || f.string_value->empty()) {
        diags.push_back({Severity::info, "setting-field-not-constant",
                         "String field " + f.name + " has no constant value; skipped",
                         cls.source_path.empty() ? cls.name : cls.source_path});
        continue;
      }
      SettingDefinition d;
      d.ns = *ns;
      d.name = *f.string_value;
      d.field_name = f.name;
      for (const auto& a : f.annotations) {
        if (a.ends_with("/Readable;") || a.ends_with("$Readable;") || a == "LReadable;") d.annotations.readable = true;
        if (a.ends_with("/SystemApi;") || a.ends_with("$SystemApi;") || a == "LSystemApi;") d.annotations.system_api = true;
      }
      out.push_back(std::move(d));
    }
  }
  return out;
}

SettingDefinitions::SettingDefinitions(std::vector<SettingDefinition> defs, bool available)
    : defs_(std::move(defs)), available_(available) {
  for (std::size_t i = 0; i < defs_.size(); ++i) index_.emplace(std::make_pair(defs_[i].ns, defs_[i].name), i);
}

const SettingDefinition* SettingDefinitions::find(SettingNamespace ns, const std::string& name) const {
  if (auto it = index_.find({ns, name}); it != index_.end()) return &defs_[it->second];
  // A name defined in another namespace still counts as defined.
  for (SettingNamespace other :
       {SettingNamespace::System, SettingNamespace::Secure, SettingNamespace::Global}) {
    if (auto it = index_.find({other, name}); it != index_.end()) return &defs_[it->second];
  }
  return nullptr;
}

SettingVerdict readability_verdict(SettingNamespace ns, const std::string& name,
                                   const SettingDefinitions& defs, int sdk_version,
                                   Diagnostics* diags) {
  SettingVerdict v;
  v.name = name;
  v.ns = ns;
  v.sdk_version = sdk_version;
  v.low_confidence = !defs.available();
  if (sdk_version == 0 && diags) {
    diags->push_back({Severity::warning, "unknown-sdk",
                      "SDK version unknown; setting " + name + " evaluated under pre-12 rules", {}});
  }
  const SettingDefinition* def = defs.find(ns, name);
  if (!def) {
    v.defined = false;
    v.readable_by_third_party = true;
    v.reason = SettingReason::undefined_setting;
    return v;
  }
  v.defined = true;
  v.annotations = def->annotations;
  const bool readable = def->annotations.readable;
  const bool system_api = def->annotations.system_api;
  if (sdk_version < kAndroid12Api) {
    v.readable_by_third_party = !system_api;
    v.reason = system_api ? SettingReason::pre12_systemapi : SettingReason::pre12_no_systemapi;
  } else {
    v.readable_by_third_party = readable && !system_api;
    if (readable && system_api) {
      v.reason = SettingReason::both_annotations_system_only;
    } else {
      v.reason = readable ? SettingReason::post12_readable : SettingReason::post12_not_readable;
    }
  }
  return v;
}

}  // namespace romid
