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

// Settings field definitions from the framework and third-party readability.

#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "romid/diagnostics.hpp"
#include "romid/ir.hpp"
#include "romid/usage.hpp"

namespace romid {

// First API level of Android 12.
inline constexpr int kAndroid12Api = 31;

// Marketing version -> first API level; 0 if unknown.
int api_level_for_android_version(int major);

enum class SettingAnnotation { Readable, SystemApi };

struct SettingAnnotations {
  bool readable = false;
  bool system_api = false;

  friend bool operator==(const SettingAnnotations&, const SettingAnnotations&) = default;
};

struct SettingDefinition {
  SettingNamespace ns = SettingNamespace::System;
  std::string name;  // the constant value, e.g. "android_id"
  SettingAnnotations annotations;
  std::string field_name;
};

enum class SettingReason {
  undefined_setting,
  pre12_no_systemapi,
  pre12_systemapi,
  post12_readable,
  post12_not_readable,
  both_annotations_system_only,
};
const char* to_string(SettingReason r);

struct SettingVerdict {
  std::string name;
  SettingNamespace ns = SettingNamespace::System;
  bool defined = false;
  SettingAnnotations annotations;
  int sdk_version = 0;
  bool readable_by_third_party = false;
  SettingReason reason = SettingReason::undefined_setting;
  bool low_confidence = false;  // no framework definitions were available
};

// Definitions from the Settings$System/$Secure/$Global classes in `classes`.
// Non-constant String fields are skipped with a diagnostic.
std::vector<SettingDefinition> extract_setting_definitions(std::span<const IrClass> classes,
                                                           Diagnostics& diags);

class SettingDefinitions {
 public:
  SettingDefinitions() = default;
  explicit SettingDefinitions(std::vector<SettingDefinition> defs, bool available = true);

  const SettingDefinition* find(SettingNamespace ns, const std::string& name) const;
  bool available() const { return available_; }
  const std::vector<SettingDefinition>& all() const { return defs_; }

 private:
  std::vector<SettingDefinition> defs_;
  std::map<std::pair<SettingNamespace, std::string>, std::size_t> index_;
  bool available_ = false;
};

// sdk_version 0 is evaluated under the pre-12 rules; a diagnostic is added.
SettingVerdict readability_verdict(SettingNamespace ns, const std::string& name,
                                   const SettingDefinitions& defs, int sdk_version,
                                   Diagnostics* diags = nullptr);

}  // namespace romid
