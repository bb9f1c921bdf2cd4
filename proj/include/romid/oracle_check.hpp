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

// Cross-checks the analyzers against device-sim on generated devices.

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "romid/devicesim.hpp"

namespace romid {

struct Disagreement {
  std::uint64_t seed = 0;
  std::string key;  // property name or "Namespace:name"
  std::string subject;
  bool analyzer = false;
  bool oracle = false;
};

struct AgreementReport {
  std::size_t specs = 0;
  std::size_t property_checks = 0;
  std::size_t setting_checks = 0;
  std::vector<Disagreement> disagreements;

  bool ok() const { return disagreements.empty(); }
};

// Analyzer verdicts for one spec, through the same entry points scan uses.
bool analyzer_property_read(const sim::SimDeviceSpec& spec, const PolicyModel& resolved,
                            const ContextMatcher& matcher, const std::string& name,
                            const std::string& subject);
bool analyzer_setting_read(const sim::SimDeviceSpec& spec, SettingNamespace ns, const std::string& name);

// Seeds first_seed .. first_seed + count - 1; subjects untrusted_app and
// system_app.
AgreementReport check_policy_agreement(std::uint64_t first_seed, std::size_t count,
                                       unsigned threads = 1, const sim::SpecLimits& limits = {});
AgreementReport check_settings_agreement(std::uint64_t first_seed, std::size_t count,
                                         unsigned threads = 1);

}  // namespace romid
