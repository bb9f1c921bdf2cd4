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

#include "romid/oracle_check.hpp"

#include "romid/parallel.hpp"

namespace romid {

namespace {

constexpr const char* kSubjects[] = {"untrusted_app", "system_app"};

std::vector<PropertyContextEntry> with_default(std::vector<PropertyContextEntry> entries) {
  ensure_default_entry(entries);
  return entries;
}

}  // namespace

bool analyzer_property_read(const sim::SimDeviceSpec&, const PolicyModel& resolved,
                            const ContextMatcher& matcher, const std::string& name,
                            const std::string& subject) {
  AccessOptions options;
  options.subject = subject;
  return verdict_for_property(name, resolved, matcher, options).readable_by_untrusted;
}

bool analyzer_setting_read(const sim::SimDeviceSpec& spec, SettingNamespace ns, const std::string& name) {
  SettingDefinitions defs(spec.setting_defs, true);
  return readability_verdict(ns, name, defs, spec.sdk_version).readable_by_third_party;
}

AgreementReport check_policy_agreement(std::uint64_t first_seed, std::size_t count, unsigned threads,
                                       const sim::SpecLimits& limits) {
  std::vector<AgreementReport> parts(count);
  parallel_for(count, threads, [&](std::size_t i) {
    std::uint64_t seed = first_seed + i;
    sim::SimDeviceSpec spec = sim::generate_random_spec(seed, limits);
    PolicyModel model = spec.policy;
    resolve_attribute_sets(model);
    ContextMatcher matcher(with_default(spec.contexts));
    sim::Simulator oracle(spec);
    AgreementReport& r = parts[i];
    r.specs = 1;
    for (const auto& [name, value] : spec.properties) {
      for (const char* subject : kSubjects) {
        bool a = analyzer_property_read(spec, model, matcher, name, subject);
        bool o = oracle.property_read(name, subject);
        ++r.property_checks;
        if (a != o) r.disagreements.push_back({seed, name, subject, a, o});
      }
    }
  });
  AgreementReport out;
  for (auto& p : parts) {
    out.specs += p.specs;
    out.property_checks += p.property_checks;
    out.disagreements.insert(out.disagreements.end(), p.disagreements.begin(), p.disagreements.end());
  }
  return out;
}

AgreementReport check_settings_agreement(std::uint64_t first_seed, std::size_t count, unsigned threads) {
  // Each case is one (definition table, sdk, key) triple drawn from a
  // generated device; devices are drawn until `count` cases exist.
  AgreementReport out;
  std::uint64_t seed = first_seed;
  sim::SpecLimits limits;
  limits.max_rules = 0;
  limits.max_properties = 1;
  while (out.setting_checks < count) {
    std::size_t batch = 16;
    std::vector<AgreementReport> parts(batch);
    parallel_for(batch, threads, [&](std::size_t i) {
      sim::SimDeviceSpec spec = sim::generate_random_spec(seed + i, limits);
      AgreementReport& r = parts[i];
      r.specs = 1;
      for (const auto& [key, value] : spec.settings) {
        bool a = analyzer_setting_read(spec, key.first, key.second);
        bool o = sim::simulate_setting_read(spec, key.first, key.second);
        ++r.setting_checks;
        if (a != o) {
          r.disagreements.push_back({seed + i, std::string(to_string(key.first)) + ":" + key.second,
                                     "sdk " + std::to_string(spec.sdk_version), a, o});
        }
      }
    });
    for (auto& p : parts) {
      out.specs += p.specs;
      out.setting_checks += p.setting_checks;
      out.disagreements.insert(out.disagreements.end(), p.disagreements.begin(), p.disagreements.end());
    }
    seed += batch;
  }
  return out;
}

}  // namespace romid
