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


#include <gtest/gtest.h>

#include "romid/devicesim.hpp"
#include "romid/diagnostics.hpp"
#include "test_support.hpp"

using namespace romid;
using namespace romid::sim;
using namespace romid::testing;

TEST(ResetDiff, FixtureSnapshots) {
  Snapshot before = load_snapshot(fixture("reset/before.json"));
  Snapshot after = load_snapshot(fixture("reset/after.json"));
  std::set<std::string> keys;
  for (const Snapshot* snap : {&before, &after}) {
    for (const auto& [k, v] : snap->properties) keys.insert("property:" + k);
    for (const auto& [k, v] : snap->settings) keys.insert(std::string("setting:") + to_string(k.first) + ":" + k.second);
  }
  EXPECT_EQ(keys.size(), 30u);
  EXPECT_EQ(reset_diff(before, after),
            (std::vector<std::string>{"property:persist.vendor.radio.imei1", "property:ro.boot.serialno",
                                      "setting:Global:acme_device_meid", "setting:Secure:acme_wifi_mac_backup"}));
}

TEST(ResetDiff, LabelsAreChecked) {
  Snapshot before = load_snapshot(fixture("reset/before.json"));
  Snapshot after = load_snapshot(fixture("reset/after.json"));
  EXPECT_THROW(reset_diff(after, before), InvariantError);
  EXPECT_THROW(reset_diff(before, before), InvariantError);
}

TEST(ResetDiff, IdenticalAndDisjoint) {
  Snapshot a;
  a.properties = {{"ro.a", "1234567"}, {"ro.short", "12"}, {"ro.empty", ""}};
  a.settings = {{{SettingNamespace::Secure, "s"}, "abcdefgh"}};
  Snapshot b = a;
  b.label = SnapshotLabel::after_reset;
  EXPECT_EQ(reset_diff(a, b), (std::vector<std::string>{"property:ro.a", "setting:Secure:s"}));
  EXPECT_EQ(reset_diff(a, b, 1), (std::vector<std::string>{"property:ro.a", "property:ro.short", "setting:Secure:s"}));

  Snapshot c;
  c.label = SnapshotLabel::after_reset;
  c.properties = {{"ro.other", "1234567"}};
  c.settings = {{{SettingNamespace::Global, "s"}, "abcdefgh"}};
  EXPECT_TRUE(reset_diff(a, c).empty());
}

TEST(ResetDiff, MalformedSnapshotThrows) {
  TempDir dir;
  auto p = dir.path() / "s.json";
  write_file(p, R"({"label": "sometime", "properties": {}})");
  EXPECT_THROW(load_snapshot(p), OracleError);
}

TEST(CloseSets, CycleThrows) {
  PolicyModel m = parse_cil("(type a)\n(typeattribute x) (typeattributeset x (y a))\n"
                            "(typeattribute y) (typeattributeset y (x))\n",
                            "cycle.cil");
  EXPECT_THROW(close_sets(m), OracleError);
}

TEST(CloseSets, NestedAndExcluded) {
  PolicyModel m = parse_cil("(type a) (type b) (type c)\n(typeattribute in) (typeattributeset in (a b))\n"
                            "(typeattribute out) (typeattributeset out (and (in c) (not (b))))\n",
                            "nest.cil");
  auto sets = close_sets(m);
  EXPECT_EQ(sets.at("in"), (std::set<std::string>{"a", "b"}));
  EXPECT_EQ(sets.at("out"), (std::set<std::string>{"a", "c"}));
}

TEST(Generator, SpecsSatisfyContract) {
  for (std::uint64_t seed = 1; seed <= 200; ++seed) {
    SimDeviceSpec s = generate_random_spec(seed);
    EXPECT_TRUE(validate_spec(s).empty()) << seed;
    EXPECT_EQ(structural_hash(s), structural_hash(generate_random_spec(seed))) << seed;
  }
  std::set<std::uint64_t> hashes;
  for (std::uint64_t seed = 1; seed <= 50; ++seed) hashes.insert(structural_hash(generate_random_spec(seed)));
  EXPECT_GT(hashes.size(), 45u);
}

TEST(Generator, ValidateRejectsOversizedSpec) {
  SimDeviceSpec s = generate_random_spec(7);
  SpecLimits tight;
  tight.max_rules = 0;
  tight.max_properties = 0;
  EXPECT_FALSE(validate_spec(s, tight).empty());
}

TEST(LoadSpec, AttributeChainFixtures) {
  SimDeviceSpec base = load_spec(fixture("attr_chain/base.spec.json"));
  EXPECT_EQ(base.sdk_version, 33);
  EXPECT_EQ(matched_type(base.contexts, "xxx.xxx.xxx.imei1"), "system_id_prop");
  EXPECT_FALSE(simulate_property_read(base, "xxx.xxx.xxx.imei1", "untrusted_app"));
  EXPECT_TRUE(simulate_property_read(base, "xxx.xxx.xxx.imei1", "system_app"));

  SimDeviceSpec chain = load_spec(fixture("attr_chain/chain.spec.json"));
  EXPECT_TRUE(simulate_property_read(chain, "xxx.xxx.xxx.imei1", "untrusted_app"));
  Simulator sim(chain);
  EXPECT_TRUE(sim.property_read("xxx.xxx.xxx.imei1", "untrusted_app"));
  EXPECT_THROW(sim.property_read("no.such.prop", "untrusted_app"), OracleError);
}

TEST(LoadSpec, RejectsBadInput) {
  TempDir dir;
  EXPECT_THROW(spec_from_json_text("{", dir.path()), OracleError);
  EXPECT_THROW(spec_from_json_text(R"({"sdk_version": 33, "cil_files": ["missing.cil"]})", dir.path()), Error);
}

TEST(BruteForce, MissingDefaultIsReportedPastTheEnd) {
  Diagnostics diags;
  std::vector<PropertyContextEntry> entries = parse_property_contexts("ro.a u:object_r:a_prop:s0\n", "pc", diags);
  EXPECT_EQ(brute_force_match(entries, "ro.b"), entries.size());
  EXPECT_EQ(matched_type(entries, "ro.b"), "default_prop");
  EXPECT_EQ(matched_type(entries, "ro.a"), "a_prop");
}

// Property: adding an allow rule never removes a reachable quad.
TEST(ExpandRules, MonotoneInRules) {
  for (std::uint64_t seed = 1; seed <= 40; ++seed) {
    SimDeviceSpec s = generate_random_spec(seed);
    auto before = expand_rules(s.policy);
    AllowRule extra{"untrusted_app", "default_prop", "file", {"read", "open"}, false, {}};
    s.policy.rules.push_back(extra);
    auto after = expand_rules(s.policy);
    EXPECT_TRUE(std::includes(after.begin(), after.end(), before.begin(), before.end())) << seed;
    EXPECT_TRUE(after.count({"untrusted_app", "default_prop", "file", "read"})) << seed;
  }
}
