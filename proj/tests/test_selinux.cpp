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

#include <random>

#include "random_cases.hpp"
#include "romid/devicesim.hpp"
#include "romid/selinux.hpp"
#include "test_support.hpp"

using namespace romid;
using namespace romid::testing;

namespace {

PolicyModel resolved(const std::string& cil) {
  PolicyModel m = parse_cil(cil, "t.cil");
  resolve_attribute_sets(m);
  return m;
}

ContextMatcher matcher_for(const std::string& text) {
  Diagnostics d;
  auto entries = parse_property_contexts(text, "ctx", d);
  ensure_default_entry(entries);
  return ContextMatcher(std::move(entries));
}

PolicyModel chain_policy(bool with_chain) {
  PolicyModel m = parse_cil(read_file(fixture("attr_chain/base.cil")), "base.cil");
  if (with_chain) m.merge(parse_cil(read_file(fixture("attr_chain/chain.cil")), "chain.cil"));
  resolve_attribute_sets(m);
  return m;
}

bool reads(const PolicyModel& m, const std::string& subject, const std::string& type, bool strict = false) {
  AccessOptions o;
  o.subject = subject;
  o.strict = strict;
  return evaluate_read_access(type, m, o).readable;
}

}  // namespace

TEST(PropertyContexts, ParsesEntriesAndSkipsComments) {
  Diagnostics d;
  auto e = parse_property_contexts(
      "# comment\n\nro.serialno u:object_r:serialno_prop:s0\npersist.radio.* u:object_r:radio_prop:s0:c1,c2\n"
      "vendor.x u:object_r:x_prop:s0 prefix\n",
      "plat_property_contexts", d);
  ASSERT_EQ(e.size(), 3u);
  EXPECT_TRUE(d.empty());
  EXPECT_EQ(e[0].pattern, "ro.serialno");
  EXPECT_EQ(e[0].type_name, "serialno_prop");
  EXPECT_EQ(e[0].source.line, 3u);
  EXPECT_TRUE(e[1].is_prefix());
  EXPECT_EQ(e[1].prefix(), "persist.radio.");
  EXPECT_EQ(e[1].categories, (std::vector<std::string>{"c1", "c2"}));
  EXPECT_EQ(e[2].pattern, "vendor.x*");
}

TEST(PropertyContexts, MalformedLinesBecomeDiagnostics) {
  Diagnostics d;
  auto e = parse_property_contexts("ro.a\nro.*.b u:object_r:a_prop:s0\nro.c not-a-context\nro.d u:object_r:d_prop:s0\n",
                                   "ctx", d);
  ASSERT_EQ(e.size(), 1u);
  EXPECT_EQ(e[0].pattern, "ro.d");
  std::set<std::string> codes;
  for (const auto& x : d) codes.insert(x.code);
  EXPECT_TRUE(codes.count("context-malformed"));
  EXPECT_TRUE(codes.count("context-interior-wildcard"));
}

TEST(PropertyContexts, DefaultEntryAddedOnce) {
  std::vector<PropertyContextEntry> e;
  ensure_default_entry(e);
  ensure_default_entry(e);
  ASSERT_EQ(e.size(), 1u);
  EXPECT_EQ(e[0].pattern, "*");
  EXPECT_EQ(e[0].type_name, "default_prop");
}

TEST(ContextMatcher, ExactBeatsWildcard) {
  auto m = matcher_for("ro.* u:object_r:ro_prop:s0\nro.xxx.xxx.imei1 u:object_r:system_id_prop:s0\n");
  EXPECT_EQ(m.match("ro.xxx.xxx.imei1").type_name, "system_id_prop");
  EXPECT_EQ(m.match("ro.xxx.xxx.imei2").type_name, "ro_prop");
}

TEST(ContextMatcher, LongestPrefixAndEarliestTie) {
  auto m = matcher_for(
      "ro.* u:object_r:a_prop:s0\nro.a.* u:object_r:b_prop:s0\nro.a.* u:object_r:c_prop:s0\n");
  EXPECT_EQ(m.match("ro.a.b").type_name, "b_prop");
  EXPECT_EQ(m.match("ro.b").type_name, "a_prop");
  EXPECT_EQ(m.match("vendor.z").type_name, "default_prop");
}

TEST(ContextMatcher, ThrowsWithoutDefault) {
  ContextMatcher m({PropertyContextEntry{"ro.*", "u", "object_r", "a", "s0", {}, {}}});
  EXPECT_THROW(m.match("vendor.x"), InvariantError);
}

// Property: trie lookup equals the reference scan and the device-sim scan.
TEST(ContextMatcher, AgreesWithReferenceOnRandomCases) {
  std::mt19937_64 rng(42);
  for (int i = 0; i < 2000; ++i) {
    MatchCase c = random_match_case(rng);
    int want = reference_match(c.entries, c.name);
    std::size_t sim = sim::brute_force_match(c.entries, c.name);
    auto entries = c.entries;
    ensure_default_entry(entries);
    ContextMatcher m(entries);
    std::size_t got = m.match_index(c.name);
    if (want >= 0) {
      ASSERT_EQ(got, static_cast<std::size_t>(want)) << c.name;
      ASSERT_EQ(sim, static_cast<std::size_t>(want)) << c.name;
    } else {
      ASSERT_EQ(entries[got].pattern, "*");
      ASSERT_EQ(sim, c.entries.size());
    }
  }
}

TEST(Cil, ParsesTypesSetsAndRules) {
  PolicyModel m = parse_cil(read_file(fixture("attr_chain/chain.cil")), "chain.cil");
  ASSERT_TRUE(m.is_set("extended_core_property_type"));
  EXPECT_TRUE(m.sets.at("extended_core_property_type").expand_declared);
  EXPECT_TRUE(m.sets.at("extended_core_property_type").expandable);
  ASSERT_EQ(m.rules.size(), 1u);
  EXPECT_EQ(m.rules[0].source, "appdomain");
  EXPECT_EQ(m.rules[0].class_name, "file");
  EXPECT_EQ(m.rules[0].permissions, (std::set<std::string>{"read", "getattr", "map", "open"}));
  EXPECT_EQ(m.rules[0].source_loc.line, 4u);
}

TEST(Cil, UnbalancedParenthesesThrow) {
  EXPECT_THROW(parse_cil("(allow a b (file (read))", "bad.cil"), ParseError);
  EXPECT_THROW(parse_cil("(type a))", "bad.cil"), ParseError);
}

TEST(Cil, ExcludesAndNestedSets) {
  PolicyModel m = resolved(R"((type a) (type b) (type c)
(typeattribute inner) (typeattributeset inner (a b))
(typeattribute outer) (typeattributeset outer (and (inner c) (not (b))))
)");
  EXPECT_EQ(m.expand("inner"), (std::set<std::string>{"a", "b"}));
  EXPECT_EQ(m.expand("outer"), (std::set<std::string>{"a", "c"}));
  EXPECT_TRUE(m.member("a", "outer"));
  EXPECT_FALSE(m.member("b", "outer"));
}

TEST(Cil, CyclesResolveEmptyWithError) {
  PolicyModel m = resolved(R"((type a)
(typeattribute x) (typeattributeset x (y a))
(typeattribute y) (typeattributeset y (x))
)");
  EXPECT_TRUE(m.expand("x").empty());
  bool cycle = false;
  for (const auto& d : m.diagnostics) cycle |= d.code == "attribute-set-cycle" && d.severity == Severity::error;
  EXPECT_TRUE(cycle);
}

TEST(RuleDump, ParsesNormalisedForm) {
  PolicyModel m = parse_rule_dump(
      "type untrusted_app;\ntype p_prop;\nattribute appdomain;\ntypeattributeset appdomain { untrusted_app };\n"
      "allow appdomain p_prop:file { read open };\nneverallow untrusted_app p_prop:file { write };\n",
      "rules.txt");
  resolve_attribute_sets(m);
  ASSERT_EQ(m.rules.size(), 2u);
  EXPECT_TRUE(m.rules[1].never);
  EXPECT_TRUE(reads(m, "untrusted_app", "p_prop"));
  EXPECT_TRUE(check_neverallow(m).empty());
}

TEST(ReadAccess, FlipsWithAttributeChain) {
  PolicyModel base = chain_policy(false);
  EXPECT_FALSE(reads(base, "untrusted_app", "system_id_prop"));
  EXPECT_TRUE(reads(base, "system_app", "system_id_prop"));
  EXPECT_FALSE(reads(base, "radio", "system_id_prop"));  // property_service set only

  PolicyModel chain = chain_policy(true);
  EXPECT_TRUE(reads(chain, "untrusted_app", "system_id_prop"));
  Diagnostics d;
  auto ctx = parse_property_contexts(read_file(fixture("attr_chain/property_contexts")), "property_contexts", d);
  ensure_default_entry(ctx);
  ContextMatcher matcher(ctx);
  PropertyVerdict v = verdict_for_property("xxx.xxx.xxx.imei1", chain, matcher);
  EXPECT_TRUE(v.readable_by_untrusted);
  EXPECT_EQ(v.category, VulnCategory::attribute_set_chain);
  ASSERT_EQ(v.witness_rules.size(), 1u);
  EXPECT_EQ(v.witness_rules[0].target, "extended_core_property_type");
}

TEST(ReadAccess, StrictNeedsAllFourPermissions) {
  PolicyModel m = resolved(R"((type untrusted_app) (type p_prop)
(allow untrusted_app p_prop (file (read)))
)");
  EXPECT_TRUE(reads(m, "untrusted_app", "p_prop"));
  EXPECT_FALSE(reads(m, "untrusted_app", "p_prop", true));
  PolicyModel full = resolved(R"((type untrusted_app) (type p_prop)
(allow untrusted_app p_prop (file (read open)))
(allow untrusted_app p_prop (file (getattr map)))
)");
  EXPECT_TRUE(reads(full, "untrusted_app", "p_prop", true));
}

TEST(ReadAccess, SelfRulesAndOtherClassesIgnored) {
  PolicyModel m = resolved(R"((type untrusted_app) (type p_prop)
(allow untrusted_app self (file (read)))
(allow untrusted_app p_prop (dir (read)))
)");
  EXPECT_TRUE(reads(m, "untrusted_app", "untrusted_app"));
  EXPECT_FALSE(reads(m, "untrusted_app", "p_prop"));
}

TEST(ReadAccess, UnknownTypeIsNotReadable) {
  PolicyModel m = resolved("(type untrusted_app)\n");
  Diagnostics d;
  ReadAccess a = evaluate_read_access("ghost_prop", m, {}, &d);
  EXPECT_FALSE(a.readable);
  EXPECT_TRUE(a.unknown_type);
  ASSERT_EQ(d.size(), 1u);
  EXPECT_EQ(d[0].code, "unknown-type");
}

TEST(ReadAccess, RequiresResolution) {
  PolicyModel m = parse_cil("(type a)", "t.cil");
  EXPECT_THROW(evaluate_read_access("a", m), InvariantError);
}

TEST(Verdict, Categories) {
  PolicyModel m = resolved(R"((type untrusted_app) (type default_prop) (type a_prop) (type b_prop) (type c_prop)
(typeattribute appdomain) (typeattributeset appdomain (untrusted_app))
(typeattribute pub) (typeattributeset pub (b_prop))
(allow appdomain default_prop (file (read)))
(allow untrusted_app a_prop (file (read)))
(allow appdomain pub (file (read)))
)");
  auto matcher = matcher_for("ro.a u:object_r:a_prop:s0\nro.b u:object_r:b_prop:s0\nro.c u:object_r:c_prop:s0\n");
  EXPECT_EQ(verdict_for_property("ro.z", m, matcher).category, VulnCategory::default_context);
  EXPECT_EQ(verdict_for_property("ro.a", m, matcher).category, VulnCategory::explicit_allow);
  EXPECT_EQ(verdict_for_property("ro.b", m, matcher).category, VulnCategory::attribute_set_chain);
  EXPECT_EQ(verdict_for_property("ro.c", m, matcher).category, VulnCategory::not_vulnerable);
}

TEST(Neverallow, ReportsOverlap) {
  PolicyModel m = resolved(R"((type untrusted_app) (type system_app) (type p_prop)
(typeattribute appdomain) (typeattributeset appdomain (untrusted_app system_app))
(allow untrusted_app p_prop (file (read open)))
(neverallow appdomain p_prop (file (read)))
(neverallow system_app p_prop (file (read)))
)");
  auto v = check_neverallow(m);
  ASSERT_EQ(v.size(), 1u);
  EXPECT_EQ(v[0].sources, (std::vector<std::string>{"untrusted_app"}));
  EXPECT_EQ(v[0].permissions, (std::vector<std::string>{"read"}));
}

// Property: adding an allow rule never removes readability.
TEST(ReadAccess, MonotoneInRules) {
  std::mt19937_64 rng(7);
  for (std::uint64_t seed = 1; seed <= 60; ++seed) {
    sim::SimDeviceSpec spec = sim::generate_random_spec(seed);
    PolicyModel before = spec.policy;
    resolve_attribute_sets(before);
    PolicyModel after = spec.policy;
    std::vector<std::string> types(after.declared_types.begin(), after.declared_types.end());
    AllowRule extra;
    extra.source = types[rng() % types.size()];
    extra.target = types[rng() % types.size()];
    extra.class_name = "file";
    extra.permissions = {"read"};
    after.rules.push_back(extra);
    resolve_attribute_sets(after);
    for (const auto& t : types) {
      for (const char* s : {"untrusted_app", "system_app"}) {
        if (reads(before, s, t)) {
          ASSERT_TRUE(reads(after, s, t)) << seed << " " << s << " " << t;
        }
      }
    }
  }
}
