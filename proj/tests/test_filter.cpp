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

#include "romid/filter.hpp"
#include "test_support.hpp"

using namespace romid;
using namespace romid::testing;

namespace {

Usage usage(const std::string& name, std::vector<std::vector<std::string>> chains = {},
            std::string path = "/data/app/a.smali") {
  Usage u;
  u.name = NameResolution::make_resolved(name);
  u.call_chains = std::move(chains);
  u.source_path = std::move(path);
  return u;
}

SensitiveCandidate candidate(const std::string& name, std::string path = "/data/app/a.smali") {
  auto c = keyword_filter(std::vector<Usage>{usage(name, {}, std::move(path))}, KeywordConfig::defaults());
  EXPECT_EQ(c.size(), 1u) << name;
  return c.at(0);
}

}  // namespace

TEST(KeywordFilter, ClassifiesByName) {
  std::vector<Usage> us = {usage("persist.radio.imei"), usage("ro.ril.meid"),  usage("ro.sim.imsi"),
                           usage("vendor.gsm.iccid"),   usage("ro.serialno"),  usage("ro.boot.wifimac"),
                           usage("persist.bt_mac"),     usage("ro.build.id")};
  auto c = keyword_filter(us, KeywordConfig::defaults());
  ASSERT_EQ(c.size(), 7u);
  std::vector<IdentifierClass> want = {IdentifierClass::IMEI,         IdentifierClass::MEID,
                                       IdentifierClass::IMSI,         IdentifierClass::ICCID,
                                       IdentifierClass::SerialNumber, IdentifierClass::WifiMac,
                                       IdentifierClass::BluetoothMac};
  for (std::size_t i = 0; i < c.size(); ++i) {
    EXPECT_EQ(c[i].identifier, want[i]) << c[i].usage.name.value;
    EXPECT_EQ(c[i].usage_index, i);
    EXPECT_TRUE(c[i].evidence.count(Evidence::name_keyword));
  }
}

TEST(KeywordFilter, PriorityOrderWins) {
  auto c = keyword_filter(std::vector<Usage>{usage("ro.meid.imei")}, KeywordConfig::defaults());
  ASSERT_EQ(c.size(), 1u);
  EXPECT_EQ(c[0].identifier, IdentifierClass::IMEI);
  KeywordConfig cfg = KeywordConfig::defaults();
  std::swap(cfg.priority[0], cfg.priority[1]);
  c = keyword_filter(std::vector<Usage>{usage("ro.meid.imei")}, cfg);
  EXPECT_EQ(c[0].identifier, IdentifierClass::MEID);
}

TEST(KeywordFilter, CallChainMethodNames) {
  auto c = keyword_filter(
      std::vector<Usage>{usage("ro.vendor.x1", {{"Lcom/a/B;->getDeviceImei()Ljava/lang/String;"}})},
      KeywordConfig::defaults());
  ASSERT_EQ(c.size(), 1u);
  EXPECT_EQ(c[0].identifier, IdentifierClass::IMEI);
  EXPECT_EQ(c[0].evidence, (std::set<Evidence>{Evidence::context_method_keyword}));
  EXPECT_EQ(c[0].matched_keyword, "imei");
}

TEST(KeywordFilter, PartialNamesUseLiteralFragments) {
  Usage u;
  u.name = NameResolution::from_fragments({NameFragment{false, "ril.iccid."}, NameFragment{true, ""}});
  auto c = keyword_filter(std::vector<Usage>{u}, KeywordConfig::defaults());
  ASSERT_EQ(c.size(), 1u);
  EXPECT_EQ(c[0].identifier, IdentifierClass::ICCID);
}

TEST(KeywordFilter, ValidateRejectsBadConfig) {
  KeywordConfig cfg = KeywordConfig::defaults();
  cfg.keywords[IdentifierClass::IMSI].clear();
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg = KeywordConfig::defaults();
  cfg.keywords[IdentifierClass::IMSI] = {"IMSI"};
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg = KeywordConfig::defaults();
  cfg.priority.pop_back();
  EXPECT_THROW(cfg.validate(), ConfigError);
  EXPECT_NO_THROW(KeywordConfig::defaults().validate());
}

TEST(KeywordFilter, MethodNameOfKey) {
  EXPECT_EQ(method_name_of_key("Lfoo/Bar;->baz(I)V"), "baz");
  EXPECT_EQ(method_name_of_key("Lfoo/Bar;-><init>()V"), "<init>");
}

TEST(StringIndex, IndexesTokens) {
  StringIndex idx;
  idx.add_hit("key=ro.acme.imei;", "/vendor/bin/x");
  idx.add_hit("ro.acme.imei", "/system/bin/y");
  idx.add_hit("ro.acme.imei", "/system/bin/y");
  idx.finalize();
  const auto* p = idx.find("ro.acme.imei");
  ASSERT_NE(p, nullptr);
  EXPECT_EQ(*p, (std::vector<std::string>{"/system/bin/y", "/vendor/bin/x"}));
  EXPECT_NE(idx.find("key=ro.acme.imei;"), nullptr);
  EXPECT_EQ(idx.find("ro.acme"), nullptr);
}

TEST(Corroborate, BinaryOrSystemPath) {
  StringIndex idx;
  idx.add_hit("ro.found.imei", "/odm/bin/tool");
  idx.finalize();
  std::vector<SensitiveCandidate> cands = {candidate("ro.found.imei"), candidate("ro.lost.imei"),
                                           candidate("ro.sys.imei", "/system/priv-app/X/X.out/a.smali")};
  FilterResult r = corroborate(cands, idx);
  ASSERT_EQ(r.retained.size(), 2u);
  EXPECT_EQ(r.retained[0].usage.name.value, "ro.found.imei");
  EXPECT_EQ(r.retained[0].string_locations, (std::vector<std::string>{"/odm/bin/tool"}));
  EXPECT_TRUE(r.retained[0].evidence.count(Evidence::corroborated_binary));
  EXPECT_FALSE(r.retained[0].evidence.count(Evidence::system_component_path));
  EXPECT_TRUE(r.retained[1].evidence.count(Evidence::system_component_path));
  ASSERT_EQ(r.demoted.size(), 1u);
  EXPECT_EQ(r.demoted[0].reason, "uncorroborated");
  EXPECT_EQ(r.demoted[0].candidate.usage.name.value, "ro.lost.imei");
}

TEST(BrandSpoof, DemotesForeignMarkers) {
  std::vector<SensitiveCandidate> cands = {candidate("ro.miui.imei"), candidate("ro.oplus.meid"),
                                           candidate("ro.acme.imei")};
  FilterResult r = brand_spoof_filter(cands, "OnePlus", default_brand_markers());
  ASSERT_EQ(r.demoted.size(), 1u);
  EXPECT_EQ(r.demoted[0].candidate.usage.name.value, "ro.miui.imei");
  EXPECT_EQ(r.demoted[0].reason, "cross-brand-spoof");
  EXPECT_EQ(r.retained.size(), 2u);
  EXPECT_EQ(brand_spoof_filter(cands, "Xiaomi", default_brand_markers()).demoted.size(), 1u);
}

TEST(StringIndex, BuiltFromRomFixture) {
  RomDescriptor d = classify_rom(fixture("rom/acme_a1"), "Acme", "A1");
  StringIndex idx = build_string_index(d, {});
  const auto* p = idx.find("persist.vendor.acme.wifimac");
  ASSERT_NE(p, nullptr);
  EXPECT_EQ(*p, (std::vector<std::string>{"/vendor/bin/hw/acme-ril"}));
  EXPECT_EQ(idx.find("ro.toy.imei"), nullptr);
}
