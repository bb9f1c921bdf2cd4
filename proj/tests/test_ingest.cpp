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

#include <fstream>
#include <random>

#include "romid/diagnostics.hpp"
#include "romid/ingest.hpp"
#include "test_support.hpp"

using namespace romid;
using namespace romid::testing;

namespace {

std::vector<std::uint8_t> bytes(const std::string& s) { return {s.begin(), s.end()}; }

}  // namespace

TEST(ClassifyRom, FixtureTree) {
  RomDescriptor d = classify_rom(fixture("rom/acme_a1"), "Acme", "A1");
  EXPECT_EQ(d.code_units.size(), 4u);
  EXPECT_EQ(d.context_files.size(), 2u);
  EXPECT_EQ(d.policy_files.size(), 1u);
  EXPECT_EQ(d.sdk_version, 33);
  ASSERT_TRUE(d.framework_unit);
  EXPECT_EQ(d.relative_path(*d.framework_unit), "/system/framework/framework.out");
  ASSERT_TRUE(d.build_prop_path);
  EXPECT_EQ(d.relative_path(*d.build_prop_path), "/system/build.prop");
  std::vector<std::string> others;
  for (const auto& p : d.other_files) others.push_back(d.relative_path(p));
  EXPECT_EQ(others, (std::vector<std::string>{"/system/build.prop", "/system/etc/acme_features.xml",
                                              "/vendor/bin/hw/acme-ril"}));
}

TEST(ClassifyRom, SingleContextFile) {
  TempDir t;
  t.write("plat_property_contexts", "ro.a u:object_r:a_prop:s0\n");
  RomDescriptor d = classify_rom(t.path(), "b", "m");
  EXPECT_EQ(d.context_files.size(), 1u);
  EXPECT_TRUE(d.code_units.empty());
  EXPECT_TRUE(d.policy_files.empty());
}

TEST(ClassifyRom, EmptyDirectory) {
  TempDir t;
  RomDescriptor d = classify_rom(t.path(), "b", "m");
  EXPECT_TRUE(d.code_units.empty() && d.context_files.empty() && d.policy_files.empty() && d.other_files.empty());
  EXPECT_EQ(d.sdk_version, 0);
  EXPECT_FALSE(d.framework_unit);
}

TEST(ClassifyRom, MissingRootThrows) {
  EXPECT_THROW(classify_rom(fixture("does/not/exist"), "b", "m"), IngestError);
  EXPECT_THROW(classify_rom(fixture("rom/acme_a1/system/build.prop"), "b", "m"), IngestError);
}

TEST(ClassifyRom, Idempotent) {
  RomDescriptor a = classify_rom(fixture("rom/acme_a1"), "Acme", "A1");
  RomDescriptor b = classify_rom(fixture("rom/acme_a1"), "Acme", "A1");
  EXPECT_EQ(a.code_units, b.code_units);
  EXPECT_EQ(a.other_files, b.other_files);
  EXPECT_EQ(a.context_files, b.context_files);
}

TEST(SdkVersion, Parses) {
  EXPECT_EQ(read_sdk_version("ro.build.version.sdk=33"), 33);
  EXPECT_EQ(read_sdk_version("# x\nro.build.version.release=13\nro.build.version.sdk = 31\n"), 31);
  EXPECT_EQ(read_sdk_version(""), 0);
  EXPECT_EQ(read_sdk_version("ro.build.version.sdk=abc"), 0);
}

TEST(BinaryStrings, SingleRun) {
  auto hits = extract_binary_strings(bytes(std::string("\0ro.serialno\0", 13)), "x");
  ASSERT_EQ(hits.size(), 1u);
  EXPECT_EQ(hits[0].text, "ro.serialno");
  EXPECT_EQ(hits[0].offset, 1u);
  EXPECT_TRUE(hits[0].property_like);
}

TEST(BinaryStrings, ZerosAndShortRuns) {
  EXPECT_TRUE(extract_binary_strings(std::vector<std::uint8_t>(64, 0), "z").empty());
  EXPECT_TRUE(extract_binary_strings(bytes(std::string("ab\0cde\0", 7)), "z").empty());
  IngestConfig cfg;
  cfg.min_string_length = 2;
  EXPECT_EQ(extract_binary_strings(bytes(std::string("ab\0cde\0", 7)), "z", cfg).size(), 2u);
}

TEST(BinaryStrings, FixtureBinary) {
  auto hits = extract_binary_strings(fixture("rom/acme_a1/vendor/bin/hw/acme-ril"));
  ASSERT_EQ(hits.size(), 7u);
  std::size_t flagged = 0;
  for (const auto& h : hits) flagged += h.property_like;
  EXPECT_EQ(flagged, 3u);
}

TEST(BinaryStrings, UnreadableFileThrows) {
  EXPECT_THROW(extract_binary_strings(fixture("missing.bin")), IngestError);
}

// Property: every hit is a maximal printable run found at its offset.
TEST(BinaryStrings, HitsAreMaximalRuns) {
  std::mt19937_64 rng(3);
  for (int iter = 0; iter < 200; ++iter) {
    std::vector<std::uint8_t> data(1 + rng() % 300);
    for (auto& b : data) b = rng() % 3 == 0 ? static_cast<std::uint8_t>(rng() % 256) : static_cast<std::uint8_t>('a' + rng() % 26);
    auto printable = [](std::uint8_t c) { return c >= 0x20 && c <= 0x7e; };
    std::size_t expected = 0;
    for (std::size_t i = 0; i < data.size();) {
      std::size_t j = i;
      while (j < data.size() && printable(data[j])) ++j;
      if (j - i >= kDefaultMinStringLength) ++expected;
      i = j == i ? i + 1 : j;
    }
    auto hits = extract_binary_strings(data, "r");
    ASSERT_EQ(hits.size(), expected);
    for (const auto& h : hits) {
      ASSERT_GE(h.text.size(), kDefaultMinStringLength);
      ASSERT_EQ(std::string(data.begin() + h.offset, data.begin() + h.offset + h.text.size()), h.text);
      ASSERT_TRUE(h.offset == 0 || !printable(data[h.offset - 1]));
      std::size_t end = h.offset + h.text.size();
      ASSERT_TRUE(end == data.size() || !printable(data[end]));
    }
  }
}

TEST(PropertyLikeNames, DedupAndFilter) {
  std::vector<BinaryStringHit> hits = {{"f", 0, "ro.a", true}, {"f", 5, "ro.a", true}, {"f", 9, "hello", false}};
  EXPECT_EQ(scan_property_like_names(hits), (std::vector<std::string>{"ro.a"}));
  std::vector<BinaryStringHit> one = {{"f", 0, "persist.sys.imei", true}};
  EXPECT_EQ(scan_property_like_names(one), (std::vector<std::string>{"persist.sys.imei"}));
}

TEST(PropertyLikeNames, PilotFixture) {
  auto hits = extract_binary_strings(fixture("pilot/libpilot.so"));
  EXPECT_EQ(hits.size(), 12u);
  EXPECT_EQ(scan_property_like_names(hits),
            (std::vector<std::string>{"persist.b.two", "persist.g.six", "ro.a.one", "ro.e.five", "vendor.c.three"}));
  IngestConfig with_sys;
  with_sys.property_prefixes.push_back("sys.");
  EXPECT_EQ(scan_property_like_names(extract_binary_strings(fixture("pilot/libpilot.so"), with_sys), with_sys).size(),
            6u);
}

TEST(PropertyLike, Prefixes) {
  IngestConfig cfg;
  EXPECT_TRUE(is_property_like("ro.x", cfg));
  EXPECT_TRUE(is_property_like("vendor.x", cfg));
  EXPECT_FALSE(is_property_like("sys.x", cfg));
  EXPECT_FALSE(is_property_like("xro.x", cfg));
}
