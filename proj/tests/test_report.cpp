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

#include <json.hpp>

#include "romid/config.hpp"
#include "romid/diagnostics.hpp"
#include "romid/report.hpp"
#include "test_support.hpp"

using namespace romid;
using namespace romid::testing;
using nlohmann::json;

namespace {

std::vector<std::filesystem::path> corpus_files() {
  std::vector<std::filesystem::path> out;
  for (const char* n : {"acme_a1", "acme_a2", "nova_n1", "nova_n2", "zeta_z1"}) {
    out.push_back(fixture(std::string("corpus/") + n + ".findings.json"));
  }
  return out;
}

}  // namespace

TEST(Findings, GoldenFixture) {
  RomFindings f = scan(fixture("rom/acme_a1"), "Acme", "A1", ScanConfig{});
  EXPECT_FALSE(f.partial);
  EXPECT_EQ(findings_to_json(f), read_file(fixture("rom/acme_a1.findings.json")));
}

TEST(Findings, ThreadCountDoesNotChangeOutput) {
  ScanConfig one;
  ScanConfig many;
  many.threads = 4;
  std::string a = findings_to_json(scan(fixture("rom/acme_a1"), "Acme", "A1", one));
  std::string b = findings_to_json(scan(fixture("rom/acme_a1"), "Acme", "A1", many));
  EXPECT_EQ(a, b);
}

TEST(Findings, SdkOverride) {
  ScanOptions opts;
  opts.sdk_override = 29;
  json j = json::parse(findings_to_json(scan(fixture("rom/acme_a1"), "Acme", "A1", ScanConfig{}, opts)));
  EXPECT_EQ(j.at("descriptor").at("sdk_version"), 29);
}

TEST(Findings, UnreadableRootThrows) {
  EXPECT_THROW(scan(fixture("rom/no_such_rom"), "X", "Y", ScanConfig{}), IngestError);
}

TEST(Findings, BrokenCodeFileMakesResultPartial) {
  TempDir t;
  t.write("system/build.prop", "ro.build.version.sdk=33\n");
  t.write("system/app/Bad/Bad.out/Bad.smali", ".method public f()V\n");
  t.write("system/app/Good/Good.out/Good.smali",
          ".class public LGood;\n.super Ljava/lang/Object;\n\n.method public static f()V\n    .locals 1\n\n"
          "    const-string v0, \"ro.good.imei\"\n"
          "    invoke-static {v0}, Landroid/os/SystemProperties;->get(Ljava/lang/String;)Ljava/lang/String;\n"
          "    return-void\n.end method\n");
  RomFindings f = scan(t.path(), "B", "M", ScanConfig{});
  EXPECT_TRUE(f.partial);
  bool parse_diag = false;
  for (const auto& d : f.diagnostics) parse_diag |= d.severity == Severity::error;
  EXPECT_TRUE(parse_diag);
  ASSERT_EQ(f.usages.size(), 1u);
  EXPECT_EQ(f.usages[0].name.value, "ro.good.imei");
}

TEST(Findings, JsonlHasOneObjectPerUsage) {
  RomFindings f = scan(fixture("rom/acme_a1"), "Acme", "A1", ScanConfig{});
  std::string text = usages_to_jsonl(f);
  std::size_t lines = 0;
  std::size_t start = 0;
  while (start < text.size()) {
    std::size_t end = text.find('\n', start);
    ASSERT_NE(end, std::string::npos);
    EXPECT_NO_THROW(json::parse(text.substr(start, end - start)));
    ++lines;
    start = end + 1;
  }
  EXPECT_EQ(lines, f.usages.size());
}

TEST(Aggregate, CorpusCsv) {
  CorpusAggregate a = aggregate(corpus_files());
  EXPECT_EQ(aggregate_to_csv(a), read_file(fixture("corpus/expected.csv")));
  EXPECT_EQ(a.totals.devices, 5);
  EXPECT_EQ(a.unique_properties.size(), 8u);
  EXPECT_EQ(a.unique_settings.size(), 6u);
}

TEST(Aggregate, JsonRoundTrip) {
  CorpusAggregate a = aggregate(corpus_files());
  std::string text = aggregate_to_json(a);
  CorpusAggregate b = aggregate_from_json(text);
  EXPECT_EQ(a, b);
  EXPECT_EQ(aggregate_to_json(b), text);
}

TEST(Aggregate, MergeIsOrderIndependent) {
  auto files = corpus_files();
  CorpusAggregate forward = aggregate(files);
  std::reverse(files.begin(), files.end());
  EXPECT_EQ(aggregate(files), forward);
  CorpusAggregate folded;
  for (const auto& f : files) folded.merge(aggregate_one(read_file(f)));
  EXPECT_EQ(folded, forward);
}

TEST(Aggregate, RecurrencesNeedTwoModels) {
  json doc = json::parse(read_file(fixture("corpus/acme_a1.findings.json")));
  CorpusAggregate a = aggregate_one(doc.dump());
  doc["descriptor"]["model"] = "A9";
  a.merge(aggregate_one(doc.dump()));
  auto rec = a.property_recurrences();
  ASSERT_FALSE(rec.empty());
  for (const auto& [name, brands] : rec) {
    EXPECT_EQ(brands.at("Acme"), (std::set<std::string>{"A1", "A9"})) << name;
  }
  EXPECT_TRUE(aggregate(corpus_files()).property_recurrences().empty());
}

TEST(Aggregate, SchemaMismatchThrows) {
  json doc = json::parse(read_file(fixture("corpus/acme_a1.findings.json")));
  doc["schema_version"] = kSchemaVersion + 1;
  EXPECT_THROW(aggregate_one(doc.dump()), SchemaError);
  doc.erase("schema_version");
  EXPECT_THROW(aggregate_one(doc.dump()), SchemaError);
  EXPECT_THROW(aggregate_one("not json"), SchemaError);
  EXPECT_THROW(aggregate_from_json(R"({"schema_version": 2})"), SchemaError);
}

TEST(Percent, RoundsHalfUp) {
  EXPECT_EQ(percent(0, 0), 0);
  EXPECT_EQ(percent(1, 2), 50);
  EXPECT_EQ(percent(2, 3), 67);
  EXPECT_EQ(percent(1, 3), 33);
  EXPECT_EQ(percent(1, 8), 13);  // 12.5
  EXPECT_EQ(percent(1, 200), 1);  // 0.5
  EXPECT_EQ(percent(5, 5), 100);
}

TEST(Percent, MatchesFloatingPoint) {
  for (long s = 1; s <= 300; ++s) {
    for (long v = 0; v <= s; ++v) {
      long want = static_cast<long>(std::floor(100.0L * v / s + 0.5L));
      ASSERT_EQ(percent(v, s), want) << v << "/" << s;
    }
  }
}

TEST(VersionBucket, Boundaries) {
  EXPECT_EQ(version_bucket(0), "unknown");
  EXPECT_EQ(version_bucket(1), "pre_v6");
  EXPECT_EQ(version_bucket(23), "pre_v6");
  EXPECT_EQ(version_bucket(24), "v7");
  EXPECT_EQ(version_bucket(25), "v7");
  EXPECT_EQ(version_bucket(26), "v8");
  EXPECT_EQ(version_bucket(27), "v8");
  EXPECT_EQ(version_bucket(28), "v9");
  EXPECT_EQ(version_bucket(29), "v10");
  EXPECT_EQ(version_bucket(30), "v11");
  EXPECT_EQ(version_bucket(31), "v12");
  EXPECT_EQ(version_bucket(32), "v12");
  EXPECT_EQ(version_bucket(33), "v13");
  EXPECT_EQ(version_bucket(34), "v14");
  EXPECT_EQ(version_bucket(35), "v15+");
  EXPECT_EQ(version_bucket(40), "v15+");
  for (int sdk = 0; sdk <= 40; ++sdk) {
    const auto& all = version_buckets();
    EXPECT_NE(std::find(all.begin(), all.end(), version_bucket(sdk)), all.end()) << sdk;
  }
}

TEST(Config, DefaultsRoundTrip) {
  std::string text = config_to_json(ScanConfig{});
  EXPECT_EQ(config_to_json(config_from_json(text)), text);
  EXPECT_EQ(config_to_json(config_from_json("{}")), text);
}

TEST(Config, OverridesApply) {
  ScanConfig c = config_from_json(R"({"threads": 3, "selinux": {"strict": true}})");
  EXPECT_EQ(c.threads, 3u);
  EXPECT_TRUE(c.access.strict);
  std::string text = config_to_json(c);
  EXPECT_EQ(config_to_json(config_from_json(text)), text);
}

TEST(Config, RejectsUnknownKeysAndTypes) {
  EXPECT_THROW(config_from_json(R"({"thread": 3})"), ConfigError);
  EXPECT_THROW(config_from_json(R"({"selinux": {"strictly": true}})"), ConfigError);
  EXPECT_THROW(config_from_json(R"({"threads": "many"})"), ConfigError);
  EXPECT_THROW(config_from_json("[1, 2]"), ConfigError);
  EXPECT_THROW(config_from_json("{"), ConfigError);
}
