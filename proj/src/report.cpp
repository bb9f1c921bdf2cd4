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

#include "romid/report.hpp"

#include <algorithm>
#include <sstream>

#include <json.hpp>

#include "romid/parallel.hpp"

namespace romid {

namespace {

using nlohmann::json;

std::vector<fs::path> smali_files(const fs::path& unit) {
  std::vector<fs::path> out;
  std::error_code ec;
  for (fs::recursive_directory_iterator it(unit, fs::directory_options::skip_permission_denied, ec), end;
       !ec && it != end; it.increment(ec)) {
    if (it->is_regular_file(ec) && it->path().extension() == ".smali") out.push_back(it->path());
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::string loc_text(const SourceLoc& loc) {
  return loc.line ? loc.file + ":" + std::to_string(loc.line) : loc.file;
}

std::string rule_text(const AllowRule& r) {
  std::string perms;
  for (const auto& p : r.permissions) perms += (perms.empty() ? "" : " ") + p;
  return std::string(r.never ? "neverallow " : "allow ") + r.source + " " + r.target + " (" +
         r.class_name + " (" + perms + "))";
}

json rule_json(const AllowRule& r) {
  return {{"rule", rule_text(r)}, {"source", loc_text(r.source_loc)}};
}

json usage_json(const Usage& u) {
  json j = {{"kind", to_string(u.kind)},
            {"idiom", to_string(u.idiom)},
            {"operation", to_string(u.operation)},
            {"name", u.name.display()},
            {"name_status", to_string(u.name.status)},
            {"api", u.api},
            {"class", u.site.class_name},
            {"method", u.site.method.key()},
            {"instruction", u.site.instruction},
            {"source_path", u.source_path},
            {"call_chains", u.call_chains}};
  if (!u.name.reason.empty()) j["name_reason"] = u.name.reason;
  if (u.ns) j["namespace"] = to_string(*u.ns);
  return j;
}

json candidate_json(const SensitiveCandidate& c) {
  json j = usage_json(c.usage);
  j["identifier"] = to_string(c.identifier);
  json ev = json::array();
  for (auto e : c.evidence) ev.push_back(to_string(e));
  j["evidence"] = ev;
  j["matched_keyword"] = c.matched_keyword;
  j["string_locations"] = c.string_locations;
  return j;
}

json site_json(const Usage& u) {
  return {{"class", u.site.class_name}, {"method", u.site.method.key()}, {"instruction", u.site.instruction}};
}

json diag_json(const Diagnostic& d) {
  return {{"severity", to_string(d.severity)}, {"code", d.code}, {"message", d.message}, {"location", d.location}};
}

json optional_path(const RomDescriptor& d, const std::optional<fs::path>& p) {
  return p ? json(d.relative_path(*p)) : json(nullptr);
}

json paths_json(const RomDescriptor& d, const std::vector<fs::path>& ps) {
  json out = json::array();
  for (const auto& p : ps) out.push_back(d.relative_path(p));
  return out;
}

void add_diag(RomFindings& f, Severity s, std::string code, std::string msg, std::string loc) {
  f.diagnostics.push_back({s, std::move(code), std::move(msg), std::move(loc)});
}

}  // namespace

RomFindings scan(const fs::path& rom_root, const std::string& brand, const std::string& model,
                 const ScanConfig& config, const ScanOptions& options) {
  RomFindings f;
  f.descriptor = classify_rom(rom_root, brand, model);
  RomDescriptor& d = f.descriptor;
  if (options.sdk_override) d.sdk_version = *options.sdk_override;
  if (d.sdk_version == 0) add_diag(f, Severity::warning, "unknown-sdk", "no ro.build.version.sdk found", "");

  // Classes, in (unit, path) order.
  struct Job {
    int unit;
    fs::path file;
  };
  std::vector<Job> jobs;
  int framework_unit = -1;
  for (std::size_t u = 0; u < d.code_units.size(); ++u) {
    if (d.framework_unit && *d.framework_unit == d.code_units[u]) framework_unit = static_cast<int>(u);
    for (auto& p : smali_files(d.code_units[u])) jobs.push_back({static_cast<int>(u), std::move(p)});
  }
  std::vector<std::optional<IrClass>> parsed(jobs.size());
  std::vector<std::optional<Diagnostic>> errors(jobs.size());
  parallel_for(jobs.size(), config.threads, [&](std::size_t i) {
    std::string rel = d.relative_path(jobs[i].file);
    try {
      IrClass c = parse_class(read_file(jobs[i].file), rel);
      c.unit = jobs[i].unit;
      parsed[i] = std::move(c);
    } catch (const ParseError& e) {
      errors[i] = Diagnostic{Severity::error, "smali-parse-error", e.what(),
                             rel + ":" + std::to_string(e.position())};
    } catch (const IngestError& e) {
      errors[i] = Diagnostic{Severity::error, "unreadable-file", e.what(), rel};
    }
  });
  std::vector<IrClass> classes;
  for (std::size_t i = 0; i < jobs.size(); ++i) {
    if (parsed[i]) classes.push_back(std::move(*parsed[i]));
    if (errors[i]) {
      f.diagnostics.push_back(*errors[i]);
      f.partial = true;
    }
  }
  Corpus corpus = make_corpus(std::move(classes));

  // Settings definitions come from the framework unit only.
  Diagnostics setting_diags;
  SettingDefinitions defs;
  if (framework_unit >= 0) {
    std::vector<IrClass> fw;
    for (const auto& c : corpus.classes) {
      if (c.unit == framework_unit) fw.push_back(c);
    }
    defs = SettingDefinitions(extract_setting_definitions(fw, setting_diags), true);
  } else {
    add_diag(f, Severity::warning, "no-framework-unit",
             "no framework code unit; setting verdicts are low confidence", "");
  }
  f.diagnostics.insert(f.diagnostics.end(), setting_diags.begin(), setting_diags.end());

  // Policy.
  std::vector<PropertyContextEntry> contexts;
  for (const auto& p : d.context_files) {
    std::string rel = d.relative_path(p);
    try {
      auto entries = parse_property_contexts(read_file(p), rel, f.diagnostics);
      contexts.insert(contexts.end(), entries.begin(), entries.end());
    } catch (const IngestError& e) {
      add_diag(f, Severity::error, "unreadable-file", e.what(), rel);
      f.partial = true;
    }
  }
  ensure_default_entry(contexts);
  PolicyModel policy;
  for (const auto& p : d.policy_files) {
    std::string rel = d.relative_path(p);
    try {
      std::string text = read_file(p);
      policy.merge(p.extension() == ".cil" ? parse_cil(text, rel) : parse_rule_dump(text, rel));
    } catch (const ParseError& e) {
      add_diag(f, Severity::error, "policy-parse-error", e.what(), rel);
      f.partial = true;
    } catch (const IngestError& e) {
      add_diag(f, Severity::error, "unreadable-file", e.what(), rel);
      f.partial = true;
    }
  }
  policy.contexts = contexts;
  resolve_attribute_sets(policy);
  f.diagnostics.insert(f.diagnostics.end(), policy.diagnostics.begin(), policy.diagnostics.end());
  f.neverallow_violations = check_neverallow(policy);
  f.policy_rules = policy.rules;
  ContextMatcher matcher(contexts);

  // Usages and candidates.
  UsageConfig ucfg = config.usage;
  ucfg.threads = config.threads;
  f.usages = extract_usages(corpus, ucfg, f.diagnostics);
  auto candidates = keyword_filter(f.usages, config.keywords);
  StringIndex index;
  try {
    index = build_string_index(d, config.ingest, config.threads);
  } catch (const IngestError& e) {
    add_diag(f, Severity::error, "unreadable-file", e.what(), e.path());
    f.partial = true;
  }
  FilterResult corroborated = corroborate(std::move(candidates), index, config.corroboration);
  FilterResult spoof = brand_spoof_filter(std::move(corroborated.retained), brand, config.brand_markers);
  f.demoted = std::move(corroborated.demoted);
  f.demoted.insert(f.demoted.end(), spoof.demoted.begin(), spoof.demoted.end());

  std::vector<SensitiveCandidate> property_reads;
  for (auto& c : spoof.retained) {
    const Usage& u = c.usage;
    if (u.kind == UsageKind::property) {
      if (u.operation == Operation::get) {
        PropertyVerdict v = verdict_for_property(u.name.display(), policy, matcher, config.access,
                                                 &f.diagnostics);
        property_reads.push_back(c);
        f.property_findings.push_back({std::move(c), std::move(v)});
      } else {
        f.property_writes.push_back(std::move(c));
      }
    } else if (u.operation == Operation::get) {
      SettingVerdict v = readability_verdict(u.ns.value_or(SettingNamespace::System), u.name.display(),
                                             defs, d.sdk_version, nullptr);
      f.setting_findings.push_back({std::move(c), std::move(v)});
    } else {
      f.setting_writes.push_back(std::move(c));
    }
  }
  if (d.sdk_version == 0 && !f.setting_findings.empty()) {
    add_diag(f, Severity::warning, "unknown-sdk-settings",
             "setting verdicts evaluated under pre-Android-12 rules", "");
  }

  f.service_channels = find_service_channels(corpus, property_reads, f.diagnostics, config.service,
                                             config.threads);
  return f;
}

std::string findings_to_json(const RomFindings& f) {
  const RomDescriptor& d = f.descriptor;
  json j;
  j["schema_version"] = kSchemaVersion;
  j["partial"] = f.partial;
  j["descriptor"] = {{"root", d.root_path.filename().string()},
                     {"brand", d.brand},
                     {"model", d.model},
                     {"sdk_version", d.sdk_version},
                     {"code_units", paths_json(d, d.code_units)},
                     {"context_files", paths_json(d, d.context_files)},
                     {"policy_files", paths_json(d, d.policy_files)},
                     {"framework_unit", optional_path(d, d.framework_unit)},
                     {"build_prop", optional_path(d, d.build_prop_path)},
                     {"other_file_count", d.other_files.size()}};

  json props = json::array();
  for (const auto& pf : f.property_findings) {
    json c = candidate_json(pf.candidate);
    const PropertyVerdict& v = pf.verdict;
    json witnesses = json::array();
    for (const auto& r : v.witness_rules) witnesses.push_back(rule_json(r));
    c["verdict"] = {{"matched_pattern", v.matched_entry.pattern},
                    {"context_source", loc_text(v.matched_entry.source)},
                    {"target_type", v.target_type},
                    {"readable_by_untrusted", v.readable_by_untrusted},
                    {"category", to_string(v.category)},
                    {"witness_rules", witnesses}};
    props.push_back(std::move(c));
  }
  j["property_findings"] = props;

  json writes = json::array();
  for (const auto& c : f.property_writes) writes.push_back(candidate_json(c));
  j["property_writes"] = writes;

  json settings = json::array();
  for (const auto& sf : f.setting_findings) {
    json c = candidate_json(sf.candidate);
    const SettingVerdict& v = sf.verdict;
    c["verdict"] = {{"defined", v.defined},
                    {"readable_annotation", v.annotations.readable},
                    {"system_api_annotation", v.annotations.system_api},
                    {"sdk_version", v.sdk_version},
                    {"readable_by_third_party", v.readable_by_third_party},
                    {"reason", to_string(v.reason)},
                    {"low_confidence", v.low_confidence}};
    settings.push_back(std::move(c));
  }
  j["setting_findings"] = settings;

  json swrites = json::array();
  for (const auto& c : f.setting_writes) swrites.push_back(candidate_json(c));
  j["setting_writes"] = swrites;

  json channels = json::array();
  for (const auto& s : f.service_channels) {
    const Usage& u = f.property_findings.at(s.candidate_index).candidate.usage;
    channels.push_back({{"service_class", s.service_class},
                        {"method", s.method.key()},
                        {"property_name", s.property_name},
                        {"flow_kind", to_string(s.flow_kind)},
                        {"public", s.is_public},
                        {"permission_check_seen", s.permission_check_seen},
                        {"candidate_site", site_json(u)},
                        {"note", kServiceChannelNote}});
  }
  j["service_channels"] = channels;

  json demoted = json::array();
  for (const auto& dc : f.demoted) {
    json c = candidate_json(dc.candidate);
    c["demotion_reason"] = dc.reason;
    demoted.push_back(std::move(c));
  }
  j["demoted"] = demoted;

  json violations = json::array();
  for (const auto& v : f.neverallow_violations) {
    violations.push_back({{"allow", rule_json(f.policy_rules.at(v.allow_rule))},
                          {"neverallow", rule_json(f.policy_rules.at(v.neverallow_rule))},
                          {"sources", v.sources},
                          {"targets", v.targets},
                          {"permissions", v.permissions}});
  }
  j["neverallow_violations"] = violations;

  json diags = json::array();
  for (const auto& dg : f.diagnostics) diags.push_back(diag_json(dg));
  j["diagnostics"] = diags;
  return j.dump(2) + "\n";
}

std::string usages_to_jsonl(const RomFindings& f) {
  std::string out;
  for (const auto& u : f.usages) out += usage_json(u).dump() + "\n";
  return out;
}

const std::vector<std::string>& version_buckets() {
  static const std::vector<std::string> kBuckets = {"pre_v6", "v7",  "v8",  "v9",   "v10",    "v11",
                                                    "v12",    "v13", "v14", "v15+", "unknown"};
  return kBuckets;
}

std::string version_bucket(int sdk) {
  if (sdk <= 0) return "unknown";
  if (sdk <= 23) return "pre_v6";
  if (sdk <= 25) return "v7";
  if (sdk <= 27) return "v8";
  if (sdk == 28) return "v9";
  if (sdk == 29) return "v10";
  if (sdk == 30) return "v11";
  if (sdk <= 32) return "v12";
  if (sdk == 33) return "v13";
  if (sdk == 34) return "v14";
  return "v15+";
}

Counts& Counts::operator+=(const Counts& o) {
  devices += o.devices;
  sensitive_properties += o.sensitive_properties;
  vulnerable_properties += o.vulnerable_properties;
  sensitive_settings += o.sensitive_settings;
  vulnerable_settings += o.vulnerable_settings;
  sensitive_devices += o.sensitive_devices;
  vulnerable_devices += o.vulnerable_devices;
  return *this;
}

namespace {

std::map<std::string, std::map<std::string, std::set<std::string>>> recurrences(
    const std::map<std::string, std::set<DeviceId>>& occ) {
  std::map<std::string, std::map<std::string, std::set<std::string>>> out;
  for (const auto& [name, devices] : occ) {
    std::map<std::string, std::set<std::string>> by_brand;
    for (const auto& [brand, model] : devices) by_brand[brand].insert(model);
    for (auto& [brand, models] : by_brand) {
      if (models.size() >= 2) out[name][brand] = models;
    }
  }
  return out;
}

json counts_json(const Counts& c) {
  return {{"devices", c.devices},
          {"sensitive_properties", c.sensitive_properties},
          {"vulnerable_properties", c.vulnerable_properties},
          {"sensitive_settings", c.sensitive_settings},
          {"vulnerable_settings", c.vulnerable_settings},
          {"sensitive_devices", c.sensitive_devices},
          {"vulnerable_devices", c.vulnerable_devices}};
}

Counts counts_from_json(const json& j) {
  Counts c;
  c.devices = j.at("devices").get<long>();
  c.sensitive_properties = j.at("sensitive_properties").get<long>();
  c.vulnerable_properties = j.at("vulnerable_properties").get<long>();
  c.sensitive_settings = j.at("sensitive_settings").get<long>();
  c.vulnerable_settings = j.at("vulnerable_settings").get<long>();
  c.sensitive_devices = j.at("sensitive_devices").get<long>();
  c.vulnerable_devices = j.at("vulnerable_devices").get<long>();
  return c;
}

json occurrences_json(const std::map<std::string, std::set<DeviceId>>& occ) {
  json out = json::object();
  for (const auto& [name, devices] : occ) {
    json list = json::array();
    for (const auto& [b, m] : devices) list.push_back({b, m});
    out[name] = list;
  }
  return out;
}

std::map<std::string, std::set<DeviceId>> occurrences_from_json(const json& j) {
  std::map<std::string, std::set<DeviceId>> out;
  for (const auto& [name, list] : j.items()) {
    for (const auto& pair : list) out[name].emplace(pair.at(0).get<std::string>(), pair.at(1).get<std::string>());
  }
  return out;
}

json recurrences_json(const std::map<std::string, std::map<std::string, std::set<std::string>>>& rec) {
  json out = json::object();
  for (const auto& [name, brands] : rec) {
    for (const auto& [brand, models] : brands) out[name][brand] = models;
  }
  return out;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

}  // namespace

std::map<std::string, std::map<std::string, std::set<std::string>>> CorpusAggregate::property_recurrences() const {
  return recurrences(property_occurrences);
}

std::map<std::string, std::map<std::string, std::set<std::string>>> CorpusAggregate::setting_recurrences() const {
  return recurrences(setting_occurrences);
}

void CorpusAggregate::merge(const CorpusAggregate& o) {
  totals += o.totals;
  for (const auto& [k, v] : o.per_brand) per_brand[k] += v;
  for (const auto& [k, v] : o.per_version) per_version[k] += v;
  for (const auto& [b, m] : o.brand_versions) {
    for (const auto& [k, n] : m) brand_versions[b][k] += n;
  }
  unique_properties.insert(o.unique_properties.begin(), o.unique_properties.end());
  unique_settings.insert(o.unique_settings.begin(), o.unique_settings.end());
  for (const auto& [k, v] : o.property_occurrences) property_occurrences[k].insert(v.begin(), v.end());
  for (const auto& [k, v] : o.setting_occurrences) setting_occurrences[k].insert(v.begin(), v.end());
}

CorpusAggregate aggregate_one(const std::string& findings_json) {
  json j;
  try {
    j = json::parse(findings_json);
  } catch (const json::exception& e) {
    throw SchemaError(std::string("findings file is not valid JSON: ") + e.what());
  }
  CorpusAggregate agg;
  try {
    int version = j.at("schema_version").get<int>();
    if (version != kSchemaVersion) {
      throw SchemaError("findings schema_version " + std::to_string(version) + " is not supported (expected " +
                        std::to_string(kSchemaVersion) + ")");
    }
    const json& d = j.at("descriptor");
    std::string brand = d.at("brand").get<std::string>();
    std::string model = d.at("model").get<std::string>();
    int sdk = d.at("sdk_version").get<int>();

    // Distinct names per ROM; a name is vulnerable if any of its sites is.
    std::map<std::string, bool> props, settings;
    for (const auto& p : j.at("property_findings")) {
      bool& v = props[p.at("name").get<std::string>()];
      v = v || p.at("verdict").at("readable_by_untrusted").get<bool>();
    }
    for (const auto& s : j.at("setting_findings")) {
      bool& v = settings[s.at("name").get<std::string>()];
      v = v || s.at("verdict").at("readable_by_third_party").get<bool>();
    }
    Counts c;
    c.devices = 1;
    for (const auto& [name, vuln] : props) {
      ++c.sensitive_properties;
      agg.unique_properties.insert(name);
      if (vuln) {
        ++c.vulnerable_properties;
        agg.property_occurrences[name].emplace(brand, model);
      }
    }
    for (const auto& [name, vuln] : settings) {
      ++c.sensitive_settings;
      agg.unique_settings.insert(name);
      if (vuln) {
        ++c.vulnerable_settings;
        agg.setting_occurrences[name].emplace(brand, model);
      }
    }
    c.sensitive_devices = (c.sensitive_properties + c.sensitive_settings) > 0;
    c.vulnerable_devices = (c.vulnerable_properties + c.vulnerable_settings) > 0;
    agg.totals = c;
    agg.per_brand[brand] = c;
    std::string bucket = version_bucket(sdk);
    agg.per_version[bucket] = c;
    agg.brand_versions[brand][bucket] = 1;
  } catch (const json::exception& e) {
    throw SchemaError(std::string("malformed findings file: ") + e.what());
  }
  return agg;
}

CorpusAggregate aggregate(const std::vector<fs::path>& files) {
  CorpusAggregate agg;
  for (const auto& f : files) {
    std::string text;
    try {
      text = read_file(f);
    } catch (const IngestError& e) {
      throw SchemaError(e.what());
    }
    try {
      agg.merge(aggregate_one(text));
    } catch (const SchemaError& e) {
      throw SchemaError(f.string() + ": " + e.what());
    }
  }
  return agg;
}

std::string aggregate_to_json(const CorpusAggregate& agg) {
  json j;
  j["schema_version"] = kSchemaVersion;
  j["totals"] = counts_json(agg.totals);
  json brands = json::object();
  for (const auto& [b, c] : agg.per_brand) {
    json e = counts_json(c);
    json versions = json::object();
    if (auto it = agg.brand_versions.find(b); it != agg.brand_versions.end()) {
      for (const auto& [k, n] : it->second) versions[k] = n;
    }
    e["versions"] = versions;
    brands[b] = e;
  }
  j["per_brand"] = brands;
  json versions = json::object();
  for (const auto& [k, c] : agg.per_version) versions[k] = counts_json(c);
  j["per_version"] = versions;
  j["unique_properties"] = agg.unique_properties;
  j["unique_settings"] = agg.unique_settings;
  j["property_occurrences"] = occurrences_json(agg.property_occurrences);
  j["setting_occurrences"] = occurrences_json(agg.setting_occurrences);
  j["property_recurrences"] = recurrences_json(agg.property_recurrences());
  j["setting_recurrences"] = recurrences_json(agg.setting_recurrences());
  return j.dump(2) + "\n";
}

CorpusAggregate aggregate_from_json(const std::string& text) {
  CorpusAggregate agg;
  try {
    json j = json::parse(text);
    if (j.at("schema_version").get<int>() != kSchemaVersion) throw SchemaError("unsupported aggregate schema_version");
    agg.totals = counts_from_json(j.at("totals"));
    for (const auto& [b, e] : j.at("per_brand").items()) {
      agg.per_brand[b] = counts_from_json(e);
      const json versions = e.value("versions", json::object());
      for (const auto& [k, n] : versions.items()) agg.brand_versions[b][k] = n.get<long>();
    }
    for (const auto& [k, e] : j.at("per_version").items()) agg.per_version[k] = counts_from_json(e);
    agg.unique_properties = j.at("unique_properties").get<std::set<std::string>>();
    agg.unique_settings = j.at("unique_settings").get<std::set<std::string>>();
    agg.property_occurrences = occurrences_from_json(j.at("property_occurrences"));
    agg.setting_occurrences = occurrences_from_json(j.at("setting_occurrences"));
  } catch (const json::exception& e) {
    throw SchemaError(std::string("malformed aggregate: ") + e.what());
  }
  return agg;
}

long percent(long vulnerable, long sensitive) {
  if (sensitive <= 0) return 0;
  return (200 * vulnerable + sensitive) / (2 * sensitive);
}

std::string aggregate_to_csv(const CorpusAggregate& agg) {
  static const char* kVersionHeaders[] = {"Pre-v6", "v7",  "v8",  "v9",   "v10",    "v11",
                                          "v12",    "v13", "v14", "v15+", "Unknown"};
  std::ostringstream out;
  out << "Brand,Devices";
  for (const char* h : kVersionHeaders) out << ',' << h;
  out << ",Sensitive Devices,Vulnerable Devices,Sensitive Properties,Vulnerable Properties,"
         "Vulnerable Properties (%),Sensitive Settings,Vulnerable Settings,Vulnerable Settings (%)\n";
  auto row = [&](const std::string& label, const Counts& c, const std::map<std::string, long>& versions) {
    out << csv_field(label) << ',' << c.devices;
    for (const auto& b : version_buckets()) {
      auto it = versions.find(b);
      out << ',' << (it == versions.end() ? 0 : it->second);
    }
    out << ',' << c.sensitive_devices << ',' << c.vulnerable_devices << ',' << c.sensitive_properties << ','
        << c.vulnerable_properties << ',' << percent(c.vulnerable_properties, c.sensitive_properties) << ','
        << c.sensitive_settings << ',' << c.vulnerable_settings << ','
        << percent(c.vulnerable_settings, c.sensitive_settings) << '\n';
  };
  for (const auto& [b, c] : agg.per_brand) {
    auto it = agg.brand_versions.find(b);
    row(b, c, it == agg.brand_versions.end() ? std::map<std::string, long>{} : it->second);
  }
  std::map<std::string, long> total_versions;
  for (const auto& [k, c] : agg.per_version) total_versions[k] = c.devices;
  row("Total", agg.totals, total_versions);
  return out.str();
}

}  // namespace romid
