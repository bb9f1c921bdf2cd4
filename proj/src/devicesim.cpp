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

#include "romid/devicesim.hpp"

#include <algorithm>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>

#include <json.hpp>

namespace romid::sim {

namespace {

using nlohmann::json;

bool is_wildcard(const std::string& pattern) { return !pattern.empty() && pattern.back() == '*'; }

const std::vector<std::string>& subject_types() {
  static const std::vector<std::string> kSubjects = {"untrusted_app", "system_app", "platform_app",
                                                     "radio", "priv_app"};
  return kSubjects;
}

std::set<std::string> members_of(const std::string& name,
                                 const std::map<std::string, std::set<std::string>>& closed) {
  if (auto it = closed.find(name); it != closed.end()) return it->second;
  return {name};
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw OracleError("cannot read " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

SettingNamespace ns_from_json(const json& j) {
  auto ns = parse_namespace(j.at("namespace").get<std::string>());
  if (!ns) throw OracleError("unknown settings namespace " + j.at("namespace").get<std::string>());
  return *ns;
}

}  // namespace

std::size_t brute_force_match(const std::vector<PropertyContextEntry>& entries,
                              const std::string& name) {
  for (std::size_t i = 0; i < entries.size(); ++i) {
    if (!is_wildcard(entries[i].pattern) && entries[i].pattern == name) return i;
  }
  std::size_t best = entries.size();
  std::size_t best_len = 0;
  for (std::size_t i = 0; i < entries.size(); ++i) {
    const std::string& p = entries[i].pattern;
    if (!is_wildcard(p)) continue;
    std::string stem = p.substr(0, p.size() - 1);
    if (name.compare(0, stem.size(), stem) != 0) continue;
    if (best == entries.size() || stem.size() > best_len) {
      best = i;
      best_len = stem.size();
    }
  }
  return best;
}

std::string matched_type(const std::vector<PropertyContextEntry>& entries, const std::string& name) {
  std::size_t i = brute_force_match(entries, name);
  return i == entries.size() ? "default_prop" : entries[i].type_name;
}

std::map<std::string, std::set<std::string>> close_sets(const PolicyModel& policy) {
  // Reject reference cycles up front; substitution would settle on a
  // fixpoint that the policy language does not define.
  std::function<bool(const std::string&, std::vector<std::string>&)> cyclic =
      [&](const std::string& s, std::vector<std::string>& path) {
        if (std::find(path.begin(), path.end(), s) != path.end()) return true;
        path.push_back(s);
        const AttributeSetDef& def = policy.sets.at(s);
        for (const auto* list : {&def.includes, &def.excludes}) {
          for (const auto& m : *list) {
            if (policy.sets.count(m) && cyclic(m, path)) return true;
          }
        }
        path.pop_back();
        return false;
      };
  for (const auto& [name, def] : policy.sets) {
    std::vector<std::string> path;
    if (cyclic(name, path)) throw OracleError("attribute set cycle through " + name);
  }

  std::map<std::string, std::set<std::string>> cur;
  for (const auto& [name, def] : policy.sets) cur[name] = {};
  auto round = [&](const std::map<std::string, std::set<std::string>>& prev) {
    std::map<std::string, std::set<std::string>> next;
    for (const auto& [name, def] : policy.sets) {
      std::set<std::string> in, out;
      for (const auto& m : def.includes) {
        if (policy.sets.count(m)) {
          in.insert(prev.at(m).begin(), prev.at(m).end());
        } else {
          in.insert(m);
        }
      }
      for (const auto& m : def.excludes) {
        if (policy.sets.count(m)) {
          out.insert(prev.at(m).begin(), prev.at(m).end());
        } else {
          out.insert(m);
        }
      }
      std::set<std::string> result;
      for (const auto& t : in) {
        if (!out.count(t)) result.insert(t);
      }
      next[name] = std::move(result);
    }
    return next;
  };
  for (std::size_t r = 0; r < policy.sets.size() + 1; ++r) cur = round(cur);
  if (round(cur) != cur) throw OracleError("attribute set closure did not settle");
  return cur;
}

std::set<Quad> expand_rules(const PolicyModel& policy) {
  auto closed = close_sets(policy);
  std::set<Quad> quads;
  for (const AllowRule& rule : policy.rules) {
    if (rule.never) continue;
    for (const auto& s : members_of(rule.source, closed)) {
      std::set<std::string> targets =
          rule.target == "self" ? std::set<std::string>{s} : members_of(rule.target, closed);
      for (const auto& t : targets) {
        for (const auto& p : rule.permissions) quads.emplace(s, t, rule.class_name, p);
      }
    }
  }
  return quads;
}

Simulator::Simulator(const SimDeviceSpec& spec) : spec_(spec), quads_(expand_rules(spec.policy)) {}

bool Simulator::property_read(const std::string& name, const std::string& subject) const {
  if (!spec_.properties.count(name)) throw OracleError("property not in device: " + name);
  std::string type = matched_type(spec_.contexts, name);
  return quads_.count({subject, type, "file", "read"}) != 0;
}

bool simulate_property_read(const SimDeviceSpec& spec, const std::string& name,
                            const std::string& subject) {
  return Simulator(spec).property_read(name, subject);
}

bool simulate_setting_read(const SimDeviceSpec& spec, SettingNamespace ns, const std::string& name) {
  if (!spec.settings.count({ns, name})) throw OracleError("setting not in device: " + name);
  const SettingDefinition* def = nullptr;
  for (const auto& d : spec.setting_defs) {
    if (d.ns == ns && d.name == name) {
      def = &d;
      break;
    }
  }
  for (SettingNamespace other : {SettingNamespace::System, SettingNamespace::Secure, SettingNamespace::Global}) {
    for (const auto& d : spec.setting_defs) {
      if (!def && d.ns == other && d.name == name) def = &d;
    }
  }
  if (!def) return true;
  // [android 12+][Readable][SystemApi]
  static constexpr bool kTable[2][2][2] = {
      {{true, false}, {true, false}},
      {{false, false}, {true, false}},
  };
  return kTable[spec.sdk_version >= 31][def->annotations.readable][def->annotations.system_api];
}

std::vector<std::string> reset_diff(const Snapshot& before, const Snapshot& after,
                                    std::size_t min_len) {
  if (before.label != SnapshotLabel::before_reset || after.label != SnapshotLabel::after_reset) {
    throw InvariantError("reset_diff expects (before-reset, after-reset) snapshots");
  }
  auto keep = [&](const std::string& a, const std::string& b) {
    return !a.empty() && a == b && a.size() >= min_len;
  };
  std::vector<std::string> out;
  for (const auto& [k, v] : before.properties) {
    auto it = after.properties.find(k);
    if (it != after.properties.end() && keep(v, it->second)) out.push_back("property:" + k);
  }
  for (const auto& [k, v] : before.settings) {
    auto it = after.settings.find(k);
    if (it != after.settings.end() && keep(v, it->second)) {
      out.push_back(std::string("setting:") + to_string(k.first) + ":" + k.second);
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

SimDeviceSpec generate_random_spec(std::uint64_t seed, const SpecLimits& limits) {
  std::mt19937_64 rng(seed);
  auto uniform = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };
  auto chance = [&](double p) { return std::bernoulli_distribution(p)(rng); };
  auto pick = [&](const std::vector<std::string>& v) -> const std::string& {
    return v[static_cast<std::size_t>(uniform(0, static_cast<int>(v.size()) - 1))];
  };

  SimDeviceSpec spec;
  static const int kSdks[] = {0, 23, 28, 29, 30, 31, 32, 33, 34};
  spec.sdk_version = kSdks[uniform(0, 8)];

  const std::vector<std::string>& subjects = subject_types();
  int type_count = uniform(static_cast<int>(subjects.size()) + 2, std::max(limits.max_types, 7));
  std::vector<std::string> prop_types = {"default_prop"};
  for (int i = 1; static_cast<int>(subjects.size() + prop_types.size()) < type_count; ++i) {
    prop_types.push_back("p" + std::to_string(i) + "_prop");
  }
  std::vector<std::string> all_types = subjects;
  all_types.insert(all_types.end(), prop_types.begin(), prop_types.end());
  PolicyModel& policy = spec.policy;
  policy.declared_types.insert(all_types.begin(), all_types.end());

  int set_count = uniform(0, limits.max_sets);
  std::vector<std::string> set_names;
  std::vector<int> level;
  for (int k = 0; k < set_count; ++k) {
    std::string name = k == 0 ? "appdomain" : "attr_" + std::to_string(k);
    int lvl = uniform(0, std::max(limits.max_depth - 1, 0));
    std::vector<std::string> lower;
    for (std::size_t j = 0; j < set_names.size(); ++j) {
      if (level[j] < lvl) lower.push_back(set_names[j]);
    }
    if (lower.empty()) lvl = 0;
    AttributeSetDef def;
    def.name = name;
    def.source = {"random.cil", static_cast<std::size_t>(k + 1)};
    auto member = [&]() -> std::string {
      if (!lower.empty() && chance(0.3)) return pick(lower);
      return chance(0.5) ? pick(subjects) : pick(prop_types);
    };
    for (int m = uniform(1, 6); m > 0; --m) def.includes.push_back(member());
    if (chance(0.3)) {
      for (int m = uniform(1, 2); m > 0; --m) def.excludes.push_back(member());
    }
    policy.sets[name] = std::move(def);
    set_names.push_back(name);
    level.push_back(lvl);
  }

  static const std::vector<std::string> kPerms = {"read", "getattr", "map", "open",
                                                  "write", "set", "ioctl"};
  int rule_count = uniform(0, limits.max_rules);
  for (int r = 0; r < rule_count; ++r) {
    AllowRule rule;
    double s = std::uniform_real_distribution<double>(0, 1)(rng);
    if (s < 0.5 || set_names.empty()) {
      rule.source = s < 0.85 || set_names.empty() ? pick(subjects) : pick(all_types);
    } else {
      rule.source = s < 0.85 ? pick(set_names) : pick(all_types);
    }
    double t = std::uniform_real_distribution<double>(0, 1)(rng);
    if (t < 0.6 || set_names.empty()) {
      rule.target = pick(prop_types);
    } else if (t < 0.9) {
      rule.target = pick(set_names);
    } else if (t < 0.95) {
      rule.target = "self";
    } else {
      rule.target = pick(subjects);
    }
    double c = std::uniform_real_distribution<double>(0, 1)(rng);
    rule.class_name = c < 0.8 ? "file" : (c < 0.95 ? "property_service" : "dir");
    if (chance(0.5)) rule.permissions.insert("read");
    for (const auto& p : kPerms) {
      if (chance(0.25)) rule.permissions.insert(p);
    }
    if (rule.permissions.empty()) rule.permissions.insert(pick(kPerms));
    rule.never = chance(0.05);
    rule.source_loc = {"random.cil", static_cast<std::size_t>(set_count + r + 1)};
    policy.rules.push_back(std::move(rule));
  }

  static const std::vector<std::string> kHeads = {"ro", "persist", "vendor", "sys", "oem", "boot"};
  static const std::vector<std::string> kMids = {"imei", "meid", "serial", "wifi", "bt",  "mac",
                                                 "iccid", "radio", "build", "hw",  "audio"};
  static const std::vector<std::string> kLeaves = {"1", "2", "id", "addr", "num", "value", "a"};
  int prop_count = uniform(1, std::max(limits.max_properties, 1));
  std::vector<std::string> names;
  for (int attempt = 0; static_cast<int>(names.size()) < prop_count && attempt < prop_count * 20;
       ++attempt) {
    std::string name = pick(kHeads) + "." + pick(kMids);
    for (int depth = uniform(0, 2); depth > 0; --depth) name += "." + pick(kLeaves);
    if (spec.properties.count(name)) continue;
    std::string value;
    for (int i = uniform(0, 16); i > 0; --i) value += static_cast<char>('a' + uniform(0, 25));
    spec.properties[name] = value;
    names.push_back(name);
  }

  auto entry_type = [&]() -> std::string {
    double x = std::uniform_real_distribution<double>(0, 1)(rng);
    if (x < 0.9) return pick(prop_types);
    if (x < 0.95) return pick(subjects);
    return "ghost_prop";
  };
  int ctx_count = uniform(0, static_cast<int>(names.size()) + 5);
  for (int i = 0; i < ctx_count; ++i) {
    PropertyContextEntry e;
    double k = std::uniform_real_distribution<double>(0, 1)(rng);
    const std::string& base = pick(names);
    if (k < 0.35) {
      e.pattern = base;
    } else if (k < 0.9) {
      e.pattern = base.substr(0, static_cast<std::size_t>(uniform(0, static_cast<int>(base.size())))) + "*";
    } else {
      e.pattern = "*";
    }
    e.user = "u";
    e.role = "object_r";
    e.type_name = entry_type();
    e.sensitivity = "s0";
    e.source = {"random_property_contexts", static_cast<std::size_t>(i + 1)};
    spec.contexts.push_back(std::move(e));
  }

  int setting_count = uniform(0, limits.max_settings);
  static const SettingNamespace kNs[] = {SettingNamespace::System, SettingNamespace::Secure,
                                         SettingNamespace::Global};
  for (int i = 0; i < setting_count; ++i) {
    std::string name = "setting_" + std::to_string(uniform(0, setting_count));
    SettingNamespace ns = kNs[uniform(0, 2)];
    spec.settings[{ns, name}] = "v" + std::to_string(uniform(0, 1 << 20));
    if (chance(0.7)) {
      SettingDefinition d;
      d.ns = chance(0.85) ? ns : kNs[uniform(0, 2)];
      d.name = name;
      d.field_name = "F_" + std::to_string(i);
      d.annotations.readable = chance(0.5);
      d.annotations.system_api = chance(0.5);
      spec.setting_defs.push_back(std::move(d));
    }
  }
  return spec;
}

std::vector<std::string> validate_spec(const SimDeviceSpec& spec, const SpecLimits& limits) {
  std::vector<std::string> problems;
  const PolicyModel& p = spec.policy;
  if (static_cast<int>(p.declared_types.size()) > limits.max_types) problems.push_back("too many types");
  if (static_cast<int>(p.sets.size()) > limits.max_sets) problems.push_back("too many sets");
  if (static_cast<int>(p.rules.size()) > limits.max_rules) problems.push_back("too many rules");
  if (static_cast<int>(spec.properties.size()) > limits.max_properties) {
    problems.push_back("too many properties");
  }
  for (const char* s : {"untrusted_app", "system_app"}) {
    if (!p.declared_types.count(s)) problems.push_back(std::string("missing subject ") + s);
  }
  std::map<std::string, int> depth;
  std::function<int(const std::string&, int)> depth_of = [&](const std::string& s, int guard) {
    if (guard > static_cast<int>(p.sets.size())) return 1 << 20;
    if (auto it = depth.find(s); it != depth.end()) return it->second;
    int d = 1;
    const AttributeSetDef& def = p.sets.at(s);
    for (const auto* list : {&def.includes, &def.excludes}) {
      for (const auto& m : *list) {
        if (p.sets.count(m)) d = std::max(d, 1 + depth_of(m, guard + 1));
      }
    }
    depth[s] = d;
    return d;
  };
  for (const auto& [name, def] : p.sets) {
    if (depth_of(name, 0) > limits.max_depth) problems.push_back("set nesting too deep or cyclic: " + name);
  }
  for (const auto& [name, value] : spec.properties) {
    std::size_t i = brute_force_match(spec.contexts, name);
    if (i > spec.contexts.size()) problems.push_back("no context for " + name);
  }
  return problems;
}

std::uint64_t structural_hash(const SimDeviceSpec& spec) {
  std::uint64_t h = 1469598103934665603ull;
  auto mix = [&](std::string_view s) {
    for (unsigned char c : s) {
      h ^= c;
      h *= 1099511628211ull;
    }
    h ^= 0xff;
    h *= 1099511628211ull;
  };
  mix(std::to_string(spec.sdk_version));
  mix(std::to_string(spec.policy.rules.size()));
  for (const auto& [k, v] : spec.properties) mix(k);
  for (const auto& e : spec.contexts) {
    mix(e.pattern);
    mix(e.type_name);
  }
  for (const auto& [name, def] : spec.policy.sets) {
    mix(name);
    for (const auto& m : def.includes) mix(m);
    for (const auto& m : def.excludes) mix("-" + m);
  }
  for (const auto& r : spec.policy.rules) {
    mix(r.source);
    mix(r.target);
    mix(r.class_name);
    for (const auto& perm : r.permissions) mix(perm);
    mix(r.never ? "never" : "allow");
  }
  for (const auto& [k, v] : spec.settings) mix(k.second);
  return h;
}

SimDeviceSpec spec_from_json_text(const std::string& text, const std::filesystem::path& base_dir) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw OracleError(std::string("device spec is not valid JSON: ") + e.what());
  }
  SimDeviceSpec spec;
  try {
    spec.sdk_version = j.value("sdk_version", 0);
    const json props = j.value("properties", json::object());
    for (const auto& [k, v] : props.items()) {
      spec.properties[k] = v.get<std::string>();
    }
    Diagnostics diags;
    std::string ctx_text;
    for (const auto& line : j.value("property_contexts", json::array())) {
      ctx_text += line.get<std::string>() + "\n";
    }
    spec.contexts = parse_property_contexts(ctx_text, "property_contexts", diags);
    for (const auto& f : j.value("property_contexts_files", json::array())) {
      auto path = base_dir / f.get<std::string>();
      auto more = parse_property_contexts(slurp(path), f.get<std::string>(), diags);
      spec.contexts.insert(spec.contexts.end(), more.begin(), more.end());
    }
    for (const auto& f : j.value("cil_files", json::array())) {
      spec.policy.merge(parse_cil(slurp(base_dir / f.get<std::string>()), f.get<std::string>()));
    }
    if (j.contains("cil")) spec.policy.merge(parse_cil(j["cil"].get<std::string>(), "inline.cil"));
    for (const auto& t : j.value("types", json::array())) spec.policy.declared_types.insert(t.get<std::string>());
    for (const auto& s : j.value("sets", json::array())) {
      AttributeSetDef def;
      def.name = s.at("name").get<std::string>();
      def.includes = s.value("includes", std::vector<std::string>{});
      def.excludes = s.value("excludes", std::vector<std::string>{});
      auto& slot = spec.policy.sets[def.name];
      if (slot.name.empty()) {
        slot = std::move(def);
      } else {
        slot.includes.insert(slot.includes.end(), def.includes.begin(), def.includes.end());
        slot.excludes.insert(slot.excludes.end(), def.excludes.begin(), def.excludes.end());
      }
    }
    for (const auto& r : j.value("rules", json::array())) {
      AllowRule rule;
      rule.source = r.at("source").get<std::string>();
      rule.target = r.at("target").get<std::string>();
      rule.class_name = r.value("class", std::string("file"));
      for (const auto& p : r.at("perms")) rule.permissions.insert(p.get<std::string>());
      rule.never = r.value("never", false);
      spec.policy.rules.push_back(std::move(rule));
    }
    for (const auto& s : j.value("settings", json::array())) {
      spec.settings[{ns_from_json(s), s.at("name").get<std::string>()}] = s.value("value", std::string());
    }
    for (const auto& d : j.value("setting_definitions", json::array())) {
      SettingDefinition def;
      def.ns = ns_from_json(d);
      def.name = d.at("name").get<std::string>();
      def.field_name = d.value("field", std::string());
      def.annotations.readable = d.value("readable", false);
      def.annotations.system_api = d.value("system_api", false);
      spec.setting_defs.push_back(std::move(def));
    }
  } catch (const json::exception& e) {
    throw OracleError(std::string("malformed device spec: ") + e.what());
  }
  return spec;
}

SimDeviceSpec load_spec(const std::filesystem::path& json_file) {
  return spec_from_json_text(slurp(json_file), json_file.parent_path());
}

Snapshot load_snapshot(const std::filesystem::path& json_file) {
  Snapshot snap;
  try {
    json j = json::parse(slurp(json_file));
    std::string label = j.at("label").get<std::string>();
    if (label == "before-reset") {
      snap.label = SnapshotLabel::before_reset;
    } else if (label == "after-reset") {
      snap.label = SnapshotLabel::after_reset;
    } else {
      throw OracleError("unknown snapshot label " + label);
    }
    const json props = j.value("properties", json::object());
    for (const auto& [k, v] : props.items()) {
      snap.properties[k] = v.get<std::string>();
    }
    for (const auto& s : j.value("settings", json::array())) {
      snap.settings[{ns_from_json(s), s.at("name").get<std::string>()}] = s.value("value", std::string());
    }
  } catch (const json::exception& e) {
    throw OracleError(std::string("malformed snapshot: ") + e.what());
  }
  return snap;
}

}  // namespace romid::sim
