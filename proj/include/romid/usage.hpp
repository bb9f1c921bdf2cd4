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

// Detection of system property / settings access sites, name resolution and
// caller-chain context.

#pragma once

#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "romid/diagnostics.hpp"
#include "romid/ir.hpp"

namespace romid {

inline constexpr std::string_view kSystemProperties = "Landroid/os/SystemProperties;";
inline constexpr std::string_view kSystemPropertiesJava = "android.os.SystemProperties";

enum class AccessIdiom {
  direct_call,              // (a)
  reflection_inline,        // (b)
  reflection_static_field,  // (c)
  reflection_wrapper,       // (d)
  exec_getprop,
  settings_api,
};
const char* to_string(AccessIdiom idiom);

enum class UsageKind { property, setting };
const char* to_string(UsageKind kind);

enum class Operation { get, set, put };
const char* to_string(Operation op);

enum class SettingNamespace { System, Secure, Global };
const char* to_string(SettingNamespace ns);
std::optional<SettingNamespace> parse_namespace(std::string_view text);

struct NameFragment {
  bool hole = false;
  std::string text;  // empty for holes

  friend bool operator==(const NameFragment&, const NameFragment&) = default;
  friend auto operator<=>(const NameFragment&, const NameFragment&) = default;
};

struct NameResolution {
  enum class Status { resolved, partial, unresolved };

  Status status = Status::unresolved;
  std::string value;                     // resolved only
  std::vector<NameFragment> fragments;   // partial only
  std::string reason;                    // why resolution stopped short, if known

  static NameResolution make_resolved(std::string value);
  // Builds resolved/partial/unresolved from pieces; adjacent pieces merge.
  static NameResolution from_fragments(std::vector<NameFragment> pieces, std::string reason = {});
  static NameResolution make_unresolved(std::string reason);

  std::vector<std::string> literals() const;
  // "persist.sys.imei" or "ril.iccid.{?}" for partials, "{?}" for unresolved.
  std::string display() const;

  friend bool operator==(const NameResolution&, const NameResolution&) = default;
  friend auto operator<=>(const NameResolution&, const NameResolution&) = default;
};
const char* to_string(NameResolution::Status s);

// Position of an instruction in the corpus.
struct SiteRef {
  int class_index = -1;
  int method_index = -1;
  int instruction = -1;
  int node = -1;  // call-graph node of the enclosing method
  std::string class_name;
  MethodRef method;

  friend bool operator==(const SiteRef& a, const SiteRef& b) {
    return a.class_index == b.class_index && a.method_index == b.method_index &&
           a.instruction == b.instruction;
  }
};

enum class SiteCategory {
  api_invoke,         // SystemProperties, Settings, forName, Method.invoke, Runtime.exec
  reflective_field,   // field of type Class or Method read or written
  reflective_return,  // corpus method returning Class or Method
};
const char* to_string(SiteCategory c);

struct RawSite {
  SiteRef site;
  SiteCategory category = SiteCategory::api_invoke;
  std::string target;  // method or field key

  // True for sites that can carry a property or setting name themselves.
  bool is_access_point() const;
};

struct Usage {
  UsageKind kind = UsageKind::property;
  SiteRef site;
  AccessIdiom idiom = AccessIdiom::direct_call;
  Operation operation = Operation::get;
  std::optional<SettingNamespace> ns;  // settings only
  NameResolution name;
  std::string api;  // e.g. "android.os.SystemProperties.get"
  // Caller-first chains of method keys, each ending at the site method.
  std::vector<std::vector<std::string>> call_chains;
  std::string source_path;
};

struct UsageConfig {
  int depth_limit = 5;   // caller backtracking and parameter resolution
  int path_limit = 8;    // acyclic intra-procedural paths enumerated per query
  int max_chains = 64;   // per site
  int max_alternatives = 64;
  unsigned threads = 1;
};

// Immutable analysis input: parsed classes plus the call graph over them.
struct Corpus {
  std::vector<IrClass> classes;
  CallGraph graph;
  std::unordered_map<std::string, std::vector<int>> class_by_name;

  // Class with `name`, preferring `unit`.
  const IrClass* find_class(std::string_view name, int unit = -1) const;
  int find_class_index(std::string_view name, int unit = -1) const;
  const IrMethod& method_of(int node) const;
  const IrClass& class_of(int node) const;
};

Corpus make_corpus(std::vector<IrClass> classes);

std::vector<RawSite> detect_access_sites(const Corpus& corpus);

// Idiom of an access-point site, or nullopt plus a diagnostic when the site is
// not a property/setting access.
std::optional<AccessIdiom> classify_idiom(const RawSite& site, const Corpus& corpus,
                                          const UsageConfig& config, Diagnostics& diags);

// All names reaching the site's name argument. One entry per distinct value.
std::vector<NameResolution> resolve_name(const RawSite& site, const Corpus& corpus,
                                         const UsageConfig& config);

// Caller-first chains ending at `node`, cut at revisits and depth_limit.
std::vector<std::vector<int>> backtrack_context(const CallGraph& graph, int node,
                                                const UsageConfig& config);

// Full pipeline: detect, classify, resolve, attach context. Output sorted by
// (source path, class, method, instruction, name) and identical for any
// thread count.
std::vector<Usage> extract_usages(const Corpus& corpus, const UsageConfig& config,
                                  Diagnostics& diags);

}  // namespace romid
