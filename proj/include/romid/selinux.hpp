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

// property_contexts matching and CIL / rule-dump policy evaluation.

#pragma once

#include <map>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "romid/diagnostics.hpp"

namespace romid {

inline constexpr std::string_view kUntrustedApp = "untrusted_app";
inline constexpr std::string_view kDefaultContextPattern = "*";

struct SourceLoc {
  std::string file;
  std::size_t line = 0;  // 1-based; 0 for synthesized entries

  friend bool operator==(const SourceLoc&, const SourceLoc&) = default;
  friend auto operator<=>(const SourceLoc&, const SourceLoc&) = default;
};

struct PropertyContextEntry {
  std::string pattern;  // exact name, "prefix*", or "*"
  std::string user;
  std::string role;
  std::string type_name;
  std::string sensitivity;
  std::vector<std::string> categories;
  SourceLoc source;

  bool is_prefix() const { return !pattern.empty() && pattern.back() == '*'; }
  std::string_view prefix() const {
    return is_prefix() ? std::string_view(pattern).substr(0, pattern.size() - 1)
                       : std::string_view(pattern);
  }

  friend bool operator==(const PropertyContextEntry&, const PropertyContextEntry&) = default;
};

// Malformed lines and interior wildcards become diagnostics.
std::vector<PropertyContextEntry> parse_property_contexts(std::string_view text,
                                                          const std::string& file,
                                                          Diagnostics& diags);

// Appends "* u:object_r:default_prop:s0" when no entry has pattern "*".
void ensure_default_entry(std::vector<PropertyContextEntry>& entries);

// Prefix trie over context patterns. Entry order is source order: the vector
// passed in must already be ordered by (file, line).
class ContextMatcher {
 public:
  explicit ContextMatcher(std::vector<PropertyContextEntry> entries);

  // Exact match first, then the longest matching prefix, earliest on ties.
  // Entries must include a "*" pattern (see ensure_default_entry) or this
  // throws InvariantError for names no entry covers.
  const PropertyContextEntry& match(std::string_view name) const;
  std::size_t match_index(std::string_view name) const;
  const std::vector<PropertyContextEntry>& entries() const { return entries_; }

 private:
  struct Node {
    std::vector<std::pair<char, int>> children;  // sorted by char
    int entry = -1;                              // earliest prefix entry ending here
  };
  int child(int node, char c) const;

  std::vector<PropertyContextEntry> entries_;
  std::unordered_map<std::string, int> exact_;
  std::vector<Node> nodes_;
};

const PropertyContextEntry& match_context(std::string_view name, const ContextMatcher& matcher);

struct AttributeSetDef {
  std::string name;
  std::vector<std::string> includes;
  std::vector<std::string> excludes;
  bool expandable = true;
  bool expand_declared = false;  // an expandtypeattribute statement was seen
  SourceLoc source;
};

struct AllowRule {
  std::string source;
  std::string target;  // "self" allowed
  std::string class_name;
  std::set<std::string> permissions;
  bool never = false;
  SourceLoc source_loc;

  friend bool operator==(const AllowRule&, const AllowRule&) = default;
};

struct PolicyModel {
  std::vector<PropertyContextEntry> contexts;
  std::set<std::string> declared_types;
  std::map<std::string, AttributeSetDef> sets;
  std::vector<AllowRule> rules;
  Diagnostics diagnostics;

  // Filled by resolve_attribute_sets.
  bool resolved = false;
  std::map<std::string, std::set<std::string>> resolved_sets;
  std::set<std::string> known_types;
  // Concrete target type -> indices of non-never "file" rules covering it.
  std::unordered_map<std::string, std::vector<int>> file_rules_by_target;
  std::vector<int> self_file_rules;

  bool is_set(const std::string& name) const { return sets.count(name) != 0; }
  // {x} for a concrete type, resolved members for a set. Requires resolution.
  std::set<std::string> expand(const std::string& name) const;
  bool member(const std::string& type, const std::string& name) const;

  // Appends another partial model (later file order).
  void merge(PolicyModel&& other);
};

// Throws ParseError (byte offset) on unbalanced parentheses.
PolicyModel parse_cil(std::string_view text, const std::string& file);
// Normalized dump: "allow S T:CLASS { perms };", "neverallow ...",
// "typeattributeset NAME { a b -c };", "type NAME;", "attribute NAME;".
PolicyModel parse_rule_dump(std::string_view text, const std::string& file);

void resolve_attribute_sets(PolicyModel& model);

struct ReadAccess {
  bool readable = false;
  std::vector<int> witness_rules;  // indices into model.rules
  bool unknown_type = false;
};

struct AccessOptions {
  std::string subject = std::string(kUntrustedApp);
  // Require read, getattr, map and open (union over matching rules).
  bool strict = false;
};

ReadAccess evaluate_read_access(const std::string& target_type, const PolicyModel& model,
                                const AccessOptions& options = {}, Diagnostics* diags = nullptr);

enum class VulnCategory { default_context, explicit_allow, attribute_set_chain, not_vulnerable };
const char* to_string(VulnCategory c);

struct PropertyVerdict {
  std::string property_name;
  PropertyContextEntry matched_entry;
  std::string target_type;
  bool readable_by_untrusted = false;
  std::vector<AllowRule> witness_rules;
  VulnCategory category = VulnCategory::not_vulnerable;
};

PropertyVerdict verdict_for_property(const std::string& name, const PolicyModel& model,
                                     const ContextMatcher& matcher,
                                     const AccessOptions& options = {},
                                     Diagnostics* diags = nullptr);

struct NeverallowViolation {
  int allow_rule = 0;
  int neverallow_rule = 0;
  std::vector<std::string> sources;  // overlapping concrete types
  std::vector<std::string> targets;
  std::vector<std::string> permissions;
};

std::vector<NeverallowViolation> check_neverallow(const PolicyModel& model);

}  // namespace romid
