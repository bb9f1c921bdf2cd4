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

#include "romid/selinux.hpp"

#include <algorithm>
#include <optional>
#include <functional>

namespace romid {

namespace {

std::string_view trim(std::string_view s) {
  auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    auto pos = s.find(sep, start);
    out.emplace_back(s.substr(start, pos == std::string_view::npos ? std::string_view::npos
                                                                     : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

std::vector<std::string_view> split_ws(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && (s[i] == ' ' || s[i] == '\t' || s[i] == '\r')) ++i;
    if (i >= s.size()) break;
    std::size_t j = i;
    while (j < s.size() && s[j] != ' ' && s[j] != '\t' && s[j] != '\r') ++j;
    out.push_back(s.substr(i, j - i));
    i = j;
  }
  return out;
}

std::string loc_text(const SourceLoc& loc) {
  return loc.line ? loc.file + ":" + std::to_string(loc.line) : loc.file;
}

const std::set<std::string>& read_quad() {
  static const std::set<std::string> q = {"getattr", "map", "open", "read"};
  return q;
}

// ---------------------------------------------------------------------------
// S-expressions

struct SExpr {
  bool atom = true;
  std::string text;
  std::vector<SExpr> items;
  std::size_t offset = 0;

  bool is_form(std::string_view head) const {
    return !atom && !items.empty() && items[0].atom && items[0].text == head;
  }
};

std::vector<SExpr> parse_sexprs(std::string_view text) {
  std::vector<SExpr> top;
  std::vector<SExpr> stack;
  std::size_t i = 0;
  auto emit = [&](SExpr e) {
    if (stack.empty()) {
      top.push_back(std::move(e));
    } else {
      stack.back().items.push_back(std::move(e));
    }
  };
  while (i < text.size()) {
    char c = text[i];
    if (c == ' ' || c == '\t' || c == '\n' || c == '\r') {
      ++i;
    } else if (c == ';') {
      while (i < text.size() && text[i] != '\n') ++i;
    } else if (c == '(') {
      SExpr e;
      e.atom = false;
      e.offset = i++;
      stack.push_back(std::move(e));
    } else if (c == ')') {
      if (stack.empty()) throw ParseError("unbalanced ')'", i, ParseError::Unit::byte);
      SExpr e = std::move(stack.back());
      stack.pop_back();
      emit(std::move(e));
      ++i;
    } else if (c == '"') {
      std::size_t start = i++;
      while (i < text.size() && text[i] != '"') ++i;
      if (i >= text.size()) throw ParseError("unterminated string", start, ParseError::Unit::byte);
      SExpr e;
      e.text = std::string(text.substr(start + 1, i - start - 1));
      e.offset = start;
      ++i;
      emit(std::move(e));
    } else {
      std::size_t start = i;
      while (i < text.size() && std::string_view(" \t\r\n();\"").find(text[i]) == std::string_view::npos) {
        ++i;
      }
      SExpr e;
      e.text = std::string(text.substr(start, i - start));
      e.offset = start;
      emit(std::move(e));
    }
  }
  if (!stack.empty()) {
    throw ParseError("unbalanced '('", stack.back().offset, ParseError::Unit::byte);
  }
  return top;
}

class LineIndex {
 public:
  explicit LineIndex(std::string_view text) {
    starts_.push_back(0);
    for (std::size_t i = 0; i < text.size(); ++i) {
      if (text[i] == '\n') starts_.push_back(i + 1);
    }
  }
  std::size_t line_of(std::size_t offset) const {
    return static_cast<std::size_t>(std::upper_bound(starts_.begin(), starts_.end(), offset) -
                                    starts_.begin());
  }

 private:
  std::vector<std::size_t> starts_;
};

// Forms that carry nothing this analysis needs.
bool ignored_cil_form(std::string_view head) {
  static const std::set<std::string, std::less<>> kIgnored = {
      "auditallow", "dontaudit", "allowx", "auditallowx", "dontauditx", "neverallowx",
      "typetransition", "typemember", "typechange", "typealias", "typealiasactual",
      "typepermissive", "role", "roletype", "roleattribute", "roleattributeset", "roleallow",
      "roletransition", "attribute", "class", "classorder", "common", "classcommon",
      "classpermission", "classpermissionset", "classmap", "classmapping", "sid", "sidorder",
      "sidcontext", "handleunknown", "mls", "sensitivity", "sensitivityorder",
      "sensitivitycategory", "sensitivityaliasactual", "category", "categoryorder", "level",
      "levelrange", "user", "userrole", "userlevel", "userrange", "userattribute",
      "userattributeset", "selinuxuser", "selinuxuserdefault", "userprefix", "filecon",
      "genfscon", "portcon", "netifcon", "nodecon", "fsuse", "ibpkeycon", "ibendportcon",
      "policycap", "boolean", "booleanif", "tunable", "tunableif", "constrain",
      "mlsconstrain", "validatetrans", "mlsvalidatetrans", "defaultuser", "defaultrole",
      "defaulttype", "defaultrange", "context", "ipaddr", "macro", "call", "blockinherit",
      "blockabstract", "ioportcon", "iomemcon", "pcidevicecon", "pirqcon", "devicetreecon",
      "rangetransition"};
  return kIgnored.count(head) != 0;
}

struct CilReader {
  PolicyModel& model;
  const std::string& file;
  const LineIndex& lines;
  std::map<std::string, int> unknown_forms;
  std::map<std::string, bool>& expand_flags;

  SourceLoc loc(const SExpr& e) const { return {file, lines.line_of(e.offset)}; }

  void diag(Severity s, std::string code, std::string msg, const SExpr& e) {
    model.diagnostics.push_back({s, std::move(code), std::move(msg), loc_text(loc(e))});
  }

  void set_expr(const SExpr& e, bool include, AttributeSetDef& def) {
    if (e.atom) {
      if (e.text == def.name) {
        diag(Severity::warning, "attribute-set-self-reference",
             "set " + def.name + " references itself; member dropped", e);
        return;
      }
      (include ? def.includes : def.excludes).push_back(e.text);
      return;
    }
    if (e.items.empty()) return;
    std::size_t first = 0;
    bool pol = include;
    if (e.items[0].atom) {
      const std::string& op = e.items[0].text;
      if (op == "not") {
        pol = !include;
        first = 1;
      } else if (op == "and" || op == "or") {
        // Members of either operand are collected on the same side.
        first = 1;
      } else if (op == "all" || op == "xor") {
        diag(Severity::warning, "cil-unsupported-set-operator",
             "set operator '" + op + "' in " + def.name + " is not supported; ignored", e);
        return;
      }
    }
    for (std::size_t i = first; i < e.items.size(); ++i) set_expr(e.items[i], pol, def);
  }

  void statement(const SExpr& e) {
    if (e.atom || e.items.empty() || !e.items[0].atom) {
      diag(Severity::warning, "cil-malformed", "malformed statement", e);
      return;
    }
    const std::string& head = e.items[0].text;
    auto atom_at = [&](std::size_t i) -> const std::string* {
      return i < e.items.size() && e.items[i].atom ? &e.items[i].text : nullptr;
    };
    if (head == "type") {
      if (const auto* n = atom_at(1)) {
        model.declared_types.insert(*n);
      } else {
        diag(Severity::warning, "cil-malformed", "malformed type", e);
      }
    } else if (head == "typeattribute") {
      if (const auto* n = atom_at(1)) {
        auto& def = model.sets[*n];
        if (def.name.empty()) {
          def.name = *n;
          def.source = loc(e);
        }
      } else {
        diag(Severity::warning, "cil-malformed", "malformed typeattribute", e);
      }
    } else if (head == "typeattributeset") {
      const auto* n = atom_at(1);
      if (!n || e.items.size() != 3) {
        diag(Severity::warning, "cil-malformed", "malformed typeattributeset", e);
        return;
      }
      auto& def = model.sets[*n];
      if (def.name.empty()) {
        def.name = *n;
        def.source = loc(e);
      }
      set_expr(e.items[2], true, def);
    } else if (head == "expandtypeattribute") {
      if (e.items.size() != 3 || !e.items[2].atom ||
          (e.items[2].text != "true" && e.items[2].text != "false")) {
        diag(Severity::warning, "cil-malformed", "malformed expandtypeattribute", e);
        return;
      }
      bool value = e.items[2].text == "true";
      const SExpr& names = e.items[1];
      if (names.atom) {
        expand_flags[names.text] = value;
      } else {
        for (const auto& n : names.items) {
          if (n.atom) expand_flags[n.text] = value;
        }
      }
    } else if (head == "allow" || head == "neverallow") {
      const auto* s = atom_at(1);
      const auto* t = atom_at(2);
      if (!s || !t || e.items.size() != 4 || e.items[3].atom || e.items[3].items.size() != 2 ||
          !e.items[3].items[0].atom || e.items[3].items[1].atom) {
        diag(Severity::warning, "cil-unsupported-rule",
             head + " with anonymous sets or named class permissions skipped", e);
        return;
      }
      AllowRule r;
      r.source = *s;
      r.target = *t;
      r.class_name = e.items[3].items[0].text;
      for (const auto& p : e.items[3].items[1].items) {
        if (p.atom) r.permissions.insert(p.text);
      }
      r.never = head == "neverallow";
      r.source_loc = loc(e);
      if (r.permissions.empty()) {
        diag(Severity::warning, "cil-malformed", head + " without permissions", e);
        return;
      }
      model.rules.push_back(std::move(r));
    } else if (head == "optional" || head == "block" || head == "in") {
      for (std::size_t i = 2; i < e.items.size(); ++i) statement(e.items[i]);
    } else if (!ignored_cil_form(head)) {
      ++unknown_forms[head];
    }
  }
};

}  // namespace

// ---------------------------------------------------------------------------
// property_contexts

std::vector<PropertyContextEntry> parse_property_contexts(std::string_view text,
                                                          const std::string& file,
                                                          Diagnostics& diags) {
  std::vector<PropertyContextEntry> out;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    auto nl = text.find('\n', pos);
    std::string_view line =
        text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    std::string where = file + ":" + std::to_string(line_no);
    auto toks = split_ws(line);
    if (toks.size() < 2) {
      diags.push_back({Severity::warning, "context-malformed", "expected pattern and context", where});
      continue;
    }
    PropertyContextEntry e;
    e.pattern = std::string(toks[0]);
    auto star = e.pattern.find('*');
    if (star != std::string::npos && star + 1 != e.pattern.size()) {
      diags.push_back({Severity::warning, "context-interior-wildcard",
                       "pattern '" + e.pattern + "' has a non-trailing '*'; skipped", where});
      continue;
    }
    if (toks.size() >= 3 && toks[2] == "prefix" && !e.is_prefix()) e.pattern += '*';
    auto parts = split(toks[1], ':');
    if (parts.size() < 4 || parts[2].empty()) {
      diags.push_back({Severity::warning, "context-malformed",
                       "security context '" + std::string(toks[1]) + "' is not user:role:type:level",
                       where});
      continue;
    }
    e.user = parts[0];
    e.role = parts[1];
    e.type_name = parts[2];
    e.sensitivity = parts[3];
    for (std::size_t i = 4; i < parts.size(); ++i) {
      for (auto& c : split(parts[i], ',')) {
        if (!c.empty()) e.categories.push_back(c);
      }
    }
    e.source = {file, line_no};
    out.push_back(std::move(e));
  }
  return out;
}

void ensure_default_entry(std::vector<PropertyContextEntry>& entries) {
  bool has = std::any_of(entries.begin(), entries.end(),
                         [](const auto& e) { return e.pattern == kDefaultContextPattern; });
  if (has) return;
  PropertyContextEntry e;
  e.pattern = std::string(kDefaultContextPattern);
  e.user = "u";
  e.role = "object_r";
  e.type_name = "default_prop";
  e.sensitivity = "s0";
  e.source = {"<implicit>", 0};
  entries.push_back(std::move(e));
}

ContextMatcher::ContextMatcher(std::vector<PropertyContextEntry> entries)
    : entries_(std::move(entries)) {
  nodes_.emplace_back();
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    const auto& e = entries_[i];
    if (!e.is_prefix()) {
      exact_.emplace(e.pattern, static_cast<int>(i));
      continue;
    }
    int node = 0;
    for (char c : e.prefix()) {
      int next = child(node, c);
      if (next < 0) {
        next = static_cast<int>(nodes_.size());
        nodes_.emplace_back();
        auto& kids = nodes_[node].children;
        kids.insert(std::lower_bound(kids.begin(), kids.end(), std::make_pair(c, 0)),
                    {c, next});
      }
      node = next;
    }
    if (nodes_[node].entry < 0) nodes_[node].entry = static_cast<int>(i);
  }
}

int ContextMatcher::child(int node, char c) const {
  const auto& kids = nodes_[node].children;
  auto it = std::lower_bound(kids.begin(), kids.end(), std::make_pair(c, 0));
  if (it == kids.end() || it->first != c) return -1;
  return it->second;
}

std::size_t ContextMatcher::match_index(std::string_view name) const {
  if (auto it = exact_.find(std::string(name)); it != exact_.end()) {
    return static_cast<std::size_t>(it->second);
  }
  int best = nodes_[0].entry;
  int node = 0;
  for (char c : name) {
    node = child(node, c);
    if (node < 0) break;
    if (nodes_[node].entry >= 0) best = nodes_[node].entry;
  }
  if (best < 0) throw InvariantError("no property context covers '" + std::string(name) + "'");
  return static_cast<std::size_t>(best);
}

const PropertyContextEntry& ContextMatcher::match(std::string_view name) const {
  return entries_[match_index(name)];
}

const PropertyContextEntry& match_context(std::string_view name, const ContextMatcher& matcher) {
  return matcher.match(name);
}

// ---------------------------------------------------------------------------
// Policy model

std::set<std::string> PolicyModel::expand(const std::string& name) const {
  if (!resolved) throw InvariantError("policy model used before resolve_attribute_sets");
  if (auto it = resolved_sets.find(name); it != resolved_sets.end()) return it->second;
  if (is_set(name)) return {};
  return {name};
}

bool PolicyModel::member(const std::string& type, const std::string& name) const {
  if (auto it = resolved_sets.find(name); it != resolved_sets.end()) return it->second.count(type) != 0;
  if (is_set(name)) return false;
  return type == name;
}

void PolicyModel::merge(PolicyModel&& other) {
  contexts.insert(contexts.end(), std::make_move_iterator(other.contexts.begin()),
                  std::make_move_iterator(other.contexts.end()));
  declared_types.insert(other.declared_types.begin(), other.declared_types.end());
  for (auto& [name, def] : other.sets) {
    auto [it, inserted] = sets.emplace(name, def);
    if (inserted) continue;
    AttributeSetDef& mine = it->second;
    mine.includes.insert(mine.includes.end(), def.includes.begin(), def.includes.end());
    mine.excludes.insert(mine.excludes.end(), def.excludes.begin(), def.excludes.end());
    if (def.expand_declared) {
      mine.expandable = def.expandable;
      mine.expand_declared = true;
    }
  }
  rules.insert(rules.end(), std::make_move_iterator(other.rules.begin()),
               std::make_move_iterator(other.rules.end()));
  diagnostics.insert(diagnostics.end(), other.diagnostics.begin(), other.diagnostics.end());
  resolved = false;
}

namespace {

// Flags for names that are not defined as sets in this file are kept on a
// placeholder definition so merge() can carry them across files.
void apply_expand_flags(PolicyModel& model, const std::map<std::string, bool>& flags,
                        const std::string& file) {
  for (const auto& [name, value] : flags) {
    auto& def = model.sets[name];
    if (def.name.empty()) {
      def.name = name;
      def.source = {file, 0};
    }
    def.expandable = value;
    def.expand_declared = true;
  }
}
}  // namespace

PolicyModel parse_cil(std::string_view text, const std::string& file) {
  PolicyModel model;
  LineIndex lines(text);
  std::vector<SExpr> forms = parse_sexprs(text);
  std::map<std::string, bool> flags;
  CilReader reader{model, file, lines, {}, flags};
  for (const SExpr& f : forms) reader.statement(f);
  apply_expand_flags(model, flags, file);
  for (const auto& [head, count] : reader.unknown_forms) {
    model.diagnostics.push_back({Severity::info, "cil-unknown-form",
                                 "skipped " + std::to_string(count) + " '" + head + "' statement(s)",
                                 file});
  }
  return model;
}

PolicyModel parse_rule_dump(std::string_view text, const std::string& file) {
  PolicyModel model;
  std::map<std::string, bool> flags;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    auto nl = text.find('\n', pos);
    std::string_view line =
        text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    SourceLoc loc{file, line_no};
    auto bad = [&](const std::string& why) {
      model.diagnostics.push_back({Severity::warning, "rules-malformed", why, loc_text(loc)});
    };
    if (line.back() != ';') {
      bad("statement must end with ';'");
      continue;
    }
    line = trim(line.substr(0, line.size() - 1));
    // Tokenize, treating braces as separate tokens.
    std::vector<std::string> toks;
    std::string cur;
    for (char c : line) {
      if (c == '{' || c == '}' || c == ' ' || c == '\t') {
        if (!cur.empty()) toks.push_back(std::move(cur));
        cur.clear();
        if (c == '{' || c == '}') toks.emplace_back(1, c);
      } else {
        cur += c;
      }
    }
    if (!cur.empty()) toks.push_back(std::move(cur));
    if (toks.empty()) continue;
    // Items either braced "{ a b }" or a single token, starting at toks[i].
    auto items = [&](std::size_t i, std::size_t& next) -> std::optional<std::vector<std::string>> {
      if (i >= toks.size()) return std::nullopt;
      if (toks[i] != "{") {
        next = i + 1;
        return std::vector<std::string>{toks[i]};
      }
      std::vector<std::string> out;
      for (std::size_t j = i + 1; j < toks.size(); ++j) {
        if (toks[j] == "}") {
          next = j + 1;
          return out;
        }
        out.push_back(toks[j]);
      }
      return std::nullopt;
    };
    const std::string& head = toks[0];
    if (head == "type" || head == "attribute") {
      if (toks.size() != 2) {
        bad("malformed " + head);
      } else if (head == "type") {
        model.declared_types.insert(toks[1]);
      } else {
        auto& def = model.sets[toks[1]];
        if (def.name.empty()) {
          def.name = toks[1];
          def.source = loc;
        }
      }
    } else if (head == "typeattributeset") {
      std::size_t next = 0;
      auto members = toks.size() >= 3 ? items(2, next) : std::nullopt;
      if (!members || next != toks.size()) {
        bad("malformed typeattributeset");
        continue;
      }
      auto& def = model.sets[toks[1]];
      if (def.name.empty()) {
        def.name = toks[1];
        def.source = loc;
      }
      for (const auto& m : *members) {
        bool exclude = m.starts_with('-');
        std::string n = exclude ? m.substr(1) : m;
        if (n.empty() || n == def.name) continue;
        (exclude ? def.excludes : def.includes).push_back(n);
      }
    } else if (head == "expandtypeattribute") {
      if (toks.size() != 3 || (toks[2] != "true" && toks[2] != "false")) {
        bad("malformed expandtypeattribute");
      } else {
        flags[toks[1]] = toks[2] == "true";
      }
    } else if (head == "allow" || head == "neverallow") {
      if (toks.size() < 4 || toks[1] == "{" || toks[2] == "{") {
        bad(head + " with braced source/target is not supported");
        continue;
      }
      auto colon = toks[2].find(':');
      if (colon == std::string::npos || colon == 0 || colon + 1 >= toks[2].size()) {
        bad(head + " target must be TYPE:CLASS");
        continue;
      }
      std::size_t next = 0;
      auto perms = items(3, next);
      if (!perms || perms->empty() || next != toks.size()) {
        bad(head + " has malformed permissions");
        continue;
      }
      AllowRule r;
      r.source = toks[1];
      r.target = toks[2].substr(0, colon);
      r.class_name = toks[2].substr(colon + 1);
      r.permissions.insert(perms->begin(), perms->end());
      r.never = head == "neverallow";
      r.source_loc = loc;
      model.rules.push_back(std::move(r));
    } else {
      bad("unknown statement '" + head + "'");
    }
  }
  apply_expand_flags(model, flags, file);
  return model;
}

void resolve_attribute_sets(PolicyModel& model) {
  model.resolved_sets.clear();
  model.known_types = model.declared_types;
  model.file_rules_by_target.clear();
  model.self_file_rules.clear();

  for (const auto& [name, def] : model.sets) {
    if (def.expand_declared && !def.expandable) {
      model.diagnostics.push_back(
          {Severity::info, "non-expandable-set",
           "expandtypeattribute false on " + name + " does not change read verdicts",
           loc_text(def.source)});
    }
  }

  // Tarjan's SCC over the set-reference graph; SCCs come out dependencies first.
  std::map<std::string, int> index, low;
  std::set<std::string> on_stack;
  std::vector<std::string> stack;
  int counter = 0;
  auto deps = [&](const AttributeSetDef& def) {
    std::vector<std::string> out;
    for (const auto* l : {&def.includes, &def.excludes}) {
      for (const auto& m : *l) {
        if (model.is_set(m)) out.push_back(m);
      }
    }
    return out;
  };
  auto compute = [&](const std::string& name) {
    const AttributeSetDef& def = model.sets.at(name);
    std::set<std::string> inc, exc;
    for (const auto& m : def.includes) {
      if (model.is_set(m)) {
        const auto& r = model.resolved_sets[m];
        inc.insert(r.begin(), r.end());
      } else {
        inc.insert(m);
      }
    }
    for (const auto& m : def.excludes) {
      if (model.is_set(m)) {
        const auto& r = model.resolved_sets[m];
        exc.insert(r.begin(), r.end());
      } else {
        exc.insert(m);
      }
    }
    std::set<std::string> out;
    std::set_difference(inc.begin(), inc.end(), exc.begin(), exc.end(),
                        std::inserter(out, out.end()));
    model.resolved_sets[name] = std::move(out);
  };
  std::function<void(const std::string&)> strong = [&](const std::string& v) {
    index[v] = low[v] = counter++;
    stack.push_back(v);
    on_stack.insert(v);
    for (const auto& w : deps(model.sets.at(v))) {
      if (!index.count(w)) {
        strong(w);
        low[v] = std::min(low[v], low[w]);
      } else if (on_stack.count(w)) {
        low[v] = std::min(low[v], index[w]);
      }
    }
    if (low[v] != index[v]) return;
    std::vector<std::string> scc;
    while (true) {
      std::string w = stack.back();
      stack.pop_back();
      on_stack.erase(w);
      scc.push_back(w);
      if (w == v) break;
    }
    auto self_loop = [&] {
      auto d = deps(model.sets.at(v));
      return std::find(d.begin(), d.end(), v) != d.end();
    };
    if (scc.size() > 1 || self_loop()) {
      std::sort(scc.begin(), scc.end());
      std::string members;
      for (const auto& s : scc) members += (members.empty() ? "" : ", ") + s;
      for (const auto& s : scc) {
        model.resolved_sets[s] = {};
        model.diagnostics.push_back({Severity::error, "attribute-set-cycle",
                                     "set " + s + " is part of a reference cycle (" + members +
                                         "); resolved as empty",
                                     loc_text(model.sets.at(s).source)});
      }
      return;
    }
    compute(v);
  };
  for (const auto& [name, def] : model.sets) {
    if (!index.count(name)) strong(name);
  }

  auto note_type = [&](const std::string& n) {
    if (!model.is_set(n) && n != "self") model.known_types.insert(n);
  };
  for (const auto& [name, def] : model.sets) {
    for (const auto& m : def.includes) note_type(m);
    for (const auto& m : def.excludes) note_type(m);
  }
  for (const auto& r : model.rules) {
    note_type(r.source);
    note_type(r.target);
  }
  model.resolved = true;

  for (std::size_t i = 0; i < model.rules.size(); ++i) {
    const AllowRule& r = model.rules[i];
    if (r.never || r.class_name != "file") continue;
    if (r.target == "self") {
      model.self_file_rules.push_back(static_cast<int>(i));
      continue;
    }
    for (const auto& t : model.expand(r.target)) {
      model.file_rules_by_target[t].push_back(static_cast<int>(i));
    }
  }
}

ReadAccess evaluate_read_access(const std::string& target_type, const PolicyModel& model,
                                const AccessOptions& options, Diagnostics* diags) {
  if (!model.resolved) throw InvariantError("evaluate_read_access before resolve_attribute_sets");
  ReadAccess out;
  if (!model.known_types.count(target_type)) {
    out.unknown_type = true;
    if (diags) {
      diags->push_back({Severity::warning, "unknown-type",
                        "type " + target_type + " is not declared by the policy", {}});
    }
    return out;
  }
  std::vector<int> matching;
  if (auto it = model.file_rules_by_target.find(target_type); it != model.file_rules_by_target.end()) {
    for (int i : it->second) {
      if (model.member(options.subject, model.rules[i].source)) matching.push_back(i);
    }
  }
  if (options.subject == target_type) {
    for (int i : model.self_file_rules) {
      if (model.member(options.subject, model.rules[i].source)) matching.push_back(i);
    }
  }
  std::sort(matching.begin(), matching.end());
  if (!options.strict) {
    for (int i : matching) {
      if (model.rules[i].permissions.count("read")) out.witness_rules.push_back(i);
    }
  } else {
    std::set<std::string> granted;
    for (int i : matching) granted.insert(model.rules[i].permissions.begin(), model.rules[i].permissions.end());
    if (std::includes(granted.begin(), granted.end(), read_quad().begin(), read_quad().end())) {
      for (int i : matching) {
        const auto& p = model.rules[i].permissions;
        bool contributes = std::any_of(read_quad().begin(), read_quad().end(),
                                       [&](const std::string& q) { return p.count(q) != 0; });
        if (contributes) out.witness_rules.push_back(i);
      }
    }
  }
  out.readable = !out.witness_rules.empty();
  return out;
}

const char* to_string(VulnCategory c) {
  switch (c) {
    case VulnCategory::default_context: return "default-context";
    case VulnCategory::explicit_allow: return "explicit-allow";
    case VulnCategory::attribute_set_chain: return "attribute-set-chain";
    case VulnCategory::not_vulnerable: return "not-vulnerable";
  }
  return "not-vulnerable";
}

PropertyVerdict verdict_for_property(const std::string& name, const PolicyModel& model,
                                     const ContextMatcher& matcher, const AccessOptions& options,
                                     Diagnostics* diags) {
  PropertyVerdict v;
  v.property_name = name;
  v.matched_entry = matcher.match(name);
  v.target_type = v.matched_entry.type_name;
  ReadAccess access = evaluate_read_access(v.target_type, model, options, diags);
  v.readable_by_untrusted = access.readable;
  for (int i : access.witness_rules) v.witness_rules.push_back(model.rules[i]);
  if (!access.readable) {
    v.category = VulnCategory::not_vulnerable;
  } else if (v.matched_entry.pattern == kDefaultContextPattern) {
    v.category = VulnCategory::default_context;
  } else if (std::all_of(v.witness_rules.begin(), v.witness_rules.end(),
                         [&](const AllowRule& r) { return model.is_set(r.target); })) {
    v.category = VulnCategory::attribute_set_chain;
  } else {
    v.category = VulnCategory::explicit_allow;
  }
  return v;
}

std::vector<NeverallowViolation> check_neverallow(const PolicyModel& model) {
  if (!model.resolved) throw InvariantError("check_neverallow before resolve_attribute_sets");
  auto intersect = [](const std::set<std::string>& a, const std::set<std::string>& b) {
    std::vector<std::string> out;
    std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
    return out;
  };
  auto targets = [&](const AllowRule& r) {
    return r.target == "self" ? model.expand(r.source) : model.expand(r.target);
  };
  std::vector<NeverallowViolation> out;
  for (std::size_t n = 0; n < model.rules.size(); ++n) {
    const AllowRule& never = model.rules[n];
    if (!never.never) continue;
    auto ns = model.expand(never.source);
    auto nt = targets(never);
    for (std::size_t a = 0; a < model.rules.size(); ++a) {
      const AllowRule& allow = model.rules[a];
      if (allow.never || allow.class_name != never.class_name) continue;
      auto perms = intersect(allow.permissions, never.permissions);
      if (perms.empty()) continue;
      auto s = intersect(model.expand(allow.source), ns);
      if (s.empty()) continue;
      auto t = intersect(targets(allow), nt);
      if (t.empty()) continue;
      out.push_back({static_cast<int>(a), static_cast<int>(n), std::move(s), std::move(t),
                     std::move(perms)});
    }
  }
  std::sort(out.begin(), out.end(), [](const auto& x, const auto& y) {
    return std::tie(x.allow_rule, x.neverallow_rule) < std::tie(y.allow_rule, y.neverallow_rule);
  });
  return out;
}

}  // namespace romid
