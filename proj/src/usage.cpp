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

#include "romid/usage.hpp"

#include <algorithm>
#include <functional>
#include <map>
#include <memory>
#include <set>

#include "romid/parallel.hpp"

namespace romid {

namespace {

constexpr std::string_view kString = "Ljava/lang/String;";
constexpr std::string_view kClass = "Ljava/lang/Class;";
constexpr std::string_view kMethod = "Ljava/lang/reflect/Method;";
constexpr std::string_view kStringBuilder = "Ljava/lang/StringBuilder;";
constexpr std::string_view kStringBuffer = "Ljava/lang/StringBuffer;";
constexpr std::string_view kRuntime = "Ljava/lang/Runtime;";
constexpr std::string_view kClassLoader = "Ljava/lang/ClassLoader;";
constexpr std::string_view kContentResolver = "Landroid/content/ContentResolver;";
constexpr std::string_view kSettingsPrefix = "Landroid/provider/Settings$";
constexpr std::string_view kStringArray = "[Ljava/lang/String;";

// Nested interpretation of corpus helpers that return strings or reflective
// objects.
constexpr int kMaxCalleeDepth = 3;
// Hard cap on DFS steps per path query.
constexpr int kMaxPathSteps = 200000;

std::optional<SettingNamespace> settings_namespace_of(std::string_view owner) {
  if (!owner.starts_with(kSettingsPrefix) || !owner.ends_with(";")) return std::nullopt;
  return parse_namespace(owner.substr(kSettingsPrefix.size(),
                                      owner.size() - kSettingsPrefix.size() - 1));
}

bool is_settings_accessor(const MethodRef& m) {
  return settings_namespace_of(m.owner) && (m.name.starts_with("get") || m.name.starts_with("put"));
}

bool is_forname(const MethodRef& m) { return m.owner == kClass && m.name == "forName"; }
bool is_method_invoke(const MethodRef& m) { return m.owner == kMethod && m.name == "invoke"; }
bool is_runtime_exec(const MethodRef& m) { return m.owner == kRuntime && m.name == "exec"; }

bool is_reflective_type(std::string_view t) { return t == kClass || t == kMethod; }

// ---------------------------------------------------------------------------
// Symbolic strings and abstract values

struct Piece {
  enum class Kind { lit, hole, param } kind = Kind::hole;
  std::string text;
  int slot = -1;

  friend bool operator==(const Piece&, const Piece&) = default;
  friend auto operator<=>(const Piece&, const Piece&) = default;
};
using Sym = std::vector<Piece>;

void push_piece(Sym& s, Piece p) {
  if (p.kind == Piece::Kind::lit && p.text.empty()) return;
  if (!s.empty()) {
    Piece& back = s.back();
    if (back.kind == Piece::Kind::lit && p.kind == Piece::Kind::lit) {
      back.text += p.text;
      return;
    }
    if (back.kind == Piece::Kind::hole && p.kind == Piece::Kind::hole) return;
  }
  s.push_back(std::move(p));
}

Sym lit_sym(std::string text) {
  Sym s;
  push_piece(s, {Piece::Kind::lit, std::move(text), -1});
  return s;
}
Sym hole_sym() { return {{Piece::Kind::hole, {}, -1}}; }

Sym concat(const Sym& a, const Sym& b) {
  Sym out = a;
  for (const auto& p : b) push_piece(out, p);
  return out;
}

bool has_param(const Sym& s) {
  return std::any_of(s.begin(), s.end(), [](const Piece& p) { return p.kind == Piece::Kind::param; });
}

std::optional<std::string> literal_of(const Sym& s) {
  if (s.empty()) return std::string();
  if (s.size() == 1 && s[0].kind == Piece::Kind::lit) return s[0].text;
  return std::nullopt;
}

std::string sym_key(const Sym& s) {
  std::string out;
  for (const auto& p : s) {
    switch (p.kind) {
      case Piece::Kind::lit: out += "L" + std::to_string(p.text.size()) + ":" + p.text; break;
      case Piece::Kind::hole: out += "H"; break;
      case Piece::Kind::param: out += "P" + std::to_string(p.slot) + ";"; break;
    }
  }
  return out;
}

enum class Origin { local, static_field, wrapper };

struct Builder;
struct Array;

struct Value {
  enum class Kind { unknown, str, num, builder, array, klass, method, param, any };
  Kind kind = Kind::unknown;
  Sym s;      // str contents; klass name; method name
  Sym owner;  // method: declaring class name
  std::int64_t n = 0;
  int slot = -1;
  Origin origin = Origin::local;
  std::shared_ptr<Builder> b;
  std::shared_ptr<Array> a;
  std::vector<Value> alts;

  static Value unknown() { return {}; }
  static Value str(Sym s) {
    Value v;
    v.kind = Kind::str;
    v.s = std::move(s);
    return v;
  }
  static Value num(std::int64_t n) {
    Value v;
    v.kind = Kind::num;
    v.n = n;
    return v;
  }
  static Value param(int slot) {
    Value v;
    v.kind = Kind::param;
    v.slot = slot;
    return v;
  }
};

struct Builder {
  std::vector<Sym> alts{Sym{}};
};

struct Array {
  std::map<std::int64_t, Value> items;
  std::vector<Value> loose;  // stores at unknown indices
};

Value make_builder() {
  Value v;
  v.kind = Value::Kind::builder;
  v.b = std::make_shared<Builder>();
  return v;
}

Value make_array() {
  Value v;
  v.kind = Value::Kind::array;
  v.a = std::make_shared<Array>();
  return v;
}

std::string value_key(const Value& v);

std::string value_key(const Value& v) {
  static constexpr const char* kOrigin[] = {"l", "s", "w"};
  switch (v.kind) {
    case Value::Kind::unknown: return "u";
    case Value::Kind::str: return "s(" + sym_key(v.s) + ")";
    case Value::Kind::num: return "n(" + std::to_string(v.n) + ")";
    case Value::Kind::param: return "p(" + std::to_string(v.slot) + ")";
    case Value::Kind::klass:
      return std::string("k") + kOrigin[static_cast<int>(v.origin)] + "(" + sym_key(v.s) + ")";
    case Value::Kind::method:
      return std::string("m") + kOrigin[static_cast<int>(v.origin)] + "(" + sym_key(v.owner) +
             "," + sym_key(v.s) + ")";
    case Value::Kind::builder: {
      std::string out = "b(";
      for (const auto& s : v.b->alts) out += sym_key(s) + "|";
      return out + ")";
    }
    case Value::Kind::array: {
      std::string out = "a(";
      for (const auto& [i, e] : v.a->items) out += std::to_string(i) + "=" + value_key(e) + ",";
      for (const auto& e : v.a->loose) out += "?=" + value_key(e) + ",";
      return out + ")";
    }
    case Value::Kind::any: {
      std::string out = "any(";
      for (const auto& e : v.alts) out += value_key(e) + "|";
      return out + ")";
    }
  }
  return "u";
}

Value deep_copy(const Value& v) {
  Value out = v;
  if (v.b) out.b = std::make_shared<Builder>(*v.b);
  if (v.a) {
    out.a = std::make_shared<Array>();
    for (const auto& [i, e] : v.a->items) out.a->items.emplace(i, deep_copy(e));
    for (const auto& e : v.a->loose) out.a->loose.push_back(deep_copy(e));
  }
  for (auto& e : out.alts) e = deep_copy(e);
  return out;
}

void flatten_into(const Value& v, std::vector<Value>& out, std::set<std::string>& seen,
                  std::size_t cap) {
  if (v.kind == Value::Kind::any) {
    for (const auto& e : v.alts) flatten_into(e, out, seen, cap);
    return;
  }
  if (out.size() >= cap) return;
  if (seen.insert(value_key(v)).second) out.push_back(v);
}

std::vector<Value> flatten(const Value& v, std::size_t cap) {
  std::vector<Value> out;
  std::set<std::string> seen;
  flatten_into(v, out, seen, cap);
  return out;
}

Value any_of(std::vector<Value> alts, std::size_t cap) {
  Value tmp;
  tmp.kind = Value::Kind::any;
  tmp.alts = std::move(alts);
  auto flat = flatten(tmp, cap);
  if (flat.empty()) return Value::unknown();
  if (flat.size() == 1) return flat.front();
  Value out;
  out.kind = Value::Kind::any;
  out.alts = std::move(flat);
  return out;
}

// String alternatives a value contributes when used as text.
std::vector<Sym> text_alternatives(const Value& v, std::string_view type, std::size_t cap) {
  std::vector<Sym> out;
  for (const Value& e : flatten(v, cap)) {
    switch (e.kind) {
      case Value::Kind::str: out.push_back(e.s); break;
      case Value::Kind::param: out.push_back({{Piece::Kind::param, {}, e.slot}}); break;
      case Value::Kind::builder:
        for (const auto& s : e.b->alts) out.push_back(s);
        break;
      case Value::Kind::num:
        if (type == "C") {
          out.push_back(lit_sym(std::string(1, static_cast<char>(e.n))));
        } else if (type == "Z") {
          out.push_back(lit_sym(e.n ? "true" : "false"));
        } else {
          out.push_back(lit_sym(std::to_string(e.n)));
        }
        break;
      default:
        out.push_back(hole_sym());
    }
  }
  if (out.empty()) out.push_back(hole_sym());
  return out;
}

std::vector<Sym> product(const std::vector<Sym>& left, const std::vector<Sym>& right,
                         std::size_t cap) {
  std::vector<Sym> out;
  std::set<std::string> seen;
  for (const auto& l : left) {
    for (const auto& r : right) {
      if (out.size() >= cap) return out;
      Sym s = concat(l, r);
      if (seen.insert(sym_key(s)).second) out.push_back(std::move(s));
    }
  }
  return out;
}

Value str_any(const std::vector<Sym>& syms, std::size_t cap) {
  std::vector<Value> alts;
  for (const auto& s : syms) alts.push_back(Value::str(s));
  return any_of(std::move(alts), cap);
}

// ---------------------------------------------------------------------------
// Path enumeration

struct PathSet {
  std::vector<std::vector<int>> paths;
  bool truncated = false;
};

std::vector<int> successors(const IrMethod& m, int i) {
  const IrInstruction& insn = m.instructions[i];
  const int n = static_cast<int>(m.instructions.size());
  std::vector<int> out;
  switch (insn.op) {
    case Opcode::return_value:
    case Opcode::return_void:
      break;
    case Opcode::jump:
      out.push_back(insn.targets[0]);
      break;
    case Opcode::branch:
      out.push_back(i + 1);
      out.push_back(insn.targets[0]);
      break;
    default:
      if (insn.mnemonic != "throw") out.push_back(i + 1);
  }
  std::erase_if(out, [n](int s) { return s < 0 || s >= n; });
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

PathSet enumerate_paths(const IrMethod& m, int target, int limit) {
  PathSet result;
  const int n = static_cast<int>(m.instructions.size());
  if (target < 0 || target > n) return result;
  if (target == 0) {
    result.paths.push_back({});
    return result;
  }
  std::vector<std::vector<int>> preds(n + 1);
  for (int i = 0; i < n; ++i) {
    for (int s : successors(m, i)) preds[s].push_back(i);
  }
  std::vector<bool> reach(n + 1, false);
  std::vector<int> work{target};
  reach[target] = true;
  while (!work.empty()) {
    int x = work.back();
    work.pop_back();
    for (int p : preds[x]) {
      if (!reach[p]) {
        reach[p] = true;
        work.push_back(p);
      }
    }
  }
  if (!reach[0]) {
    // Not reachable through normal control flow (e.g. a catch handler): fall
    // back to straight-line order.
    std::vector<int> linear(target);
    for (int i = 0; i < target; ++i) linear[i] = i;
    result.paths.push_back(std::move(linear));
    return result;
  }
  std::vector<int> path;
  std::vector<bool> on_path(n + 1, false);
  int steps = 0;
  std::function<void(int)> dfs = [&](int node) {
    if (result.truncated) return;
    if (++steps > kMaxPathSteps) {
      result.truncated = true;
      return;
    }
    if (node == target) {
      if (static_cast<int>(result.paths.size()) >= limit) {
        result.truncated = true;
        return;
      }
      result.paths.push_back(path);
      return;
    }
    on_path[node] = true;
    path.push_back(node);
    for (int s : successors(m, node)) {
      if (reach[s] && !on_path[s]) dfs(s);
      if (result.truncated) break;
    }
    path.pop_back();
    on_path[node] = false;
  };
  dfs(0);
  return result;
}

// ---------------------------------------------------------------------------
// Interpreter

struct State {
  std::vector<Value> regs;
  Value result;
  std::map<std::string, Value> fields;  // stores seen earlier on this path
};

struct StateSet {
  std::vector<State> states;
  bool truncated = false;
};

class Resolver {
 public:
  Resolver(const Corpus& corpus, const UsageConfig& config)
      : corpus_(corpus), config_(config), cap_(static_cast<std::size_t>(config.max_alternatives)) {}

  std::size_t cap() const { return cap_; }

  // Abstract states just before `target` in method `node`, one per path.
  // With `args`, parameter registers start with the given values; otherwise
  // they hold symbolic parameter values.
  const StateSet& states_before(int node, int target) {
    auto key = std::make_pair(node, target);
    auto it = state_cache_.find(key);
    if (it != state_cache_.end()) return it->second;
    StateSet set = run(node, target, nullptr, 0);
    return state_cache_.emplace(key, std::move(set)).first->second;
  }

  // Alternatives for register `reg` before `target`.
  std::pair<std::vector<Value>, bool> values_before(int node, int target, int reg) {
    const StateSet& set = states_before(node, target);
    std::vector<Value> alts;
    for (const State& st : set.states) {
      if (reg >= 0 && static_cast<std::size_t>(reg) < st.regs.size()) alts.push_back(st.regs[reg]);
    }
    Value merged = any_of(std::move(alts), cap_);
    return {flatten(merged, cap_), set.truncated};
  }

  const Corpus& corpus() const { return corpus_; }

 private:
  StateSet run(int node, int target, const std::vector<Value>* args, int depth) {
    const IrMethod& m = corpus_.method_of(node);
    PathSet paths = enumerate_paths(m, target, config_.path_limit);
    StateSet out;
    out.truncated = paths.truncated;
    for (const auto& path : paths.paths) {
      State st;
      st.regs.assign(static_cast<std::size_t>(std::max(m.registers, 0)), Value::unknown());
      int slot = 0;
      auto init = [&](int width) {
        int reg = m.slot_register(slot);
        if (reg >= 0 && static_cast<std::size_t>(reg) < st.regs.size()) {
          if (args) {
            st.regs[reg] = static_cast<std::size_t>(slot) < args->size()
                               ? deep_copy((*args)[slot])
                               : Value::unknown();
          } else {
            st.regs[reg] = Value::param(slot);
          }
        }
        slot += width;
      };
      if (!m.is_static()) init(1);
      for (const auto& p : m.signature.params) init((p == "J" || p == "D") ? 2 : 1);
      for (int idx : path) step(node, m.instructions[idx], st, depth);
      out.states.push_back(std::move(st));
    }
    return out;
  }

  Value reg(const State& st, const IrInstruction& insn, std::size_t i) const {
    if (i >= insn.regs.size()) return Value::unknown();
    int r = insn.regs[i];
    if (r < 0 || static_cast<std::size_t>(r) >= st.regs.size()) return Value::unknown();
    return st.regs[r];
  }

  void set_reg(State& st, int r, Value v) const {
    if (r >= 0 && static_cast<std::size_t>(r) < st.regs.size()) st.regs[r] = std::move(v);
  }

  void step(int node, const IrInstruction& insn, State& st, int depth) {
    switch (insn.op) {
      case Opcode::const_string:
        set_reg(st, insn.regs[0], Value::str(lit_sym(insn.literal)));
        break;
      case Opcode::const_number:
        set_reg(st, insn.regs[0], Value::num(insn.number));
        break;
      case Opcode::const_class: {
        Value k;
        k.kind = Value::Kind::klass;
        k.s = lit_sym(descriptor_to_java(insn.literal));
        set_reg(st, insn.regs[0], std::move(k));
        break;
      }
      case Opcode::move:
        set_reg(st, insn.regs[0], reg(st, insn, 1));
        break;
      case Opcode::move_result:
        set_reg(st, insn.regs[0], std::move(st.result));
        st.result = Value::unknown();
        break;
      case Opcode::sget:
      case Opcode::iget: {
        auto it = st.fields.find(insn.field->key());
        if (it != st.fields.end()) {
          set_reg(st, insn.regs[0], it->second);
        } else {
          int unit = corpus_.class_of(node).unit;
          set_reg(st, insn.regs[0], field_value(*insn.field, unit, insn.op == Opcode::sget));
        }
        break;
      }
      case Opcode::sput:
      case Opcode::iput:
        st.fields[insn.field->key()] = reg(st, insn, 0);
        break;
      case Opcode::new_array:
        set_reg(st, insn.regs[0], make_array());
        break;
      case Opcode::filled_new_array: {
        Value arr = make_array();
        for (std::size_t i = 0; i < insn.regs.size(); ++i) {
          arr.a->items[static_cast<std::int64_t>(i)] = reg(st, insn, i);
        }
        st.result = std::move(arr);
        break;
      }
      case Opcode::aput: {
        Value arr = reg(st, insn, 1);
        Value idx = reg(st, insn, 2);
        if (arr.kind == Value::Kind::array) {
          if (idx.kind == Value::Kind::num) {
            arr.a->items[idx.n] = reg(st, insn, 0);
          } else {
            arr.a->loose.push_back(reg(st, insn, 0));
          }
        }
        break;
      }
      case Opcode::aget: {
        // Index-insensitive: loops over constant arrays must see every element.
        Value arr = reg(st, insn, 1);
        if (arr.kind == Value::Kind::array) {
          std::vector<Value> elems;
          for (const auto& [i, e] : arr.a->items) elems.push_back(e);
          for (const auto& e : arr.a->loose) elems.push_back(e);
          set_reg(st, insn.regs[0], any_of(std::move(elems), cap_));
        } else {
          set_reg(st, insn.regs[0], Value::unknown());
        }
        break;
      }
      case Opcode::invoke:
        st.result = invoke(node, insn, st, depth);
        break;
      case Opcode::other:
        if (insn.mnemonic == "new-instance" && !insn.regs.empty()) {
          bool is_builder = insn.raw.ends_with(kStringBuilder) || insn.raw.ends_with(kStringBuffer);
          set_reg(st, insn.regs[0], is_builder ? make_builder() : Value::unknown());
        } else {
          for (int r : insn.regs) set_reg(st, r, Value::unknown());
        }
        break;
      case Opcode::branch:
      case Opcode::jump:
      case Opcode::return_value:
      case Opcode::return_void:
        break;
    }
  }

  Value invoke(int node, const IrInstruction& insn, State& st, int depth) {
    const MethodRef& m = *insn.method;
    auto arg = [&](std::size_t i) { return reg(st, insn, i); };

    if (m.owner == kStringBuilder || m.owner == kStringBuffer) {
      Value recv = arg(0);
      if (m.name == "<init>") {
        if (recv.kind != Value::Kind::builder) {
          recv = make_builder();
          set_reg(st, insn.regs[0], recv);
        }
        if (m.params.size() == 1 && m.params[0] != "I") {
          recv.b->alts = text_alternatives(arg(1), m.params[0], cap_);
        }
        return Value::unknown();
      }
      if (m.name == "append" && m.params.size() == 1) {
        if (recv.kind != Value::Kind::builder) return Value::unknown();
        recv.b->alts = product(recv.b->alts, text_alternatives(arg(1), m.params[0], cap_), cap_);
        return recv;
      }
      if (m.name == "toString") {
        if (recv.kind != Value::Kind::builder) return Value::unknown();
        return str_any(recv.b->alts, cap_);
      }
      return Value::unknown();
    }
    if (m.owner == kString) {
      if (m.name == "concat" && m.params.size() == 1) {
        return str_any(product(text_alternatives(arg(0), kString, cap_),
                               text_alternatives(arg(1), kString, cap_), cap_),
                       cap_);
      }
      if (m.name == "valueOf" && m.params.size() == 1) {
        return str_any(text_alternatives(arg(0), m.params[0], cap_), cap_);
      }
      if (m.name == "toString" || m.name == "intern") return arg(0);
      return Value::unknown();
    }
    if (is_forname(m) || (m.owner == kClassLoader && m.name == "loadClass")) {
      const std::size_t name_arg = is_forname(m) ? 0 : 1;
      std::vector<Value> alts;
      for (const Sym& s : text_alternatives(arg(name_arg), kString, cap_)) {
        Value k;
        k.kind = Value::Kind::klass;
        k.s = s;
        alts.push_back(std::move(k));
      }
      return any_of(std::move(alts), cap_);
    }
    if (m.owner == kClass && (m.name == "getMethod" || m.name == "getDeclaredMethod")) {
      std::vector<Value> alts;
      for (const Value& k : flatten(arg(0), cap_)) {
        if (k.kind != Value::Kind::klass) continue;
        for (const Sym& name : text_alternatives(arg(1), kString, cap_)) {
          Value mv;
          mv.kind = Value::Kind::method;
          mv.owner = k.s;
          mv.s = name;
          mv.origin = k.origin;
          alts.push_back(std::move(mv));
        }
      }
      return any_of(std::move(alts), cap_);
    }
    if (m.ret == kString || m.ret == kStringArray || is_reflective_type(m.ret)) {
      auto callee = corpus_.graph.callee_at(node, insn.index);
      if (callee && !corpus_.graph.nodes[*callee].external && depth < kMaxCalleeDepth &&
          std::find(call_stack_.begin(), call_stack_.end(), *callee) == call_stack_.end()) {
        std::vector<Value> args;
        for (std::size_t i = 0; i < insn.regs.size(); ++i) args.push_back(arg(i));
        Value ret = returned_value(*callee, args, depth + 1);
        if (is_reflective_type(m.ret)) mark_origin(ret, Origin::wrapper);
        return ret;
      }
    }
    return Value::unknown();
  }

  static void mark_origin(Value& v, Origin o) {
    if (v.kind == Value::Kind::klass || v.kind == Value::Kind::method) v.origin = o;
    for (auto& e : v.alts) mark_origin(e, o);
  }

  Value returned_value(int node, const std::vector<Value>& args, int depth) {
    const IrMethod& m = corpus_.method_of(node);
    call_stack_.push_back(node);
    std::vector<Value> alts;
    for (const IrInstruction& insn : m.instructions) {
      if (insn.op != Opcode::return_value) continue;
      StateSet set = run(node, insn.index, &args, depth);
      for (const State& st : set.states) alts.push_back(reg(st, insn, 0));
    }
    call_stack_.pop_back();
    return any_of(std::move(alts), cap_);
  }

  Value field_value(const FieldRef& f, int unit, bool is_static) {
    std::string key = f.key() + "#" + std::to_string(unit);
    if (auto it = field_cache_.find(key); it != field_cache_.end()) return deep_copy(it->second);
    if (std::find(field_stack_.begin(), field_stack_.end(), key) != field_stack_.end()) {
      return Value::unknown();
    }
    int ci = corpus_.find_class_index(f.owner, unit);
    if (ci < 0) return Value::unknown();
    const IrClass& cls = corpus_.classes[ci];
    field_stack_.push_back(key);

    std::vector<Value> alts;
    if (const IrField* decl = cls.find_field(f.name); decl && decl->string_value) {
      alts.push_back(Value::str(lit_sym(*decl->string_value)));
    }
    auto collect = [&](bool initializers_only) {
      for (std::size_t mi = 0; mi < cls.methods.size(); ++mi) {
        const IrMethod& m = cls.methods[mi];
        bool init = is_static ? m.signature.name == "<clinit>" : m.signature.name == "<init>";
        if (initializers_only != init) continue;
        int node = corpus_.graph.node_of(ci, static_cast<int>(mi));
        for (const IrInstruction& insn : m.instructions) {
          if ((insn.op != Opcode::sput && insn.op != Opcode::iput) || insn.field->owner != f.owner ||
              insn.field->name != f.name) {
            continue;
          }
          StateSet set = run(node, insn.index, nullptr, 0);
          for (State& st : set.states) {
            Value v = reg(st, insn, 0);
            // Parameters of the storing method have no meaning at the load.
            if (v.kind == Value::Kind::param) v = Value::unknown();
            alts.push_back(std::move(v));
          }
        }
      }
    };
    collect(true);
    if (alts.empty()) collect(false);
    field_stack_.pop_back();

    Value v = any_of(std::move(alts), cap_);
    mark_origin(v, Origin::static_field);
    field_cache_.emplace(key, v);
    return deep_copy(v);
  }

  const Corpus& corpus_;
  const UsageConfig& config_;
  std::size_t cap_;
  std::map<std::pair<int, int>, StateSet> state_cache_;
  std::unordered_map<std::string, Value> field_cache_;
  std::vector<std::string> field_stack_;
  std::vector<int> call_stack_;
};

// ---------------------------------------------------------------------------
// Access points

struct AccessMatch {
  UsageKind kind = UsageKind::property;
  AccessIdiom idiom = AccessIdiom::direct_call;
  Operation operation = Operation::get;
  std::optional<SettingNamespace> ns;
  std::string api;
  std::vector<Sym> names;
  bool strip_getprop = false;
  bool truncated = false;
};

std::string location_of(const Corpus& corpus, const SiteRef& site) {
  const IrClass& cls = corpus.classes[site.class_index];
  const IrInstruction& insn =
      cls.methods[site.method_index].instructions[static_cast<std::size_t>(site.instruction)];
  std::string path = cls.source_path.empty() ? cls.name : cls.source_path;
  return path + ":" + std::to_string(insn.line);
}

void discard(Diagnostics* diags, const Corpus& corpus, const SiteRef& site, std::string code,
             std::string message) {
  if (!diags) return;
  diags->push_back({Severity::info, std::move(code), std::move(message), location_of(corpus, site)});
}

Operation property_operation(std::string_view method_name) {
  return method_name == "set" ? Operation::set : Operation::get;
}

std::vector<Sym> name_syms(const std::vector<Value>& values, std::size_t cap) {
  std::vector<Sym> out;
  std::set<std::string> seen;
  for (const Value& v : values) {
    for (Sym& s : text_alternatives(v, kString, cap)) {
      if (seen.insert(sym_key(s)).second) out.push_back(std::move(s));
    }
  }
  return out;
}

std::vector<AccessMatch> match_access(const RawSite& raw, Resolver& r, Diagnostics* diags) {
  std::vector<AccessMatch> out;
  if (!raw.is_access_point()) return out;
  const Corpus& corpus = r.corpus();
  const SiteRef& site = raw.site;
  const IrInstruction& insn =
      corpus.classes[site.class_index].methods[site.method_index].instructions[site.instruction];
  const MethodRef& m = *insn.method;
  auto values = [&](std::size_t i) -> std::pair<std::vector<Value>, bool> {
    if (i >= insn.regs.size()) return {{}, false};
    return r.values_before(site.node, site.instruction, insn.regs[i]);
  };

  if (m.owner == kSystemProperties) {
    if (m.params.empty() || m.params[0] != kString) {
      discard(diags, corpus, site, "no-name-argument",
              "SystemProperties." + m.name + " has no property name argument");
      return out;
    }
    AccessMatch am;
    am.idiom = AccessIdiom::direct_call;
    am.operation = property_operation(m.name);
    am.api = std::string(kSystemPropertiesJava) + "." + m.name;
    auto [vals, truncated] = values(0);
    am.names = name_syms(vals, r.cap());
    am.truncated = truncated;
    out.push_back(std::move(am));
    return out;
  }
  if (auto ns = settings_namespace_of(m.owner); ns && is_settings_accessor(m)) {
    if (m.params.size() < 2 || m.params[0] != kContentResolver || m.params[1] != kString) {
      discard(diags, corpus, site, "settings-call-without-name",
              descriptor_to_java(m.owner) + "." + m.name + " does not take a setting name");
      return out;
    }
    AccessMatch am;
    am.kind = UsageKind::setting;
    am.idiom = AccessIdiom::settings_api;
    am.operation = m.name.starts_with("put") ? Operation::put : Operation::get;
    am.ns = ns;
    am.api = descriptor_to_java(m.owner) + "." + m.name;
    auto [vals, truncated] = values(1);
    am.names = name_syms(vals, r.cap());
    am.truncated = truncated;
    out.push_back(std::move(am));
    return out;
  }
  if (is_method_invoke(m)) {
    auto [receivers, rtrunc] = values(0);
    auto [arrays, atrunc] = values(2);
    std::vector<Value> first_elems;
    for (const Value& a : arrays) {
      if (a.kind != Value::Kind::array) {
        first_elems.push_back(Value::unknown());
      } else if (auto it = a.a->items.find(0); it != a.a->items.end()) {
        first_elems.push_back(it->second);
      } else if (!a.a->loose.empty()) {
        first_elems.insert(first_elems.end(), a.a->loose.begin(), a.a->loose.end());
      } else {
        first_elems.push_back(Value::unknown());
      }
    }
    if (first_elems.empty()) first_elems.push_back(Value::unknown());
    std::map<std::pair<int, std::string>, AccessMatch> by_idiom;
    for (const Value& mv : receivers) {
      if (mv.kind != Value::Kind::method) continue;
      auto owner = literal_of(mv.owner);
      auto name = literal_of(mv.s);
      if (!owner || *owner != kSystemPropertiesJava || !name) continue;
      AccessIdiom idiom = mv.origin == Origin::local          ? AccessIdiom::reflection_inline
                          : mv.origin == Origin::static_field ? AccessIdiom::reflection_static_field
                                                              : AccessIdiom::reflection_wrapper;
      auto& am = by_idiom[{static_cast<int>(idiom), *name}];
      am.idiom = idiom;
      am.operation = property_operation(*name);
      am.api = std::string(kSystemPropertiesJava) + "." + *name;
      am.names = name_syms(first_elems, r.cap());
      am.truncated = rtrunc || atrunc;
    }
    if (by_idiom.empty()) {
      discard(diags, corpus, site, "reflection-target-not-system-properties",
              "reflective call does not resolve to a SystemProperties method");
    }
    for (auto& [k, am] : by_idiom) out.push_back(std::move(am));
    return out;
  }
  if (is_runtime_exec(m)) {
    if (m.params.empty()) return out;
    AccessMatch am;
    am.idiom = AccessIdiom::exec_getprop;
    am.operation = Operation::get;
    am.api = "java.lang.Runtime.exec";
    auto [vals, truncated] = values(1);
    am.truncated = truncated;
    if (m.params[0] == kString) {
      am.names = name_syms(vals, r.cap());
      am.strip_getprop = true;
    } else if (m.params[0] == kStringArray) {
      std::vector<Value> names;
      for (const Value& a : vals) {
        if (a.kind != Value::Kind::array) continue;
        auto cmd = a.a->items.find(0);
        auto arg = a.a->items.find(1);
        if (cmd == a.a->items.end() || arg == a.a->items.end()) continue;
        auto syms = text_alternatives(cmd->second, kString, r.cap());
        bool is_getprop = std::any_of(syms.begin(), syms.end(), [](const Sym& s) {
          auto l = literal_of(s);
          return l && *l == "getprop";
        });
        if (is_getprop) names.push_back(arg->second);
      }
      am.names = name_syms(names, r.cap());
    }
    if (am.names.empty()) {
      discard(diags, corpus, site, "exec-not-getprop", "Runtime.exec command is not getprop");
      return out;
    }
    out.push_back(std::move(am));
    return out;
  }
  return out;
}

// Replaces parameter pieces by the argument values at each call site.
struct Expanded {
  Sym sym;
  std::string reason;
};

std::vector<Expanded> expand_params(Resolver& r, int node, const Sym& sym, int depth,
                                    const UsageConfig& config) {
  if (!has_param(sym)) return {{sym, {}}};
  auto holes = [&](std::string reason) {
    Sym out;
    for (const Piece& p : sym) {
      push_piece(out, p.kind == Piece::Kind::param ? Piece{Piece::Kind::hole, {}, -1} : p);
    }
    return std::vector<Expanded>{{std::move(out), std::move(reason)}};
  };
  if (depth >= config.depth_limit) return holes("depth-limit");
  const Corpus& corpus = r.corpus();
  auto callers = callers_of(corpus.graph, node);
  if (callers.empty()) return holes("no-callers");

  std::vector<int> slots;
  for (const Piece& p : sym) {
    if (p.kind == Piece::Kind::param &&
        std::find(slots.begin(), slots.end(), p.slot) == slots.end()) {
      slots.push_back(p.slot);
    }
  }
  const std::size_t cap = r.cap();
  std::vector<Expanded> out;
  std::set<std::string> seen;
  for (const CallerSite& cs : callers) {
    const CallGraph::Node& cn = corpus.graph.nodes[cs.caller];
    if (cn.external) continue;
    const IrInstruction& call = corpus.method_of(cs.caller).instructions[cs.site];
    // Alternatives per slot, each already expanded in the caller's context.
    std::vector<std::vector<Expanded>> per_slot;
    for (int slot : slots) {
      std::vector<Expanded> alts;
      if (slot < 0 || static_cast<std::size_t>(slot) >= call.regs.size()) {
        alts.push_back({hole_sym(), {}});
      } else {
        auto [vals, truncated] = r.values_before(cs.caller, cs.site, call.regs[slot]);
        for (const Sym& s : name_syms(vals, cap)) {
          for (Expanded& e : expand_params(r, cs.caller, s, depth + 1, config)) {
            if (truncated) {
              push_piece(e.sym, {Piece::Kind::hole, {}, -1});
              if (e.reason.empty()) e.reason = "path-limit";
            }
            alts.push_back(std::move(e));
          }
        }
        if (alts.empty()) alts.push_back({hole_sym(), {}});
      }
      per_slot.push_back(std::move(alts));
    }
    // Cartesian product over slots.
    std::vector<std::size_t> idx(slots.size(), 0);
    while (true) {
      Sym built;
      std::string reason;
      for (const Piece& p : sym) {
        if (p.kind != Piece::Kind::param) {
          push_piece(built, p);
          continue;
        }
        std::size_t k = static_cast<std::size_t>(
            std::find(slots.begin(), slots.end(), p.slot) - slots.begin());
        const Expanded& e = per_slot[k][idx[k]];
        for (const Piece& q : e.sym) push_piece(built, q);
        if (reason.empty()) reason = e.reason;
      }
      if (out.size() < cap && seen.insert(sym_key(built) + "#" + reason).second) {
        out.push_back({std::move(built), std::move(reason)});
      }
      std::size_t d = 0;
      while (d < idx.size() && ++idx[d] == per_slot[d].size()) idx[d++] = 0;
      if (d == idx.size()) break;
    }
  }
  if (out.empty()) return holes("no-callers");
  return out;
}

NameResolution to_resolution(const Sym& sym, std::string reason) {
  std::vector<NameFragment> frags;
  for (const Piece& p : sym) {
    frags.push_back(p.kind == Piece::Kind::lit ? NameFragment{false, p.text} : NameFragment{true, {}});
  }
  return NameResolution::from_fragments(std::move(frags), std::move(reason));
}

std::vector<NameResolution> finalize_names(Resolver& r, const RawSite& raw, const AccessMatch& am,
                                           const UsageConfig& config) {
  std::set<NameResolution> out;
  for (const Sym& s : am.names) {
    for (Expanded& e : expand_params(r, raw.site.node, s, 0, config)) {
      Sym sym = std::move(e.sym);
      if (am.strip_getprop) {
        constexpr std::string_view kPrefix = "getprop ";
        if (sym.empty() || sym[0].kind != Piece::Kind::lit || !sym[0].text.starts_with(kPrefix)) {
          continue;
        }
        sym[0].text.erase(0, kPrefix.size());
        if (sym[0].text.empty()) sym.erase(sym.begin());
      }
      if (am.truncated) {
        push_piece(sym, {Piece::Kind::hole, {}, -1});
        if (e.reason.empty()) e.reason = "path-limit";
      }
      out.insert(to_resolution(sym, e.reason));
    }
  }
  return {out.begin(), out.end()};
}

std::vector<std::vector<std::string>> chain_keys(const Corpus& corpus,
                                                 const std::vector<std::vector<int>>& chains) {
  std::vector<std::vector<std::string>> out;
  for (const auto& chain : chains) {
    std::vector<std::string> keys;
    for (int n : chain) keys.push_back(corpus.graph.nodes[n].ref.key());
    out.push_back(std::move(keys));
  }
  return out;
}

SiteRef make_site(const Corpus& corpus, int ci, int mi, int idx) {
  SiteRef s;
  s.class_index = ci;
  s.method_index = mi;
  s.instruction = idx;
  s.node = corpus.graph.node_of(ci, mi);
  s.class_name = corpus.classes[ci].name;
  s.method = corpus.classes[ci].methods[mi].signature;
  return s;
}

}  // namespace

// ---------------------------------------------------------------------------

const char* to_string(AccessIdiom idiom) {
  switch (idiom) {
    case AccessIdiom::direct_call: return "direct-call";
    case AccessIdiom::reflection_inline: return "reflection-inline";
    case AccessIdiom::reflection_static_field: return "reflection-static-field";
    case AccessIdiom::reflection_wrapper: return "reflection-wrapper";
    case AccessIdiom::exec_getprop: return "exec-getprop";
    case AccessIdiom::settings_api: return "settings-api";
  }
  return "direct-call";
}

const char* to_string(UsageKind kind) {
  return kind == UsageKind::property ? "property" : "setting";
}

const char* to_string(Operation op) {
  switch (op) {
    case Operation::get: return "get";
    case Operation::set: return "set";
    case Operation::put: return "put";
  }
  return "get";
}

const char* to_string(SettingNamespace ns) {
  switch (ns) {
    case SettingNamespace::System: return "System";
    case SettingNamespace::Secure: return "Secure";
    case SettingNamespace::Global: return "Global";
  }
  return "System";
}

std::optional<SettingNamespace> parse_namespace(std::string_view text) {
  if (text == "System") return SettingNamespace::System;
  if (text == "Secure") return SettingNamespace::Secure;
  if (text == "Global") return SettingNamespace::Global;
  return std::nullopt;
}

const char* to_string(NameResolution::Status s) {
  switch (s) {
    case NameResolution::Status::resolved: return "resolved";
    case NameResolution::Status::partial: return "partial";
    case NameResolution::Status::unresolved: return "unresolved";
  }
  return "unresolved";
}

const char* to_string(SiteCategory c) {
  switch (c) {
    case SiteCategory::api_invoke: return "api-invoke";
    case SiteCategory::reflective_field: return "reflective-field";
    case SiteCategory::reflective_return: return "reflective-return";
  }
  return "api-invoke";
}

NameResolution NameResolution::make_resolved(std::string value) {
  NameResolution r;
  r.status = value.empty() ? Status::unresolved : Status::resolved;
  r.value = std::move(value);
  if (r.status == Status::unresolved) r.reason = "empty-name";
  return r;
}

NameResolution NameResolution::from_fragments(std::vector<NameFragment> pieces, std::string reason) {
  std::vector<NameFragment> merged;
  for (auto& p : pieces) {
    if (!p.hole && p.text.empty()) continue;
    if (!merged.empty() && merged.back().hole == p.hole) {
      if (!p.hole) merged.back().text += p.text;
      continue;
    }
    merged.push_back(std::move(p));
  }
  NameResolution r;
  r.reason = std::move(reason);
  bool any_hole = std::any_of(merged.begin(), merged.end(), [](const auto& f) { return f.hole; });
  bool any_lit = std::any_of(merged.begin(), merged.end(), [](const auto& f) { return !f.hole; });
  if (!any_hole && any_lit) {
    r.status = Status::resolved;
    r.value = merged.front().text;
  } else if (any_hole && any_lit) {
    r.status = Status::partial;
    r.fragments = std::move(merged);
  } else {
    r.status = Status::unresolved;
    if (r.reason.empty()) r.reason = "untraceable";
  }
  return r;
}

NameResolution NameResolution::make_unresolved(std::string reason) {
  NameResolution r;
  r.reason = std::move(reason);
  return r;
}

std::vector<std::string> NameResolution::literals() const {
  if (status == Status::resolved) return {value};
  std::vector<std::string> out;
  for (const auto& f : fragments) {
    if (!f.hole) out.push_back(f.text);
  }
  return out;
}

std::string NameResolution::display() const {
  switch (status) {
    case Status::resolved: return value;
    case Status::partial: {
      std::string out;
      for (const auto& f : fragments) out += f.hole ? "{?}" : f.text;
      return out;
    }
    case Status::unresolved: return "{?}";
  }
  return "{?}";
}

bool RawSite::is_access_point() const {
  if (category != SiteCategory::api_invoke) return false;
  return !target.starts_with("Ljava/lang/Class;->forName(");
}

const IrClass* Corpus::find_class(std::string_view name, int unit) const {
  int i = find_class_index(name, unit);
  return i < 0 ? nullptr : &classes[i];
}

int Corpus::find_class_index(std::string_view name, int unit) const {
  auto it = class_by_name.find(std::string(name));
  if (it == class_by_name.end() || it->second.empty()) return -1;
  for (int i : it->second) {
    if (classes[i].unit == unit) return i;
  }
  return it->second.front();
}

const IrMethod& Corpus::method_of(int node) const {
  const auto& n = graph.nodes.at(node);
  return classes.at(n.class_index).methods.at(n.method_index);
}

const IrClass& Corpus::class_of(int node) const {
  return classes.at(graph.nodes.at(node).class_index);
}

Corpus make_corpus(std::vector<IrClass> classes) {
  Corpus c;
  c.classes = std::move(classes);
  c.graph = build_call_graph(c.classes);
  for (std::size_t i = 0; i < c.classes.size(); ++i) {
    c.class_by_name[c.classes[i].name].push_back(static_cast<int>(i));
  }
  return c;
}

std::vector<RawSite> detect_access_sites(const Corpus& corpus) {
  std::vector<RawSite> out;
  for (std::size_t ci = 0; ci < corpus.classes.size(); ++ci) {
    const IrClass& cls = corpus.classes[ci];
    for (std::size_t mi = 0; mi < cls.methods.size(); ++mi) {
      const IrMethod& m = cls.methods[mi];
      int node = corpus.graph.node_of(static_cast<int>(ci), static_cast<int>(mi));
      for (const IrInstruction& insn : m.instructions) {
        std::optional<SiteCategory> cat;
        std::string target;
        if (insn.op == Opcode::invoke) {
          const MethodRef& t = *insn.method;
          if (t.owner == kSystemProperties || is_settings_accessor(t) || is_forname(t) ||
              is_method_invoke(t) || is_runtime_exec(t)) {
            cat = SiteCategory::api_invoke;
          } else if (is_reflective_type(t.ret)) {
            auto callee = corpus.graph.callee_at(node, insn.index);
            if (callee && !corpus.graph.nodes[*callee].external) {
              cat = SiteCategory::reflective_return;
            }
          }
          target = t.key();
        } else if ((insn.op == Opcode::sget || insn.op == Opcode::sput || insn.op == Opcode::iget ||
                    insn.op == Opcode::iput) &&
                   is_reflective_type(insn.field->type)) {
          cat = SiteCategory::reflective_field;
          target = insn.field->key();
        }
        if (!cat) continue;
        RawSite s;
        s.site = make_site(corpus, static_cast<int>(ci), static_cast<int>(mi), insn.index);
        s.category = *cat;
        s.target = std::move(target);
        out.push_back(std::move(s));
      }
    }
  }
  return out;
}

std::optional<AccessIdiom> classify_idiom(const RawSite& site, const Corpus& corpus,
                                          const UsageConfig& config, Diagnostics& diags) {
  Resolver r(corpus, config);
  auto matches = match_access(site, r, &diags);
  if (matches.empty()) return std::nullopt;
  return matches.front().idiom;
}

std::vector<NameResolution> resolve_name(const RawSite& site, const Corpus& corpus,
                                         const UsageConfig& config) {
  Resolver r(corpus, config);
  std::set<NameResolution> out;
  for (const AccessMatch& am : match_access(site, r, nullptr)) {
    for (auto& n : finalize_names(r, site, am, config)) out.insert(std::move(n));
  }
  return {out.begin(), out.end()};
}

std::vector<std::vector<int>> backtrack_context(const CallGraph& graph, int node,
                                                const UsageConfig& config) {
  std::vector<std::vector<int>> chains;
  const int limit = std::max(1, config.depth_limit);
  std::vector<int> path{node};  // callee-first while searching
  std::function<void()> dfs = [&] {
    if (static_cast<int>(chains.size()) >= config.max_chains) return;
    int cur = path.back();
    std::vector<int> callers;
    if (static_cast<int>(path.size()) < limit) {
      for (int e : graph.incoming(cur)) {
        int c = graph.edges[e].caller;
        if (std::find(path.begin(), path.end(), c) == path.end() &&
            std::find(callers.begin(), callers.end(), c) == callers.end()) {
          callers.push_back(c);
        }
      }
    }
    if (callers.empty()) {
      chains.emplace_back(path.rbegin(), path.rend());
      return;
    }
    std::sort(callers.begin(), callers.end(), [&](int a, int b) {
      return std::make_pair(graph.nodes[a].ref.key(), a) < std::make_pair(graph.nodes[b].ref.key(), b);
    });
    for (int c : callers) {
      path.push_back(c);
      dfs();
      path.pop_back();
    }
  };
  dfs();
  std::sort(chains.begin(), chains.end(), [&](const auto& a, const auto& b) {
    return std::lexicographical_compare(
        a.begin(), a.end(), b.begin(), b.end(),
        [&](int x, int y) { return graph.nodes[x].ref.key() < graph.nodes[y].ref.key(); });
  });
  return chains;
}

std::vector<Usage> extract_usages(const Corpus& corpus, const UsageConfig& config,
                                  Diagnostics& diags) {
  std::vector<RawSite> sites = detect_access_sites(corpus);
  // Group by class so each worker owns one resolver per class; caches never
  // cross classes, which keeps results independent of scheduling.
  std::vector<std::vector<std::size_t>> by_class(corpus.classes.size());
  for (std::size_t i = 0; i < sites.size(); ++i) {
    if (sites[i].is_access_point()) {
      by_class[static_cast<std::size_t>(sites[i].site.class_index)].push_back(i);
    }
  }
  std::vector<std::size_t> work;
  for (std::size_t c = 0; c < by_class.size(); ++c) {
    if (!by_class[c].empty()) work.push_back(c);
  }
  std::vector<std::vector<Usage>> results(work.size());
  std::vector<Diagnostics> result_diags(work.size());

  parallel_for(work.size(), config.threads, [&](std::size_t w) {
    Resolver r(corpus, config);
    for (std::size_t si : by_class[work[w]]) {
      const RawSite& raw = sites[si];
      auto matches = match_access(raw, r, &result_diags[w]);
      if (matches.empty()) continue;
      auto chains = chain_keys(corpus, backtrack_context(corpus.graph, raw.site.node, config));
      const IrClass& cls = corpus.classes[raw.site.class_index];
      for (const AccessMatch& am : matches) {
        for (NameResolution& name : finalize_names(r, raw, am, config)) {
          Usage u;
          u.kind = am.kind;
          u.site = raw.site;
          u.idiom = am.idiom;
          u.operation = am.operation;
          u.ns = am.ns;
          u.name = std::move(name);
          u.api = am.api;
          u.call_chains = chains;
          u.source_path = cls.source_path;
          results[w].push_back(std::move(u));
        }
      }
    }
  });

  std::vector<Usage> out;
  for (std::size_t w = 0; w < work.size(); ++w) {
    std::move(results[w].begin(), results[w].end(), std::back_inserter(out));
    std::move(result_diags[w].begin(), result_diags[w].end(), std::back_inserter(diags));
  }
  auto key = [](const Usage& u) {
    return std::make_tuple(std::cref(u.source_path), std::cref(u.site.class_name),
                           u.site.method.key(), u.site.instruction, static_cast<int>(u.kind),
                           std::cref(u.name), static_cast<int>(u.idiom), u.api);
  };
  std::stable_sort(out.begin(), out.end(),
                   [&](const Usage& a, const Usage& b) { return key(a) < key(b); });
  out.erase(std::unique(out.begin(), out.end(),
                        [&](const Usage& a, const Usage& b) { return key(a) == key(b); }),
            out.end());
  return out;
}

}  // namespace romid
