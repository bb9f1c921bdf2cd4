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

// Concrete interpreter for fixture code. It executes entry methods with given
// arguments and records every property/setting access it actually performs,
// together with the name string at that moment. It shares nothing with the
// extractor beyond the parsed IR.

#pragma once

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <map>
#include <memory>
#include <set>
#include <stdexcept>
#include <string>
#include <tuple>
#include <vector>

#include "romid/ir.hpp"

namespace romid::testing {

struct VmAccess {
  std::string class_name;
  std::string method_key;
  int instruction = 0;
  std::string kind;  // "property" or "setting"
  std::string operation;
  std::string name;

  friend auto operator<=>(const VmAccess&, const VmAccess&) = default;
};

class OracleVm {
 public:
  struct Object;
  struct Val {
    enum class K { null, num, str, obj } k = K::null;
    std::int64_t n = 0;
    std::string s;
    std::shared_ptr<Object> o;

    static Val num(std::int64_t v) { return {K::num, v, {}, nullptr}; }
    static Val str(std::string v) { return {K::str, 0, std::move(v), nullptr}; }
  };
  struct Object {
    std::string type;  // descriptor, or "#class", "#method", "#runtime"
    std::string text;  // builder contents, class name, method name
    std::string owner;  // reflective method owner
    std::vector<Val> items;
    std::map<std::string, Val> fields;
  };

  explicit OracleVm(const std::vector<IrClass>& classes) : classes_(classes) {
    for (std::size_t i = 0; i < classes_.size(); ++i) by_name_.emplace(classes_[i].name, i);
  }

  // Runs `name_desc` ("pick(I)Ljava/lang/String;") of `cls`. Instance
  // methods get a fresh receiver built with its no-argument constructor.
  void run(const std::string& cls, const std::string& name_desc, std::vector<Val> args) {
    const IrMethod* m = lookup(cls, name_desc);
    if (!m) throw std::runtime_error("no method " + cls + "->" + name_desc);
    init_class(cls);
    if (!m->is_static()) {
      auto self = std::make_shared<Object>();
      self->type = cls;
      Val recv{Val::K::obj, 0, {}, self};
      if (const IrMethod* ctor = lookup(cls, "<init>()V")) exec(cls, *ctor, {recv}, 0);
      args.insert(args.begin(), recv);
    }
    exec(cls, *m, std::move(args), 0);
  }

  const std::set<VmAccess>& accesses() const { return accesses_; }

 private:
  const IrMethod* lookup(const std::string& cls, const std::string& name_desc) const {
    auto it = by_name_.find(cls);
    if (it == by_name_.end()) return nullptr;
    const IrClass& c = classes_[it->second];
    for (const auto& m : c.methods) {
      if (m.signature.name + m.signature.descriptor() == name_desc) return &m;
    }
    return c.super_name.empty() ? nullptr : lookup(c.super_name, name_desc);
  }

  void init_class(const std::string& cls) {
    auto it = by_name_.find(cls);
    if (it == by_name_.end() || !initialized_.insert(cls).second) return;
    const IrClass& c = classes_[it->second];
    for (const auto& f : c.fields) {
      if (f.is_static() && f.string_value) statics_[cls + "." + f.name] = Val::str(*f.string_value);
    }
    if (const IrMethod* m = lookup(cls, "<clinit>()V")) exec(cls, *m, {}, 0);
  }

  static std::string trim(std::string s) {
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.pop_back();
    std::size_t i = 0;
    while (i < s.size() && (s[i] == ' ' || s[i] == '\t')) ++i;
    return s.substr(i);
  }

  static std::vector<std::string> operands(const std::string& raw) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : raw) {
      if (c == ',') {
        out.push_back(trim(cur));
        cur.clear();
      } else {
        cur += c;
      }
    }
    if (!trim(cur).empty()) out.push_back(trim(cur));
    return out;
  }

  static int reg_of(const std::string& tok, const IrMethod& m) {
    int n = std::stoi(tok.substr(1));
    return tok[0] == 'p' ? m.registers - m.ins + n : n;
  }

  static std::string as_text(const Val& v) {
    switch (v.k) {
      case Val::K::null: return "null";
      case Val::K::num: return std::to_string(v.n);
      case Val::K::str: return v.s;
      case Val::K::obj: return v.o->text;
    }
    return {};
  }

  static std::string java_name(const std::string& descriptor) {
    std::string s = descriptor.substr(1, descriptor.size() - 2);
    for (char& c : s) {
      if (c == '/') c = '.';
    }
    return s;
  }

  void record(const std::string& cls, const IrMethod& m, int insn, std::string kind, std::string op,
              const Val& name) {
    if (name.k != Val::K::str) return;
    accesses_.insert({cls, m.signature.key(), insn, std::move(kind), std::move(op), name.s});
  }

  Val call(const std::string& cls, const IrMethod& m, const IrInstruction& insn, std::vector<Val> args,
           int depth) {
    const MethodRef& r = *insn.method;
    const std::string& owner = r.owner;
    auto arg = [&](std::size_t i) { return i < args.size() ? args[i] : Val{}; };
    if (owner == "Ljava/lang/StringBuilder;" || owner == "Ljava/lang/StringBuffer;") {
      Val self = arg(0);
      if (self.k != Val::K::obj) return {};
      if (r.name == "<init>") {
        self.o->text = args.size() > 1 && r.params[0] == "Ljava/lang/String;" ? as_text(arg(1)) : "";
        return {};
      }
      if (r.name == "append") {
        self.o->text += as_text(arg(1));
        return self;
      }
      if (r.name == "toString") return Val::str(self.o->text);
      return {};
    }
    if (owner == "Ljava/lang/String;") {
      if (r.name == "concat") return Val::str(as_text(arg(0)) + as_text(arg(1)));
      if (r.name == "valueOf") return Val::str(as_text(arg(0)));
      if (r.name == "toString" || r.name == "intern") return arg(0);
      return {};
    }
    if (owner == "Ljava/lang/Class;" && r.name == "forName") {
      auto o = std::make_shared<Object>();
      o->type = "#class";
      o->text = as_text(arg(0));
      return {Val::K::obj, 0, {}, o};
    }
    if (owner == "Ljava/lang/Class;" && (r.name == "getMethod" || r.name == "getDeclaredMethod")) {
      if (arg(0).k != Val::K::obj) return {};
      auto o = std::make_shared<Object>();
      o->type = "#method";
      o->owner = arg(0).o->text;
      o->text = as_text(arg(1));
      return {Val::K::obj, 0, {}, o};
    }
    if (owner == "Ljava/lang/reflect/Method;" && r.name == "invoke") {
      Val target = arg(0);
      Val array = arg(2);
      if (target.k == Val::K::obj && target.o->owner == "android.os.SystemProperties" &&
          array.k == Val::K::obj && !array.o->items.empty()) {
        record(cls, m, insn.index, "property", target.o->text == "set" ? "set" : "get", array.o->items[0]);
      }
      return Val::str("");
    }
    if (owner == "Landroid/os/SystemProperties;") {
      if (!r.params.empty() && r.params[0] == "Ljava/lang/String;") {
        record(cls, m, insn.index, "property", r.name == "set" ? "set" : "get", arg(0));
      }
      return r.ret == "Ljava/lang/String;" ? Val::str("") : Val::num(0);
    }
    if (owner == "Landroid/provider/Settings$System;" || owner == "Landroid/provider/Settings$Secure;" ||
        owner == "Landroid/provider/Settings$Global;") {
      if (r.params.size() >= 2 && r.params[0] == "Landroid/content/ContentResolver;" &&
          r.params[1] == "Ljava/lang/String;" && (r.name.starts_with("get") || r.name.starts_with("put"))) {
        record(cls, m, insn.index, "setting", r.name.starts_with("put") ? "put" : "get", arg(1));
      }
      return {};
    }
    if (owner == "Ljava/lang/Runtime;") {
      if (r.name == "getRuntime") {
        auto o = std::make_shared<Object>();
        o->type = "#runtime";
        return {Val::K::obj, 0, {}, o};
      }
      if (r.name == "exec") {
        Val c = arg(1);
        if (c.k == Val::K::str && c.s.starts_with("getprop ")) {
          record(cls, m, insn.index, "property", "get", Val::str(c.s.substr(8)));
        } else if (c.k == Val::K::obj && c.o->items.size() >= 2 && c.o->items[0].k == Val::K::str &&
                   c.o->items[0].s == "getprop") {
          record(cls, m, insn.index, "property", "get", c.o->items[1]);
        }
      }
      return {};
    }
    if (by_name_.count(owner)) {
      std::string target_cls = owner;
      if (!args.empty() && insn.mnemonic.starts_with("invoke-virtual") && args[0].k == Val::K::obj &&
          by_name_.count(args[0].o->type)) {
        target_cls = args[0].o->type;
      }
      const IrMethod* callee = lookup(target_cls, r.name + r.descriptor());
      if (!callee) return {};
      init_class(owner);
      return exec(owner, *callee, std::move(args), depth + 1);
    }
    return {};
  }

  Val exec(const std::string& cls, const IrMethod& m, std::vector<Val> args, int depth) {
    if (depth > 32) throw std::runtime_error("oracle vm: call depth exceeded");
    std::vector<Val> regs(static_cast<std::size_t>(m.registers));
    int first = m.registers - m.ins;
    for (std::size_t i = 0; i < args.size() && first + static_cast<int>(i) < m.registers; ++i) {
      regs[first + i] = args[i];
    }
    Val result;
    std::size_t pc = 0;
    std::size_t steps = 0;
    while (pc < m.instructions.size()) {
      if (++steps > 100000) throw std::runtime_error("oracle vm: step limit");
      const IrInstruction& insn = m.instructions[pc];
      const std::string& mn = insn.mnemonic;
      auto R = [&](std::size_t i) -> Val& { return regs.at(insn.regs.at(i)); };
      std::size_t next = pc + 1;
      switch (insn.op) {
        case Opcode::const_string: R(0) = Val::str(insn.literal); break;
        case Opcode::const_number: R(0) = Val::num(insn.number); break;
        case Opcode::const_class: {
          auto o = std::make_shared<Object>();
          o->type = "#class";
          o->text = java_name(insn.literal);
          R(0) = {Val::K::obj, 0, {}, o};
          break;
        }
        case Opcode::move: R(0) = R(1); break;
        case Opcode::move_result: R(0) = result; break;
        case Opcode::new_array: {
          auto o = std::make_shared<Object>();
          o->type = insn.literal;
          o->items.resize(static_cast<std::size_t>(std::max<std::int64_t>(R(1).n, 0)));
          R(0) = {Val::K::obj, 0, {}, o};
          break;
        }
        case Opcode::filled_new_array: {
          auto o = std::make_shared<Object>();
          o->type = insn.literal;
          for (std::size_t i = 0; i < insn.regs.size(); ++i) o->items.push_back(R(i));
          result = {Val::K::obj, 0, {}, o};
          break;
        }
        case Opcode::aget: {
          Val a = R(1);
          std::int64_t i = R(2).n;
          R(0) = a.k == Val::K::obj && i >= 0 && i < static_cast<std::int64_t>(a.o->items.size()) ? a.o->items[i]
                                                                                                : Val{};
          break;
        }
        case Opcode::aput: {
          Val a = R(1);
          std::int64_t i = R(2).n;
          if (a.k == Val::K::obj && i >= 0 && i < static_cast<std::int64_t>(a.o->items.size())) {
            a.o->items[i] = R(0);
          }
          break;
        }
        case Opcode::sget:
          init_class(insn.field->owner);
          R(0) = statics_[insn.field->owner + "." + insn.field->name];
          break;
        case Opcode::sput:
          init_class(insn.field->owner);
          statics_[insn.field->owner + "." + insn.field->name] = R(0);
          break;
        case Opcode::iget: {
          Val o = R(1);
          R(0) = o.k == Val::K::obj ? o.o->fields[insn.field->name] : Val{};
          break;
        }
        case Opcode::iput: {
          Val o = R(1);
          if (o.k == Val::K::obj) o.o->fields[insn.field->name] = R(0);
          break;
        }
        case Opcode::invoke: {
          std::vector<Val> call_args;
          for (std::size_t i = 0; i < insn.regs.size(); ++i) call_args.push_back(R(i));
          result = call(cls, m, insn, std::move(call_args), depth);
          break;
        }
        case Opcode::return_void: return {};
        case Opcode::return_value: return R(0);
        case Opcode::jump: next = insn.targets.at(0); break;
        case Opcode::branch: {
          auto value = [](const Val& v) -> std::int64_t {
            if (v.k == Val::K::num) return v.n;
            return v.k == Val::K::null ? 0 : 1;
          };
          std::int64_t a = value(R(0));
          std::int64_t b = insn.regs.size() > 1 ? value(R(1)) : 0;
          std::string cond = mn.substr(3);
          if (cond.ends_with("z")) cond.pop_back();
          bool taken = cond == "eq" ? a == b
                       : cond == "ne" ? a != b
                       : cond == "lt" ? a < b
                       : cond == "ge" ? a >= b
                       : cond == "gt" ? a > b
                                      : a <= b;
          if (taken) next = insn.targets.at(0);
          break;
        }
        default: {
          auto ops = operands(insn.raw);
          if (mn == "new-instance") {
            auto o = std::make_shared<Object>();
            o->type = ops.at(1);
            regs.at(reg_of(ops.at(0), m)) = {Val::K::obj, 0, {}, o};
          } else if (mn == "array-length") {
            Val a = regs.at(reg_of(ops.at(1), m));
            regs.at(reg_of(ops.at(0), m)) =
                Val::num(a.k == Val::K::obj ? static_cast<std::int64_t>(a.o->items.size()) : 0);
          } else if (mn.starts_with("add-int/lit")) {
            regs.at(reg_of(ops.at(0), m)) =
                Val::num(regs.at(reg_of(ops.at(1), m)).n + std::stoll(ops.at(2), nullptr, 0));
          } else if (mn == "check-cast" || mn == "nop" || mn.starts_with("monitor-")) {
            // no effect on values
          } else if (!ops.empty() && (ops[0][0] == 'v' || ops[0][0] == 'p') && ops[0].size() > 1 &&
                     std::isdigit(static_cast<unsigned char>(ops[0][1]))) {
            regs.at(reg_of(ops[0], m)) = {};
          }
          break;
        }
      }
      pc = next;
    }
    return {};
  }

  const std::vector<IrClass>& classes_;
  std::map<std::string, std::size_t> by_name_;
  std::set<std::string> initialized_;
  std::map<std::string, Val> statics_;
  std::set<VmAccess> accesses_;
};

}  // namespace romid::testing
