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

#include "romid/service.hpp"

#include <algorithm>
#include <deque>
#include <map>
#include <set>

#include "romid/parallel.hpp"

namespace romid {

namespace {

constexpr std::uint8_t kDirect = 1;
constexpr std::uint8_t kHelper = 2;
constexpr std::uint8_t kAggregate = 4;

struct Taint {
  std::uint8_t flags = 0;
  std::set<int> sources;  // candidate indices

  bool empty() const { return flags == 0; }
  bool join(const Taint& o) {
    bool changed = (flags | o.flags) != flags;
    flags |= o.flags;
    for (int s : o.sources) changed |= sources.insert(s).second;
    return changed;
  }
};

Taint with_flag(Taint t, std::uint8_t extra) {
  if (!t.empty()) t.flags |= extra;
  return t;
}

struct Frame {
  std::vector<Taint> regs;
  Taint pending;

  bool join(const Frame& o) {
    bool changed = pending.join(o.pending);
    for (std::size_t i = 0; i < regs.size() && i < o.regs.size(); ++i) changed |= regs[i].join(o.regs[i]);
    return changed;
  }
};

bool is_builder(std::string_view owner) {
  return owner == "Ljava/lang/StringBuilder;" || owner == "Ljava/lang/StringBuffer;";
}

bool is_put_container(std::string_view owner) {
  static const std::set<std::string, std::less<>> kOwners = {
      "Lorg/json/JSONObject;",    "Lorg/json/JSONArray;",      "Ljava/util/Map;",
      "Ljava/util/HashMap;",      "Ljava/util/LinkedHashMap;", "Ljava/util/TreeMap;",
      "Ljava/util/Hashtable;",    "Landroid/os/Bundle;",       "Landroid/content/ContentValues;",
      "Landroid/util/ArrayMap;",  "Ljava/util/List;",          "Ljava/util/ArrayList;"};
  return kOwners.count(owner) != 0;
}

bool is_put_call(const MethodRef& m) {
  return is_put_container(m.owner) &&
         (m.name == "put" || m.name == "add" || m.name == "accumulate" ||
          (m.name.starts_with("put") && m.name.size() > 3));
}

bool is_permission_check(const MethodRef& m) {
  return m.name == "enforceCallingPermission" || m.name == "enforceCallingOrSelfPermission" ||
         m.name == "checkCallingPermission" || m.name == "checkCallingOrSelfPermission" ||
         m.name == "enforcePermission";
}

class TaintAnalysis {
 public:
  TaintAnalysis(const Corpus& corpus, std::span<const SensitiveCandidate> candidates,
                const ServiceConfig& config)
      : corpus_(corpus), config_(config) {
    for (std::size_t i = 0; i < candidates.size(); ++i) {
      const Usage& u = candidates[i].usage;
      if (u.kind != UsageKind::property || u.operation != Operation::get) continue;
      sources_[{u.site.node, u.site.instruction}].push_back(static_cast<int>(i));
    }
  }

  // Taint on values returned by `node`, with helpers explored to `depth`.
  Taint returned(int node, int depth) {
    auto key = std::make_pair(node, depth);
    if (auto it = summary_.find(key); it != summary_.end()) return it->second;
    if (std::find(stack_.begin(), stack_.end(), node) != stack_.end()) return {};
    stack_.push_back(node);
    Taint t = analyze(node, depth);
    stack_.pop_back();
    summary_[key] = t;
    return t;
  }

 private:
  Taint analyze(int node, int depth) {
    const IrMethod& m = corpus_.method_of(node);
    const int n = static_cast<int>(m.instructions.size());
    Taint ret;
    if (n == 0) return ret;
    std::vector<Frame> in(n);
    std::vector<bool> seen(n, false);
    for (auto& f : in) f.regs.assign(static_cast<std::size_t>(std::max(m.registers, 0)), {});
    std::deque<int> work{0};
    seen[0] = true;
    while (!work.empty()) {
      int i = work.front();
      work.pop_front();
      Frame f = in[i];
      const IrInstruction& insn = m.instructions[i];
      transfer(node, insn, f, depth, ret);
      for (int s : successors(m, i)) {
        if (!seen[s] || in[s].join(f)) {
          if (!seen[s]) {
            in[s] = f;
            seen[s] = true;
          }
          work.push_back(s);
        }
      }
    }
    return ret;
  }

  static std::vector<int> successors(const IrMethod& m, int i) {
    const IrInstruction& insn = m.instructions[i];
    const int n = static_cast<int>(m.instructions.size());
    std::vector<int> out;
    if (insn.op == Opcode::return_value || insn.op == Opcode::return_void || insn.mnemonic == "throw") {
      return out;
    }
    if (insn.op == Opcode::jump) {
      out.push_back(insn.targets[0]);
    } else {
      out.push_back(i + 1);
      if (insn.op == Opcode::branch) out.push_back(insn.targets[0]);
    }
    std::erase_if(out, [n](int s) { return s < 0 || s >= n; });
    return out;
  }

  Taint get(const Frame& f, const IrInstruction& insn, std::size_t k) const {
    if (k >= insn.regs.size()) return {};
    int r = insn.regs[k];
    return (r >= 0 && static_cast<std::size_t>(r) < f.regs.size()) ? f.regs[r] : Taint{};
  }
  void put(Frame& f, int r, Taint t) const {
    if (r >= 0 && static_cast<std::size_t>(r) < f.regs.size()) f.regs[r] = std::move(t);
  }

  void transfer(int node, const IrInstruction& insn, Frame& f, int depth, Taint& ret) {
    switch (insn.op) {
      case Opcode::move:
        put(f, insn.regs[0], get(f, insn, 1));
        return;
      case Opcode::move_result:
        put(f, insn.regs[0], f.pending);
        f.pending = {};
        return;
      case Opcode::return_value:
        ret.join(get(f, insn, 0));
        return;
      case Opcode::aget:
        put(f, insn.regs[0], get(f, insn, 1));
        return;
      case Opcode::aput: {
        Taint arr = get(f, insn, 1);
        arr.join(get(f, insn, 0));
        put(f, insn.regs[1], arr);
        return;
      }
      case Opcode::invoke:
        f.pending = invoke(node, insn, f, depth);
        return;
      case Opcode::filled_new_array: {
        Taint t;
        for (std::size_t k = 0; k < insn.regs.size(); ++k) t.join(get(f, insn, k));
        f.pending = t;
        return;
      }
      case Opcode::sput:
      case Opcode::iput:
      case Opcode::branch:
      case Opcode::jump:
      case Opcode::return_void:
        return;
      default:
        for (int r : insn.regs) put(f, r, {});
        if (insn.op == Opcode::const_string || insn.op == Opcode::const_number ||
            insn.op == Opcode::const_class || insn.op == Opcode::sget || insn.op == Opcode::iget ||
            insn.op == Opcode::new_array) {
          put(f, insn.regs[0], {});
        }
        return;
    }
  }

  Taint invoke(int node, const IrInstruction& insn, Frame& f, int depth) {
    if (auto it = sources_.find({node, insn.index}); it != sources_.end()) {
      Taint t;
      t.flags = kDirect;
      t.sources.insert(it->second.begin(), it->second.end());
      return t;
    }
    const MethodRef& m = *insn.method;
    if (is_builder(m.owner)) {
      if (m.name == "<init>" || m.name == "append") {
        Taint recv = get(f, insn, 0);
        for (std::size_t k = 1; k < insn.regs.size(); ++k) recv.join(with_flag(get(f, insn, k), kAggregate));
        put(f, insn.regs[0], recv);
        return m.name == "append" ? recv : Taint{};
      }
      if (m.name == "toString") return get(f, insn, 0);
      return {};
    }
    if (is_put_call(m)) {
      Taint recv = get(f, insn, 0);
      for (std::size_t k = 1; k < insn.regs.size(); ++k) recv.join(with_flag(get(f, insn, k), kAggregate));
      put(f, insn.regs[0], recv);
      return recv;
    }
    if (m.name == "toString" && !insn.regs.empty()) return get(f, insn, 0);
    if (m.owner == "Ljava/lang/String;") {
      Taint t;
      if (m.name == "concat") {
        t.join(with_flag(get(f, insn, 0), kAggregate));
        t.join(with_flag(get(f, insn, 1), kAggregate));
      } else if (m.name == "valueOf" || m.name == "trim" || m.name == "toUpperCase" ||
                 m.name == "toLowerCase") {
        for (std::size_t k = 0; k < insn.regs.size(); ++k) t.join(get(f, insn, k));
      }
      return t;
    }
    if (m.name == "format" && m.owner == "Ljava/lang/String;") return {};
    if (depth < config_.helper_depth) {
      auto callee = corpus_.graph.callee_at(node, insn.index);
      if (callee && !corpus_.graph.nodes[*callee].external) {
        Taint t = returned(*callee, depth + 1);
        if (!t.empty()) {
          t.flags = static_cast<std::uint8_t>(kHelper | (t.flags & kAggregate));
          return t;
        }
      }
    }
    return {};
  }

  const Corpus& corpus_;
  const ServiceConfig& config_;
  std::map<std::pair<int, int>, std::vector<int>> sources_;
  std::map<std::pair<int, int>, Taint> summary_;
  std::vector<int> stack_;
};

FlowKind kind_of(std::uint8_t flags) {
  if (flags & kAggregate) return FlowKind::via_aggregate;
  if (flags & kHelper) return FlowKind::via_helper_return;
  return FlowKind::direct_return;
}

}  // namespace

const char* to_string(FlowKind k) {
  switch (k) {
    case FlowKind::direct_return: return "direct-return";
    case FlowKind::via_helper_return: return "via-helper-return";
    case FlowKind::via_aggregate: return "via-aggregate";
  }
  return "direct-return";
}

std::vector<int> find_service_classes(const Corpus& corpus) {
  std::vector<int> out;
  for (std::size_t i = 0; i < corpus.classes.size(); ++i) {
    const IrClass* cur = &corpus.classes[i];
    std::set<std::string> visited{cur->name};
    bool service = false;
    while (cur && !cur->super_name.empty()) {
      const std::string& super = cur->super_name;
      if (super == kSystemServiceClass || super.ends_with("$Stub;")) {
        service = true;
        break;
      }
      if (!visited.insert(super).second) break;
      cur = corpus.find_class(super, cur->unit);
    }
    if (service) out.push_back(static_cast<int>(i));
  }
  return out;
}

std::vector<ServiceLeakFinding> find_leaking_methods(const Corpus& corpus, int class_index,
                                                     std::span<const SensitiveCandidate> candidates,
                                                     Diagnostics& diags,
                                                     const ServiceConfig& config) {
  std::vector<ServiceLeakFinding> out;
  const IrClass& cls = corpus.classes.at(class_index);
  TaintAnalysis analysis(corpus, candidates, config);
  for (std::size_t mi = 0; mi < cls.methods.size(); ++mi) {
    const IrMethod& m = cls.methods[mi];
    if (m.access.has(AccessFlag::kConstructor) || m.access.has(AccessFlag::kClassInitializer)) {
      continue;
    }
    int node = corpus.graph.node_of(class_index, static_cast<int>(mi));
    Taint t = analysis.returned(node, 0);
    if (t.empty()) continue;
    bool is_public = m.access.has(AccessFlag::kPublic);
    if (!is_public) {
      diags.push_back({Severity::info, "non-public-service-flow",
                       "sensitive value returned by non-public " + m.signature.key(),
                       cls.source_path.empty() ? cls.name : cls.source_path});
      continue;
    }
    bool check = std::any_of(m.instructions.begin(), m.instructions.end(), [](const IrInstruction& i) {
      return i.op == Opcode::invoke && is_permission_check(*i.method);
    });
    for (int s : t.sources) {
      ServiceLeakFinding f;
      f.service_class = cls.name;
      f.method = m.signature;
      f.candidate_index = static_cast<std::size_t>(s);
      f.property_name = candidates[s].usage.name.display();
      f.flow_kind = kind_of(t.flags);
      f.is_public = true;
      f.permission_check_seen = check;
      out.push_back(std::move(f));
    }
  }
  return out;
}

std::vector<ServiceLeakFinding> find_service_channels(const Corpus& corpus,
                                                      std::span<const SensitiveCandidate> candidates,
                                                      Diagnostics& diags,
                                                      const ServiceConfig& config,
                                                      unsigned threads) {
  std::vector<int> services = find_service_classes(corpus);
  std::vector<std::vector<ServiceLeakFinding>> found(services.size());
  std::vector<Diagnostics> found_diags(services.size());
  parallel_for(services.size(), threads, [&](std::size_t i) {
    found[i] = find_leaking_methods(corpus, services[i], candidates, found_diags[i], config);
  });
  std::vector<ServiceLeakFinding> out;
  for (std::size_t i = 0; i < services.size(); ++i) {
    out.insert(out.end(), found[i].begin(), found[i].end());
    diags.insert(diags.end(), found_diags[i].begin(), found_diags[i].end());
  }
  std::stable_sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
    return std::make_tuple(a.service_class, a.method.key(), a.candidate_index) <
           std::make_tuple(b.service_class, b.method.key(), b.candidate_index);
  });
  return out;
}

}  // namespace romid
