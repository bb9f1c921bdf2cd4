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

// Minimal instruction-level IR for disassembled Dalvik (smali) text and the
// static call graph over it. See docs/smali-subset.md for the accepted grammar.

#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

namespace romid {

// "Landroid/os/SystemProperties;" -> "android.os.SystemProperties". Non-class
// descriptors are returned unchanged.
std::string descriptor_to_java(std::string_view descriptor);
// Inverse of descriptor_to_java for class names.
std::string java_to_descriptor(std::string_view java_name);

struct MethodRef {
  std::string owner;  // class descriptor
  std::string name;
  std::vector<std::string> params;  // type descriptors
  std::string ret;

  std::string descriptor() const;  // "(Ljava/lang/String;)V"
  std::string key() const;         // "Lfoo/Bar;->baz(I)V"

  friend bool operator==(const MethodRef&, const MethodRef&) = default;
  friend auto operator<=>(const MethodRef&, const MethodRef&) = default;
};

// Parses "Lfoo/Bar;->baz(ILjava/lang/String;)V". Returns nullopt on bad syntax.
std::optional<MethodRef> parse_method_ref(std::string_view text);

struct FieldRef {
  std::string owner;
  std::string name;
  std::string type;

  std::string key() const;  // "Lfoo/Bar;->name:Ljava/lang/String;"

  friend bool operator==(const FieldRef&, const FieldRef&) = default;
  friend auto operator<=>(const FieldRef&, const FieldRef&) = default;
};

enum class AccessFlag : std::uint32_t {
  kPublic = 1u << 0,
  kPrivate = 1u << 1,
  kProtected = 1u << 2,
  kStatic = 1u << 3,
  kFinal = 1u << 4,
  kConstructor = 1u << 5,
  kClassInitializer = 1u << 6,
  kAbstract = 1u << 7,
  kNative = 1u << 8,
  kInterface = 1u << 9,
  kSynthetic = 1u << 10,
};

struct AccessFlags {
  std::uint32_t bits = 0;

  bool has(AccessFlag f) const { return (bits & static_cast<std::uint32_t>(f)) != 0; }
  void set(AccessFlag f) { bits |= static_cast<std::uint32_t>(f); }

  friend bool operator==(AccessFlags, AccessFlags) = default;
};

enum class Opcode {
  const_string,
  invoke,
  move_result,
  move,
  sget,
  sput,
  iget,
  iput,
  new_array,
  aput,
  filled_new_array,
  return_value,
  return_void,
  other,
  // Needed for index-exact array stores, class literals, array loads and
  // control flow; everything else stays `other`.
  const_number,
  const_class,
  aget,
  branch,
  jump,
};

const char* to_string(Opcode op);

// Register operands are normalised to frame indices: vN -> N, pN -> N + first
// parameter register. Operand layout per opcode:
//   const_string     regs[0]=dest, literal
//   const_number     regs[0]=dest, number
//   const_class      regs[0]=dest, literal=type
//   invoke           regs=arguments (receiver first), method
//   move_result      regs[0]=dest
//   move             regs[0]=dest, regs[1]=src
//   sget / sput      regs[0]=value, field
//   iget / iput      regs[0]=value, regs[1]=object, field
//   new_array        regs[0]=dest, regs[1]=size, literal=array type
//   aget             regs[0]=dest, regs[1]=array, regs[2]=index
//   aput             regs[0]=value, regs[1]=array, regs[2]=index
//   filled_new_array regs=elements, literal=array type (result via move_result)
//   return_value     regs[0]=value
//   branch           regs=compared registers, targets[0]=taken target
//   jump             targets[0]
//   other            regs = registers the instruction overwrites (0 or 1)
struct IrInstruction {
  int index = 0;
  Opcode op = Opcode::other;
  std::string mnemonic;
  std::vector<int> regs;
  std::string literal;
  std::int64_t number = 0;
  std::optional<MethodRef> method;
  std::optional<FieldRef> field;
  std::vector<int> targets;
  std::string raw;  // original operand text of `other` instructions
  int line = 0;     // source line, excluded from equality

  bool operator==(const IrInstruction& o) const {
    return index == o.index && op == o.op && mnemonic == o.mnemonic && regs == o.regs &&
           literal == o.literal && number == o.number && method == o.method &&
           field == o.field && targets == o.targets && raw == o.raw;
  }
};

struct IrMethod {
  MethodRef signature;
  AccessFlags access;
  std::vector<IrInstruction> instructions;
  int registers = 0;  // frame size
  int ins = 0;        // argument slots, receiver included

  bool is_static() const { return access.has(AccessFlag::kStatic); }
  // Frame index of argument slot k (receiver is slot 0 for instance methods).
  int slot_register(int slot) const { return registers - ins + slot; }
  // Argument slot held by frame register r at entry, or -1.
  int register_slot(int r) const {
    int first = registers - ins;
    return (r >= first && r < registers) ? r - first : -1;
  }

  friend bool operator==(const IrMethod&, const IrMethod&) = default;
};

struct IrField {
  std::string name;
  std::string type;
  AccessFlags access;
  std::optional<std::string> string_value;  // `= "..."` initialiser
  std::string raw_value;                     // any other initialiser, verbatim
  std::vector<std::string> annotations;      // annotation type descriptors

  bool is_static() const { return access.has(AccessFlag::kStatic); }

  friend bool operator==(const IrField&, const IrField&) = default;
};

struct IrClass {
  std::string name;  // descriptor
  std::string super_name;
  std::vector<std::string> interfaces;
  AccessFlags access;
  std::vector<IrField> fields;
  std::vector<IrMethod> methods;
  std::string source_path;  // ROM-relative path of the .smali file
  int unit = 0;             // index of the code unit the class came from

  const IrMethod* find_method(std::string_view name, std::string_view descriptor) const;
  const IrField* find_field(std::string_view name) const;

  // Structural equality ignores where the class was loaded from.
  bool operator==(const IrClass& o) const {
    return name == o.name && super_name == o.super_name && interfaces == o.interfaces &&
           access == o.access && fields == o.fields && methods == o.methods;
  }
};

// Throws ParseError (with line) on a missing .class header or an unbalanced
// method/field/annotation block.
IrClass parse_class(std::string_view text, std::string source_path = {});

// Smali text that parse_class maps back to an equal IrClass.
std::string print_class(const IrClass& cls);

struct CallGraph {
  struct Node {
    MethodRef ref;
    bool external = true;
    int unit = -1;
    int class_index = -1;  // into the class list given to build_call_graph
    int method_index = -1;
  };
  struct Edge {
    int caller = 0;
    int callee = 0;
    int site = 0;  // instruction index in the caller

    friend bool operator==(const Edge&, const Edge&) = default;
    friend auto operator<=>(const Edge&, const Edge&) = default;
  };

  std::vector<Node> nodes;
  std::vector<Edge> edges;  // sorted, duplicate-free

  // Corpus node for a method reference, preferring `unit` when several code
  // units define the same signature.
  std::optional<int> find(const MethodRef& ref, int unit = -1) const;
  // Node for (class, method) positions in the class list.
  int node_of(int class_index, int method_index) const;
  // Edge indices into node `callee`.
  std::span<const int> incoming(int callee) const;
  // Resolved callee of a given invoke site, if the caller is a corpus node.
  std::optional<int> callee_at(int caller, int site) const;

  std::size_t external_edge_count() const;
  std::size_t internal_edge_count() const;

  // Filled by build_call_graph.
  std::unordered_map<std::string, std::vector<int>> by_key;
  std::vector<std::vector<int>> in_edges;
  std::vector<std::vector<int>> method_nodes;  // [class][method] -> node
  std::vector<std::unordered_map<int, int>> site_callee;  // [node] site -> callee
};

CallGraph build_call_graph(std::span<const IrClass> classes);

struct CallerSite {
  int caller = 0;  // node id
  int site = 0;

  friend bool operator==(const CallerSite&, const CallerSite&) = default;
};

// Every edge into `target`, ordered by (caller key, site).
std::vector<CallerSite> callers_of(const CallGraph& graph, int target);
std::vector<CallerSite> callers_of(const CallGraph& graph, const MethodRef& target);

}  // namespace romid
