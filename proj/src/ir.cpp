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

#include "romid/ir.hpp"

#include <algorithm>
#include <cstdlib>
#include <map>
#include <sstream>

#include "romid/diagnostics.hpp"

namespace romid {

namespace {

std::string_view trim(std::string_view s) {
  auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

// Drops a trailing '#' comment, ignoring '#' inside string literals.
std::string_view strip_comment(std::string_view line) {
  bool in_str = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    char c = line[i];
    if (in_str) {
      if (c == '\\') {
        ++i;
      } else if (c == '"') {
        in_str = false;
      }
    } else if (c == '"') {
      in_str = true;
    } else if (c == '#') {
      return line.substr(0, i);
    }
  }
  return line;
}

std::vector<std::string_view> split_ws(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && (s[i] == ' ' || s[i] == '\t')) ++i;
    if (i >= s.size()) break;
    std::size_t j = i;
    while (j < s.size() && s[j] != ' ' && s[j] != '\t') ++j;
    out.push_back(s.substr(i, j - i));
    i = j;
  }
  return out;
}

void append_utf8(std::string& out, unsigned cp) {
  if (cp < 0x80) {
    out += static_cast<char>(cp);
  } else if (cp < 0x800) {
    out += static_cast<char>(0xC0 | (cp >> 6));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  } else {
    out += static_cast<char>(0xE0 | (cp >> 12));
    out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  }
}

// `text` starts at the opening quote. Returns the decoded literal and sets
// `consumed` to the number of bytes including both quotes.
std::optional<std::string> decode_string_literal(std::string_view text, std::size_t& consumed) {
  if (text.empty() || text[0] != '"') return std::nullopt;
  std::string out;
  std::size_t i = 1;
  while (i < text.size()) {
    char c = text[i];
    if (c == '"') {
      consumed = i + 1;
      return out;
    }
    if (c != '\\') {
      out += c;
      ++i;
      continue;
    }
    if (i + 1 >= text.size()) return std::nullopt;
    char e = text[i + 1];
    i += 2;
    switch (e) {
      case 'n': out += '\n'; break;
      case 't': out += '\t'; break;
      case 'r': out += '\r'; break;
      case 'b': out += '\b'; break;
      case 'f': out += '\f'; break;
      case '0': out += '\0'; break;
      case '\'': out += '\''; break;
      case '"': out += '"'; break;
      case '\\': out += '\\'; break;
      case 'u': {
        if (i + 4 > text.size()) return std::nullopt;
        std::string hex(text.substr(i, 4));
        char* end = nullptr;
        unsigned long cp = std::strtoul(hex.c_str(), &end, 16);
        if (end != hex.c_str() + 4) return std::nullopt;
        append_utf8(out, static_cast<unsigned>(cp));
        i += 4;
        break;
      }
      default:
        return std::nullopt;
    }
  }
  return std::nullopt;
}

std::string escape_string_literal(std::string_view s) {
  std::string out = "\"";
  for (unsigned char c : s) {
    switch (c) {
      case '\n': out += "\\n"; break;
      case '\t': out += "\\t"; break;
      case '\r': out += "\\r"; break;
      case '\b': out += "\\b"; break;
      case '\f': out += "\\f"; break;
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\0': out += "\\0"; break;
      default:
        if (c < 0x20) {
          char buf[8];
          std::snprintf(buf, sizeof buf, "\\u%04x", c);
          out += buf;
        } else {
          out += static_cast<char>(c);
        }
    }
  }
  out += '"';
  return out;
}

// Splits "Lfoo;I[J" into individual type descriptors.
std::optional<std::vector<std::string>> split_type_list(std::string_view s) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < s.size()) {
    std::size_t start = i;
    while (i < s.size() && s[i] == '[') ++i;
    if (i >= s.size()) return std::nullopt;
    if (s[i] == 'L') {
      auto semi = s.find(';', i);
      if (semi == std::string_view::npos) return std::nullopt;
      i = semi + 1;
    } else if (std::string_view("ZBSCIJFDV").find(s[i]) != std::string_view::npos) {
      ++i;
    } else {
      return std::nullopt;
    }
    out.emplace_back(s.substr(start, i - start));
  }
  return out;
}

int slot_width(std::string_view type) { return (type == "J" || type == "D") ? 2 : 1; }

struct FlagName {
  std::string_view name;
  AccessFlag flag;
};
constexpr FlagName kFlagNames[] = {
    {"public", AccessFlag::kPublic},           {"private", AccessFlag::kPrivate},
    {"protected", AccessFlag::kProtected},     {"static", AccessFlag::kStatic},
    {"final", AccessFlag::kFinal},             {"constructor", AccessFlag::kConstructor},
    {"abstract", AccessFlag::kAbstract},       {"native", AccessFlag::kNative},
    {"interface", AccessFlag::kInterface},     {"synthetic", AccessFlag::kSynthetic},
};

// Flags we accept but do not model.
constexpr std::string_view kIgnoredFlags[] = {
    "synchronized", "volatile", "transient", "strict", "strictfp", "annotation",
    "enum",         "bridge",   "varargs",   "declared-synchronized"};

bool apply_flag(std::string_view token, AccessFlags& flags) {
  for (const auto& f : kFlagNames) {
    if (f.name == token) {
      flags.set(f.flag);
      return true;
    }
  }
  return std::find(std::begin(kIgnoredFlags), std::end(kIgnoredFlags), token) !=
         std::end(kIgnoredFlags);
}

std::string flags_text(AccessFlags flags, bool is_method) {
  std::string out;
  for (const auto& f : kFlagNames) {
    if (f.flag == AccessFlag::kClassInitializer) continue;
    if (flags.has(f.flag)) {
      out += f.name;
      out += ' ';
    }
  }
  (void)is_method;
  return out;
}

std::optional<std::int64_t> parse_number(std::string_view token) {
  std::string t(token);
  while (!t.empty() && std::string_view("LlTtSs").find(t.back()) != std::string_view::npos) {
    t.pop_back();
  }
  if (t.empty()) return std::nullopt;
  char* end = nullptr;
  errno = 0;
  long long v = std::strtoll(t.c_str(), &end, 0);
  if (end != t.c_str() + t.size()) {
    // Negative hex literals beyond range etc.; unsigned parse as fallback.
    unsigned long long u = std::strtoull(t.c_str(), &end, 0);
    if (end != t.c_str() + t.size()) return std::nullopt;
    v = static_cast<long long>(u);
  }
  return v;
}

// One operand as written: register list, string literal or plain token.
struct Operand {
  enum class Kind { registers, string, token } kind = Kind::token;
  std::vector<std::string> registers;
  std::string text;
};

std::optional<std::vector<std::string>> parse_register_list(std::string_view inner) {
  std::vector<std::string> regs;
  inner = trim(inner);
  if (inner.empty()) return regs;
  if (auto dots = inner.find(".."); dots != std::string_view::npos) {
    std::string_view a = trim(inner.substr(0, dots));
    std::string_view b = trim(inner.substr(dots + 2));
    if (a.size() < 2 || b.size() < 2 || a[0] != b[0]) return std::nullopt;
    auto lo = parse_number(a.substr(1));
    auto hi = parse_number(b.substr(1));
    if (!lo || !hi || *lo > *hi) return std::nullopt;
    for (auto r = *lo; r <= *hi; ++r) regs.push_back(std::string(1, a[0]) + std::to_string(r));
    return regs;
  }
  std::size_t start = 0;
  while (start <= inner.size()) {
    auto comma = inner.find(',', start);
    std::string_view piece =
        trim(inner.substr(start, comma == std::string_view::npos ? std::string_view::npos
                                                                  : comma - start));
    if (piece.empty()) return std::nullopt;
    regs.emplace_back(piece);
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return regs;
}

std::optional<std::vector<Operand>> tokenize_operands(std::string_view s) {
  std::vector<Operand> ops;
  std::size_t i = 0;
  while (true) {
    while (i < s.size() && (s[i] == ' ' || s[i] == '\t')) ++i;
    if (i >= s.size()) break;
    Operand op;
    if (s[i] == '{') {
      auto close = s.find('}', i);
      if (close == std::string_view::npos) return std::nullopt;
      auto regs = parse_register_list(s.substr(i + 1, close - i - 1));
      if (!regs) return std::nullopt;
      op.kind = Operand::Kind::registers;
      op.registers = std::move(*regs);
      i = close + 1;
    } else if (s[i] == '"') {
      std::size_t consumed = 0;
      auto lit = decode_string_literal(s.substr(i), consumed);
      if (!lit) return std::nullopt;
      op.kind = Operand::Kind::string;
      op.text = std::move(*lit);
      i += consumed;
    } else {
      auto comma = s.find(',', i);
      op.text = std::string(trim(s.substr(i, comma == std::string_view::npos
                                                  ? std::string_view::npos
                                                  : comma - i)));
      i = comma == std::string_view::npos ? s.size() : comma;
    }
    ops.push_back(std::move(op));
    while (i < s.size() && (s[i] == ' ' || s[i] == '\t')) ++i;
    if (i < s.size()) {
      if (s[i] != ',') return std::nullopt;
      ++i;
    }
  }
  return ops;
}

bool is_register_token(std::string_view t) {
  if (t.size() < 2 || (t[0] != 'v' && t[0] != 'p')) return false;
  return std::all_of(t.begin() + 1, t.end(), [](char c) { return c >= '0' && c <= '9'; });
}

// Mnemonics classified as `other` that do not write their first operand.
bool other_writes_first(std::string_view mn) {
  constexpr std::string_view kNoWrite[] = {
      "nop",           "check-cast",   "monitor-enter", "monitor-exit",
      "throw",         "fill-array-data", "packed-switch", "sparse-switch"};
  return std::find(std::begin(kNoWrite), std::end(kNoWrite), mn) == std::end(kNoWrite);
}

struct PendingInstruction {
  IrInstruction insn;
  std::vector<std::string> reg_tokens;
  std::vector<std::string> label_refs;
};

struct MethodBuilder {
  IrMethod method;
  std::size_t header_line = 0;
  std::optional<int> registers_directive;
  std::optional<int> locals_directive;
  std::vector<PendingInstruction> pending;
  std::map<std::string, int, std::less<>> labels;
  std::vector<std::string> open_labels;
};

class ClassParser {
 public:
  ClassParser(std::string_view text, std::string source) : text_(text) {
    cls_.source_path = std::move(source);
  }

  IrClass run() {
    std::size_t pos = 0;
    while (pos <= text_.size()) {
      auto nl = text_.find('\n', pos);
      std::string_view raw =
          text_.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
      ++line_no_;
      handle_line(trim(strip_comment(raw)));
      if (nl == std::string_view::npos) break;
      pos = nl + 1;
    }
    if (!skip_end_.empty()) {
      throw ParseError("unterminated block, expected " + skip_end_, skip_start_line_);
    }
    if (method_) throw ParseError("unterminated .method block", method_->header_line);
    if (field_annotations_open_) throw ParseError("unterminated .field block", field_line_);
    if (!have_class_) throw ParseError("missing .class header", 1);
    return std::move(cls_);
  }

 private:
  [[noreturn]] void fail(const std::string& what) const { throw ParseError(what, line_no_); }

  void handle_line(std::string_view line) {
    if (line.empty()) return;
    if (!skip_end_.empty()) {
      if (line.starts_with(skip_end_)) skip_end_.clear();
      return;
    }
    if (!have_class_) {
      if (!line.starts_with(".class")) {
        throw ParseError("missing .class header", 1);
      }
      parse_class_header(line);
      return;
    }
    if (method_) {
      handle_method_line(line);
      return;
    }
    if (field_open_) {
      if (line.starts_with(".annotation")) {
        auto toks = split_ws(line);
        if (toks.size() < 3) fail("malformed .annotation");
        cls_.fields.back().annotations.emplace_back(toks.back());
        field_annotations_open_ = true;
        begin_skip(".end annotation");
        return;
      }
      if (line == ".end field") {
        field_open_ = false;
        field_annotations_open_ = false;
        return;
      }
      field_open_ = false;
      if (field_annotations_open_) fail("expected .end field");
    }
    if (line.starts_with(".class")) fail("duplicate .class header");
    if (line.starts_with(".super")) {
      auto toks = split_ws(line);
      if (toks.size() != 2) fail("malformed .super");
      cls_.super_name = std::string(toks[1]);
    } else if (line.starts_with(".implements")) {
      auto toks = split_ws(line);
      if (toks.size() != 2) fail("malformed .implements");
      cls_.interfaces.emplace_back(toks[1]);
    } else if (line.starts_with(".source")) {
      // informational only
    } else if (line.starts_with(".field")) {
      parse_field(line);
    } else if (line.starts_with(".method")) {
      parse_method_header(line);
    } else if (line.starts_with(".annotation")) {
      begin_skip(".end annotation");
    } else if (line.starts_with(".end method")) {
      fail(".end method without .method");
    } else if (line.starts_with(".end")) {
      fail("unexpected " + std::string(line));
    } else {
      fail("unexpected content outside method: " + std::string(line));
    }
  }

  void begin_skip(std::string end) {
    skip_end_ = std::move(end);
    skip_start_line_ = line_no_;
  }

  void parse_class_header(std::string_view line) {
    auto toks = split_ws(line);
    if (toks.size() < 2) fail("malformed .class");
    for (std::size_t i = 1; i + 1 < toks.size(); ++i) {
      if (!apply_flag(toks[i], cls_.access)) fail("unknown class flag " + std::string(toks[i]));
    }
    cls_.name = std::string(toks.back());
    if (cls_.name.size() < 3 || cls_.name.front() != 'L' || cls_.name.back() != ';') {
      fail("bad class descriptor " + cls_.name);
    }
    have_class_ = true;
  }

  void parse_field(std::string_view line) {
    std::string_view rest = trim(line.substr(6));
    std::string_view init;
    // The initialiser may be a string containing " = ", so split on the
    // first " = " that follows the name:type token.
    auto colon = rest.find(':');
    if (colon == std::string_view::npos) fail("malformed .field");
    auto eq = rest.find(" = ", colon);
    if (eq != std::string_view::npos) {
      init = trim(rest.substr(eq + 3));
      rest = trim(rest.substr(0, eq));
    }
    auto toks = split_ws(rest);
    if (toks.empty()) fail("malformed .field");
    IrField f;
    for (std::size_t i = 0; i + 1 < toks.size(); ++i) {
      if (!apply_flag(toks[i], f.access)) fail("unknown field flag " + std::string(toks[i]));
    }
    std::string_view nt = toks.back();
    auto c = nt.find(':');
    if (c == std::string_view::npos || c == 0 || c + 1 >= nt.size()) fail("malformed .field");
    f.name = std::string(nt.substr(0, c));
    f.type = std::string(nt.substr(c + 1));
    if (!init.empty()) {
      std::size_t consumed = 0;
      if (init.front() == '"') {
        auto lit = decode_string_literal(init, consumed);
        if (!lit || consumed != init.size()) fail("bad string initialiser");
        f.string_value = std::move(*lit);
      } else {
        f.raw_value = std::string(init);
      }
    }
    cls_.fields.push_back(std::move(f));
    field_open_ = true;
    field_annotations_open_ = false;
    field_line_ = line_no_;
  }

  void parse_method_header(std::string_view line) {
    auto toks = split_ws(line);
    if (toks.size() < 2) fail("malformed .method");
    MethodBuilder b;
    b.header_line = line_no_;
    for (std::size_t i = 1; i + 1 < toks.size(); ++i) {
      if (!apply_flag(toks[i], b.method.access)) {
        fail("unknown method flag " + std::string(toks[i]));
      }
    }
    std::string_view spec = toks.back();
    auto open = spec.find('(');
    auto close = spec.find(')');
    if (open == std::string_view::npos || close == std::string_view::npos || close < open ||
        open == 0) {
      fail("malformed method signature");
    }
    MethodRef& sig = b.method.signature;
    sig.owner = cls_.name;
    sig.name = std::string(spec.substr(0, open));
    auto params = split_type_list(spec.substr(open + 1, close - open - 1));
    auto ret = split_type_list(spec.substr(close + 1));
    if (!params || !ret || ret->size() != 1) fail("malformed method descriptor");
    sig.params = std::move(*params);
    sig.ret = std::move(ret->front());
    if (sig.name == "<clinit>") {
      b.method.access.set(AccessFlag::kClassInitializer);
      b.method.access.set(AccessFlag::kStatic);
    }
    if (sig.name == "<init>") b.method.access.set(AccessFlag::kConstructor);
    int ins = b.method.is_static() ? 0 : 1;
    for (const auto& p : sig.params) ins += slot_width(p);
    b.method.ins = ins;
    method_ = std::move(b);
  }

  void handle_method_line(std::string_view line) {
    MethodBuilder& b = *method_;
    if (line.front() == ':') {
      b.open_labels.emplace_back(line.substr(1));
      return;
    }
    if (line.front() == '.') {
      auto toks = split_ws(line);
      std::string_view d = toks[0];
      if (d == ".end") {
        if (toks.size() >= 2 && toks[1] == "method") {
          finish_method();
          return;
        }
        if (toks.size() >= 2 && (toks[1] == "local" || toks[1] == "param")) return;
        fail("unexpected " + std::string(line));
      }
      if (d == ".registers" || d == ".locals") {
        if (toks.size() != 2) fail("malformed " + std::string(d));
        auto n = parse_number(toks[1]);
        if (!n || *n < 0) fail("malformed " + std::string(d));
        (d == ".registers" ? b.registers_directive : b.locals_directive) = static_cast<int>(*n);
        return;
      }
      if (d == ".annotation") return begin_skip(".end annotation");
      if (d == ".array-data") return begin_skip(".end array-data");
      if (d == ".packed-switch") return begin_skip(".end packed-switch");
      if (d == ".sparse-switch") return begin_skip(".end sparse-switch");
      if (d == ".method") fail("nested .method");
      // .line .local .restart .prologue .epilogue .param .catch .catchall .source
      return;
    }
    parse_instruction(line);
  }

  void parse_instruction(std::string_view line) {
    MethodBuilder& b = *method_;
    auto sp = line.find_first_of(" \t");
    std::string mn(line.substr(0, sp));
    std::string_view rest = sp == std::string_view::npos ? std::string_view{} : trim(line.substr(sp));
    PendingInstruction p;
    IrInstruction& insn = p.insn;
    insn.index = static_cast<int>(b.pending.size());
    insn.mnemonic = mn;
    insn.line = static_cast<int>(line_no_);

    auto ops_opt = tokenize_operands(rest);
    if (!ops_opt) fail("malformed operands for " + mn);
    const std::vector<Operand>& ops = *ops_opt;

    auto reg_at = [&](std::size_t i) -> std::string {
      if (i >= ops.size() || ops[i].kind != Operand::Kind::token ||
          !is_register_token(ops[i].text)) {
        fail("expected register operand " + std::to_string(i + 1) + " for " + mn);
      }
      return ops[i].text;
    };
    auto token_at = [&](std::size_t i) -> const std::string& {
      if (i >= ops.size() || ops[i].kind != Operand::Kind::token || ops[i].text.empty()) {
        fail("expected operand " + std::to_string(i + 1) + " for " + mn);
      }
      return ops[i].text;
    };
    auto field_at = [&](std::size_t i) {
      const std::string& t = token_at(i);
      auto arrow = t.find("->");
      auto colon = t.find(':', arrow == std::string::npos ? 0 : arrow);
      if (arrow == std::string::npos || colon == std::string::npos) fail("bad field reference");
      insn.field = FieldRef{t.substr(0, arrow), t.substr(arrow + 2, colon - arrow - 2),
                            t.substr(colon + 1)};
    };
    auto label_at = [&](std::size_t i) {
      const std::string& t = token_at(i);
      if (t.front() != ':') fail("expected label for " + mn);
      p.label_refs.push_back(t.substr(1));
    };

    if (mn == "const-string" || mn == "const-string/jumbo") {
      insn.op = Opcode::const_string;
      p.reg_tokens = {reg_at(0)};
      if (ops.size() != 2 || ops[1].kind != Operand::Kind::string) fail("const-string needs a literal");
      insn.literal = ops[1].text;
    } else if (mn.starts_with("invoke-")) {
      insn.op = Opcode::invoke;
      if (ops.size() != 2 || ops[0].kind != Operand::Kind::registers) fail("malformed invoke");
      p.reg_tokens = ops[0].registers;
      auto ref = parse_method_ref(token_at(1));
      if (!ref) fail("bad method reference");
      insn.method = std::move(*ref);
    } else if (mn.starts_with("move-result")) {
      insn.op = Opcode::move_result;
      p.reg_tokens = {reg_at(0)};
    } else if (mn == "move-exception") {
      insn.op = Opcode::other;
      insn.raw = std::string(rest);
      p.reg_tokens = {reg_at(0)};
    } else if (mn.starts_with("move")) {
      insn.op = Opcode::move;
      p.reg_tokens = {reg_at(0), reg_at(1)};
    } else if (mn.starts_with("sget") || mn.starts_with("sput")) {
      insn.op = mn[1] == 'g' ? Opcode::sget : Opcode::sput;
      p.reg_tokens = {reg_at(0)};
      field_at(1);
    } else if (mn.starts_with("iget") || mn.starts_with("iput")) {
      insn.op = mn[1] == 'g' ? Opcode::iget : Opcode::iput;
      p.reg_tokens = {reg_at(0), reg_at(1)};
      field_at(2);
    } else if (mn == "new-array") {
      insn.op = Opcode::new_array;
      p.reg_tokens = {reg_at(0), reg_at(1)};
      insn.literal = token_at(2);
    } else if (mn.starts_with("aget") || mn.starts_with("aput")) {
      insn.op = mn[1] == 'g' ? Opcode::aget : Opcode::aput;
      p.reg_tokens = {reg_at(0), reg_at(1), reg_at(2)};
    } else if (mn.starts_with("filled-new-array")) {
      insn.op = Opcode::filled_new_array;
      if (ops.size() != 2 || ops[0].kind != Operand::Kind::registers) {
        fail("malformed filled-new-array");
      }
      p.reg_tokens = ops[0].registers;
      insn.literal = token_at(1);
    } else if (mn == "return-void") {
      insn.op = Opcode::return_void;
    } else if (mn == "return" || mn == "return-object" || mn == "return-wide") {
      insn.op = Opcode::return_value;
      p.reg_tokens = {reg_at(0)};
    } else if (mn == "const-class") {
      insn.op = Opcode::const_class;
      p.reg_tokens = {reg_at(0)};
      insn.literal = token_at(1);
    } else if (mn == "const" || mn.starts_with("const/") || mn.starts_with("const-wide")) {
      insn.op = Opcode::const_number;
      p.reg_tokens = {reg_at(0)};
      auto n = parse_number(token_at(1));
      if (!n) fail("bad numeric literal");
      insn.number = *n;
    } else if (mn.starts_with("if-")) {
      insn.op = Opcode::branch;
      if (ops.size() < 2) fail("malformed " + mn);
      for (std::size_t i = 0; i + 1 < ops.size(); ++i) p.reg_tokens.push_back(reg_at(i));
      label_at(ops.size() - 1);
    } else if (mn == "goto" || mn == "goto/16" || mn == "goto/32") {
      insn.op = Opcode::jump;
      label_at(0);
    } else {
      insn.op = Opcode::other;
      insn.raw = std::string(rest);
      if (other_writes_first(mn) && !ops.empty() && ops[0].kind == Operand::Kind::token &&
          is_register_token(ops[0].text)) {
        p.reg_tokens = {ops[0].text};
      }
    }

    for (auto& l : b.open_labels) b.labels.emplace(std::move(l), insn.index);
    b.open_labels.clear();
    b.pending.push_back(std::move(p));
  }

  void finish_method() {
    MethodBuilder& b = *method_;
    IrMethod& m = b.method;
    const int end_index = static_cast<int>(b.pending.size());
    for (auto& l : b.open_labels) b.labels.emplace(std::move(l), end_index);
    b.open_labels.clear();

    int max_v = -1;
    int max_p = -1;
    for (const auto& p : b.pending) {
      for (const auto& t : p.reg_tokens) {
        int n = std::atoi(t.c_str() + 1);
        (t[0] == 'v' ? max_v : max_p) = std::max(t[0] == 'v' ? max_v : max_p, n);
      }
    }
    if (b.registers_directive) {
      m.registers = *b.registers_directive;
    } else if (b.locals_directive) {
      m.registers = *b.locals_directive + m.ins;
    } else {
      m.registers = max_v + 1 + m.ins;
    }
    if (m.registers < m.ins) throw ParseError(".registers smaller than argument size", b.header_line);
    if (max_p >= m.ins) throw ParseError("parameter register out of range", b.header_line);

    const int first_param = m.registers - m.ins;
    for (auto& p : b.pending) {
      for (const auto& t : p.reg_tokens) {
        int n = std::atoi(t.c_str() + 1);
        p.insn.regs.push_back(t[0] == 'v' ? n : n + first_param);
      }
      for (const auto& l : p.label_refs) {
        auto it = b.labels.find(l);
        if (it == b.labels.end()) {
          throw ParseError("undefined label :" + l, static_cast<std::size_t>(p.insn.line));
        }
        p.insn.targets.push_back(it->second);
      }
      m.instructions.push_back(std::move(p.insn));
    }
    cls_.methods.push_back(std::move(m));
    method_.reset();
  }

  std::string_view text_;
  IrClass cls_;
  bool have_class_ = false;
  bool field_open_ = false;
  bool field_annotations_open_ = false;
  std::size_t field_line_ = 0;
  std::optional<MethodBuilder> method_;
  std::string skip_end_;
  std::size_t skip_start_line_ = 0;
  std::size_t line_no_ = 0;
};

std::string reg_name(int r) { return "v" + std::to_string(r); }

std::string reg_list(const std::vector<int>& regs, bool range) {
  if (regs.empty()) return "{}";
  bool contiguous = true;
  for (std::size_t i = 1; i < regs.size(); ++i) contiguous &= regs[i] == regs[i - 1] + 1;
  if (range && contiguous && regs.size() > 1) {
    return "{" + reg_name(regs.front()) + " .. " + reg_name(regs.back()) + "}";
  }
  std::string out = "{";
  for (std::size_t i = 0; i < regs.size(); ++i) {
    if (i) out += ", ";
    out += reg_name(regs[i]);
  }
  return out + "}";
}

}  // namespace

std::string descriptor_to_java(std::string_view d) {
  if (d.size() >= 3 && d.front() == 'L' && d.back() == ';') {
    std::string out(d.substr(1, d.size() - 2));
    std::replace(out.begin(), out.end(), '/', '.');
    return out;
  }
  return std::string(d);
}

std::string java_to_descriptor(std::string_view java_name) {
  std::string out = "L";
  out += java_name;
  std::replace(out.begin(), out.end(), '.', '/');
  out += ';';
  return out;
}

std::string MethodRef::descriptor() const {
  std::string out = "(";
  for (const auto& p : params) out += p;
  out += ')';
  out += ret;
  return out;
}

std::string MethodRef::key() const { return owner + "->" + name + descriptor(); }

std::string FieldRef::key() const { return owner + "->" + name + ":" + type; }

std::optional<MethodRef> parse_method_ref(std::string_view text) {
  auto arrow = text.find("->");
  if (arrow == std::string_view::npos || arrow == 0) return std::nullopt;
  auto open = text.find('(', arrow);
  auto close = text.find(')', arrow);
  if (open == std::string_view::npos || close == std::string_view::npos || close < open) {
    return std::nullopt;
  }
  MethodRef ref;
  ref.owner = std::string(text.substr(0, arrow));
  ref.name = std::string(text.substr(arrow + 2, open - arrow - 2));
  if (ref.name.empty()) return std::nullopt;
  auto params = split_type_list(text.substr(open + 1, close - open - 1));
  auto ret = split_type_list(text.substr(close + 1));
  if (!params || !ret || ret->size() != 1) return std::nullopt;
  ref.params = std::move(*params);
  ref.ret = std::move(ret->front());
  return ref;
}

const char* to_string(Opcode op) {
  switch (op) {
    case Opcode::const_string: return "const-string";
    case Opcode::invoke: return "invoke";
    case Opcode::move_result: return "move-result";
    case Opcode::move: return "move";
    case Opcode::sget: return "sget";
    case Opcode::sput: return "sput";
    case Opcode::iget: return "iget";
    case Opcode::iput: return "iput";
    case Opcode::new_array: return "new-array";
    case Opcode::aput: return "aput";
    case Opcode::filled_new_array: return "filled-new-array";
    case Opcode::return_value: return "return-value";
    case Opcode::return_void: return "return-void";
    case Opcode::other: return "other";
    case Opcode::const_number: return "const";
    case Opcode::const_class: return "const-class";
    case Opcode::aget: return "aget";
    case Opcode::branch: return "branch";
    case Opcode::jump: return "goto";
  }
  return "other";
}

const IrMethod* IrClass::find_method(std::string_view n, std::string_view descriptor) const {
  for (const auto& m : methods) {
    if (m.signature.name == n && m.signature.descriptor() == descriptor) return &m;
  }
  return nullptr;
}

const IrField* IrClass::find_field(std::string_view n) const {
  for (const auto& f : fields) {
    if (f.name == n) return &f;
  }
  return nullptr;
}

IrClass parse_class(std::string_view text, std::string source_path) {
  return ClassParser(text, std::move(source_path)).run();
}

std::string print_class(const IrClass& cls) {
  std::ostringstream out;
  out << ".class " << flags_text(cls.access, false) << cls.name << "\n";
  if (!cls.super_name.empty()) out << ".super " << cls.super_name << "\n";
  for (const auto& i : cls.interfaces) out << ".implements " << i << "\n";
  out << "\n";
  for (const auto& f : cls.fields) {
    out << ".field " << flags_text(f.access, false) << f.name << ":" << f.type;
    if (f.string_value) {
      out << " = " << escape_string_literal(*f.string_value);
    } else if (!f.raw_value.empty()) {
      out << " = " << f.raw_value;
    }
    out << "\n";
    if (!f.annotations.empty()) {
      for (const auto& a : f.annotations) {
        out << "    .annotation runtime " << a << "\n    .end annotation\n";
      }
      out << ".end field\n";
    }
  }
  for (const auto& m : cls.methods) {
    AccessFlags shown = m.access;
    // <clinit> implies static; printing it keeps the flag set re-parse identical.
    out << "\n.method " << flags_text(shown, true) << m.signature.name
        << m.signature.descriptor() << "\n";
    out << "    .registers " << m.registers << "\n";
    std::vector<bool> labelled(m.instructions.size() + 1, false);
    for (const auto& insn : m.instructions) {
      for (int t : insn.targets) {
        if (t >= 0 && static_cast<std::size_t>(t) <= m.instructions.size()) labelled[t] = true;
      }
    }
    auto label = [](int t) { return ":L" + std::to_string(t); };
    for (const auto& insn : m.instructions) {
      if (labelled[insn.index]) out << "    " << label(insn.index) << "\n";
      out << "    " << insn.mnemonic;
      const auto& r = insn.regs;
      switch (insn.op) {
        case Opcode::const_string:
          out << " " << reg_name(r[0]) << ", " << escape_string_literal(insn.literal);
          break;
        case Opcode::const_number:
          out << " " << reg_name(r[0]) << ", " << insn.number;
          break;
        case Opcode::const_class:
          out << " " << reg_name(r[0]) << ", " << insn.literal;
          break;
        case Opcode::invoke:
          out << " " << reg_list(r, insn.mnemonic.ends_with("/range")) << ", "
              << insn.method->key();
          break;
        case Opcode::move_result:
        case Opcode::return_value:
          out << " " << reg_name(r[0]);
          break;
        case Opcode::move:
          out << " " << reg_name(r[0]) << ", " << reg_name(r[1]);
          break;
        case Opcode::sget:
        case Opcode::sput:
          out << " " << reg_name(r[0]) << ", " << insn.field->key();
          break;
        case Opcode::iget:
        case Opcode::iput:
          out << " " << reg_name(r[0]) << ", " << reg_name(r[1]) << ", " << insn.field->key();
          break;
        case Opcode::new_array:
          out << " " << reg_name(r[0]) << ", " << reg_name(r[1]) << ", " << insn.literal;
          break;
        case Opcode::aget:
        case Opcode::aput:
          out << " " << reg_name(r[0]) << ", " << reg_name(r[1]) << ", " << reg_name(r[2]);
          break;
        case Opcode::filled_new_array:
          out << " " << reg_list(r, insn.mnemonic.ends_with("/range")) << ", " << insn.literal;
          break;
        case Opcode::branch:
          for (int reg : r) out << " " << reg_name(reg) << ",";
          out << " " << label(insn.targets[0]);
          break;
        case Opcode::jump:
          out << " " << label(insn.targets[0]);
          break;
        case Opcode::return_void:
          break;
        case Opcode::other:
          if (!insn.raw.empty()) out << " " << insn.raw;
          break;
      }
      out << "\n";
    }
    if (labelled[m.instructions.size()]) {
      out << "    " << label(static_cast<int>(m.instructions.size())) << "\n";
    }
    out << ".end method\n";
  }
  return out.str();
}

// ---------------------------------------------------------------------------
// Call graph

std::optional<int> CallGraph::find(const MethodRef& ref, int unit) const {
  auto it = by_key.find(ref.key());
  if (it == by_key.end()) return std::nullopt;
  std::optional<int> first;
  for (int id : it->second) {
    if (nodes[id].external) continue;
    if (nodes[id].unit == unit) return id;
    if (!first) first = id;
  }
  return first;
}

int CallGraph::node_of(int class_index, int method_index) const {
  return method_nodes.at(class_index).at(method_index);
}

std::span<const int> CallGraph::incoming(int callee) const { return in_edges.at(callee); }

std::optional<int> CallGraph::callee_at(int caller, int site) const {
  if (caller < 0 || static_cast<std::size_t>(caller) >= site_callee.size()) return std::nullopt;
  auto it = site_callee[caller].find(site);
  if (it == site_callee[caller].end()) return std::nullopt;
  return it->second;
}

std::size_t CallGraph::external_edge_count() const {
  return static_cast<std::size_t>(std::count_if(
      edges.begin(), edges.end(), [&](const Edge& e) { return nodes[e.callee].external; }));
}

std::size_t CallGraph::internal_edge_count() const {
  return edges.size() - external_edge_count();
}

CallGraph build_call_graph(std::span<const IrClass> classes) {
  CallGraph g;
  g.method_nodes.resize(classes.size());
  for (std::size_t c = 0; c < classes.size(); ++c) {
    const IrClass& cls = classes[c];
    for (std::size_t m = 0; m < cls.methods.size(); ++m) {
      int id = static_cast<int>(g.nodes.size());
      g.nodes.push_back(CallGraph::Node{cls.methods[m].signature, false, cls.unit,
                                        static_cast<int>(c), static_cast<int>(m)});
      g.by_key[cls.methods[m].signature.key()].push_back(id);
      g.method_nodes[c].push_back(id);
    }
  }
  std::unordered_map<std::string, int> external;
  for (std::size_t c = 0; c < classes.size(); ++c) {
    const IrClass& cls = classes[c];
    for (std::size_t m = 0; m < cls.methods.size(); ++m) {
      int caller = g.method_nodes[c][m];
      for (const auto& insn : cls.methods[m].instructions) {
        if (insn.op != Opcode::invoke) continue;
        std::optional<int> callee = g.find(*insn.method, cls.unit);
        if (!callee) {
          std::string key = insn.method->key();
          auto [it, inserted] = external.emplace(key, static_cast<int>(g.nodes.size()));
          if (inserted) {
            g.nodes.push_back(CallGraph::Node{*insn.method, true, -1, -1, -1});
            g.by_key[key].push_back(it->second);
          }
          callee = it->second;
        }
        g.edges.push_back({caller, *callee, insn.index});
      }
    }
  }
  std::sort(g.edges.begin(), g.edges.end());
  g.edges.erase(std::unique(g.edges.begin(), g.edges.end()), g.edges.end());
  g.in_edges.assign(g.nodes.size(), {});
  g.site_callee.assign(g.nodes.size(), {});
  for (std::size_t i = 0; i < g.edges.size(); ++i) {
    g.in_edges[g.edges[i].callee].push_back(static_cast<int>(i));
    g.site_callee[g.edges[i].caller].emplace(g.edges[i].site, g.edges[i].callee);
  }
  return g;
}

std::vector<CallerSite> callers_of(const CallGraph& graph, int target) {
  std::vector<CallerSite> out;
  if (target < 0 || static_cast<std::size_t>(target) >= graph.in_edges.size()) return out;
  for (int e : graph.in_edges[target]) out.push_back({graph.edges[e].caller, graph.edges[e].site});
  std::sort(out.begin(), out.end(), [&](const CallerSite& a, const CallerSite& b) {
    const auto& na = graph.nodes[a.caller];
    const auto& nb = graph.nodes[b.caller];
    auto ka = na.ref.key();
    auto kb = nb.ref.key();
    if (ka != kb) return ka < kb;
    if (na.unit != nb.unit) return na.unit < nb.unit;
    return a.site < b.site;
  });
  return out;
}

std::vector<CallerSite> callers_of(const CallGraph& graph, const MethodRef& target) {
  std::vector<CallerSite> out;
  auto it = graph.by_key.find(target.key());
  if (it == graph.by_key.end()) return out;
  for (int id : it->second) {
    auto part = callers_of(graph, id);
    out.insert(out.end(), part.begin(), part.end());
  }
  std::stable_sort(out.begin(), out.end(), [&](const CallerSite& a, const CallerSite& b) {
    auto ka = graph.nodes[a.caller].ref.key();
    auto kb = graph.nodes[b.caller].ref.key();
    if (ka != kb) return ka < kb;
    return a.site < b.site;
  });
  return out;
}

}  // namespace romid
