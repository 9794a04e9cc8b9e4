// Copyright 2026 The dplena-sim Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "dplena/isa.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cctype>
#include <charconv>
#include <sstream>

namespace dplena {
namespace {

using K = OperandKind;
using F = OperandField;

std::vector<OpcodeInfo> build_table() {
  std::vector<OpcodeInfo> t = {
      {Opcode::V_RED_MAX_IDX, "v_red_max_idx", {{K::FReg, F::Rd}, {K::XReg, F::Rs1}, {K::XReg, F::Rs2}, {K::XReg, F::Rs3}}, true},
      {Opcode::S_ST_FP, "s_st_fp", {{K::FReg, F::Rd}, {K::XReg, F::Rs1}, {K::Imm, F::Imm}}, true},
      {Opcode::S_ST_INT, "s_st_int", {{K::XReg, F::Rd}, {K::XReg, F::Rs1}, {K::Imm, F::Imm}}, true},
      {Opcode::S_MAP_V_FP, "s_map_v_fp", {{K::XReg, F::Rd}, {K::XReg, F::Rs1}, {K::Imm, F::Imm}}, true},
      {Opcode::V_TOPK_MASK, "v_topk_mask", {{K::XReg, F::Rd}, {K::XReg, F::Rs1}, {K::XReg, F::Rs2}, {K::XReg, F::Rs3}}, true},
      {Opcode::V_SELECT_INT, "v_select_int", {{K::XReg, F::Rd}, {K::XReg, F::Rs1}, {K::XReg, F::Rs2}, {K::XReg, F::Rs3}}, true},
      {Opcode::H_PREFETCH_V, "h_prefetch_v", {{K::XReg, F::Rd}, {K::XReg, F::Rs1}, {K::XReg, F::Rs2}}, false},
      {Opcode::V_RED_MAX, "v_red_max", {{K::FReg, F::Rd}, {K::XReg, F::Rs1}}, false},
      {Opcode::V_RED_SUM, "v_red_sum", {{K::FReg, F::Rd}, {K::XReg, F::Rs1}}, false},
      {Opcode::V_SUB_SCALAR, "v_sub_scalar", {{K::XReg, F::Rd}, {K::FReg, F::Rs1}}, false},
      {Opcode::V_SUB_V, "v_sub_v", {{K::XReg, F::Rd}, {K::XReg, F::Rs1}, {K::XReg, F::Rs2}}, false},
      {Opcode::V_EXP, "v_exp", {{K::XReg, F::Rd}}, false},
      {Opcode::S_EXP, "s_exp", {{K::FReg, F::Rd}, {K::FReg, F::Rs1}}, false},
      {Opcode::S_RECIP, "s_recip", {{K::FReg, F::Rd}, {K::FReg, F::Rs1}}, false},
      {Opcode::S_FMUL, "s_fmul", {{K::FReg, F::Rd}, {K::FReg, F::Rs1}, {K::FReg, F::Rs2}}, false},
      {Opcode::S_FADD, "s_fadd", {{K::FReg, F::Rd}, {K::FReg, F::Rs1}, {K::FReg, F::Rs2}}, false},
      {Opcode::S_FSUB, "s_fsub", {{K::FReg, F::Rd}, {K::FReg, F::Rs1}, {K::FReg, F::Rs2}}, false},
      {Opcode::S_FMAX_IDX, "s_fmax_idx", {{K::FReg, F::Rd}, {K::FReg, F::Rs1}, {K::XReg, F::Rs2}, {K::XReg, F::Rs3}}, false},
      {Opcode::S_FLI, "s_fli", {{K::FReg, F::Rd}, {K::FloatImm, F::Imm}}, false},
      {Opcode::S_LI, "s_li", {{K::XReg, F::Rd}, {K::Imm, F::Imm}}, false},
      {Opcode::S_ADDI, "s_addi", {{K::XReg, F::Rd}, {K::XReg, F::Rs1}, {K::Imm, F::Imm}}, false},
      {Opcode::S_SETVL, "s_setvl", {{K::Imm, F::Imm}}, false},
      {Opcode::S_BNE, "s_bne", {{K::XReg, F::Rs1}, {K::XReg, F::Rs2}, {K::Label, F::Imm}}, false},
      {Opcode::S_BGE, "s_bge", {{K::XReg, F::Rs1}, {K::XReg, F::Rs2}, {K::Label, F::Imm}}, false},
      {Opcode::S_HALT, "s_halt", {}, false},
      {Opcode::FIFO_PUSH, "fifo_push", {{K::XReg, F::Rs1}, {K::Imm, F::Imm}}, false},
  };
  std::sort(t.begin(), t.end(), [](const auto& a, const auto& b) { return a.opcode < b.opcode; });
  return t;
}

const std::vector<OpcodeInfo>& table() {
  static const std::vector<OpcodeInfo> t = build_table();
  return t;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

bool is_identifier(std::string_view s) {
  if (s.empty()) return false;
  auto head = static_cast<unsigned char>(s.front());
  if (!(std::isalpha(head) || head == '_' || head == '.')) return false;
  return std::all_of(s.begin(), s.end(), [](char c) {
    auto u = static_cast<unsigned char>(c);
    return std::isalnum(u) || u == '_' || u == '.';
  });
}

std::uint8_t& field_ref(Instruction& inst, OperandField f) {
  switch (f) {
    case F::Rd: return inst.rd;
    case F::Rs1: return inst.rs1;
    case F::Rs2: return inst.rs2;
    case F::Rs3: return inst.rs3;
    case F::Imm: break;
  }
  throw std::logic_error("immediate field has no register slot");
}

std::uint8_t field_value(const Instruction& inst, OperandField f) {
  switch (f) {
    case F::Rd: return inst.rd;
    case F::Rs1: return inst.rs1;
    case F::Rs2: return inst.rs2;
    case F::Rs3: return inst.rs3;
    case F::Imm: break;
  }
  return 0;
}

int parse_register(std::string_view text, char prefix, std::size_t line) {
  if (text.size() < 2 || text.front() != prefix) {
    throw AsmError(line, "expected " + std::string(prefix == 'x' ? "integer" : "float") +
                             " register, got '" + std::string(text) + "'");
  }
  int index = 0;
  auto body = text.substr(1);
  auto [ptr, ec] = std::from_chars(body.data(), body.data() + body.size(), index);
  if (ec != std::errc() || ptr != body.data() + body.size()) {
    throw AsmError(line, "malformed register '" + std::string(text) + "'");
  }
  if (index < 0 || index >= kNumRegisters) {
    throw AsmError(line, "register out of range '" + std::string(text) + "'");
  }
  return index;
}

std::int32_t parse_int(std::string_view text, std::size_t line) {
  bool negative = false;
  std::string_view body = text;
  if (!body.empty() && (body.front() == '-' || body.front() == '+')) {
    negative = body.front() == '-';
    body.remove_prefix(1);
  }
  int base = 10;
  if (body.size() > 2 && body[0] == '0' && (body[1] == 'x' || body[1] == 'X')) {
    base = 16;
    body.remove_prefix(2);
  }
  std::int64_t value = 0;
  auto [ptr, ec] = std::from_chars(body.data(), body.data() + body.size(), value, base);
  if (body.empty() || ec != std::errc() || ptr != body.data() + body.size()) {
    throw AsmError(line, "malformed immediate '" + std::string(text) + "'");
  }
  if (negative) value = -value;
  if (value < INT32_MIN || value > INT32_MAX) {
    throw AsmError(line, "immediate out of 32-bit range '" + std::string(text) + "'");
  }
  return static_cast<std::int32_t>(value);
}

std::int32_t parse_float_bits(std::string_view text, std::size_t line) {
  float value = 0.0f;
  std::string_view body = text;
  if (!body.empty() && body.front() == '+') body.remove_prefix(1);
  auto [ptr, ec] = std::from_chars(body.data(), body.data() + body.size(), value);
  if (body.empty() || ec != std::errc() || ptr != body.data() + body.size()) {
    throw AsmError(line, "malformed float immediate '" + std::string(text) + "'");
  }
  return std::bit_cast<std::int32_t>(value);
}

std::string format_float(std::int32_t bits) {
  std::array<char, 64> buf{};
  auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), std::bit_cast<float>(bits));
  return std::string(buf.data(), ptr);
}

std::string format_with(const Instruction& inst, const std::vector<std::string>* target_names) {
  const auto& info = opcode_info(inst.opcode);
  std::string out(info.mnemonic);
  bool first = true;
  for (const auto& slot : info.operands) {
    out += first ? " " : ", ";
    first = false;
    switch (slot.kind) {
      case K::XReg: out += "x" + std::to_string(field_value(inst, slot.field)); break;
      case K::FReg: out += "f" + std::to_string(field_value(inst, slot.field)); break;
      case K::Imm: out += std::to_string(inst.imm); break;
      case K::FloatImm: out += format_float(inst.imm); break;
      case K::Label:
        if (target_names != nullptr) {
          out += (*target_names)[static_cast<std::size_t>(inst.imm)];
        } else {
          out += "@" + std::to_string(inst.imm);
        }
        break;
    }
  }
  return out;
}

}  // namespace

const OpcodeInfo& opcode_info(Opcode op) { return table().at(static_cast<std::size_t>(op)); }

std::optional<Opcode> opcode_from_mnemonic(std::string_view mnemonic) {
  for (const auto& info : table()) {
    if (info.mnemonic == mnemonic) return info.opcode;
  }
  return std::nullopt;
}

std::optional<std::size_t> Program::label_index(std::string_view name) const {
  auto it = labels.find(name);
  if (it == labels.end()) return std::nullopt;
  return it->second;
}

AsmError::AsmError(std::size_t line, const std::string& message)
    : std::runtime_error("line " + std::to_string(line) + ": " + message), line_(line) {}

Program assemble(std::string_view source) {
  Program program;
  struct Fixup {
    std::size_t index;
    std::string label;
    std::size_t line;
  };
  std::vector<Fixup> fixups;

  std::size_t line_no = 0;
  while (!source.empty()) {
    ++line_no;
    auto nl = source.find('\n');
    std::string_view line = source.substr(0, nl);
    source = nl == std::string_view::npos ? std::string_view{} : source.substr(nl + 1);

    if (auto semi = line.find(';'); semi != std::string_view::npos) line = line.substr(0, semi);
    line = trim(line);

    // Any number of `label:` prefixes.
    while (true) {
      auto colon = line.find(':');
      if (colon == std::string_view::npos) break;
      auto name = trim(line.substr(0, colon));
      if (!is_identifier(name)) throw AsmError(line_no, "invalid label '" + std::string(name) + "'");
      if (!program.labels.emplace(std::string(name), program.instructions.size()).second) {
        throw AsmError(line_no, "duplicate label '" + std::string(name) + "'");
      }
      line = trim(line.substr(colon + 1));
    }
    if (line.empty()) continue;

    auto space = line.find_first_of(" \t");
    auto mnemonic = line.substr(0, space);
    auto rest = space == std::string_view::npos ? std::string_view{} : trim(line.substr(space));

    auto op = opcode_from_mnemonic(mnemonic);
    if (!op) throw AsmError(line_no, "unknown mnemonic '" + std::string(mnemonic) + "'");
    const auto& info = opcode_info(*op);

    std::vector<std::string_view> operands;
    while (!rest.empty()) {
      auto comma = rest.find(',');
      operands.push_back(trim(rest.substr(0, comma)));
      if (comma == std::string_view::npos) break;
      rest = rest.substr(comma + 1);
      if (trim(rest).empty()) operands.push_back({});
    }
    if (operands.size() != info.operands.size()) {
      throw AsmError(line_no, std::string(mnemonic) + " expects " + std::to_string(info.operands.size()) +
                                  " operand(s), got " + std::to_string(operands.size()));
    }

    Instruction inst;
    inst.opcode = *op;
    for (std::size_t i = 0; i < operands.size(); ++i) {
      const auto& slot = info.operands[i];
      const auto text = operands[i];
      if (text.empty()) throw AsmError(line_no, "empty operand");
      switch (slot.kind) {
        case K::XReg: field_ref(inst, slot.field) = static_cast<std::uint8_t>(parse_register(text, 'x', line_no)); break;
        case K::FReg: field_ref(inst, slot.field) = static_cast<std::uint8_t>(parse_register(text, 'f', line_no)); break;
        case K::Imm: inst.imm = parse_int(text, line_no); break;
        case K::FloatImm: inst.imm = parse_float_bits(text, line_no); break;
        case K::Label:
          if (!is_identifier(text)) throw AsmError(line_no, "invalid label reference '" + std::string(text) + "'");
          fixups.push_back({program.instructions.size(), std::string(text), line_no});
          break;
      }
    }
    program.instructions.push_back(inst);
  }

  for (const auto& f : fixups) {
    auto target = program.label_index(f.label);
    if (!target) throw AsmError(f.line, "unresolved label '" + f.label + "'");
    program.instructions[f.index].imm = static_cast<std::int32_t>(*target);
  }
  return program;
}

std::string format_instruction(const Instruction& inst) { return format_with(inst, nullptr); }

std::string disassemble(const Program& program) {
  const std::size_t n = program.instructions.size();
  std::vector<std::vector<std::string>> at(n + 1);
  for (const auto& [name, index] : program.labels) {
    if (index <= n) at[index].push_back(name);
  }
  // Unlabelled branch targets get a synthesized label so the text re-assembles.
  for (const auto& inst : program.instructions) {
    if (opcode_info(inst.opcode).operands.empty()) continue;
    if (opcode_info(inst.opcode).operands.back().kind != K::Label) continue;
    auto target = static_cast<std::size_t>(inst.imm);
    if (target <= n && at[target].empty()) at[target].push_back("L" + std::to_string(target));
  }
  std::vector<std::string> target_names(n + 1);
  for (std::size_t i = 0; i <= n; ++i) {
    if (!at[i].empty()) target_names[i] = at[i].front();
  }

  std::string out;
  for (std::size_t i = 0; i <= n; ++i) {
    for (const auto& name : at[i]) out += name + ":\n";
    if (i < n) out += format_with(program.instructions[i], &target_names) + "\n";
  }
  return out;
}

void validate(const Program& program) {
  const auto n = program.instructions.size();
  for (std::size_t i = 0; i < n; ++i) {
    const auto& inst = program.instructions[i];
    for (auto r : {inst.rd, inst.rs1, inst.rs2, inst.rs3}) {
      if (r >= kNumRegisters) throw std::invalid_argument("register out of range at " + std::to_string(i));
    }
    const auto& ops = opcode_info(inst.opcode).operands;
    if (!ops.empty() && ops.back().kind == K::Label) {
      if (inst.imm < 0 || static_cast<std::size_t>(inst.imm) > n) {
        throw std::invalid_argument("branch target out of range at " + std::to_string(i));
      }
    }
  }
  for (const auto& [name, index] : program.labels) {
    if (index > n) throw std::invalid_argument("label '" + name + "' out of range");
  }
}

std::size_t ProgramBuilder::emit(const Instruction& inst) {
  program_.instructions.push_back(inst);
  return program_.instructions.size() - 1;
}

void ProgramBuilder::label(const std::string& name) {
  if (!program_.labels.emplace(name, program_.instructions.size()).second) {
    throw std::logic_error("duplicate label " + name);
  }
}

void ProgramBuilder::branch(Opcode op, std::uint8_t rs1, std::uint8_t rs2, const std::string& target_label) {
  fixups_.emplace_back(emit(ins::make(op, 0, rs1, rs2)), target_label);
}

Program ProgramBuilder::finish() {
  for (const auto& [index, name] : fixups_) {
    auto target = program_.label_index(name);
    if (!target) throw std::logic_error("unresolved label " + name);
    program_.instructions[index].imm = static_cast<std::int32_t>(*target);
  }
  fixups_.clear();
  validate(program_);
  return std::move(program_);
}

namespace ins {
Instruction make(Opcode op, int rd, int rs1, int rs2, int rs3, std::int32_t imm) {
  return Instruction{op, static_cast<std::uint8_t>(rd), static_cast<std::uint8_t>(rs1),
                     static_cast<std::uint8_t>(rs2), static_cast<std::uint8_t>(rs3), imm};
}
Instruction fli(int fd, float value) {
  return make(Opcode::S_FLI, fd, 0, 0, 0, std::bit_cast<std::int32_t>(value));
}
}  // namespace ins

}  // namespace dplena
