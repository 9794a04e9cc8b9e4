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

#ifndef DPLENA_ISA_HPP_
#define DPLENA_ISA_HPP_

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace dplena {

inline constexpr int kNumRegisters = 32;

enum class Opcode : std::uint8_t {
  // Sampling extension.
  V_RED_MAX_IDX,
  S_ST_FP,
  S_ST_INT,
  S_MAP_V_FP,
  V_TOPK_MASK,
  V_SELECT_INT,
  // Base subset used by the generated sampling program.
  H_PREFETCH_V,
  V_RED_MAX,
  V_RED_SUM,
  V_SUB_SCALAR,
  V_SUB_V,
  V_EXP,
  S_EXP,
  S_RECIP,
  S_FMUL,
  S_FADD,
  S_FSUB,
  S_FMAX_IDX,
  S_FLI,
  S_LI,
  S_ADDI,
  S_SETVL,
  S_BNE,
  S_BGE,
  S_HALT,
  FIFO_PUSH,
};

inline constexpr std::size_t kNumOpcodes = static_cast<std::size_t>(Opcode::FIFO_PUSH) + 1;

// Where an assembly operand lands in the decoded Instruction and what it may name.
enum class OperandKind : std::uint8_t { XReg, FReg, Imm, FloatImm, Label };
enum class OperandField : std::uint8_t { Rd, Rs1, Rs2, Rs3, Imm };

struct OperandSlot {
  OperandKind kind;
  OperandField field;
};

struct OpcodeInfo {
  Opcode opcode;
  std::string_view mnemonic;
  std::vector<OperandSlot> operands;
  bool custom;  // one of the six sampling-extension instructions
};

const OpcodeInfo& opcode_info(Opcode op);
std::optional<Opcode> opcode_from_mnemonic(std::string_view mnemonic);

struct Instruction {
  Opcode opcode = Opcode::S_HALT;
  std::uint8_t rd = 0;
  std::uint8_t rs1 = 0;
  std::uint8_t rs2 = 0;
  std::uint8_t rs3 = 0;
  // Integer immediate, branch target index, or raw fp32 bits for S_FLI.
  std::int32_t imm = 0;

  friend bool operator==(const Instruction&, const Instruction&) = default;
};

struct Program {
  std::vector<Instruction> instructions;
  std::map<std::string, std::size_t, std::less<>> labels;

  std::size_t size() const { return instructions.size(); }
  std::optional<std::size_t> label_index(std::string_view name) const;

  friend bool operator==(const Program&, const Program&) = default;
};

class AsmError : public std::runtime_error {
 public:
  AsmError(std::size_t line, const std::string& message);
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

// Grammar: one instruction per line, optional `label:` prefix, `;` comments,
// lower-case mnemonics, comma-separated operands, x0..x31 / f0..f31 registers.
Program assemble(std::string_view source);

// Canonical text: labels on their own line, then one instruction per line,
// each line newline-terminated.
std::string disassemble(const Program& program);

// Single instruction text; branch targets print as `@<index>` since no label table is in scope.
std::string format_instruction(const Instruction& inst);

// Throws std::invalid_argument on out-of-range registers or branch targets.
void validate(const Program& program);

// Appends instructions and resolves label references at finish().
class ProgramBuilder {
 public:
  std::size_t emit(const Instruction& inst);
  void label(const std::string& name);
  // Emits a branch whose target is resolved from `target_label` at finish().
  void branch(Opcode op, std::uint8_t rs1, std::uint8_t rs2, const std::string& target_label);
  std::size_t size() const { return program_.instructions.size(); }
  Program finish();

 private:
  Program program_;
  std::vector<std::pair<std::size_t, std::string>> fixups_;
};

// Convenience constructors used by codegen and tests.
namespace ins {
Instruction make(Opcode op, int rd = 0, int rs1 = 0, int rs2 = 0, int rs3 = 0, std::int32_t imm = 0);
Instruction fli(int fd, float value);
}  // namespace ins

}  // namespace dplena

#endif  // DPLENA_ISA_HPP_
