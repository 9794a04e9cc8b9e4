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

#include "dplena/executor.hpp"

#include <bit>
#include <ostream>
#include <vector>

namespace dplena {
namespace {

using Cat = CycleCategory;

std::uint32_t addr(const MachineState& s, std::uint8_t reg) { return static_cast<std::uint32_t>(s.gp[reg]); }

std::uint64_t ceil_div(std::uint64_t a, std::uint64_t b) { return (a + b - 1) / b; }

std::uint64_t non_negative(std::int32_t value, const char* what) {
  if (value < 0) {
    throw SimFault(SimFault::Kind::Operand, static_cast<std::uint32_t>(value), std::string(what) + " is negative");
  }
  return static_cast<std::uint64_t>(value);
}

}  // namespace

CycleReport make_report(const MachineState& state, std::uint64_t instructions, double clock_ghz) {
  CycleReport r;
  r.counters = state.cycles;
  r.total_cycles = state.cycles.total();
  r.instructions = instructions;
  r.clock_ghz = clock_ghz;
  r.hbm_bytes_moved = state.cycles.hbm_bytes_moved();
  const double seconds = static_cast<double>(r.total_cycles) / (clock_ghz * 1e9);
  r.latency_ms = seconds * 1e3;
  r.hbm_achieved_bandwidth = seconds > 0.0 ? r.hbm_bytes_moved / seconds : 0.0;
  r.vector_sram_high_water = state.vector_sram.high_water_bytes();
  r.fp_sram_high_water = state.fp_sram.high_water_bytes();
  r.int_sram_high_water = state.int_sram.high_water_bytes();
  return r;
}

SimTimeout::SimTimeout(CycleReport partial)
    : std::runtime_error("cycle budget exceeded after " + std::to_string(partial.total_cycles) + " cycles"),
      partial_(partial) {}

ExecOutcome Executor::execute(MachineState& s, const Instruction& in) const {
  const auto& t = timings_;
  ExecOutcome out;
  out.next_pc = s.pc + 1;
  const std::size_t vl = s.vl;
  const std::size_t block = s.shape.block_len;

  auto charge = [&](Cat cat, std::uint64_t cycles) {
    out.category = cat;
    out.cycles = cycles;
  };

  switch (in.opcode) {
    case Opcode::H_PREFETCH_V: {
      auto cost = hbm_prefetch(s, memory_, static_cast<std::uint32_t>(s.gp[in.rs1]),
                               non_negative(s.gp[in.rs2], "prefetch count"), addr(s, in.rd));
      charge(Cat::Memory, cost.exposed);
      out.hidden_cycles = cost.transfer - cost.exposed;
      break;
    }
    case Opcode::V_RED_MAX_IDX: {
      auto r = reduce_max_idx(s.vector_sram.read(addr(s, in.rs1), vl), s.gp[in.rs3]);
      s.fp[in.rd] = r.value;
      s.set_gp(in.rs2, static_cast<std::int32_t>(r.index));
      charge(Cat::Vector, t.reduction_latency(s.shape.vlen));
      break;
    }
    case Opcode::V_RED_MAX:
      s.fp[in.rd] = reduce_max(s.vector_sram.read(addr(s, in.rs1), vl));
      charge(Cat::Vector, t.reduction_latency(s.shape.vlen));
      break;
    case Opcode::V_RED_SUM:
      s.fp[in.rd] = reduce_sum(s.vector_sram.read(addr(s, in.rs1), vl));
      charge(Cat::Vector, t.reduction_latency(s.shape.vlen));
      break;
    case Opcode::V_SUB_SCALAR:
      elementwise_sub_scalar(s.vector_sram.write(addr(s, in.rd), vl), s.fp[in.rs1]);
      charge(Cat::Vector, t.elementwise_cost());
      break;
    case Opcode::V_SUB_V: {
      auto lhs = s.vector_sram.read(addr(s, in.rs1), vl);
      auto rhs = s.vector_sram.read(addr(s, in.rs2), vl);
      std::vector<Bf16> a(lhs.begin(), lhs.end()), b(rhs.begin(), rhs.end());
      elementwise_sub(s.vector_sram.write(addr(s, in.rd), vl), a, b);
      charge(Cat::Vector, t.elementwise_cost());
      break;
    }
    case Opcode::V_EXP:
      elementwise_exp(s.vector_sram.write(addr(s, in.rd), vl));
      charge(Cat::Vector, t.elementwise_cost());
      break;
    case Opcode::S_EXP:
      s.fp[in.rd] = scalar_exp(s.fp[in.rs1]);
      charge(Cat::Scalar, t.fp_exp_latency);
      break;
    case Opcode::S_RECIP:
      if (s.fp[in.rs1] == 0.0f) throw SimFault(SimFault::Kind::Arithmetic, in.rs1, "reciprocal of zero");
      s.fp[in.rd] = scalar_recip(s.fp[in.rs1]);
      charge(Cat::Scalar, t.fp_recip_latency);
      break;
    case Opcode::S_FMUL:
      s.fp[in.rd] = s.fp[in.rs1] * s.fp[in.rs2];
      charge(Cat::Scalar, t.scalar_latency);
      break;
    case Opcode::S_FADD:
      s.fp[in.rd] = s.fp[in.rs1] + s.fp[in.rs2];
      charge(Cat::Scalar, t.scalar_latency);
      break;
    case Opcode::S_FSUB:
      s.fp[in.rd] = s.fp[in.rs1] - s.fp[in.rs2];
      charge(Cat::Scalar, t.scalar_latency);
      break;
    case Opcode::S_FMAX_IDX:
      if (s.fp[in.rs1] > s.fp[in.rd]) {
        s.fp[in.rd] = s.fp[in.rs1];
        s.set_gp(in.rs2, s.gp[in.rs3]);
      }
      charge(Cat::Scalar, t.scalar_latency);
      break;
    case Opcode::S_FLI:
      s.fp[in.rd] = std::bit_cast<float>(in.imm);
      charge(Cat::Scalar, t.scalar_latency);
      break;
    case Opcode::S_LI:
      s.set_gp(in.rd, in.imm);
      charge(Cat::Scalar, t.scalar_latency);
      break;
    case Opcode::S_ADDI:
      s.set_gp(in.rd, static_cast<std::int32_t>(static_cast<std::uint32_t>(s.gp[in.rs1]) +
                                                static_cast<std::uint32_t>(in.imm)));
      charge(Cat::Scalar, t.scalar_latency);
      break;
    case Opcode::S_SETVL:
      if (in.imm < 1 || static_cast<std::uint32_t>(in.imm) > s.shape.vlen) {
        throw SimFault(SimFault::Kind::Operand, static_cast<std::uint32_t>(in.imm), "vector length outside 1..VLEN");
      }
      s.vl = static_cast<std::uint32_t>(in.imm);
      charge(Cat::Scalar, t.scalar_latency);
      break;
    case Opcode::S_ST_FP:
      s.fp_sram.write(addr(s, in.rs1) + static_cast<std::uint32_t>(in.imm), 1)[0] = Bf16::from_float(s.fp[in.rd]);
      charge(Cat::Scalar, t.scalar_latency);
      break;
    case Opcode::S_ST_INT:
      s.int_sram.write(addr(s, in.rs1) + static_cast<std::uint32_t>(in.imm), 1)[0] = s.gp[in.rd];
      charge(Cat::Scalar, t.scalar_latency);
      break;
    case Opcode::S_MAP_V_FP: {
      const auto count = non_negative(in.imm, "map length");
      auto src = s.fp_sram.read(addr(s, in.rs1), count);
      std::vector<Bf16> staged(src.begin(), src.end());
      auto dst = s.vector_sram.write(addr(s, in.rd), count);
      std::copy(staged.begin(), staged.end(), dst.begin());
      charge(Cat::Memory, t.map_latency + ceil_div(count, s.shape.vlen));
      break;
    }
    case Opcode::V_TOPK_MASK: {
      const auto k = non_negative(s.gp[in.rs3], "top-k count");
      auto conf = s.vector_sram.read(addr(s, in.rs1), block);
      auto elig = s.vector_sram.read(addr(s, in.rs2), block);
      std::vector<float> values(block);
      std::vector<std::uint8_t> eligible(block);
      for (std::size_t i = 0; i < block; ++i) {
        values[i] = conf[i].to_float();
        eligible[i] = elig[i].to_float() != 0.0f;
      }
      auto mask = topk_mask(values, eligible, k);
      auto dst = s.vector_sram.write(addr(s, in.rd), block);
      for (std::size_t i = 0; i < block; ++i) dst[i] = Bf16::from_float(mask[i] ? 1.0f : 0.0f);
      charge(Cat::Vector, std::uint64_t{block} * t.topk_per_element);
      break;
    }
    case Opcode::V_SELECT_INT: {
      auto mask_view = s.vector_sram.read(addr(s, in.rs1), block);
      auto a_view = s.int_sram.read(addr(s, in.rs2), block);
      auto b_view = s.int_sram.read(addr(s, in.rs3), block);
      std::vector<std::uint8_t> mask(block);
      for (std::size_t i = 0; i < block; ++i) mask[i] = mask_view[i].to_float() != 0.0f;
      std::vector<std::int32_t> a(a_view.begin(), a_view.end()), b(b_view.begin(), b_view.end());
      auto result = select_int(mask, a, b);
      auto dst = s.int_sram.write(addr(s, in.rd), block);
      std::copy(result.begin(), result.end(), dst.begin());
      charge(Cat::Vector, t.elementwise_latency + ceil_div(block, s.shape.vlen));
      break;
    }
    case Opcode::S_BNE:
      if (s.gp[in.rs1] != s.gp[in.rs2]) out.next_pc = static_cast<std::size_t>(in.imm);
      charge(Cat::Other, t.control_latency);
      break;
    case Opcode::S_BGE:
      if (s.gp[in.rs1] >= s.gp[in.rs2]) out.next_pc = static_cast<std::size_t>(in.imm);
      charge(Cat::Other, t.control_latency);
      break;
    case Opcode::S_HALT:
      s.halted = true;
      out.next_pc = s.pc;
      charge(Cat::Other, t.control_latency);
      break;
    case Opcode::FIFO_PUSH: {
      const auto count = non_negative(in.imm, "fifo push length");
      auto src = s.int_sram.read(addr(s, in.rs1), count);
      s.fifo_out.insert(s.fifo_out.end(), src.begin(), src.end());
      charge(Cat::Scalar, std::max<std::uint64_t>(1, count * t.fifo_per_element));
      break;
    }
  }
  return out;
}

ExecOutcome Executor::step(MachineState& state, const Program& program) const {
  if (state.pc >= program.size()) {
    throw SimFault(SimFault::Kind::ProgramCounter, state.pc, "pc outside program of " +
                                                                 std::to_string(program.size()) + " instruction(s)");
  }
  const auto& inst = program.instructions[state.pc];
  ExecOutcome out;
  try {
    out = execute(state, inst);
  } catch (const SimFault& fault) {
    throw fault.at(state.pc, format_instruction(inst));
  } catch (const std::invalid_argument& e) {
    throw SimFault(SimFault::Kind::Operand, state.pc, e.what()).at(state.pc, format_instruction(inst));
  }
  state.cycles.charge(out.category, out.cycles);
  if (inst.opcode != Opcode::H_PREFETCH_V) state.compute_since_prefetch += out.cycles;
  state.pc = out.next_pc;
  return out;
}

CycleReport Executor::run(MachineState& state, const Program& program, const RunOptions& options) const {
  std::uint64_t retired = 0;
  while (!state.halted) {
    if (options.before_step) options.before_step(state.pc, state);
    const std::size_t pc = state.pc;
    auto out = step(state, program);
    ++retired;
    if (options.trace != nullptr) {
      *options.trace << pc << '\t' << format_instruction(program.instructions[pc]) << '\t' << out.cycles << '\t'
                     << to_string(out.category) << '\n';
    }
    if (state.cycles.total() > options.max_cycles) throw SimTimeout(make_report(state, retired, options.clock_ghz));
  }
  return make_report(state, retired, options.clock_ghz);
}

}  // namespace dplena
