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

#include <gtest/gtest.h>

#include <random>
#include <sstream>

#include "dplena/isa.hpp"

namespace dplena {
namespace {

struct Rig {
  explicit Rig(MachineShape shape = {64, 64}, MemoryParams memory = {}) : state(memory, shape, Hbm{}), exec({}, memory) {}

  CycleReport run(std::string_view source, RunOptions options = {}) {
    program = assemble(source);
    return exec.run(state, program, options);
  }

  MachineState state;
  Executor exec;
  Program program;
};

std::string addr(std::uint32_t a) { return std::to_string(a); }

TEST(Executor, LoadAndAddImmediate) {
  Rig rig;
  const auto r = rig.run("s_li x1, 7\ns_addi x1, x1, 1\ns_halt\n");
  EXPECT_EQ(rig.state.gp[1], 8);
  EXPECT_EQ(r.counters.scalar, 2u);
  EXPECT_EQ(r.counters.other, 1u);
  EXPECT_EQ(r.instructions, 3u);
}

TEST(Executor, HaltOnly) {
  Rig rig;
  const auto r = rig.run("s_halt\n");
  EXPECT_EQ(r.total_cycles, 1u);
  EXPECT_EQ(r.counters.vector + r.counters.memory + r.counters.scalar, 0u);
  EXPECT_TRUE(rig.state.halted);
}

TEST(Executor, MaxIndexOverKnownChunk) {
  Rig rig;
  std::mt19937 rng(1);
  std::vector<Bf16> chunk(64);
  for (auto& v : chunk) v = Bf16::from_float(static_cast<float>(rng() % 1000) / 10.0f);
  sram_write_vector(rig.state, kVectorSramBase + 256, chunk);
  std::size_t best = 0;
  for (std::size_t i = 1; i < 64; ++i) {
    if (chunk[i].to_float() > chunk[best].to_float()) best = i;
  }
  rig.run("s_li x3, " + addr(kVectorSramBase + 256) + "\ns_li x2, 1000\nv_red_max_idx f2, x3, x1, x2\ns_halt\n");
  EXPECT_EQ(rig.state.fp[2], chunk[best].to_float());
  EXPECT_EQ(rig.state.gp[1], static_cast<std::int32_t>(1000 + best));
}

TEST(Executor, UniformChunkConfidenceIsOneOverVlen) {
  Rig rig;
  sram_write_vector(rig.state, kVectorSramBase, std::vector<Bf16>(64, Bf16::from_float(0.0f)));
  const auto r = rig.run(
      "s_li x8, 0\n"
      "v_red_max_idx f1, x8, x5, x0\n"
      "v_sub_scalar x8, f1\n"
      "v_exp x8\n"
      "v_red_sum f4, x8\n"
      "s_recip f7, f4\n"
      "s_halt\n");
  EXPECT_EQ(rig.state.fp[7], 1.0f / 64.0f);
  EXPECT_EQ(rig.state.gp[5], 0);
  // In place: the logits buffer now holds the shifted exponentials.
  for (Bf16 v : sram_read_vector(rig.state, kVectorSramBase, 64)) EXPECT_EQ(v.to_float(), 1.0f);
  const UnitTimings t;
  EXPECT_EQ(r.counters.vector, 2 * t.reduction_latency(64) + 2 * t.elementwise_cost());
  EXPECT_EQ(r.counters.scalar, 1u + t.fp_recip_latency);
  EXPECT_EQ(r.total_cycles, r.counters.vector + r.counters.memory + r.counters.scalar + r.counters.other);
}

TEST(Executor, VectorLengthRegister) {
  Rig rig;
  std::vector<Bf16> v(64, Bf16::from_float(1.0f));
  sram_write_vector(rig.state, kVectorSramBase, v);
  rig.run("s_setvl 10\nv_red_sum f1, x0\ns_halt\n");
  EXPECT_EQ(rig.state.fp[1], 10.0f);
  Rig bad;
  EXPECT_THROW(bad.run("s_setvl 65\n"), SimFault);
  Rig zero;
  EXPECT_THROW(zero.run("s_setvl 0\n"), SimFault);
}

TEST(Executor, ScalarFpOps) {
  Rig rig;
  rig.run(
      "s_fli f1, 2.0\ns_fli f2, 0.5\n"
      "s_fmul f3, f1, f2\ns_fadd f4, f1, f2\ns_fsub f5, f1, f2\n"
      "s_exp f6, f0\ns_recip f7, f1\n"
      "s_li x2, 9\ns_fmax_idx f3, f1, x1, x2\ns_fmax_idx f3, f2, x4, x2\ns_halt\n");
  EXPECT_EQ(rig.state.fp[4], 2.5f);
  EXPECT_EQ(rig.state.fp[5], 1.5f);
  EXPECT_EQ(rig.state.fp[6], 1.0f);
  EXPECT_EQ(rig.state.fp[7], 0.5f);
  EXPECT_EQ(rig.state.fp[3], 2.0f);
  EXPECT_EQ(rig.state.gp[1], 9);
  EXPECT_EQ(rig.state.gp[4], 0);
}

TEST(Executor, StoresAndMapToVector) {
  Rig rig({64, 4});
  rig.run("s_li x1, " + addr(kFpSramBase) + "\n" +
          "s_fli f1, 0.25\ns_st_fp f1, x1, 0\ns_fli f1, 0.75\ns_st_fp f1, x1, 6\n"
          "s_li x2, " + addr(kIntSramBase) + "\ns_li x3, 77\ns_st_int x3, x2, 4\n"
          "s_li x4, 64\ns_map_v_fp x4, x1, 4\ns_halt\n");
  const auto v = sram_read_vector(rig.state, 64, 4);
  EXPECT_EQ(v[0].to_float(), 0.25f);
  EXPECT_EQ(v[3].to_float(), 0.75f);
  EXPECT_EQ(rig.state.int_sram.read(kIntSramBase + 4, 1)[0], 77);
}

TEST(Executor, TopkSelectAndFifo) {
  Rig rig({64, 4});
  // conf at 0, eligible at 8, transfer at 16; tokens a at +0, b at +16.
  sram_write_vector(rig.state, 0, std::vector<Bf16>{Bf16::from_float(0.2f), Bf16::from_float(0.9f),
                                                    Bf16::from_float(0.5f), Bf16::from_float(0.7f)});
  sram_write_vector(rig.state, 8, std::vector<Bf16>{Bf16::from_float(1), Bf16::from_float(0),
                                                    Bf16::from_float(1), Bf16::from_float(1)});
  auto a = rig.state.int_sram.write(kIntSramBase, 8);
  for (int i = 0; i < 8; ++i) a[i] = 100 + i;
  rig.run("s_li x1, 0\ns_li x2, 8\ns_li x3, 16\ns_li x4, 2\nv_topk_mask x3, x1, x2, x4\n"
          "s_li x5, " + addr(kIntSramBase) + "\ns_li x6, " + addr(kIntSramBase + 16) + "\n" +
          "s_li x7, " + addr(kIntSramBase + 32) + "\nv_select_int x7, x3, x5, x6\nfifo_push x7, 4\ns_halt\n");
  const auto mask = sram_read_vector(rig.state, 16, 4);
  EXPECT_EQ(mask[0].to_float(), 0.0f);
  EXPECT_EQ(mask[1].to_float(), 0.0f);
  EXPECT_EQ(mask[2].to_float(), 1.0f);
  EXPECT_EQ(mask[3].to_float(), 1.0f);
  EXPECT_EQ(std::vector<std::int32_t>(rig.state.fifo_out.begin(), rig.state.fifo_out.end()),
            (std::vector<std::int32_t>{104, 105, 102, 103}));
}

TEST(Executor, IntSramIsolatedFromVectorDatapath) {
  for (const char* op : {"v_exp x1", "v_red_sum f1, x1", "v_sub_scalar x1, f0", "v_red_max f1, x1"}) {
    Rig rig;
    try {
      rig.run("s_li x1, " + addr(kIntSramBase) + "\n" + op + "\n");
      FAIL() << op;
    } catch (const SimFault& e) {
      EXPECT_EQ(e.kind(), SimFault::Kind::Domain) << op;
      EXPECT_EQ(e.pc(), 1u);
      EXPECT_NE(std::string(e.what()).find(std::string(op).substr(0, 4)), std::string::npos) << e.what();
    }
  }
}

TEST(Executor, FpStoreToIntSramFaults) {
  Rig rig;
  try {
    rig.run("s_li x1, " + addr(kIntSramBase) + "\ns_st_fp f0, x1, 0\n");
    FAIL();
  } catch (const SimFault& e) {
    EXPECT_EQ(e.kind(), SimFault::Kind::Domain);
  }
}

TEST(Executor, ReciprocalOfZeroFaults) {
  Rig rig;
  try {
    rig.run("s_recip f1, f0\n");
    FAIL();
  } catch (const SimFault& e) {
    EXPECT_EQ(e.kind(), SimFault::Kind::Arithmetic);
  }
}

TEST(Executor, RunningOffTheEndFaults) {
  Rig rig;
  try {
    rig.run("s_li x1, 1\n");
    FAIL();
  } catch (const SimFault& e) {
    EXPECT_EQ(e.kind(), SimFault::Kind::ProgramCounter);
  }
}

TEST(Executor, TimeoutCarriesPartialReport) {
  Rig rig;
  RunOptions options;
  options.max_cycles = 50;
  try {
    rig.run("top: s_bne x0, x1, top\ns_li x1, 1\ns_bge x1, x0, top\n", options);
    FAIL();
  } catch (const SimTimeout& e) {
    EXPECT_GT(e.partial().total_cycles, 50u);
  }
}

TEST(Executor, TraceLines) {
  Rig rig;
  std::ostringstream trace;
  RunOptions options;
  options.trace = &trace;
  rig.run("s_li x1, 3\ns_halt\n", options);
  EXPECT_EQ(trace.str(), "0\ts_li x1, 3\t1\tscalar\n1\ts_halt\t1\tother\n");
}

TEST(Executor, DeterministicReports) {
  const std::string src =
      "s_li x1, 0\ns_li x2, 8\nloop: v_exp x0\ns_addi x1, x1, 1\ns_bne x1, x2, loop\ns_halt\n";
  Rig a, b;
  EXPECT_EQ(a.run(src), b.run(src));
}

TEST(Executor, PrefetchChargesExposedMemory) {
  MemoryParams memory;
  memory.double_buffering = true;
  std::vector<std::uint8_t> bytes(33 * 4, 0);
  MachineState state(memory, {64, 64}, Hbm(bytes));
  Executor exec({}, memory);
  const auto program = assemble(
      "s_li x2, 64\n"
      "h_prefetch_v x0, x0, x2\n"
      "v_exp x0\nv_exp x0\n"
      "h_prefetch_v x0, x2, x2\n"
      "s_halt\n");
  const auto r = exec.run(state, program);
  // 100 + ceil(64*33 / (32*64)) = 102 per transfer. The first hides the s_li,
  // the second the two exps.
  const std::uint64_t hidden = 2 * UnitTimings{}.elementwise_cost();
  EXPECT_EQ(r.counters.memory, 102u - 1u + 102u - hidden);
  EXPECT_EQ(r.counters.hbm_elements_moved, 128u);
}

TEST(Executor, ZeroRegisterStaysZero) {
  Rig rig;
  rig.run("s_li x0, 5\ns_addi x0, x0, 3\ns_halt\n");
  EXPECT_EQ(rig.state.gp[0], 0);
}

}  // namespace
}  // namespace dplena
