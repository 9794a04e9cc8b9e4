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

#include "dplena/codegen.hpp"

#include <limits>
#include <string>

#include "dplena/logits_stub.hpp"

namespace dplena {
namespace {

using Op = Opcode;
using ins::make;

// Register map of the generated program.
namespace reg {
// Integer.
constexpr int kBatch = 1;        // b
constexpr int kRow = 3;          // l
constexpr int kChunk = 4;        // r
constexpr int kChunkArgmax = 5;  // absolute argmax of the current sub-chunk
constexpr int kBestIndex = 6;    // running argmax of the row
constexpr int kVocabBase = 7;    // vocabulary index of lane 0 of the sub-chunk
constexpr int kSubPtr = 8;       // Vector SRAM address of the sub-chunk
constexpr int kSubEnd = 9;
constexpr int kBlockLen = 10;
constexpr int kBatchCount = 11;
constexpr int kChunkLen = 12;
constexpr int kChunkCount = 13;
constexpr int kFpBase = 14;
constexpr int kScratch = 15;
constexpr int kInitPtr = 16;
constexpr int kInitEnd = 17;
constexpr int kSlotIndex = 18;   // b mod R
constexpr int kPreload = 19;     // R
constexpr int kTopK = 20;
constexpr int kHbmRow = 21;      // HBM element offset of the next logits to stream
constexpr int kConf = 22;
constexpr int kElig = 23;
constexpr int kTransfer = 24;
constexpr int kTokens = 25;
constexpr int kArgmax = 26;
constexpr int kSlotBase = 27;
constexpr int kFpPtr = 28;
constexpr int kArgmaxPtr = 29;
constexpr int kRowBuf = 30;
// Floating point.
constexpr int kZero = 0;
constexpr int kChunkMax = 1;
constexpr int kRunMax = 2;
constexpr int kPrevMax = 3;
constexpr int kRunSum = 4;
constexpr int kChunkSum = 5;
constexpr int kRescale = 6;
constexpr int kConfidence = 7;
constexpr int kMinusOne = 9;
}  // namespace reg

std::int32_t imm32(std::int64_t value) {
  if (value > std::numeric_limits<std::int32_t>::max() || value < std::numeric_limits<std::int32_t>::min()) {
    throw ConfigError("generated immediate " + std::to_string(value) + " exceeds 32 bits");
  }
  return static_cast<std::int32_t>(value);
}

class SamplingEmitter {
 public:
  SamplingEmitter(const SamplingConfig& c, const SramLayout& layout, const KSchedule& k)
      : c_(c), layout_(layout), k_(k) {
    const bool edge = c.mode == SamplingMode::Edge;
    chunk_len_ = edge ? c.v_chunk : c.vocab;
    full_chunks_ = c.vocab / chunk_len_;
    tail_ = c.vocab % chunk_len_;
  }

  GeneratedProgram run() {
    GeneratedProgram out;
    prologue();
    for (std::uint32_t t = 0; t < c_.steps; ++t) {
      step(t);
      out.step_end.push_back(b_.size());
    }
    e(make(Op::S_LI, reg::kScratch, 0, 0, 0, imm32(layout_.tokens)));
    e(make(Op::FIFO_PUSH, 0, reg::kScratch, 0, 0, imm32(c_.rows())));
    e(make(Op::S_HALT));
    out.program = b_.finish();
    out.layout = layout_;
    out.k = k_;
    return out;
  }

 private:
  void e(const Instruction& inst) { b_.emit(inst); }
  void li(int rd, std::int64_t value) { e(make(Op::S_LI, rd, 0, 0, 0, imm32(value))); }
  void addi(int rd, int rs, std::int64_t value) {
    e(make(Op::S_ADDI, rd, rs, 0, 0, static_cast<std::int32_t>(value)));
  }
  void setvl(std::uint64_t n) { e(make(Op::S_SETVL, 0, 0, 0, 0, imm32(static_cast<std::int64_t>(n)))); }

  void prologue() {
    const std::uint64_t bl = c_.rows();
    li(reg::kBlockLen, c_.block_len);
    li(reg::kBatchCount, c_.batch);
    li(reg::kChunkLen, chunk_len_);
    li(reg::kChunkCount, full_chunks_);
    li(reg::kFpBase, layout_.fp_confidence);
    li(reg::kPreload, c_.preload_batches);
    e(ins::fli(reg::kZero, 0.0f));
    e(ins::fli(reg::kMinusOne, -1.0f));

    // x <- mask_id everywhere.
    li(reg::kScratch, c_.mask_id);
    li(reg::kInitPtr, layout_.tokens);
    li(reg::kInitEnd, layout_.tokens + 4 * bl);
    b_.label("init_tokens");
    e(make(Op::S_ST_INT, reg::kScratch, reg::kInitPtr, 0, 0, 0));
    addi(reg::kInitPtr, reg::kInitPtr, 4);
    b_.branch(Op::S_BNE, reg::kInitPtr, reg::kInitEnd, "init_tokens");

    // eligible <- 1.0 everywhere (v - v - (-1)).
    setvl(c_.block_len);
    li(reg::kInitPtr, layout_.eligible);
    li(reg::kInitEnd, layout_.eligible + 2 * bl);
    b_.label("init_eligible");
    e(make(Op::V_SUB_V, reg::kInitPtr, reg::kInitPtr, reg::kInitPtr));
    e(make(Op::V_SUB_SCALAR, reg::kInitPtr, reg::kMinusOne));
    addi(reg::kInitPtr, reg::kInitPtr, 2 * c_.block_len);
    b_.branch(Op::S_BNE, reg::kInitPtr, reg::kInitEnd, "init_eligible");
    setvl(c_.vlen);
  }

  // One sub-chunk of online Stable-Max at kSubPtr over the active lanes.
  void stable_max_body() {
    e(make(Op::V_RED_MAX_IDX, reg::kChunkMax, reg::kSubPtr, reg::kChunkArgmax, reg::kVocabBase));
    e(make(Op::S_FADD, reg::kPrevMax, reg::kRunMax, reg::kZero));
    e(make(Op::S_FMAX_IDX, reg::kRunMax, reg::kChunkMax, reg::kBestIndex, reg::kChunkArgmax));
    e(make(Op::V_SUB_SCALAR, reg::kSubPtr, reg::kRunMax));
    e(make(Op::V_EXP, reg::kSubPtr));
    e(make(Op::V_RED_SUM, reg::kChunkSum, reg::kSubPtr));
    // s <- s * e^(m_old - m_new) + sum
    e(make(Op::S_FSUB, reg::kRescale, reg::kPrevMax, reg::kRunMax));
    e(make(Op::S_EXP, reg::kRescale, reg::kRescale));
    e(make(Op::S_FMUL, reg::kRunSum, reg::kRunSum, reg::kRescale));
    e(make(Op::S_FADD, reg::kRunSum, reg::kRunSum, reg::kChunkSum));
  }

  // Sub-chunks of a staged chunk starting at kRowBuf holding `len` logits.
  void sub_chunks(std::uint64_t len, const std::string& tag, bool advance_after_tail) {
    const std::uint64_t full = len / c_.vlen;
    const std::uint64_t rest = len % c_.vlen;
    addi(reg::kSubPtr, reg::kRowBuf, 0);
    if (full > 0) {
      addi(reg::kSubEnd, reg::kRowBuf, static_cast<std::int64_t>(full * c_.vlen * 2));
      b_.label(tag + "_sub");
      stable_max_body();
      addi(reg::kSubPtr, reg::kSubPtr, 2 * c_.vlen);
      addi(reg::kVocabBase, reg::kVocabBase, c_.vlen);
      b_.branch(Op::S_BNE, reg::kSubPtr, reg::kSubEnd, tag + "_sub");
    }
    if (rest > 0) {
      setvl(static_cast<std::uint32_t>(rest));
      stable_max_body();
      setvl(c_.vlen);
      if (advance_after_tail) addi(reg::kVocabBase, reg::kVocabBase, static_cast<std::int64_t>(rest));
    }
  }

  void step(std::uint32_t t) {
    const std::string p = "t" + std::to_string(t) + "_";
    const bool perf = c_.mode == SamplingMode::Performance;
    const std::uint64_t row_bytes = std::uint64_t{c_.vocab} * 2;
    const std::uint64_t slot_bytes = row_bytes * c_.block_len;

    li(reg::kTopK, k_.at(t, 0));
    li(reg::kHbmRow, logits_offset(c_, t, 0, 0));
    li(reg::kBatch, 0);
    li(reg::kConf, layout_.confidence);
    li(reg::kElig, layout_.eligible);
    li(reg::kTransfer, layout_.transfer);
    li(reg::kTokens, layout_.tokens);
    li(reg::kArgmax, layout_.argmax_tokens);
    if (perf) {
      li(reg::kSlotBase, layout_.logits);
      li(reg::kSlotIndex, 0);
    } else {
      li(reg::kRowBuf, layout_.logits);
    }

    b_.label(p + "batch");
    addi(reg::kFpPtr, reg::kFpBase, 0);
    addi(reg::kArgmaxPtr, reg::kArgmax, 0);
    if (perf) addi(reg::kRowBuf, reg::kSlotBase, 0);
    li(reg::kRow, 0);

    // Phase 1: stream the row through Stable-Max; Phase 2: park the scalars.
    b_.label(p + "row");
    e(ins::fli(reg::kRunMax, -std::numeric_limits<float>::infinity()));
    e(ins::fli(reg::kRunSum, 0.0f));
    li(reg::kBestIndex, 0);
    li(reg::kVocabBase, 0);
    if (full_chunks_ > 0) {
      li(reg::kChunk, 0);
      b_.label(p + "chunk");
      e(make(Op::H_PREFETCH_V, reg::kRowBuf, reg::kHbmRow, reg::kChunkLen));
      addi(reg::kHbmRow, reg::kHbmRow, chunk_len_);
      sub_chunks(chunk_len_, p + "chunk", true);
      addi(reg::kChunk, reg::kChunk, 1);
      b_.branch(Op::S_BNE, reg::kChunk, reg::kChunkCount, p + "chunk");
    }
    if (tail_ > 0) {
      li(reg::kScratch, tail_);
      e(make(Op::H_PREFETCH_V, reg::kRowBuf, reg::kHbmRow, reg::kScratch));
      addi(reg::kHbmRow, reg::kHbmRow, tail_);
      sub_chunks(tail_, p + "tail", false);
    }
    e(make(Op::S_RECIP, reg::kConfidence, reg::kRunSum));
    e(make(Op::S_ST_FP, reg::kConfidence, reg::kFpPtr, 0, 0, 0));
    e(make(Op::S_ST_INT, reg::kBestIndex, reg::kArgmaxPtr, 0, 0, 0));
    addi(reg::kFpPtr, reg::kFpPtr, 2);
    addi(reg::kArgmaxPtr, reg::kArgmaxPtr, 4);
    if (perf) addi(reg::kRowBuf, reg::kRowBuf, static_cast<std::int64_t>(row_bytes));
    addi(reg::kRow, reg::kRow, 1);
    b_.branch(Op::S_BNE, reg::kRow, reg::kBlockLen, p + "row");

    // Phase 3: confidences back to vector form, Top-k over eligible positions.
    e(make(Op::S_MAP_V_FP, reg::kConf, reg::kFpBase, 0, 0, imm32(c_.block_len)));
    e(make(Op::V_TOPK_MASK, reg::kTransfer, reg::kConf, reg::kElig, reg::kTopK));

    // Phase 4: x0 <- where(eligible, x0, x); x <- where(transfer, x0, x).
    e(make(Op::V_SELECT_INT, reg::kArgmax, reg::kElig, reg::kArgmax, reg::kTokens));
    e(make(Op::V_SELECT_INT, reg::kTokens, reg::kTransfer, reg::kArgmax, reg::kTokens));
    setvl(c_.block_len);
    e(make(Op::V_SUB_V, reg::kElig, reg::kElig, reg::kTransfer));
    setvl(c_.vlen);

    addi(reg::kConf, reg::kConf, 2 * c_.block_len);
    addi(reg::kElig, reg::kElig, 2 * c_.block_len);
    addi(reg::kTransfer, reg::kTransfer, 2 * c_.block_len);
    addi(reg::kTokens, reg::kTokens, 4 * c_.block_len);
    addi(reg::kArgmax, reg::kArgmax, 4 * c_.block_len);
    if (perf) {
      addi(reg::kSlotBase, reg::kSlotBase, static_cast<std::int64_t>(slot_bytes));
      addi(reg::kSlotIndex, reg::kSlotIndex, 1);
      b_.branch(Op::S_BNE, reg::kSlotIndex, reg::kPreload, p + "slot_kept");
      li(reg::kSlotIndex, 0);
      li(reg::kSlotBase, layout_.logits);
      b_.label(p + "slot_kept");
    }
    addi(reg::kBatch, reg::kBatch, 1);
    b_.branch(Op::S_BNE, reg::kBatch, reg::kBatchCount, p + "batch");
  }

  const SamplingConfig& c_;
  SramLayout layout_;
  KSchedule k_;
  ProgramBuilder b_;
  std::uint64_t chunk_len_ = 0;
  std::uint64_t full_chunks_ = 0;
  std::uint64_t tail_ = 0;
};

}  // namespace

std::vector<std::uint32_t> num_transfer_tokens(std::uint32_t masked_count, std::uint32_t steps) {
  if (steps == 0) throw ConfigError("num_transfer_tokens needs at least one step");
  std::vector<std::uint32_t> counts(steps, masked_count / steps);
  for (std::uint32_t t = 0; t < masked_count % steps; ++t) ++counts[t];
  return counts;
}

KSchedule make_k_schedule(const SamplingConfig& c) {
  KSchedule k;
  for (auto n : num_transfer_tokens(c.block_len, c.steps)) k.counts.emplace_back(c.batch, n);
  return k;
}

SramLayout make_layout(const SamplingConfig& c) {
  const std::uint64_t bl = c.rows();
  SramLayout l;
  l.confidence = kVectorSramBase;
  l.eligible = imm32(kVectorSramBase + 2 * bl);
  l.transfer = imm32(kVectorSramBase + 4 * bl);
  l.logits = imm32(kVectorSramBase + 6 * bl);
  l.logits_elements = c.mode == SamplingMode::Edge ? c.v_chunk
                                                   : std::uint64_t{c.vocab} * c.block_len * c.preload_batches;
  l.fp_confidence = kFpSramBase;
  l.tokens = kIntSramBase;
  l.argmax_tokens = imm32(kIntSramBase + 4 * bl);
  return l;
}

void check_capacity(const SamplingConfig& c, const MemoryParams& m) {
  const auto fp = sram_footprint(c);
  if (fp.int_bytes() > m.int_sram_bytes) {
    throw ConfigError("Int SRAM bound violated: 2*B*L elements = " + std::to_string(fp.int_bytes()) +
                      " B > int_sram_bytes " + std::to_string(m.int_sram_bytes));
  }
  if (fp.fp_bytes() > m.fp_sram_bytes) {
    throw ConfigError("FP SRAM bound violated: max(L, VLEN) elements = " + std::to_string(fp.fp_bytes()) +
                      " B > fp_sram_bytes " + std::to_string(m.fp_sram_bytes));
  }
  if (fp.vector_bytes() > m.vector_sram_bytes) {
    throw ConfigError(std::string("Vector SRAM bound violated: ") +
                      (c.mode == SamplingMode::Edge ? "3*B*L + V_chunk" : "3*B*L + V*L*R") + " elements = " +
                      std::to_string(fp.vector_bytes()) + " B > vector_sram_bytes " +
                      std::to_string(m.vector_sram_bytes));
  }
}

GeneratedProgram gen_sampling_program(const SamplingConfig& config, const MemoryParams& memory) {
  config.validate();
  memory.validate();
  check_capacity(config, memory);
  return SamplingEmitter(config, make_layout(config), make_k_schedule(config)).run();
}

}  // namespace dplena
