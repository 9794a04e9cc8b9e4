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

#ifndef DPLENA_CODEGEN_HPP_
#define DPLENA_CODEGEN_HPP_

#include <cstddef>
#include <cstdint>
#include <vector>

#include "dplena/isa.hpp"
#include "dplena/machine.hpp"
#include "dplena/sampling_config.hpp"

namespace dplena {

// counts[t] = floor(masked/T) + (t < masked mod T). Throws ConfigError for T == 0.
std::vector<std::uint32_t> num_transfer_tokens(std::uint32_t masked_count, std::uint32_t steps);

// k[t][b]: positions committed per step and batch row.
struct KSchedule {
  std::vector<std::vector<std::uint32_t>> counts;

  std::uint32_t at(std::size_t t, std::size_t b) const { return counts[t][b]; }
};

KSchedule make_k_schedule(const SamplingConfig& config);

// Byte addresses of every region the sampling program touches.
struct SramLayout {
  // Vector SRAM: 3*B*L bookkeeping elements, then the logits buffer.
  std::uint32_t confidence = 0;
  std::uint32_t eligible = 0;
  std::uint32_t transfer = 0;
  std::uint32_t logits = 0;
  std::uint64_t logits_elements = 0;
  // FP SRAM: L confidences of the current batch row.
  std::uint32_t fp_confidence = 0;
  // Int SRAM: current tokens x and argmax tokens x0, B*L each.
  std::uint32_t tokens = 0;
  std::uint32_t argmax_tokens = 0;
};

SramLayout make_layout(const SamplingConfig& config);

// Throws ConfigError naming the violated Int/FP/Vector SRAM bound.
void check_capacity(const SamplingConfig& config, const MemoryParams& memory);

struct GeneratedProgram {
  Program program;
  SramLayout layout;
  KSchedule k;
  // step_end[t]: pc of the first instruction after diffusion step t.
  std::vector<std::size_t> step_end;
};

// Lowers the blocked sampling loop for `config` into one self-contained program.
GeneratedProgram gen_sampling_program(const SamplingConfig& config, const MemoryParams& memory);

}  // namespace dplena

#endif  // DPLENA_CODEGEN_HPP_
