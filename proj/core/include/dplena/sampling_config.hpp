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

#ifndef DPLENA_SAMPLING_CONFIG_HPP_
#define DPLENA_SAMPLING_CONFIG_HPP_

#include <cstdint>
#include <stdexcept>
#include <string>

namespace dplena {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Edge: logits stream through one V_chunk buffer (V_chunk < V).
// Performance: whole rows for R batches are resident (V_chunk == V).
enum class SamplingMode : std::uint8_t { Edge, Performance };

std::string to_string(SamplingMode mode);
SamplingMode parse_sampling_mode(const std::string& text);

// Workload shape of one blocked sampling run.
struct SamplingConfig {
  std::uint32_t batch = 2;           // B
  std::uint32_t steps = 1;           // T
  std::uint32_t block_len = 64;      // L
  std::uint32_t vocab = 2000;        // V
  std::uint32_t v_chunk = 128;       // V_chunk
  std::uint32_t vlen = 64;           // VLEN
  std::uint32_t preload_batches = 1; // R, performance mode only
  std::int32_t mask_id = -1;
  std::uint64_t seed = 0x5EEDu;
  SamplingMode mode = SamplingMode::Edge;

  std::uint64_t rows() const { return std::uint64_t{batch} * block_len; }
  std::uint64_t logits_per_step() const { return rows() * vocab; }
  std::uint64_t total_logits() const { return logits_per_step() * steps; }

  // Shape invariants only; SRAM capacity is checked against MemoryParams in codegen.
  void validate() const;

  friend bool operator==(const SamplingConfig&, const SamplingConfig&) = default;
};

}  // namespace dplena

#endif  // DPLENA_SAMPLING_CONFIG_HPP_
