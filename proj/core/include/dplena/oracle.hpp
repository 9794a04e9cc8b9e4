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

#ifndef DPLENA_ORACLE_HPP_
#define DPLENA_ORACLE_HPP_

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "dplena/machine.hpp"
#include "dplena/numerics.hpp"
#include "dplena/sampling_config.hpp"

namespace dplena {

// Full softmax over one row in fp32 with the maximum subtracted.
struct SoftmaxConfidence {
  std::size_t argmax = 0;  // ties -> lowest index
  float max_prob = 0.0f;
};

SoftmaxConfidence softmax_confidence(std::span<const float> logits);

// Streaming max / sum-exp over VLEN-wide sub-chunks with the rounding points of
// the vector datapath: BF16 elementwise results, fp32 reductions and scalars.
struct StableMax {
  std::size_t argmax = 0;
  float max = 0.0f;
  float sum_exp = 0.0f;
  float confidence = 0.0f;  // 1 / sum_exp, rounded to BF16
};

StableMax stable_max(std::span<const Bf16> logits, std::uint32_t vlen);

// Pairwise sum: halves split at bit_ceil(n) / 2.
float pairwise_sum(std::span<const float> values);

enum class TieRule { LowerIndex, HigherIndex };

struct OracleOptions {
  // HigherIndex exists to inject a tie-order fault in tests.
  TieRule tie_rule = TieRule::LowerIndex;
};

struct OracleStep {
  std::uint32_t step = 0;
  std::vector<std::int32_t> tokens;      // x after the step, B*L
  std::vector<float> confidence;         // BF16 confidences, B*L
  std::vector<std::uint8_t> committed;   // positions committed in this step
  double max_method_deviation = 0.0;     // max |conf - p_max| / p_max
  std::size_t argmax_mismatches = 0;     // rows where the two argmaxes disagree
};

struct OracleResult {
  std::vector<std::int32_t> tokens;
  std::vector<OracleStep> steps;
};

OracleResult oracle_sample(const SamplingConfig& config, const Hbm& hbm, const OracleOptions& options = {});

// One record per step: "step <t> batch <b> commit <l:token,...> conf <...>".
std::string format_trace(const SamplingConfig& config, const OracleResult& result);

}  // namespace dplena

#endif  // DPLENA_ORACLE_HPP_
