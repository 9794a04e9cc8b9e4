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

#ifndef DPLENA_UNITS_HPP_
#define DPLENA_UNITS_HPP_

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "dplena/numerics.hpp"

namespace dplena {

// Per-unit latencies in cycles. Defaults give the uncalibrated model; the
// shipped calibration file overrides them.
struct UnitTimings {
  // Reduction tree: ceil(ceil(log2 vlen) / levels_per_cycle) + base.
  std::uint32_t reduction_levels_per_cycle = 1;
  std::uint32_t reduction_base = 1;
  std::uint32_t elementwise_latency = 4;
  std::uint32_t fp_exp_latency = 4;
  std::uint32_t fp_recip_latency = 4;
  std::uint32_t topk_per_element = 1;
  std::uint32_t scalar_latency = 1;
  std::uint32_t control_latency = 1;
  std::uint32_t map_latency = 2;
  std::uint32_t fifo_per_element = 1;

  std::uint64_t reduction_latency(std::uint32_t vlen) const;
  // Full-pipeline cost of one elementwise instruction over <= VLEN lanes.
  std::uint64_t elementwise_cost() const { return std::uint64_t{elementwise_latency} + 1; }

  void validate() const;
};

struct MaxIdx {
  float value = 0.0f;
  std::int64_t index = 0;
};

// Max and absolute index (base_index + lane); ties resolve to the lowest lane.
// Throws std::invalid_argument on empty input.
MaxIdx reduce_max_idx(std::span<const Bf16> values, std::int64_t base_index);
float reduce_max(std::span<const Bf16> values);

// Pairwise tree over lanes zero-padded to a power of two, fp32 accumulation.
float reduce_sum(std::span<const Bf16> values);

// In place, each lane rounded back to BF16.
void elementwise_sub_scalar(std::span<Bf16> values, float scalar);
void elementwise_exp(std::span<Bf16> values);
void elementwise_sub(std::span<Bf16> dst, std::span<const Bf16> lhs, std::span<const Bf16> rhs);

// Streaming insertion Top-k: a k-entry list kept sorted by value (descending),
// ties by index (ascending). Each insert shifts lower entries down one slot.
class TopKState {
 public:
  struct Entry {
    float value;
    std::size_t index;
  };

  explicit TopKState(std::size_t k) : k_(k) { entries_.reserve(k); }

  // Returns the number of comparator evaluations the insertion used.
  std::size_t insert(float value, std::size_t index);
  std::span<const Entry> entries() const { return entries_; }
  std::size_t capacity() const { return k_; }
  std::size_t comparisons() const { return comparisons_; }

 private:
  std::size_t k_;
  std::vector<Entry> entries_;
  std::size_t comparisons_ = 0;
};

// Mask of the k most confident eligible positions (0/1 per position). Ineligible
// positions never enter the list, so fewer than k eligible selects them all.
std::vector<std::uint8_t> topk_mask(std::span<const float> confidence, std::span<const std::uint8_t> eligible,
                                    std::size_t k);

// out[i] = mask[i] ? a[i] : b[i]. Throws std::invalid_argument on length mismatch.
std::vector<std::int32_t> select_int(std::span<const std::uint8_t> mask, std::span<const std::int32_t> a,
                                     std::span<const std::int32_t> b);

}  // namespace dplena

#endif  // DPLENA_UNITS_HPP_
