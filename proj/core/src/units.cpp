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

#include "dplena/units.hpp"

#include <algorithm>
#include <bit>
#include <stdexcept>

#include "dplena/sampling_config.hpp"

namespace dplena {

std::uint64_t UnitTimings::reduction_latency(std::uint32_t vlen) const {
  const std::uint32_t levels = vlen <= 1 ? 0 : static_cast<std::uint32_t>(std::bit_width(vlen - 1));
  return (levels + reduction_levels_per_cycle - 1) / reduction_levels_per_cycle + reduction_base;
}

void UnitTimings::validate() const {
  for (auto v : {reduction_levels_per_cycle, elementwise_latency, fp_exp_latency, fp_recip_latency,
                 topk_per_element, scalar_latency, control_latency, map_latency}) {
    if (v == 0) throw ConfigError("unit latencies must be positive");
  }
}

MaxIdx reduce_max_idx(std::span<const Bf16> values, std::int64_t base_index) {
  if (values.empty()) throw std::invalid_argument("reduce_max_idx over zero lanes");
  MaxIdx best{values[0].to_float(), 0};
  for (std::size_t i = 1; i < values.size(); ++i) {
    const float v = values[i].to_float();
    if (v > best.value) best = {v, static_cast<std::int64_t>(i)};
  }
  best.index += base_index;
  return best;
}

float reduce_max(std::span<const Bf16> values) { return reduce_max_idx(values, 0).value; }

float reduce_sum(std::span<const Bf16> values) {
  if (values.empty()) throw std::invalid_argument("reduce_sum over zero lanes");
  thread_local std::vector<float> lanes;
  lanes.assign(std::bit_ceil(values.size()), 0.0f);
  std::transform(values.begin(), values.end(), lanes.begin(), [](Bf16 v) { return v.to_float(); });
  for (std::size_t width = lanes.size(); width > 1; width /= 2) {
    for (std::size_t i = 0; i < width / 2; ++i) lanes[i] = lanes[2 * i] + lanes[2 * i + 1];
  }
  return lanes[0];
}

void elementwise_sub_scalar(std::span<Bf16> values, float scalar) {
  for (auto& v : values) v = Bf16::from_float(v.to_float() - scalar);
}

void elementwise_exp(std::span<Bf16> values) {
  for (auto& v : values) v = Bf16::from_float(scalar_exp(v.to_float()));
}

void elementwise_sub(std::span<Bf16> dst, std::span<const Bf16> lhs, std::span<const Bf16> rhs) {
  if (dst.size() != lhs.size() || dst.size() != rhs.size()) {
    throw std::invalid_argument("elementwise_sub length mismatch");
  }
  for (std::size_t i = 0; i < dst.size(); ++i) dst[i] = Bf16::from_float(lhs[i].to_float() - rhs[i].to_float());
}

std::size_t TopKState::insert(float value, std::size_t index) {
  // Slot j holds a larger-or-equal entry if it was inserted earlier with the same value,
  // so equal values keep arrival (index) order.
  std::size_t used = 0;
  std::size_t pos = entries_.size();
  for (std::size_t j = 0; j < entries_.size(); ++j) {
    ++used;
    if (value > entries_[j].value) {
      pos = j;
      break;
    }
  }
  comparisons_ += used;
  if (pos >= k_) return used;
  if (entries_.size() < k_) entries_.push_back({});
  for (std::size_t j = entries_.size() - 1; j > pos; --j) entries_[j] = entries_[j - 1];
  entries_[pos] = {value, index};
  return used;
}

std::vector<std::uint8_t> topk_mask(std::span<const float> confidence, std::span<const std::uint8_t> eligible,
                                    std::size_t k) {
  if (confidence.size() != eligible.size()) throw std::invalid_argument("topk_mask length mismatch");
  std::vector<std::uint8_t> mask(confidence.size(), 0);
  if (k == 0) return mask;
  TopKState state(k);
  for (std::size_t i = 0; i < confidence.size(); ++i) {
    if (eligible[i]) state.insert(confidence[i], i);
  }
  for (const auto& e : state.entries()) mask[e.index] = 1;
  return mask;
}

std::vector<std::int32_t> select_int(std::span<const std::uint8_t> mask, std::span<const std::int32_t> a,
                                     std::span<const std::int32_t> b) {
  if (mask.size() != a.size() || mask.size() != b.size()) throw std::invalid_argument("select_int length mismatch");
  std::vector<std::int32_t> out(mask.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = mask[i] ? a[i] : b[i];
  return out;
}

}  // namespace dplena
