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

#ifndef DPLENA_LOGITS_STUB_HPP_
#define DPLENA_LOGITS_STUB_HPP_

#include <cstdint>

#include "dplena/machine.hpp"
#include "dplena/sampling_config.hpp"

namespace dplena {

// Stand-in for the denoiser: a counter-based hash of (seed, t, b, l, v)
// mapped to a uniform value in [-8, 8).
float stub_logit(std::uint64_t seed, std::uint32_t t, std::uint32_t b, std::uint32_t l, std::uint32_t v);

// Element offset of logit (t, b, l, v) in the flat HBM stream.
inline std::uint64_t logits_offset(const SamplingConfig& c, std::uint32_t t, std::uint32_t b, std::uint32_t l,
                                   std::uint32_t v = 0) {
  return ((std::uint64_t{t} * c.batch + b) * c.block_len + l) * c.vocab + v;
}

// MX-encodes every step's logits, rows back to back, into one HBM image.
// The final block is zero-padded.
Hbm build_logits_hbm(const SamplingConfig& config);

}  // namespace dplena

#endif  // DPLENA_LOGITS_STUB_HPP_
