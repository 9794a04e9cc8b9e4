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

#include "dplena/logits_stub.hpp"

#include <array>
#include <span>
#include <vector>

namespace dplena {
namespace {

constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ull;

std::uint64_t splitmix64(std::uint64_t x) {
  x += kGolden;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

std::uint64_t row_key(std::uint64_t seed, std::uint32_t t, std::uint32_t b, std::uint32_t l) {
  std::uint64_t h = splitmix64(seed);
  h = splitmix64(h ^ t);
  h = splitmix64(h ^ b);
  return splitmix64(h ^ l);
}

float to_logit(std::uint64_t bits) {
  const auto u = static_cast<float>(bits >> 40) * (1.0f / 16777216.0f);
  return -8.0f + 16.0f * u;
}

}  // namespace

float stub_logit(std::uint64_t seed, std::uint32_t t, std::uint32_t b, std::uint32_t l, std::uint32_t v) {
  return to_logit(splitmix64(row_key(seed, t, b, l) + v * kGolden));
}

Hbm build_logits_hbm(const SamplingConfig& c) {
  const std::uint64_t total = c.total_logits();
  const std::uint64_t blocks = (total + kMxBlockElements - 1) / kMxBlockElements;
  std::vector<std::uint8_t> bytes(blocks * kMxBlockBytes);

  std::array<float, kMxBlockElements> pending{};
  std::size_t fill = 0;
  std::uint64_t block = 0;
  auto flush = [&] {
    std::fill(pending.begin() + static_cast<std::ptrdiff_t>(fill), pending.end(), 0.0f);
    auto encoded = mx_encode(pending);
    mx_serialize(encoded, std::span<std::uint8_t, kMxBlockBytes>(bytes.data() + block * kMxBlockBytes, kMxBlockBytes));
    ++block;
    fill = 0;
  };

  for (std::uint32_t t = 0; t < c.steps; ++t) {
    for (std::uint32_t b = 0; b < c.batch; ++b) {
      for (std::uint32_t l = 0; l < c.block_len; ++l) {
        const std::uint64_t key = row_key(c.seed, t, b, l);
        for (std::uint32_t v = 0; v < c.vocab; ++v) {
          pending[fill++] = to_logit(splitmix64(key + v * kGolden));
          if (fill == kMxBlockElements) flush();
        }
      }
    }
  }
  if (fill > 0) flush();
  return Hbm(std::move(bytes));
}

}  // namespace dplena
