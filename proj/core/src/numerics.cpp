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

#include "dplena/numerics.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>

namespace dplena {

Bf16 Bf16::from_float(float value) noexcept {
  if (std::isnan(value)) return Bf16{kQuietNaN};
  const auto bits = std::bit_cast<std::uint32_t>(value);
  const std::uint32_t lsb = (bits >> 16) & 1u;
  const std::uint32_t rounded = bits + 0x7FFFu + lsb;
  return Bf16{static_cast<std::uint16_t>(rounded >> 16)};
}

float Bf16::to_float() const noexcept {
  return std::bit_cast<float>(static_cast<std::uint32_t>(bits) << 16);
}

float e4m3_decode(std::uint8_t byte) noexcept {
  const bool negative = (byte & 0x80u) != 0;
  const int exponent = (byte >> 3) & 0xF;
  const int mantissa = byte & 0x7;
  if (exponent == 0xF && mantissa == 0x7) return std::numeric_limits<float>::quiet_NaN();
  float magnitude;
  if (exponent == 0) {
    magnitude = std::ldexp(static_cast<float>(mantissa) / 8.0f, -6);
  } else {
    magnitude = std::ldexp(1.0f + static_cast<float>(mantissa) / 8.0f, exponent - 7);
  }
  return negative ? -magnitude : magnitude;
}

std::uint8_t e4m3_encode(float value) noexcept {
  if (std::isnan(value)) return 0x7F;
  const std::uint8_t sign = std::signbit(value) ? 0x80 : 0x00;
  const float magnitude = std::fabs(value);
  if (magnitude >= kE4m3MaxFinite) return sign | 0x7E;
  if (magnitude == 0.0f) return sign;

  int frexp_exp = 0;
  std::frexp(magnitude, &frexp_exp);
  int unbiased = frexp_exp - 1;
  if (unbiased < -6) {
    // Subnormal step is 2^-9; a result of 8 rolls over to the smallest normal.
    const auto steps = static_cast<int>(std::nearbyint(std::ldexp(magnitude, 9)));
    return sign | static_cast<std::uint8_t>(steps);
  }
  auto steps = static_cast<int>(std::nearbyint(std::ldexp(magnitude, 3 - unbiased)));
  if (steps == 16) {
    steps = 8;
    ++unbiased;
  }
  const int code = ((unbiased + 7) << 3) | (steps - 8);
  return sign | static_cast<std::uint8_t>(std::min(code, 0x7E));
}

float e8m0_multiplier(std::uint8_t scale) noexcept {
  return std::ldexp(1.0f, static_cast<int>(scale) - 127);
}

Bf16 mx_decode_element(const MxFp8Block& block, std::size_t i) noexcept {
  return Bf16::from_float(e4m3_decode(block.elements[i]) * e8m0_multiplier(block.scale));
}

std::array<Bf16, kMxBlockElements> mx_decode(const MxFp8Block& block) noexcept {
  std::array<Bf16, kMxBlockElements> out;
  for (std::size_t i = 0; i < kMxBlockElements; ++i) out[i] = mx_decode_element(block, i);
  return out;
}

MxFp8Block mx_encode(std::span<const float, kMxBlockElements> values) noexcept {
  float max_abs = 0.0f;
  for (float v : values) max_abs = std::max(max_abs, std::fabs(v));

  MxFp8Block block;
  if (max_abs == 0.0f) return block;

  // Smallest e with max_abs <= 448 * 2^e.
  int e = std::ilogb(max_abs) - 8;
  while (max_abs > std::ldexp(kE4m3MaxFinite, e)) ++e;
  while (max_abs <= std::ldexp(kE4m3MaxFinite, e - 1)) --e;
  e = std::clamp(e, -127, 127);

  block.scale = static_cast<std::uint8_t>(e + 127);
  for (std::size_t i = 0; i < kMxBlockElements; ++i) {
    block.elements[i] = e4m3_encode(std::ldexp(values[i], -e));
  }
  return block;
}

void mx_serialize(const MxFp8Block& block, std::span<std::uint8_t, kMxBlockBytes> out) noexcept {
  out[0] = block.scale;
  std::copy(block.elements.begin(), block.elements.end(), out.begin() + 1);
}

MxFp8Block mx_deserialize(std::span<const std::uint8_t, kMxBlockBytes> in) noexcept {
  MxFp8Block block;
  block.scale = in[0];
  std::copy(in.begin() + 1, in.end(), block.elements.begin());
  return block;
}

float scalar_exp(float x) noexcept {
  return static_cast<float>(std::exp(static_cast<double>(x)));
}

float scalar_recip(float x) noexcept { return 1.0f / x; }

}  // namespace dplena
