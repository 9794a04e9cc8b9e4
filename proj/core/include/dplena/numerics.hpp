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

#ifndef DPLENA_NUMERICS_HPP_
#define DPLENA_NUMERICS_HPP_

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>

namespace dplena {

// BF16 storage value: 1 sign, 8 exponent, 7 mantissa bits.
struct Bf16 {
  std::uint16_t bits = 0;

  static constexpr std::uint16_t kQuietNaN = 0x7FC0;

  // Round-to-nearest-even from fp32. NaNs collapse to kQuietNaN; no flush-to-zero.
  static Bf16 from_float(float value) noexcept;
  float to_float() const noexcept;

  friend bool operator==(Bf16, Bf16) = default;
};

// Rounds through BF16 and widens back.
inline float round_bf16(float value) noexcept {
  return Bf16::from_float(value).to_float();
}

inline constexpr std::size_t kMxBlockElements = 32;
inline constexpr std::size_t kMxBlockBytes = kMxBlockElements + 1;
inline constexpr float kE4m3MaxFinite = 448.0f;

// One MXFP8 block: an E8M0 shared scale (2^(scale-127)) and 32 E4M3 elements.
struct MxFp8Block {
  std::uint8_t scale = 127;
  std::array<std::uint8_t, kMxBlockElements> elements{};

  friend bool operator==(const MxFp8Block&, const MxFp8Block&) = default;
};

// E4M3, bias 7, no infinities. S.1111.111 is NaN; exponent 0 is subnormal.
float e4m3_decode(std::uint8_t byte) noexcept;

// Round-to-nearest-even into E4M3; magnitudes above 448 saturate to 448. NaN maps to 0x7F.
std::uint8_t e4m3_encode(float value) noexcept;

// Scale as a float multiplier, 2^(scale-127).
float e8m0_multiplier(std::uint8_t scale) noexcept;

std::array<Bf16, kMxBlockElements> mx_decode(const MxFp8Block& block) noexcept;

// Decodes element i of a block (same result as mx_decode(block)[i]).
Bf16 mx_decode_element(const MxFp8Block& block, std::size_t i) noexcept;

// Picks the smallest power-of-two scale that brings max|v| into E4M3 range,
// then rounds each element. All-zero input gives scale 127 and zero elements.
MxFp8Block mx_encode(std::span<const float, kMxBlockElements> values) noexcept;

// Serialized layout: scale byte followed by the 32 element bytes.
void mx_serialize(const MxFp8Block& block, std::span<std::uint8_t, kMxBlockBytes> out) noexcept;
MxFp8Block mx_deserialize(std::span<const std::uint8_t, kMxBlockBytes> in) noexcept;

// fp32 results of the FP unit. The caller rounds to BF16 where the
// destination is BF16 storage. scalar_recip requires x != 0.
float scalar_exp(float x) noexcept;
float scalar_recip(float x) noexcept;

}  // namespace dplena

#endif  // DPLENA_NUMERICS_HPP_
