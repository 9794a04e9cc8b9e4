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

#ifndef DPLENA_MACHINE_HPP_
#define DPLENA_MACHINE_HPP_

#include <algorithm>
#include <array>
#include <cstddef>
#include <cstdint>
#include <deque>
#include <filesystem>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "dplena/numerics.hpp"
#include "dplena/sampling_config.hpp"

namespace dplena {

struct MemoryParams {
  std::uint32_t hbm_peak_bandwidth = 64;  // bytes per cycle
  std::uint32_t hbm_fixed_latency = 100;  // cycles
  bool double_buffering = true;
  std::size_t vector_sram_bytes = 32u << 20;
  std::size_t fp_sram_bytes = 16u << 10;
  std::size_t int_sram_bytes = 64u << 10;

  void validate() const;
};

// The three SRAM domains occupy disjoint windows of one byte-address space.
enum class SramDomain : std::uint8_t { Vector, Fp, Int };

inline constexpr std::uint32_t kVectorSramBase = 0x00000000u;
inline constexpr std::uint32_t kFpSramBase = 0x40000000u;
inline constexpr std::uint32_t kIntSramBase = 0x60000000u;
inline constexpr std::uint32_t kSramWindowBytes = 0x20000000u;

std::string to_string(SramDomain domain);
std::optional<SramDomain> domain_of(std::uint32_t address);
std::uint32_t domain_base(SramDomain domain);

enum class CycleCategory : std::uint8_t { Vector, Memory, Scalar, Other };
std::string to_string(CycleCategory category);

struct CycleCounters {
  std::uint64_t vector = 0;
  std::uint64_t memory = 0;
  std::uint64_t scalar = 0;
  std::uint64_t other = 0;
  std::uint64_t hbm_elements_moved = 0;

  std::uint64_t total() const { return vector + memory + scalar + other; }
  // Element bytes plus the pro-rated shared scale: n * 33 / 32.
  double hbm_bytes_moved() const {
    return static_cast<double>(hbm_elements_moved) * static_cast<double>(kMxBlockBytes) /
           static_cast<double>(kMxBlockElements);
  }
  void charge(CycleCategory category, std::uint64_t cycles);

  friend bool operator==(const CycleCounters&, const CycleCounters&) = default;
};

class SimFault : public std::runtime_error {
 public:
  enum class Kind { Bounds, Domain, Alignment, Arithmetic, Operand, ProgramCounter };

  SimFault(Kind kind, std::uint64_t address, const std::string& detail);

  Kind kind() const { return kind_; }
  std::uint64_t address() const { return address_; }
  const std::string& detail() const { return detail_; }
  std::optional<std::size_t> pc() const { return pc_; }

  // Same fault annotated with the faulting pc and instruction text.
  SimFault at(std::size_t pc, const std::string& instruction) const;

 private:
  Kind kind_;
  std::uint64_t address_;
  std::string detail_;
  std::optional<std::size_t> pc_;
};

std::string to_string(SimFault::Kind kind);

// One SRAM domain: typed little-endian elements behind byte addresses.
template <typename T>
class Sram {
 public:
  Sram(SramDomain domain, std::size_t capacity_bytes)
      : domain_(domain), cells_(capacity_bytes / sizeof(T)) {}

  SramDomain domain() const { return domain_; }
  std::size_t capacity_bytes() const { return cells_.size() * sizeof(T); }
  std::size_t high_water_bytes() const { return high_water_; }

  // Bounds-, alignment- and domain-checked views; `address` is a global byte address.
  std::span<const T> read(std::uint32_t address, std::size_t count) const {
    return std::span<const T>(cells_).subspan(locate(address, count), count);
  }
  std::span<T> write(std::uint32_t address, std::size_t count) {
    auto index = locate(address, count);
    high_water_ = std::max(high_water_, (index + count) * sizeof(T));
    return std::span<T>(cells_).subspan(index, count);
  }

  std::uint8_t read_byte(std::uint32_t address) const;

 private:
  std::size_t locate(std::uint32_t address, std::size_t count) const;

  SramDomain domain_;
  std::vector<T> cells_;
  std::size_t high_water_ = 0;
};

extern template class Sram<Bf16>;
extern template class Sram<std::int32_t>;

// Off-chip logits store: a flat stream of serialized MX blocks.
class Hbm {
 public:
  Hbm() = default;
  explicit Hbm(std::vector<std::uint8_t> bytes);

  static Hbm load_file(const std::filesystem::path& path);
  void save_file(const std::filesystem::path& path) const;

  std::size_t block_count() const { return bytes_.size() / kMxBlockBytes; }
  std::uint64_t element_capacity() const { return std::uint64_t{block_count()} * kMxBlockElements; }
  const std::vector<std::uint8_t>& bytes() const { return bytes_; }

  MxFp8Block block(std::size_t index) const;
  Bf16 element(std::uint64_t index) const;
  // Dequantizes [first, first + out.size()) into BF16.
  void decode_range(std::uint64_t first, std::span<Bf16> out) const;

 private:
  std::vector<std::uint8_t> bytes_;
};

// Hardware shape parameters that are fixed for one machine instance.
struct MachineShape {
  std::uint32_t vlen = 64;
  std::uint32_t block_len = 64;
};

struct MachineState {
  MachineState(const MemoryParams& params, MachineShape shape, Hbm hbm);

  std::array<std::int32_t, 32> gp{};  // x0 reads as zero
  std::array<float, 32> fp{};
  Sram<Bf16> vector_sram;
  Sram<Bf16> fp_sram;
  Sram<std::int32_t> int_sram;
  Hbm hbm;
  std::deque<std::int32_t> fifo_out;
  std::size_t pc = 0;
  CycleCounters cycles;
  MachineShape shape;
  std::uint32_t vl;  // active lanes for vector instructions
  bool halted = false;
  // Non-prefetch cycles since the last H_PREFETCH_V; bounds the hidden part of the next transfer.
  std::uint64_t compute_since_prefetch = 0;

  void set_gp(int reg, std::int32_t value) {
    if (reg != 0) gp[static_cast<std::size_t>(reg)] = value;
  }
};

struct PrefetchCost {
  std::uint64_t transfer = 0;  // fixed latency + bandwidth term
  std::uint64_t exposed = 0;   // charged to `memory`
};

// Streams `count` logits from HBM element offset `hbm_element` into Vector
// SRAM at `vector_dest` through the dequantizer, and accounts bytes moved.
// Does not charge cycles; the returned cost is charged by the executor.
PrefetchCost hbm_prefetch(MachineState& state, const MemoryParams& params, std::uint64_t hbm_element,
                          std::uint64_t count, std::uint32_t vector_dest);

std::vector<Bf16> sram_read_vector(const MachineState& state, std::uint32_t base, std::size_t len);
void sram_write_vector(MachineState& state, std::uint32_t base, std::span<const Bf16> values);

struct SramFootprint {
  std::uint64_t int_elements = 0;
  std::uint64_t fp_elements = 0;
  std::uint64_t vector_elements = 0;

  std::uint64_t int_bytes() const { return int_elements * 4; }
  std::uint64_t fp_bytes() const { return fp_elements * 2; }
  std::uint64_t vector_bytes() const { return vector_elements * 2; }
};

// Int = 2BL; FP = max(L, VLEN); Vector = 3BL + V_chunk (edge) or 3BL + V*L*R.
SramFootprint sram_footprint(const SamplingConfig& config);

}  // namespace dplena

#endif  // DPLENA_MACHINE_HPP_
