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

#include "dplena/machine.hpp"

#include <fstream>
#include <iterator>
#include <sstream>

namespace dplena {
namespace {

std::array<float, 256> build_e4m3_table() {
  std::array<float, 256> t{};
  for (int i = 0; i < 256; ++i) t[static_cast<std::size_t>(i)] = e4m3_decode(static_cast<std::uint8_t>(i));
  return t;
}

const std::array<float, 256>& e4m3_table() {
  static const auto t = build_e4m3_table();
  return t;
}

std::string hex(std::uint64_t v) {
  std::ostringstream os;
  os << "0x" << std::hex << v;
  return os.str();
}

}  // namespace

void MemoryParams::validate() const {
  if (hbm_peak_bandwidth == 0) throw ConfigError("hbm_peak_bandwidth must be > 0");
  if (vector_sram_bytes == 0 || fp_sram_bytes == 0 || int_sram_bytes == 0) {
    throw ConfigError("SRAM capacities must be > 0");
  }
  for (auto bytes : {vector_sram_bytes, fp_sram_bytes, int_sram_bytes}) {
    if (bytes > kSramWindowBytes) throw ConfigError("SRAM capacity exceeds its address window");
  }
}

std::string to_string(SramDomain domain) {
  switch (domain) {
    case SramDomain::Vector: return "vector";
    case SramDomain::Fp: return "fp";
    case SramDomain::Int: return "int";
  }
  return "?";
}

std::optional<SramDomain> domain_of(std::uint32_t address) {
  if (address - kVectorSramBase < kSramWindowBytes) return SramDomain::Vector;
  if (address >= kFpSramBase && address - kFpSramBase < kSramWindowBytes) return SramDomain::Fp;
  if (address >= kIntSramBase && address - kIntSramBase < kSramWindowBytes) return SramDomain::Int;
  return std::nullopt;
}

std::uint32_t domain_base(SramDomain domain) {
  switch (domain) {
    case SramDomain::Vector: return kVectorSramBase;
    case SramDomain::Fp: return kFpSramBase;
    case SramDomain::Int: return kIntSramBase;
  }
  return 0;
}

std::string to_string(CycleCategory category) {
  switch (category) {
    case CycleCategory::Vector: return "vector";
    case CycleCategory::Memory: return "memory";
    case CycleCategory::Scalar: return "scalar";
    case CycleCategory::Other: return "other";
  }
  return "?";
}

void CycleCounters::charge(CycleCategory category, std::uint64_t cycles) {
  switch (category) {
    case CycleCategory::Vector: vector += cycles; break;
    case CycleCategory::Memory: memory += cycles; break;
    case CycleCategory::Scalar: scalar += cycles; break;
    case CycleCategory::Other: other += cycles; break;
  }
}

std::string to_string(SimFault::Kind kind) {
  switch (kind) {
    case SimFault::Kind::Bounds: return "bounds";
    case SimFault::Kind::Domain: return "domain";
    case SimFault::Kind::Alignment: return "alignment";
    case SimFault::Kind::Arithmetic: return "arithmetic";
    case SimFault::Kind::Operand: return "operand";
    case SimFault::Kind::ProgramCounter: return "pc";
  }
  return "?";
}

SimFault::SimFault(Kind kind, std::uint64_t address, const std::string& detail)
    : std::runtime_error(to_string(kind) + " fault at " + hex(address) + ": " + detail),
      kind_(kind),
      address_(address),
      detail_(detail) {}

SimFault SimFault::at(std::size_t pc, const std::string& instruction) const {
  SimFault f(kind_, address_, detail_ + " [pc " + std::to_string(pc) + ": " + instruction + "]");
  f.pc_ = pc;
  return f;
}

template <typename T>
std::size_t Sram<T>::locate(std::uint32_t address, std::size_t count) const {
  auto domain = domain_of(address);
  if (!domain || *domain != domain_) {
    throw SimFault(SimFault::Kind::Domain, address,
                   "address is not in " + to_string(domain_) + " SRAM" +
                       (domain ? " (it is " + to_string(*domain) + " SRAM)" : ""));
  }
  const std::uint32_t offset = address - domain_base(domain_);
  if (offset % sizeof(T) != 0) {
    throw SimFault(SimFault::Kind::Alignment, address, to_string(domain_) + " SRAM access misaligned");
  }
  const std::size_t index = offset / sizeof(T);
  if (index > cells_.size() || count > cells_.size() - index) {
    throw SimFault(SimFault::Kind::Bounds, address,
                   to_string(domain_) + " SRAM access of " + std::to_string(count) +
                       " element(s) exceeds capacity " + std::to_string(capacity_bytes()) + " B");
  }
  return index;
}

template <typename T>
std::uint8_t Sram<T>::read_byte(std::uint32_t address) const {
  const std::uint32_t aligned = address - (address - domain_base(domain_)) % sizeof(T);
  const auto cell = read(aligned, 1)[0];
  std::uint64_t raw;
  if constexpr (std::is_same_v<T, Bf16>) {
    raw = cell.bits;
  } else {
    raw = static_cast<std::uint32_t>(cell);
  }
  return static_cast<std::uint8_t>(raw >> (8 * (address - aligned)));
}

template class Sram<Bf16>;
template class Sram<std::int32_t>;

Hbm::Hbm(std::vector<std::uint8_t> bytes) : bytes_(std::move(bytes)) {
  if (bytes_.size() % kMxBlockBytes != 0) {
    throw std::invalid_argument("HBM image size is not a whole number of 33-byte MX blocks");
  }
}

Hbm Hbm::load_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open HBM image " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return Hbm(std::move(bytes));
}

void Hbm::save_file(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write HBM image " + path.string());
  out.write(reinterpret_cast<const char*>(bytes_.data()), static_cast<std::streamsize>(bytes_.size()));
}

MxFp8Block Hbm::block(std::size_t index) const {
  return mx_deserialize(std::span<const std::uint8_t, kMxBlockBytes>(bytes_.data() + index * kMxBlockBytes,
                                                                      kMxBlockBytes));
}

Bf16 Hbm::element(std::uint64_t index) const {
  return mx_decode_element(block(index / kMxBlockElements), index % kMxBlockElements);
}

void Hbm::decode_range(std::uint64_t first, std::span<Bf16> out) const {
  if (first > element_capacity() || out.size() > element_capacity() - first) {
    throw SimFault(SimFault::Kind::Bounds, first, "HBM read of " + std::to_string(out.size()) +
                                                      " element(s) past image end");
  }
  const auto& table = e4m3_table();
  std::uint64_t e = first;
  std::size_t i = 0;
  while (i < out.size()) {
    const std::uint8_t* blk = bytes_.data() + (e / kMxBlockElements) * kMxBlockBytes;
    const float mult = e8m0_multiplier(blk[0]);
    for (auto lane = e % kMxBlockElements; lane < kMxBlockElements && i < out.size(); ++lane, ++i, ++e) {
      out[i] = Bf16::from_float(table[blk[1 + lane]] * mult);
    }
  }
}

MachineState::MachineState(const MemoryParams& params, MachineShape shape_in, Hbm hbm_in)
    : vector_sram(SramDomain::Vector, params.vector_sram_bytes),
      fp_sram(SramDomain::Fp, params.fp_sram_bytes),
      int_sram(SramDomain::Int, params.int_sram_bytes),
      hbm(std::move(hbm_in)),
      shape(shape_in),
      vl(shape_in.vlen) {}

PrefetchCost hbm_prefetch(MachineState& state, const MemoryParams& params, std::uint64_t hbm_element,
                          std::uint64_t count, std::uint32_t vector_dest) {
  auto dest = state.vector_sram.write(vector_dest, count);
  state.hbm.decode_range(hbm_element, dest);
  state.cycles.hbm_elements_moved += count;

  PrefetchCost cost;
  const std::uint64_t num = count * kMxBlockBytes;
  const std::uint64_t den = std::uint64_t{kMxBlockElements} * params.hbm_peak_bandwidth;
  cost.transfer = params.hbm_fixed_latency + (num + den - 1) / den;
  cost.exposed = cost.transfer;
  if (params.double_buffering) {
    cost.exposed = cost.transfer > state.compute_since_prefetch ? cost.transfer - state.compute_since_prefetch : 0;
  }
  state.compute_since_prefetch = 0;
  return cost;
}

std::vector<Bf16> sram_read_vector(const MachineState& state, std::uint32_t base, std::size_t len) {
  auto view = state.vector_sram.read(base, len);
  return {view.begin(), view.end()};
}

void sram_write_vector(MachineState& state, std::uint32_t base, std::span<const Bf16> values) {
  auto view = state.vector_sram.write(base, values.size());
  std::copy(values.begin(), values.end(), view.begin());
}

SramFootprint sram_footprint(const SamplingConfig& c) {
  SramFootprint f;
  const std::uint64_t bl = c.rows();
  f.int_elements = 2 * bl;
  f.fp_elements = std::max(c.block_len, c.vlen);
  if (c.v_chunk < c.vocab) {
    f.vector_elements = 3 * bl + c.v_chunk;
  } else {
    f.vector_elements = 3 * bl + std::uint64_t{c.vocab} * c.block_len * c.preload_batches;
  }
  return f;
}

}  // namespace dplena
