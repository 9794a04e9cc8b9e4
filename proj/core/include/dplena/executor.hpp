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

#ifndef DPLENA_EXECUTOR_HPP_
#define DPLENA_EXECUTOR_HPP_

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <stdexcept>

#include "dplena/isa.hpp"
#include "dplena/machine.hpp"
#include "dplena/units.hpp"

namespace dplena {

struct ExecOutcome {
  std::size_t next_pc = 0;
  CycleCategory category = CycleCategory::Other;
  std::uint64_t cycles = 0;
  // Only set for H_PREFETCH_V: cycles hidden behind earlier compute.
  std::uint64_t hidden_cycles = 0;
};

struct CycleReport {
  CycleCounters counters;
  std::uint64_t total_cycles = 0;
  std::uint64_t instructions = 0;
  double clock_ghz = 1.0;
  double hbm_bytes_moved = 0.0;
  double hbm_achieved_bandwidth = 0.0;  // bytes per second
  double latency_ms = 0.0;
  std::size_t vector_sram_high_water = 0;
  std::size_t fp_sram_high_water = 0;
  std::size_t int_sram_high_water = 0;

  friend bool operator==(const CycleReport&, const CycleReport&) = default;
};

CycleReport make_report(const MachineState& state, std::uint64_t instructions, double clock_ghz);

class SimTimeout : public std::runtime_error {
 public:
  explicit SimTimeout(CycleReport partial);
  const CycleReport& partial() const { return partial_; }

 private:
  CycleReport partial_;
};

struct RunOptions {
  std::uint64_t max_cycles = 50'000'000'000ull;
  double clock_ghz = 1.0;
  // One line per instruction: pc, disassembly, cycles, category.
  std::ostream* trace = nullptr;
  // Called before each instruction executes.
  std::function<void(std::size_t pc, const MachineState&)> before_step;
};

class Executor {
 public:
  Executor(UnitTimings timings, MemoryParams memory) : timings_(timings), memory_(memory) {}

  // Executes program[state.pc]; faults carry the pc and instruction text.
  ExecOutcome step(MachineState& state, const Program& program) const;
  CycleReport run(MachineState& state, const Program& program, const RunOptions& options = {}) const;

  const UnitTimings& timings() const { return timings_; }
  const MemoryParams& memory() const { return memory_; }

 private:
  ExecOutcome execute(MachineState& state, const Instruction& inst) const;

  UnitTimings timings_;
  MemoryParams memory_;
};

}  // namespace dplena

#endif  // DPLENA_EXECUTOR_HPP_
