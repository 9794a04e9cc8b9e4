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

#ifndef DPLENA_CONFIG_HPP_
#define DPLENA_CONFIG_HPP_

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "dplena/machine.hpp"
#include "dplena/sampling_config.hpp"
#include "dplena/units.hpp"

namespace dplena {

// Everything one simulation needs: workload, memory system, unit timings.
struct SimConfig {
  SamplingConfig sampling;
  MemoryParams memory;
  UnitTimings timings;
  double clock_ghz = 1.0;
  std::uint64_t max_cycles = 50'000'000'000ull;

  void validate() const;
};

// Environment variable naming a default config file for the CLI.
inline constexpr const char* kConfigEnvVar = "DPLENA_CONFIG";

// `key = value` lines; `#` starts a comment. Unknown keys are errors.
// Keys match the field names: B, T, L, V, V_chunk, VLEN, R, mask_id, seed,
// mode, hbm_peak_bandwidth, hbm_fixed_latency, double_buffering,
// vector_sram_bytes, fp_sram_bytes, int_sram_bytes, the UnitTimings fields,
// clock_ghz, max_cycles. `mode` is re-derived whenever V or V_chunk is set.
void apply_config_text(SimConfig& config, std::string_view text);
void apply_config_file(SimConfig& config, const std::filesystem::path& path);
void apply_override(SimConfig& config, std::string_view key_equals_value);
void apply_setting(SimConfig& config, std::string_view key, std::string_view value);

// Canonical key/value listing, in file order, for report echo.
std::vector<std::pair<std::string, std::string>> config_entries(const SimConfig& config);
std::string format_config(const SimConfig& config);

}  // namespace dplena

#endif  // DPLENA_CONFIG_HPP_
