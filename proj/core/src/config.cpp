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

#include "dplena/config.hpp"

#include <cctype>
#include <charconv>
#include <fstream>
#include <sstream>

namespace dplena {
namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

template <typename Int>
Int parse_integer(std::string_view key, std::string_view text) {
  Int value{};
  int base = 10;
  std::string_view body = text;
  if (body.size() > 2 && body[0] == '0' && (body[1] == 'x' || body[1] == 'X')) {
    base = 16;
    body.remove_prefix(2);
  }
  auto [ptr, ec] = std::from_chars(body.data(), body.data() + body.size(), value, base);
  if (body.empty() || ec != std::errc() || ptr != body.data() + body.size()) {
    throw ConfigError("invalid integer for " + std::string(key) + ": '" + std::string(text) + "'");
  }
  return value;
}

double parse_double(std::string_view key, std::string_view text) {
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (text.empty() || ec != std::errc() || ptr != text.data() + text.size()) {
    throw ConfigError("invalid number for " + std::string(key) + ": '" + std::string(text) + "'");
  }
  return value;
}

bool parse_bool(std::string_view key, std::string_view text) {
  if (text == "1" || text == "true" || text == "on" || text == "yes") return true;
  if (text == "0" || text == "false" || text == "off" || text == "no") return false;
  throw ConfigError("invalid boolean for " + std::string(key) + ": '" + std::string(text) + "'");
}

}  // namespace

std::string to_string(SamplingMode mode) { return mode == SamplingMode::Edge ? "edge" : "performance"; }

SamplingMode parse_sampling_mode(const std::string& text) {
  if (text == "edge") return SamplingMode::Edge;
  if (text == "performance" || text == "perf") return SamplingMode::Performance;
  throw ConfigError("mode must be 'edge' or 'performance', got '" + text + "'");
}

void SamplingConfig::validate() const {
  if (batch == 0 || steps == 0 || block_len == 0 || vocab == 0 || v_chunk == 0 || vlen == 0) {
    throw ConfigError("B, T, L, V, V_chunk and VLEN must all be positive");
  }
  if (v_chunk > vocab) throw ConfigError("V_chunk must not exceed V");
  if (vlen > v_chunk) throw ConfigError("VLEN must not exceed V_chunk");
  if (block_len > vlen) throw ConfigError("L must not exceed VLEN (block ops run on one vector group)");
  const bool edge = v_chunk < vocab;
  if (edge != (mode == SamplingMode::Edge)) {
    throw ConfigError(edge ? "V_chunk < V requires edge mode" : "V_chunk == V requires performance mode");
  }
  if (edge) {
    if (v_chunk % vlen != 0) throw ConfigError("V_chunk must be a multiple of VLEN");
    if (v_chunk % kMxBlockElements != 0) throw ConfigError("V_chunk must be a multiple of 32");
  } else {
    if (preload_batches == 0 || preload_batches > batch || batch % preload_batches != 0) {
      throw ConfigError("performance mode needs 1 <= R <= B with R dividing B");
    }
  }
  if (mask_id >= 0 && static_cast<std::uint32_t>(mask_id) < vocab) {
    throw ConfigError("mask_id must lie outside the vocabulary [0, V)");
  }
  if (total_logits() >= (1ull << 31)) throw ConfigError("T*B*L*V must stay below 2^31 HBM elements");
}

void SimConfig::validate() const {
  sampling.validate();
  memory.validate();
  timings.validate();
  if (!(clock_ghz > 0.0)) throw ConfigError("clock_ghz must be positive");
}

void apply_setting(SimConfig& c, std::string_view key, std::string_view value) {
  auto& s = c.sampling;
  auto& m = c.memory;
  auto& t = c.timings;
  auto u32 = [&] { return parse_integer<std::uint32_t>(key, value); };
  if (key == "B") s.batch = u32();
  else if (key == "T") s.steps = u32();
  else if (key == "L") s.block_len = u32();
  else if (key == "V") s.vocab = u32();
  else if (key == "V_chunk") s.v_chunk = u32();
  else if (key == "VLEN") s.vlen = u32();
  else if (key == "R") s.preload_batches = u32();
  else if (key == "mask_id") s.mask_id = parse_integer<std::int32_t>(key, value);
  else if (key == "seed") s.seed = parse_integer<std::uint64_t>(key, value);
  else if (key == "mode") {
    s.mode = parse_sampling_mode(std::string(value));
  }
  else if (key == "hbm_peak_bandwidth") m.hbm_peak_bandwidth = u32();
  else if (key == "hbm_fixed_latency") m.hbm_fixed_latency = u32();
  else if (key == "double_buffering") m.double_buffering = parse_bool(key, value);
  else if (key == "vector_sram_bytes") m.vector_sram_bytes = parse_integer<std::size_t>(key, value);
  else if (key == "fp_sram_bytes") m.fp_sram_bytes = parse_integer<std::size_t>(key, value);
  else if (key == "int_sram_bytes") m.int_sram_bytes = parse_integer<std::size_t>(key, value);
  else if (key == "reduction_levels_per_cycle") t.reduction_levels_per_cycle = u32();
  else if (key == "reduction_base") t.reduction_base = u32();
  else if (key == "elementwise_latency") t.elementwise_latency = u32();
  else if (key == "fp_exp_latency") t.fp_exp_latency = u32();
  else if (key == "fp_recip_latency") t.fp_recip_latency = u32();
  else if (key == "topk_per_element") t.topk_per_element = u32();
  else if (key == "scalar_latency") t.scalar_latency = u32();
  else if (key == "control_latency") t.control_latency = u32();
  else if (key == "map_latency") t.map_latency = u32();
  else if (key == "fifo_per_element") t.fifo_per_element = u32();
  else if (key == "clock_ghz") c.clock_ghz = parse_double(key, value);
  else if (key == "max_cycles") c.max_cycles = parse_integer<std::uint64_t>(key, value);
  else throw ConfigError("unknown config key '" + std::string(key) + "'");

  // Mode follows V_chunk vs V; an explicit `mode` is checked by validate().
  if (key == "V" || key == "V_chunk") {
    s.mode = s.v_chunk < s.vocab ? SamplingMode::Edge : SamplingMode::Performance;
  }
}

void apply_override(SimConfig& config, std::string_view kv) {
  auto eq = kv.find('=');
  if (eq == std::string_view::npos) throw ConfigError("expected key=value, got '" + std::string(kv) + "'");
  apply_setting(config, trim(kv.substr(0, eq)), trim(kv.substr(eq + 1)));
}

void apply_config_text(SimConfig& config, std::string_view text) {
  std::size_t line_no = 0;
  while (!text.empty()) {
    ++line_no;
    auto nl = text.find('\n');
    auto line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    try {
      apply_override(config, line);
    } catch (const ConfigError& e) {
      throw ConfigError("config line " + std::to_string(line_no) + ": " + e.what());
    }
  }
}

void apply_config_file(SimConfig& config, const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  apply_config_text(config, buf.str());
}

std::vector<std::pair<std::string, std::string>> config_entries(const SimConfig& c) {
  const auto& s = c.sampling;
  const auto& m = c.memory;
  const auto& t = c.timings;
  std::ostringstream clock;
  clock << c.clock_ghz;
  return {
      {"B", std::to_string(s.batch)},
      {"T", std::to_string(s.steps)},
      {"L", std::to_string(s.block_len)},
      {"V", std::to_string(s.vocab)},
      {"V_chunk", std::to_string(s.v_chunk)},
      {"VLEN", std::to_string(s.vlen)},
      {"R", std::to_string(s.preload_batches)},
      {"mask_id", std::to_string(s.mask_id)},
      {"seed", std::to_string(s.seed)},
      {"mode", to_string(s.mode)},
      {"hbm_peak_bandwidth", std::to_string(m.hbm_peak_bandwidth)},
      {"hbm_fixed_latency", std::to_string(m.hbm_fixed_latency)},
      {"double_buffering", m.double_buffering ? "true" : "false"},
      {"vector_sram_bytes", std::to_string(m.vector_sram_bytes)},
      {"fp_sram_bytes", std::to_string(m.fp_sram_bytes)},
      {"int_sram_bytes", std::to_string(m.int_sram_bytes)},
      {"reduction_levels_per_cycle", std::to_string(t.reduction_levels_per_cycle)},
      {"reduction_base", std::to_string(t.reduction_base)},
      {"elementwise_latency", std::to_string(t.elementwise_latency)},
      {"fp_exp_latency", std::to_string(t.fp_exp_latency)},
      {"fp_recip_latency", std::to_string(t.fp_recip_latency)},
      {"topk_per_element", std::to_string(t.topk_per_element)},
      {"scalar_latency", std::to_string(t.scalar_latency)},
      {"control_latency", std::to_string(t.control_latency)},
      {"map_latency", std::to_string(t.map_latency)},
      {"fifo_per_element", std::to_string(t.fifo_per_element)},
      {"clock_ghz", clock.str()},
      {"max_cycles", std::to_string(c.max_cycles)},
  };
}

std::string format_config(const SimConfig& config) {
  std::string out;
  for (const auto& [k, v] : config_entries(config)) out += k + " = " + v + "\n";
  return out;
}

}  // namespace dplena
