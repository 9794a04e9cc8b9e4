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

#include "dplena/driver.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <sstream>

#include "dplena/logits_stub.hpp"
#include "json.hpp"

namespace dplena {

Simulation simulate(const SimConfig& config, Hbm hbm, const SimulateOptions& options) {
  config.validate();
  Simulation sim;
  sim.generated = gen_sampling_program(config.sampling, config.memory);
  const auto& gen = sim.generated;
  const auto& c = config.sampling;
  MachineState state(config.memory, MachineShape{c.vlen, c.block_len}, std::move(hbm));

  RunOptions run;
  run.max_cycles = config.max_cycles;
  run.clock_ghz = config.clock_ghz;
  run.trace = options.trace;
  if (options.capture_steps) {
    run.before_step = [&](std::size_t pc, const MachineState& s) {
      const std::size_t t = sim.steps.size();
      if (t >= gen.step_end.size() || pc != gen.step_end[t]) return;
      StepSnapshot snap;
      auto tokens = s.int_sram.read(gen.layout.tokens, c.rows());
      snap.tokens.assign(tokens.begin(), tokens.end());
      auto conf = s.vector_sram.read(gen.layout.confidence, c.rows());
      for (Bf16 v : conf) snap.confidence.push_back(v.to_float());
      sim.steps.push_back(std::move(snap));
    };
  }
  Executor exec(config.timings, config.memory);
  sim.report = exec.run(state, gen.program, run);
  sim.fifo.assign(state.fifo_out.begin(), state.fifo_out.end());
  return sim;
}

ReportRow run_config(const SimConfig& config, const SimulateOptions& options) {
  config.validate();
  ReportRow row;
  row.config = config;
  row.footprint = sram_footprint(config.sampling);
  Hbm hbm = build_logits_hbm(config.sampling);
  const auto oracle = oracle_sample(config.sampling, hbm);
  auto sim = simulate(config, std::move(hbm), options);
  row.report = sim.report;
  const std::size_t n = std::max(sim.fifo.size(), oracle.tokens.size());
  for (std::size_t i = 0; i < n; ++i) {
    if (i >= sim.fifo.size() || i >= oracle.tokens.size() || sim.fifo[i] != oracle.tokens[i]) {
      ++row.token_mismatches;
    }
  }
  for (const auto& step : oracle.steps) {
    row.max_method_deviation = std::max(row.max_method_deviation, step.max_method_deviation);
  }
  row.equivalence_pass = row.token_mismatches == 0;
  row.fifo = std::move(sim.fifo);
  return row;
}

VerifyResult verify(const SimConfig& config, const OracleOptions& oracle_options) {
  config.validate();
  const auto& c = config.sampling;
  Hbm hbm = build_logits_hbm(c);
  const auto oracle = oracle_sample(c, hbm, oracle_options);
  SimulateOptions sim_options;
  sim_options.capture_steps = true;
  const auto sim = simulate(config, std::move(hbm), sim_options);

  VerifyResult result;
  auto diverge = [&](std::uint32_t t, std::size_t p, std::string detail) {
    result.first = Divergence{t, static_cast<std::uint32_t>(p / c.block_len),
                              static_cast<std::uint32_t>(p % c.block_len), std::move(detail)};
  };
  for (std::uint32_t t = 0; t < c.steps && !result.first; ++t) {
    if (t >= sim.steps.size()) {
      diverge(t, 0, "simulator ended before this step");
      break;
    }
    const auto& ss = sim.steps[t];
    const auto& os = oracle.steps[t];
    for (std::size_t p = 0; p < c.rows(); ++p) {
      if (ss.tokens[p] != os.tokens[p]) {
        diverge(t, p, "token simulator=" + std::to_string(ss.tokens[p]) + " oracle=" + std::to_string(os.tokens[p]));
        break;
      }
      if (std::bit_cast<std::uint32_t>(ss.confidence[p]) != std::bit_cast<std::uint32_t>(os.confidence[p])) {
        std::ostringstream detail;
        detail.precision(9);
        detail << "confidence simulator=" << ss.confidence[p] << " oracle=" << os.confidence[p];
        diverge(t, p, detail.str());
        break;
      }
    }
    ++result.steps_compared;
  }
  if (!result.first) {
    for (std::size_t p = 0; p < c.rows(); ++p) {
      const bool has = p < sim.fifo.size();
      if (!has || sim.fifo[p] != oracle.tokens[p]) {
        diverge(c.steps - 1, p,
                "fifo " + (has ? std::to_string(sim.fifo[p]) : std::string("missing")) +
                    " oracle=" + std::to_string(oracle.tokens[p]));
        break;
      }
    }
  }
  result.pass = !result.first.has_value();
  return result;
}

std::string to_string(SweepAxis axis) {
  switch (axis) {
    case SweepAxis::B: return "B";
    case SweepAxis::T: return "T";
    case SweepAxis::V: return "V";
    case SweepAxis::V_chunk: return "V_chunk";
    case SweepAxis::VLEN: return "VLEN";
  }
  return "?";
}

SweepAxis parse_sweep_axis(std::string_view text) {
  for (auto axis : {SweepAxis::B, SweepAxis::T, SweepAxis::V, SweepAxis::V_chunk, SweepAxis::VLEN}) {
    if (text == to_string(axis)) return axis;
  }
  throw ConfigError("unknown sweep axis '" + std::string(text) + "' (expected B, T, V, V_chunk or VLEN)");
}

void SweepSpec::validate() const {
  if (values.empty()) throw ConfigError("sweep needs at least one value");
  for (std::size_t i = 1; i < values.size(); ++i) {
    if (values[i] <= values[i - 1]) throw ConfigError("sweep values must be strictly increasing");
  }
  for (auto v : values) {
    SimConfig c = fixed;
    apply_setting(c, to_string(axis), std::to_string(v));
    c.validate();
    check_capacity(c.sampling, c.memory);
  }
}

EquivalenceFailure::EquivalenceFailure(const SimConfig& config, std::size_t mismatches)
    : std::runtime_error("equivalence failure: " + std::to_string(mismatches) +
                         " token mismatches for config\n" + format_config(config)),
      config_(config) {}

double linear_fit_r2(const std::vector<double>& x, const std::vector<double>& y) {
  const std::size_t n = x.size();
  if (n != y.size() || n < 2) throw std::invalid_argument("linear fit needs two or more paired points");
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (syy == 0.0) return 1.0;
  if (sxx == 0.0) return 0.0;
  return (sxy * sxy) / (sxx * syy);
}

std::optional<std::size_t> saturation_index(const std::vector<double>& latency, double tolerance) {
  if (latency.empty()) return std::nullopt;
  const double final_value = latency.back();
  for (std::size_t i = 0; i < latency.size(); ++i) {
    if (std::abs(latency[i] - final_value) <= tolerance * final_value) return i;
  }
  return latency.size() - 1;
}

SweepResult run_sweep(const SweepSpec& spec) {
  spec.validate();
  SweepResult result;
  result.spec = spec;
  for (auto v : spec.values) {
    SimConfig c = spec.fixed;
    apply_setting(c, to_string(spec.axis), std::to_string(v));
    auto row = run_config(c);
    if (!row.equivalence_pass) throw EquivalenceFailure(c, row.token_mismatches);
    result.rows.push_back(std::move(row));
  }
  std::vector<double> x, latency, bw;
  for (std::size_t i = 0; i < result.rows.size(); ++i) {
    x.push_back(static_cast<double>(spec.values[i]));
    latency.push_back(static_cast<double>(result.rows[i].report.total_cycles));
    bw.push_back(result.rows[i].report.hbm_achieved_bandwidth);
  }
  const bool linear_axis = spec.axis == SweepAxis::B || spec.axis == SweepAxis::T || spec.axis == SweepAxis::V;
  if (linear_axis && x.size() >= 2) result.r_squared = linear_fit_r2(x, latency);
  if (spec.axis == SweepAxis::V_chunk) {
    if (auto i = saturation_index(latency)) result.saturation_value = spec.values[*i];
  }
  const auto [lo, hi] = std::minmax_element(bw.begin(), bw.end());
  result.bandwidth_spread = *lo > 0.0 ? (*hi - *lo) / *lo : 0.0;
  return result;
}

namespace {

std::string fmt(double v) {
  char buf[64];
  auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

}  // namespace

std::string csv_header() {
  return "B,T,L,V,V_chunk,VLEN,R,mode,seed,total_cycles,latency_ms,vector_cycles,memory_cycles,scalar_cycles,"
         "other_cycles,instructions,hbm_bytes,hbm_bw_gbps,int_sram_bytes,fp_sram_bytes,vector_sram_bytes,"
         "vector_sram_high_water,equivalence_pass";
}

std::string csv_row(const ReportRow& row) {
  const auto& c = row.config.sampling;
  const auto& r = row.report;
  std::ostringstream out;
  out << c.batch << ',' << c.steps << ',' << c.block_len << ',' << c.vocab << ',' << c.v_chunk << ',' << c.vlen << ','
      << c.preload_batches << ',' << to_string(c.mode) << ',' << c.seed << ',' << r.total_cycles << ','
      << fmt(r.latency_ms) << ',' << r.counters.vector << ',' << r.counters.memory << ',' << r.counters.scalar << ','
      << r.counters.other << ',' << r.instructions << ',' << fmt(r.hbm_bytes_moved) << ','
      << fmt(r.hbm_achieved_bandwidth / 1e9) << ',' << row.footprint.int_bytes() << ',' << row.footprint.fp_bytes()
      << ',' << row.footprint.vector_bytes() << ',' << r.vector_sram_high_water << ','
      << (row.equivalence_pass ? "true" : "false");
  return out.str();
}

void write_csv(std::ostream& out, const std::vector<ReportRow>& rows) {
  out << csv_header() << '\n';
  for (const auto& row : rows) out << csv_row(row) << '\n';
}

namespace {

nlohmann::ordered_json row_json(const ReportRow& row) {
  nlohmann::ordered_json config;
  for (const auto& [k, v] : config_entries(row.config)) config[k] = v;
  const auto& r = row.report;
  nlohmann::ordered_json j;
  j["config"] = config;
  j["total_cycles"] = r.total_cycles;
  j["latency_ms"] = r.latency_ms;
  j["cycles"] = {{"vector", r.counters.vector},
                 {"memory", r.counters.memory},
                 {"scalar", r.counters.scalar},
                 {"other", r.counters.other}};
  j["instructions"] = r.instructions;
  j["hbm_bytes_moved"] = r.hbm_bytes_moved;
  j["hbm_achieved_bw_bytes_per_s"] = r.hbm_achieved_bandwidth;
  j["sram_bytes"] = {{"int", row.footprint.int_bytes()},
                     {"fp", row.footprint.fp_bytes()},
                     {"vector", row.footprint.vector_bytes()}};
  j["sram_high_water_bytes"] = {{"int", r.int_sram_high_water},
                                {"fp", r.fp_sram_high_water},
                                {"vector", r.vector_sram_high_water}};
  j["equivalence_pass"] = row.equivalence_pass;
  j["token_mismatches"] = row.token_mismatches;
  j["max_method_deviation"] = row.max_method_deviation;
  return j;
}

}  // namespace

std::string report_json(const ReportRow& row) {
  nlohmann::ordered_json j;
  j["schema_version"] = kReportSchemaVersion;
  j["report"] = row_json(row);
  return j.dump(2);
}

std::string sweep_json(const SweepResult& result) {
  nlohmann::ordered_json j;
  j["schema_version"] = kReportSchemaVersion;
  j["axis"] = to_string(result.spec.axis);
  j["values"] = result.spec.values;
  j["r_squared"] = result.r_squared ? nlohmann::ordered_json(*result.r_squared) : nlohmann::ordered_json();
  j["saturation_value"] =
      result.saturation_value ? nlohmann::ordered_json(*result.saturation_value) : nlohmann::ordered_json();
  j["bandwidth_spread"] = result.bandwidth_spread;
  auto rows = nlohmann::ordered_json::array();
  for (const auto& row : result.rows) rows.push_back(row_json(row));
  j["rows"] = rows;
  return j.dump(2);
}

std::string gnuplot_script(const SweepResult& result, const std::string& csv_path) {
  static const char* kColumns[] = {"B", "T", "L", "V", "V_chunk", "VLEN"};
  const std::string axis = to_string(result.spec.axis);
  int column = 1;
  for (int i = 0; i < 6; ++i) {
    if (axis == kColumns[i]) column = i + 1;
  }
  std::ostringstream s;
  s << "set datafile separator ','\n"
    << "set key autotitle columnhead\n"
    << "set xlabel '" << axis << "'\n"
    << "set ylabel 'latency (ms)'\n"
    << "set y2label 'HBM bandwidth (GB/s)'\n"
    << "set y2tics\n"
    << (result.spec.axis == SweepAxis::V_chunk ? "set logscale x 2\n" : "")
    << "plot '" << csv_path << "' using " << column << ":11 with linespoints axes x1y1, \\\n"
    << "     '" << csv_path << "' using " << column << ":18 with linespoints axes x1y2\n";
  return s.str();
}

}  // namespace dplena
