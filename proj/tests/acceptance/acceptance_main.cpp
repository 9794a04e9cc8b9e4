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

// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any FAIL.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <exception>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "dplena/codegen.hpp"
#include "dplena/config.hpp"
#include "dplena/driver.hpp"
#include "dplena/logits_stub.hpp"
#include "dplena/oracle.hpp"

namespace {

using namespace dplena;
using Clock = std::chrono::steady_clock;

struct Outcome {
  bool pass = true;
  std::string detail;
};

std::vector<SimConfig> g_swept;  // every config simulated by criteria 1, 4 and 5

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

SimConfig config_from(const std::string& text) {
  SimConfig c;
  apply_config_text(c, text);
  c.validate();
  return c;
}

std::string shape(const SamplingConfig& s) {
  std::ostringstream o;
  o << "B=" << s.batch << " T=" << s.steps << " L=" << s.block_len << " V=" << s.vocab << " V_chunk=" << s.v_chunk
    << " VLEN=" << s.vlen << " R=" << s.preload_batches << " " << to_string(s.mode);
  return o.str();
}

// Random configs with a bounded T*B*L*V so the suite stays at desk scale.
std::vector<SimConfig> equivalence_configs() {
  std::vector<SimConfig> out;
  // Corners of the ranges.
  for (const char* text : {
           "B=32\nT=2\nL=8\nV=2000\nV_chunk=128\nVLEN=64\n",
           "B=1\nT=32\nL=16\nV=640\nV_chunk=640\nVLEN=64\n",
           "B=1\nT=1\nL=8\nV=128000\nV_chunk=4096\nVLEN=512\n",
           "B=2\nT=1\nL=8\nV=128000\nV_chunk=128000\nVLEN=2048\n",
           "B=4\nT=4\nL=64\nV=1000\nV_chunk=1000\nVLEN=64\nR=2\n",
           "B=1\nT=1\nL=8\nV=64\nV_chunk=64\nVLEN=64\n",
           "B=32\nT=32\nL=8\nV=64\nV_chunk=64\nVLEN=64\nR=4\n",
       }) {
    out.push_back(config_from(text));
  }

  std::mt19937_64 rng(0xACCE97ull);
  auto log_uniform = [&](double lo, double hi) {
    std::uniform_real_distribution<double> d(std::log(lo), std::log(hi));
    return static_cast<std::uint32_t>(std::lround(std::exp(d(rng))));
  };
  constexpr std::uint64_t kElementBudget = 3'000'000;
  const std::uint32_t vlens[] = {64, 128, 256, 512};
  while (out.size() < 60) {
    SimConfig c;
    auto& s = c.sampling;
    s.seed = rng();
    s.batch = log_uniform(1, 32);
    s.steps = log_uniform(1, 32);
    s.block_len = std::clamp<std::uint32_t>(log_uniform(8, 64), 8, 64);
    s.vocab = std::clamp<std::uint32_t>(log_uniform(64, 128000), 64, 128000);
    while (s.total_logits() > kElementBudget) {
      if (s.vocab > 4096 && rng() % 2) s.vocab /= 2;
      else if (s.batch > 1 && rng() % 2) s.batch /= 2;
      else if (s.steps > 1) s.steps /= 2;
      else if (s.block_len > 8) s.block_len /= 2;
      else s.vocab /= 2;
    }
    s.steps = std::max<std::uint32_t>(s.steps, 1);
    s.vocab = std::max<std::uint32_t>(s.vocab, 64);
    std::vector<std::uint32_t> fit;
    for (auto v : vlens) {
      if (v >= s.block_len && v <= s.vocab) fit.push_back(v);
    }
    if (fit.empty()) continue;
    s.vlen = fit[rng() % fit.size()];
    const bool edge = out.size() % 2 == 0 && s.vocab > s.vlen;
    if (edge) {
      const std::uint32_t unit = std::max<std::uint32_t>(s.vlen, 32);
      const std::uint32_t max_mult = (s.vocab - 1) / unit;
      if (max_mult == 0) continue;
      s.v_chunk = unit * static_cast<std::uint32_t>(1 + rng() % std::min<std::uint32_t>(max_mult, 64));
      s.mode = SamplingMode::Edge;
    } else {
      s.v_chunk = s.vocab;
      s.mode = SamplingMode::Performance;
      std::vector<std::uint32_t> divisors;
      for (std::uint32_t r = 1; r <= std::min<std::uint32_t>(s.batch, 4); ++r) {
        if (s.batch % r == 0) divisors.push_back(r);
      }
      s.preload_batches = divisors[rng() % divisors.size()];
    }
    try {
      c.validate();
      check_capacity(s, c.memory);
    } catch (const ConfigError&) {
      continue;
    }
    out.push_back(c);
  }
  return out;
}

Outcome token_equivalence() {
  const auto start = Clock::now();
  const auto configs = equivalence_configs();
  std::size_t edge = 0, perf = 0, mismatched_configs = 0, mismatched_tokens = 0;
  std::uint32_t max_b = 0, max_t = 0, max_l = 0, min_l = 64, max_v = 0, min_v = ~0u;
  std::string first_failure;
  for (const auto& c : configs) {
    const auto& s = c.sampling;
    (s.mode == SamplingMode::Edge ? edge : perf)++;
    max_b = std::max(max_b, s.batch);
    max_t = std::max(max_t, s.steps);
    max_l = std::max(max_l, s.block_len);
    min_l = std::min(min_l, s.block_len);
    max_v = std::max(max_v, s.vocab);
    min_v = std::min(min_v, s.vocab);
    const auto hbm = build_logits_hbm(s);
    const auto sim = simulate(c, hbm);
    const auto ref = oracle_sample(s, hbm);
    std::size_t diff = sim.fifo.size() == ref.tokens.size() ? 0 : std::max(sim.fifo.size(), ref.tokens.size());
    for (std::size_t i = 0; i < std::min(sim.fifo.size(), ref.tokens.size()); ++i) diff += sim.fifo[i] != ref.tokens[i];
    if (diff != 0) {
      ++mismatched_configs;
      mismatched_tokens += diff;
      if (first_failure.empty()) first_failure = shape(s);
    }
    g_swept.push_back(c);
  }
  const double elapsed = seconds_since(start);
  Outcome o;
  std::ostringstream d;
  d << configs.size() << " configs (" << edge << " edge, " << perf << " performance), B<=" << max_b << " T<=" << max_t
    << " L=" << min_l << ".." << max_l << " V=" << min_v << ".." << max_v << ", " << mismatched_tokens
    << " token mismatches, " << elapsed << " s";
  if (!first_failure.empty()) d << ", first failing: " << first_failure;
  o.detail = d.str();
  o.pass = configs.size() >= 50 && edge > 0 && perf > 0 && mismatched_configs == 0 && elapsed < 600.0 &&
           max_b == 32 && max_t == 32 && min_l == 8 && max_l == 64 && min_v == 64 && max_v == 128000;
  return o;
}

Outcome stable_max_equivalence() {
  std::mt19937_64 rng(0x57AB1Eull);
  std::uniform_real_distribution<float> dist(-8.0f, 8.0f);
  const std::uint32_t vocabs[] = {64, 2000, 128000};
  const std::uint32_t vlens[] = {64, 64, 2048};
  constexpr int kRows = 10000;
  std::size_t argmax_mismatch = 0, tie_rows = 0, tie_mismatch = 0;
  double worst = 0.0;
  std::vector<Bf16> row;
  std::vector<float> wide;
  for (int i = 0; i < kRows; ++i) {
    const std::uint32_t v = vocabs[i % 3];
    row.resize(v);
    wide.resize(v);
    for (std::uint32_t j = 0; j < v; ++j) row[j] = Bf16::from_float(dist(rng));
    const bool tie = i % 10 == 0;
    if (tie) {
      // Duplicate the maximum at a random other position.
      std::size_t m = 0;
      for (std::uint32_t j = 1; j < v; ++j) {
        if (row[j].to_float() > row[m].to_float()) m = j;
      }
      std::size_t other = rng() % v;
      if (other == m) other = (m + 1) % v;
      row[other] = row[m];
      ++tie_rows;
    }
    for (std::uint32_t j = 0; j < v; ++j) wide[j] = row[j].to_float();
    const auto sm = stable_max(row, vlens[i % 3]);
    const auto ref = softmax_confidence(wide);
    if (sm.argmax != ref.argmax) {
      ++argmax_mismatch;
      tie_mismatch += tie;
    }
    const double p = round_bf16(ref.max_prob);
    worst = std::max(worst, std::fabs(static_cast<double>(sm.confidence) - p) / p);
  }
  Outcome o;
  std::ostringstream d;
  d << kRows << " rows over V={64,2000,128000}, " << tie_rows << " with duplicated maxima, " << argmax_mismatch
    << " argmax mismatches (" << tie_mismatch << " on ties), max relative error " << worst << " (bound "
    << std::ldexp(1.0, -7) << ")";
  o.detail = d.str();
  o.pass = argmax_mismatch == 0 && worst <= std::ldexp(1.0, -7);
  return o;
}

Outcome sram_formulas() {
  std::size_t checked = 0, wrong = 0;
  std::string first;
  for (const auto& c : g_swept) {
    const auto& s = c.sampling;
    const std::uint64_t bl = std::uint64_t{s.batch} * s.block_len;
    const std::uint64_t vec = 3 * bl + (s.mode == SamplingMode::Edge ? std::uint64_t{s.v_chunk}
                                                                     : std::uint64_t{s.vocab} * s.block_len *
                                                                           s.preload_batches);
    const auto f = sram_footprint(s);
    ++checked;
    if (f.int_elements != 2 * bl || f.fp_elements != std::max(s.block_len, s.vlen) || f.vector_elements != vec) {
      ++wrong;
      if (first.empty()) first = shape(s);
    }
  }
  bool fp_ok = true;
  std::ostringstream fp;
  const std::uint32_t vlens[] = {512, 1024, 2048};
  const std::uint64_t expect_kib[] = {1, 2, 4};
  for (int i = 0; i < 3; ++i) {
    SamplingConfig s;
    s.batch = 16;
    s.block_len = 32;
    s.vocab = 126000;
    s.v_chunk = 126000;
    s.vlen = vlens[i];
    s.mode = SamplingMode::Performance;
    const auto bytes = sram_footprint(s).fp_bytes();
    fp << (i ? "/" : "") << bytes;
    fp_ok = fp_ok && bytes == expect_kib[i] * 1024;
  }
  SamplingConfig large_workload;
  large_workload.batch = 16;
  large_workload.block_len = 32;
  large_workload.vocab = 126000;
  large_workload.v_chunk = 126000;
  large_workload.vlen = 2048;
  large_workload.mode = SamplingMode::Performance;
  const double vector_bytes = static_cast<double>(sram_footprint(large_workload).vector_bytes());
  const double rel = std::fabs(vector_bytes - 8e6) / 8e6;
  Outcome o;
  std::ostringstream d;
  d << checked << " swept configs, " << wrong << " formula mismatches; FP SRAM bytes at VLEN 512/1024/2048 = "
    << fp.str() << "; VLEN=2048 workload vector SRAM " << static_cast<std::uint64_t>(vector_bytes) << " B (" << rel * 100
    << "% from 8 MB)";
  if (!first.empty()) d << ", first mismatch: " << first;
  o.detail = d.str();
  o.pass = checked > 0 && wrong == 0 && fp_ok && rel <= 0.01;
  return o;
}

Outcome scaling_linearity() {
  struct Sweep {
    SweepAxis axis;
    std::vector<std::uint64_t> values;
    const char* fixed;
  };
  const Sweep sweeps[] = {
      {SweepAxis::B, {1, 2, 4, 8, 16, 32}, "T=1\nL=64\nV=2000\nV_chunk=128\nVLEN=64\n"},
      {SweepAxis::T, {1, 2, 4, 8, 16, 32}, "B=2\nL=64\nV=2000\nV_chunk=128\nVLEN=64\n"},
      {SweepAxis::V, {2000, 4000, 8000, 16000, 32000, 64000, 128000}, "B=2\nT=1\nL=64\nV_chunk=128\nVLEN=64\n"},
  };
  Outcome o;
  std::ostringstream d;
  for (const auto& sw : sweeps) {
    SweepSpec spec;
    spec.axis = sw.axis;
    spec.values = sw.values;
    spec.fixed = config_from(sw.fixed);
    const auto result = run_sweep(spec);
    for (const auto& row : result.rows) g_swept.push_back(row.config);
    const double r2 = result.r_squared.value_or(0.0);
    d << to_string(sw.axis) << ": R^2=" << r2 << " bw spread=" << result.bandwidth_spread * 100 << "%; ";
    o.pass = o.pass && r2 >= 0.99 && result.bandwidth_spread < 0.10;
  }
  o.detail = d.str();
  return o;
}

Outcome chunk_saturation() {
  SweepSpec spec;
  spec.axis = SweepAxis::V_chunk;
  spec.values = {128, 256, 512, 1024, 2048, 4096, 8192, 16384, 30016};
  spec.fixed = config_from("B=2\nT=1\nL=64\nV=128000\nVLEN=64\n");
  const auto result = run_sweep(spec);
  bool monotone = true;
  std::ostringstream d;
  d << "cycles:";
  std::uint64_t at8k = 0, at30k = 0;
  for (std::size_t i = 0; i < result.rows.size(); ++i) {
    const auto cycles = result.rows[i].report.total_cycles;
    g_swept.push_back(result.rows[i].config);
    d << ' ' << spec.values[i] << "->" << cycles;
    if (i > 0 && cycles > result.rows[i - 1].report.total_cycles) monotone = false;
    if (spec.values[i] == 8192) at8k = cycles;
    if (spec.values[i] == 30016) at30k = cycles;
  }
  const double gap = static_cast<double>(at8k) / static_cast<double>(at30k) - 1.0;
  d << "; non-increasing=" << (monotone ? "yes" : "no") << ", 8k vs 30k " << gap * 100 << "%";
  if (result.saturation_value) d << ", saturates at V_chunk=" << *result.saturation_value;
  Outcome o;
  o.detail = d.str();
  o.pass = monotone && std::fabs(gap) <= 0.10;
  return o;
}

Outcome cycle_calibration() {
  SimConfig c;
  apply_config_file(c, std::string(DPLENA_SOURCE_DIR) + "/configs/calibration.conf");
  apply_config_file(c, std::string(DPLENA_SOURCE_DIR) + "/configs/vlen2048_workload.conf");
  c.validate();
  const auto row = run_config(c);
  const auto& k = row.report.counters;
  const double total = static_cast<double>(row.report.total_cycles);
  const double rel = total / 991038.0 - 1.0;
  const double vector_share = static_cast<double>(k.vector) / total;
  const bool ordered = k.vector > k.memory && k.memory > k.scalar && k.scalar > k.other;
  Outcome o;
  std::ostringstream d;
  d << "total " << row.report.total_cycles << " (" << (rel >= 0 ? "+" : "") << rel * 100
    << "% vs 991038), vector " << k.vector << " memory " << k.memory << " scalar " << k.scalar << " other " << k.other
    << ", vector share " << vector_share * 100 << "%, tokens " << (row.equivalence_pass ? "match" : "differ");
  o.detail = d.str();
  o.pass = std::fabs(rel) <= 0.25 && ordered && vector_share >= 0.35 && vector_share <= 0.60 && row.equivalence_pass;
  return o;
}

Outcome determinism() {
  const auto a_cfg = config_from("B=3\nT=5\nL=16\nV=3000\nV_chunk=256\nVLEN=32\nseed=99\n");
  const auto b_cfg = config_from("B=4\nT=3\nL=32\nV=700\nV_chunk=700\nVLEN=64\nR=2\nseed=99\n");
  std::size_t differences = 0, compared = 0;
  for (const auto& c : {a_cfg, b_cfg}) {
    std::ostringstream trace1, trace2;
    SimulateOptions o1, o2;
    o1.trace = &trace1;
    o2.trace = &trace2;
    const auto r1 = run_config(c, o1);
    const auto r2 = run_config(c, o2);
    differences += report_json(r1) != report_json(r2);
    differences += csv_row(r1) != csv_row(r2);
    differences += r1.fifo != r2.fifo;
    differences += trace1.str() != trace2.str();
    const auto p1 = disassemble(gen_sampling_program(c.sampling, c.memory).program);
    const auto p2 = disassemble(gen_sampling_program(c.sampling, c.memory).program);
    differences += p1 != p2;
    const auto h1 = build_logits_hbm(c.sampling), h2 = build_logits_hbm(c.sampling);
    differences += format_trace(c.sampling, oracle_sample(c.sampling, h1)) !=
                   format_trace(c.sampling, oracle_sample(c.sampling, h2));
    compared += 6;
  }
  SweepSpec spec;
  spec.axis = SweepAxis::B;
  spec.values = {1, 2};
  spec.fixed = a_cfg;
  differences += sweep_json(run_sweep(spec)) != sweep_json(run_sweep(spec));
  ++compared;
  Outcome o;
  o.detail = std::to_string(compared) + " artifact pairs (reports, csv, fifo, traces, programs, sweeps), " +
             std::to_string(differences) + " differ";
  o.pass = differences == 0;
  return o;
}

}  // namespace

int main() {
  struct Criterion {
    const char* name;
    std::function<Outcome()> check;
  };
  const Criterion criteria[] = {
      {"token_equivalence", token_equivalence},
      {"stable_max_equivalence", stable_max_equivalence},
      {"scaling_linearity", scaling_linearity},
      {"chunk_saturation", chunk_saturation},
      {"sram_formulas", sram_formulas},  // after the sweeps so every swept config is checked
      {"cycle_calibration", cycle_calibration},
      {"determinism", determinism},
  };
  const auto start = Clock::now();
  int failures = 0;
  for (const auto& c : criteria) {
    Outcome o;
    try {
      o = c.check();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("exception: ") + e.what();
    }
    failures += !o.pass;
    std::printf("%s %s: %s\n", o.pass ? "PASS" : "FAIL", c.name, o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%s %d/%zu criteria passed in %.1f s\n", failures ? "FAIL" : "PASS",
              static_cast<int>(std::size(criteria)) - failures, std::size(criteria), seconds_since(start));
  return failures == 0 ? 0 : 1;
}
