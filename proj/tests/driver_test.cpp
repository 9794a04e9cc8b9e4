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

#include <gtest/gtest.h>

#include <algorithm>
#include <sstream>

#include "dplena/logits_stub.hpp"
#include "json.hpp"

namespace dplena {
namespace {

TEST(RunConfig, DefaultsReport) {
  const auto row = run_config(SimConfig{});
  EXPECT_TRUE(row.equivalence_pass);
  EXPECT_EQ(row.token_mismatches, 0u);
  EXPECT_EQ(row.footprint.vector_elements, 512u);
  EXPECT_EQ(row.footprint.vector_bytes(), 1024u);
  EXPECT_DOUBLE_EQ(row.report.hbm_bytes_moved, 2.0 * 64 * 2000 * 33 / 32);
  EXPECT_EQ(row.report.total_cycles, row.report.counters.total());
  EXPECT_DOUBLE_EQ(row.report.latency_ms, static_cast<double>(row.report.total_cycles) / 1e6);
  EXPECT_EQ(row.fifo.size(), 128u);
}

TEST(RunConfig, EdgeModeStreamsEveryLogitOncePerStep) {
  SimConfig c;
  apply_config_text(c, "T=3\nB=2\nL=16\nV=500\nV_chunk=64\nVLEN=32\n");
  const auto row = run_config(c);
  EXPECT_DOUBLE_EQ(row.report.hbm_bytes_moved, 3.0 * 2 * 16 * 500 * 33 / 32);
  EXPECT_TRUE(row.equivalence_pass);
}

TEST(RunConfig, ClockScalesLatency) {
  SimConfig c;
  c.clock_ghz = 2.0;
  const auto row = run_config(c);
  EXPECT_DOUBLE_EQ(row.report.latency_ms, static_cast<double>(row.report.total_cycles) / 2e6);
}

TEST(RunConfig, TimeoutPropagates) {
  SimConfig c;
  c.max_cycles = 1000;
  EXPECT_THROW(run_config(c), SimTimeout);
}

TEST(Verify, PassesOnDefaultsAndLongRun) {
  EXPECT_TRUE(verify(SimConfig{}).pass);
  SimConfig c;
  apply_config_text(c, "T=32\nB=4\nL=64\nV=256\nV_chunk=64\n");
  const auto r = verify(c);
  EXPECT_TRUE(r.pass);
  EXPECT_EQ(r.steps_compared, 32u);
}

TEST(Verify, PerturbedTieRuleFailsAtATie) {
  SimConfig c;
  apply_config_text(c, "T=8\nB=2\nL=64\nV=2000\nV_chunk=128\n");
  OracleOptions perturbed;
  perturbed.tie_rule = TieRule::HigherIndex;
  const auto r = verify(c, perturbed);
  ASSERT_FALSE(r.pass);
  ASSERT_TRUE(r.first.has_value());
  EXPECT_NE(r.first->detail.find("token"), std::string::npos) << r.first->detail;

  // The diverging step has two eligible positions of equal confidence at the cut.
  const auto hbm = build_logits_hbm(c.sampling);
  const auto ref = oracle_sample(c.sampling, hbm);
  const auto& step = ref.steps[r.first->step];
  const std::size_t begin = std::size_t{r.first->batch} * c.sampling.block_len;
  const auto flat = begin + r.first->position;
  bool has_tie = false;
  for (std::size_t l = 0; l < c.sampling.block_len; ++l) {
    if (begin + l != flat && step.confidence[begin + l] == step.confidence[flat]) has_tie = true;
  }
  EXPECT_TRUE(has_tie);
}

TEST(Fit, PerfectLineAndSaturation) {
  EXPECT_DOUBLE_EQ(linear_fit_r2({1, 2, 3, 4}, {3, 5, 7, 9}), 1.0);
  EXPECT_LT(linear_fit_r2({1, 2, 3, 4}, {1, 4, 1, 4}), 0.5);
  EXPECT_THROW(linear_fit_r2({1}, {1}), std::invalid_argument);
  EXPECT_EQ(saturation_index({100, 50, 20.9, 20.5, 20}), 2u);
  EXPECT_EQ(saturation_index({5}), 0u);
}

TEST(Sweep, SingleValueEqualsRun) {
  SweepSpec spec;
  spec.axis = SweepAxis::B;
  spec.values = {2};
  const auto result = run_sweep(spec);
  ASSERT_EQ(result.rows.size(), 1u);
  EXPECT_EQ(csv_row(result.rows[0]), csv_row(run_config(SimConfig{})));
  EXPECT_FALSE(result.r_squared.has_value());
}

TEST(Sweep, BatchAxisIsLinear) {
  SweepSpec spec;
  spec.axis = SweepAxis::B;
  spec.values = {1, 2, 4};
  apply_config_text(spec.fixed, "V=512\nL=16\nVLEN=32\nV_chunk=64\n");
  const auto result = run_sweep(spec);
  ASSERT_TRUE(result.r_squared.has_value());
  EXPECT_GE(*result.r_squared, 0.99);
  EXPECT_LT(result.bandwidth_spread, 0.1);
}

TEST(Sweep, ChunkAxisReportsSaturation) {
  SweepSpec spec;
  spec.axis = SweepAxis::V_chunk;
  spec.values = {64, 128, 256, 512};
  apply_config_text(spec.fixed, "V=512\nL=16\nVLEN=32\nB=1\n");
  const auto result = run_sweep(spec);
  ASSERT_TRUE(result.saturation_value.has_value());
  EXPECT_EQ(result.rows.back().config.sampling.mode, SamplingMode::Performance);
}

TEST(Sweep, RejectsBadSpecs) {
  SweepSpec spec;
  spec.axis = SweepAxis::T;
  EXPECT_THROW(run_sweep(spec), ConfigError);
  spec.values = {2, 2};
  EXPECT_THROW(run_sweep(spec), ConfigError);
  spec.axis = SweepAxis::VLEN;
  spec.values = {64, 256};
  EXPECT_THROW(run_sweep(spec), ConfigError);
  EXPECT_THROW(parse_sweep_axis("Q"), ConfigError);
  EXPECT_EQ(parse_sweep_axis("V_chunk"), SweepAxis::V_chunk);
}

TEST(Reports, CsvColumnsAreStable) {
  EXPECT_EQ(csv_header(),
            "B,T,L,V,V_chunk,VLEN,R,mode,seed,total_cycles,latency_ms,vector_cycles,memory_cycles,scalar_cycles,"
            "other_cycles,instructions,hbm_bytes,hbm_bw_gbps,int_sram_bytes,fp_sram_bytes,vector_sram_bytes,"
            "vector_sram_high_water,equivalence_pass");
  const auto row = csv_row(run_config(SimConfig{}));
  const auto header = csv_header();
  EXPECT_EQ(std::count(row.begin(), row.end(), ','), std::count(header.begin(), header.end(), ','));
}

TEST(Reports, JsonIsVersioned) {
  const auto row = run_config(SimConfig{});
  const auto j = nlohmann::json::parse(report_json(row));
  EXPECT_EQ(j["schema_version"], kReportSchemaVersion);
  EXPECT_EQ(j["report"]["sram_bytes"]["vector"], 1024);
  EXPECT_EQ(j["report"]["equivalence_pass"], true);
  EXPECT_EQ(j["report"]["config"]["V_chunk"], "128");
}

TEST(Reports, DeterministicAcrossRuns) {
  SimConfig c;
  c.sampling.steps = 2;
  const auto a = run_config(c), b = run_config(c);
  EXPECT_EQ(report_json(a), report_json(b));
  EXPECT_EQ(a.fifo, b.fifo);
}

TEST(Reports, GnuplotScriptReferencesCsv) {
  SweepResult r;
  r.spec.axis = SweepAxis::V_chunk;
  const auto script = gnuplot_script(r, "sweep.csv");
  EXPECT_NE(script.find("'sweep.csv' using 5:11"), std::string::npos) << script;
  EXPECT_NE(script.find("logscale"), std::string::npos);
}

}  // namespace
}  // namespace dplena
