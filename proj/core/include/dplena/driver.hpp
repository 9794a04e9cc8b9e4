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

#ifndef DPLENA_DRIVER_HPP_
#define DPLENA_DRIVER_HPP_

#include <cstdint>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "dplena/codegen.hpp"
#include "dplena/config.hpp"
#include "dplena/executor.hpp"
#include "dplena/oracle.hpp"

namespace dplena {

// Simulator state captured at the end of each diffusion step.
struct StepSnapshot {
  std::vector<std::int32_t> tokens;  // x, B*L
  std::vector<float> confidence;     // Vector SRAM confidences, B*L
};

struct Simulation {
  GeneratedProgram generated;
  CycleReport report;
  std::vector<std::int32_t> fifo;
  std::vector<StepSnapshot> steps;  // filled when capture_steps is set
};

struct SimulateOptions {
  bool capture_steps = false;
  std::ostream* trace = nullptr;
};

Simulation simulate(const SimConfig& config, Hbm hbm, const SimulateOptions& options = {});

struct ReportRow {
  SimConfig config;
  CycleReport report;
  SramFootprint footprint;
  bool equivalence_pass = false;
  std::size_t token_mismatches = 0;
  double max_method_deviation = 0.0;
  std::vector<std::int32_t> fifo;
};

// Generate, simulate and co-run the oracle on the same logits bytes.
ReportRow run_config(const SimConfig& config, const SimulateOptions& options = {});

struct Divergence {
  std::uint32_t step = 0;
  std::uint32_t batch = 0;
  std::uint32_t position = 0;
  std::string detail;
};

struct VerifyResult {
  bool pass = false;
  std::optional<Divergence> first;
  std::size_t steps_compared = 0;
};

VerifyResult verify(const SimConfig& config, const OracleOptions& oracle_options = {});

enum class SweepAxis { B, T, V, V_chunk, VLEN };
std::string to_string(SweepAxis axis);
SweepAxis parse_sweep_axis(std::string_view text);

struct SweepSpec {
  SweepAxis axis = SweepAxis::B;
  std::vector<std::uint64_t> values;
  SimConfig fixed;

  void validate() const;
};

struct SweepResult {
  SweepSpec spec;
  std::vector<ReportRow> rows;
  std::optional<double> r_squared;               // B, T and V axes
  std::optional<std::uint64_t> saturation_value; // V_chunk axis
  double bandwidth_spread = 0.0;                 // (max - min) / min of achieved bandwidth
};

class EquivalenceFailure : public std::runtime_error {
 public:
  EquivalenceFailure(const SimConfig& config, std::size_t mismatches);
  const SimConfig& config() const { return config_; }

 private:
  SimConfig config_;
};

// Throws EquivalenceFailure on the first row whose tokens differ from the oracle.
SweepResult run_sweep(const SweepSpec& spec);

double linear_fit_r2(const std::vector<double>& x, const std::vector<double>& y);
// First value whose latency is within `tolerance` of the final latency.
std::optional<std::size_t> saturation_index(const std::vector<double>& latency, double tolerance = 0.05);

// Stable CSV columns, one row per report.
std::string csv_header();
std::string csv_row(const ReportRow& row);
void write_csv(std::ostream& out, const std::vector<ReportRow>& rows);

inline constexpr int kReportSchemaVersion = 1;
std::string report_json(const ReportRow& row);
std::string sweep_json(const SweepResult& result);
// gnuplot script plotting latency and bandwidth from the CSV file `csv_path`.
std::string gnuplot_script(const SweepResult& result, const std::string& csv_path);

}  // namespace dplena

#endif  // DPLENA_DRIVER_HPP_
