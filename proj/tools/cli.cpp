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

#include "cli.hpp"

#include <cstdlib>
#include <fstream>
#include <iterator>
#include <sstream>
#include <vector>

#include "CLI11.hpp"
#include "dplena/driver.hpp"
#include "dplena/logits_stub.hpp"
#include "json.hpp"

namespace dplena::cli {
namespace {

using nlohmann::ordered_json;

constexpr int kProgramSchemaVersion = 1;

std::string read_input(const std::string& path) {
  if (path == "-") return {std::istreambuf_iterator<char>(std::cin), {}};
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open '" + path + "'");
  return {std::istreambuf_iterator<char>(in), {}};
}

void write_output(const std::string& path, const std::string& text, std::ostream& out) {
  if (path.empty() || path == "-") {
    out << text;
    return;
  }
  std::ofstream file(path, std::ios::binary);
  if (!file) throw ConfigError("cannot write '" + path + "'");
  file << text;
}

struct Common {
  std::vector<std::string> config_files;
  std::vector<std::string> overrides;

  SimConfig resolve() const {
    SimConfig config;
    if (config_files.empty()) {
      if (const char* env = std::getenv(kConfigEnvVar); env != nullptr && *env != '\0') {
        apply_config_file(config, env);
      }
    }
    for (const auto& f : config_files) apply_config_file(config, f);
    for (const auto& o : overrides) apply_override(config, o);
    config.validate();
    return config;
  }
};

void add_common(CLI::App* cmd, Common& common) {
  cmd->add_option("-c,--config", common.config_files,
                  "Config file(s), applied in order (default: $" + std::string(kConfigEnvVar) + ")");
  cmd->add_option("-s,--set", common.overrides, "Override one setting, KEY=VALUE (repeatable)");
}

std::string text_report(const ReportRow& row) {
  const auto& r = row.report;
  std::ostringstream s;
  s << format_config(row.config);
  s << "total_cycles = " << r.total_cycles << '\n'
    << "latency_ms = " << r.latency_ms << '\n'
    << "vector_cycles = " << r.counters.vector << '\n'
    << "memory_cycles = " << r.counters.memory << '\n'
    << "scalar_cycles = " << r.counters.scalar << '\n'
    << "other_cycles = " << r.counters.other << '\n'
    << "instructions = " << r.instructions << '\n'
    << "hbm_bytes_moved = " << r.hbm_bytes_moved << '\n'
    << "hbm_bw_gbps = " << r.hbm_achieved_bandwidth / 1e9 << '\n'
    << "int_sram_bytes = " << row.footprint.int_bytes() << '\n'
    << "fp_sram_bytes = " << row.footprint.fp_bytes() << '\n'
    << "vector_sram_bytes = " << row.footprint.vector_bytes() << '\n'
    << "equivalence_pass = " << (row.equivalence_pass ? "true" : "false") << '\n';
  return s.str();
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> items;
  std::stringstream ss(text);
  for (std::string item; std::getline(ss, item, ',');) {
    if (!item.empty()) items.push_back(item);
  }
  return items;
}

std::uint64_t parse_u64(const std::string& text) {
  std::size_t used = 0;
  unsigned long long v = 0;
  try {
    v = std::stoull(text, &used, 0);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != text.size() || text.empty() || text[0] == '-') throw ConfigError("not a non-negative integer: '" + text + "'");
  return v;
}

}  // namespace

std::string program_to_json(const Program& program) {
  ordered_json j;
  j["schema_version"] = kProgramSchemaVersion;
  auto labels = ordered_json::object();
  for (const auto& [name, index] : program.labels) labels[name] = index;
  j["labels"] = labels;
  auto list = ordered_json::array();
  for (const auto& in : program.instructions) {
    list.push_back(ordered_json{{"op", opcode_info(in.opcode).mnemonic},
                                {"rd", in.rd},
                                {"rs1", in.rs1},
                                {"rs2", in.rs2},
                                {"rs3", in.rs3},
                                {"imm", in.imm}});
  }
  j["instructions"] = list;
  return j.dump(1) + "\n";
}

Program program_from_json(const std::string& text) {
  ordered_json j;
  try {
    j = ordered_json::parse(text);
    if (j.at("schema_version").get<int>() != kProgramSchemaVersion) {
      throw ConfigError("unsupported program schema_version " + j.at("schema_version").dump());
    }
    Program program;
    for (const auto& [name, index] : j.at("labels").items()) program.labels[name] = index.get<std::size_t>();
    for (const auto& e : j.at("instructions")) {
      const auto mnemonic = e.at("op").get<std::string>();
      const auto op = opcode_from_mnemonic(mnemonic);
      if (!op) throw ConfigError("unknown opcode '" + mnemonic + "'");
      auto reg = [&](const char* key) { return e.at(key).get<std::uint8_t>(); };
      program.instructions.push_back(
          Instruction{*op, reg("rd"), reg("rs1"), reg("rs2"), reg("rs3"), e.at("imm").get<std::int32_t>()});
    }
    validate(program);
    return program;
  } catch (const ordered_json::exception& e) {
    throw ConfigError(std::string("malformed program JSON: ") + e.what());
  }
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Cycle-level simulator for the diffusion sampling accelerator", "dplena"};
  app.require_subcommand(1);

  Common common;

  auto* run_cmd = app.add_subcommand("run", "Generate, simulate and check one configuration");
  add_common(run_cmd, common);
  std::string format = "text", out_path, trace_path, fifo_path;
  run_cmd->add_option("-f,--format", format, "Report format")->check(CLI::IsMember({"text", "json", "csv"}));
  run_cmd->add_option("-o,--out", out_path, "Write the report here instead of stdout");
  run_cmd->add_option("--trace", trace_path, "Per-instruction trace file");
  run_cmd->add_option("--fifo", fifo_path, "Write FIFO output tokens, one per line");
  std::string program_path;
  run_cmd->add_option("--program", program_path,
                      "Execute this assembly file instead of the generated sampler (no oracle check)");

  auto* sweep_cmd = app.add_subcommand("sweep", "Run one configuration per value of an axis");
  add_common(sweep_cmd, common);
  std::string axis_text, values_text, csv_path, json_path, gnuplot_path;
  sweep_cmd->add_option("--axis", axis_text, "B, T, V, V_chunk or VLEN")->required();
  sweep_cmd->add_option("--values", values_text, "Comma-separated, strictly increasing")->required();
  sweep_cmd->add_option("--csv", csv_path, "CSV output file");
  sweep_cmd->add_option("--json", json_path, "JSON output file");
  sweep_cmd->add_option("--gnuplot", gnuplot_path, "gnuplot script plotting the CSV file (needs --csv)");

  auto* verify_cmd = app.add_subcommand("verify", "Step-by-step diff of simulator and oracle");
  add_common(verify_cmd, common);
  std::string tie_rule = "lower", oracle_trace_path;
  verify_cmd->add_option("--tie-rule", tie_rule, "Oracle Top-k tie order")->check(CLI::IsMember({"lower", "higher"}));
  verify_cmd->add_option("--oracle-trace", oracle_trace_path, "Write the oracle step trace here");

  auto* asm_cmd = app.add_subcommand("asm", "Assemble text into the JSON program format");
  std::string asm_in = "-", asm_out;
  asm_cmd->add_option("input", asm_in, "Assembly file or - for stdin");
  asm_cmd->add_option("-o,--out", asm_out, "Output file");

  auto* disasm_cmd = app.add_subcommand("disasm", "Disassemble a JSON program into text");
  std::string disasm_in = "-", disasm_out;
  disasm_cmd->add_option("input", disasm_in, "JSON program file or - for stdin");
  disasm_cmd->add_option("-o,--out", disasm_out, "Output file");

  auto* gen_cmd = app.add_subcommand("gen", "Emit the sampling program as assembly text");
  add_common(gen_cmd, common);
  std::string gen_out, hbm_out;
  gen_cmd->add_option("-o,--out", gen_out, "Output file");
  gen_cmd->add_option("--hbm", hbm_out, "Also write the MX-encoded logits image");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kConfigError;
  }

  try {
    if (*run_cmd) {
      const auto config = common.resolve();
      SimulateOptions options;
      std::ofstream trace;
      if (!trace_path.empty()) {
        trace.open(trace_path);
        if (!trace) throw ConfigError("cannot write '" + trace_path + "'");
        options.trace = &trace;
      }
      if (!program_path.empty()) {
        const auto program = assemble(read_input(program_path));
        MachineState state(config.memory, MachineShape{config.sampling.vlen, config.sampling.block_len},
                           build_logits_hbm(config.sampling));
        RunOptions run_options;
        run_options.max_cycles = config.max_cycles;
        run_options.clock_ghz = config.clock_ghz;
        run_options.trace = options.trace;
        const auto report = Executor(config.timings, config.memory).run(state, program, run_options);
        std::ostringstream s;
        s << "total_cycles = " << report.total_cycles << '\n'
          << "vector_cycles = " << report.counters.vector << '\n'
          << "memory_cycles = " << report.counters.memory << '\n'
          << "scalar_cycles = " << report.counters.scalar << '\n'
          << "other_cycles = " << report.counters.other << '\n'
          << "instructions = " << report.instructions << '\n'
          << "fifo =";
        for (auto v : state.fifo_out) s << ' ' << v;
        s << '\n';
        write_output(out_path, s.str(), out);
        return kOk;
      }
      const auto row = run_config(config, options);
      std::string text;
      if (format == "json") {
        text = report_json(row) + "\n";
      } else if (format == "csv") {
        text = csv_header() + "\n" + csv_row(row) + "\n";
      } else {
        text = text_report(row);
      }
      write_output(out_path, text, out);
      if (!fifo_path.empty()) {
        std::string tokens;
        for (auto v : row.fifo) tokens += std::to_string(v) + "\n";
        write_output(fifo_path, tokens, out);
      }
      if (!row.equivalence_pass) {
        err << "equivalence failure: " << row.token_mismatches << " tokens differ from the oracle\n";
        return kEquivalenceFailure;
      }
      return kOk;
    }
    if (*sweep_cmd) {
      SweepSpec spec;
      spec.axis = parse_sweep_axis(axis_text);
      for (const auto& v : split_list(values_text)) spec.values.push_back(parse_u64(v));
      spec.fixed = common.resolve();
      if (!gnuplot_path.empty() && csv_path.empty()) throw ConfigError("--gnuplot needs --csv");
      const auto result = run_sweep(spec);
      std::ostringstream csv;
      write_csv(csv, result.rows);
      out << csv.str();
      if (result.r_squared) out << "# r_squared = " << *result.r_squared << '\n';
      if (result.saturation_value) out << "# saturation_value = " << *result.saturation_value << '\n';
      out << "# bandwidth_spread = " << result.bandwidth_spread << '\n';
      if (!csv_path.empty()) write_output(csv_path, csv.str(), out);
      if (!json_path.empty()) write_output(json_path, sweep_json(result) + "\n", out);
      if (!gnuplot_path.empty()) write_output(gnuplot_path, gnuplot_script(result, csv_path), out);
      return kOk;
    }
    if (*verify_cmd) {
      const auto config = common.resolve();
      OracleOptions options;
      options.tie_rule = tie_rule == "higher" ? TieRule::HigherIndex : TieRule::LowerIndex;
      if (!oracle_trace_path.empty()) {
        const auto hbm = build_logits_hbm(config.sampling);
        write_output(oracle_trace_path, format_trace(config.sampling, oracle_sample(config.sampling, hbm, options)),
                     out);
      }
      const auto result = verify(config, options);
      if (result.pass) {
        out << "PASS " << result.steps_compared << " steps match\n";
        return kOk;
      }
      const auto& d = *result.first;
      out << "FAIL first divergence at t=" << d.step << " b=" << d.batch << " l=" << d.position << ": " << d.detail
          << '\n';
      return kEquivalenceFailure;
    }
    if (*asm_cmd) {
      write_output(asm_out, program_to_json(assemble(read_input(asm_in))), out);
      return kOk;
    }
    if (*disasm_cmd) {
      write_output(disasm_out, disassemble(program_from_json(read_input(disasm_in))), out);
      return kOk;
    }
    if (*gen_cmd) {
      const auto config = common.resolve();
      const auto gen = gen_sampling_program(config.sampling, config.memory);
      write_output(gen_out, disassemble(gen.program), out);
      if (!hbm_out.empty()) build_logits_hbm(config.sampling).save_file(hbm_out);
      return kOk;
    }
  } catch (const EquivalenceFailure& e) {
    err << e.what() << '\n';
    return kEquivalenceFailure;
  } catch (const SimTimeout& e) {
    err << "timeout: " << e.what() << '\n';
    return kTimeout;
  } catch (const SimFault& e) {
    err << "simulation fault: " << e.what() << '\n';
    return kSimulationFault;
  } catch (const AsmError& e) {
    err << "assembly error: " << e.what() << '\n';
    return kConfigError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kConfigError;
  }
  return kOk;
}

}  // namespace dplena::cli
