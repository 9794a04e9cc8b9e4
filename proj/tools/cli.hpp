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

#ifndef DPLENA_TOOLS_CLI_HPP_
#define DPLENA_TOOLS_CLI_HPP_

#include <ostream>
#include <string>

#include "dplena/isa.hpp"

namespace dplena::cli {

enum ExitCode : int {
  kOk = 0,
  kConfigError = 1,
  kEquivalenceFailure = 2,
  kSimulationFault = 3,
  kTimeout = 4,
};

// Entry point of the `dplena` tool; returns the process exit code.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

// Program interchange format used by `asm` and `disasm`.
std::string program_to_json(const Program& program);
Program program_from_json(const std::string& text);

}  // namespace dplena::cli

#endif  // DPLENA_TOOLS_CLI_HPP_
