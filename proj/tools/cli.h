// Copyright 2026 The Fairgrade Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef FAIRGRADE_TOOLS_CLI_H_
#define FAIRGRADE_TOOLS_CLI_H_

#include <iosfwd>
#include <string>
#include <vector>

namespace fairgrade::cli {

inline constexpr char kVersion[] = "0.1.0";

// Exit statuses.
inline constexpr int kOk = 0;
inline constexpr int kCheckFailed = 1;
inline constexpr int kConfigError = 2;
inline constexpr int kDataError = 3;
inline constexpr int kNumericError = 4;

// Runs one command line (without the program name). Diagnostics go to `err`,
// a one-line summary of the written reports to `out`.
int Run(const std::vector<std::string>& args, std::ostream& out,
        std::ostream& err);

// Parses "5", "1,3,7", "1..22" or "2..20:2" (and comma-joined mixtures) into
// a list of integers. Throws fairgrade::ParameterError on bad syntax.
std::vector<int> ParseIntList(const std::string& text);

}  // namespace fairgrade::cli

#endif  // FAIRGRADE_TOOLS_CLI_H_
