// Copyright 2026 The cuboidlift Authors
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

#ifndef CUBOIDLIFT__CLI_HPP_
#define CUBOIDLIFT__CLI_HPP_

#include <json.hpp>

#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace cuboidlift::cli
{

inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 1;
inline constexpr int kExitIo = 2;

inline constexpr const char * kEnvPrefix = "CUBOIDLIFT_";

// Effective configuration: file < environment < flags. Environment entries
// look like CUBOIDLIFT_<SECTION>__<KEY>=<value> and flags like
// --set section.key=value; values parse as JSON, else as plain strings.
nlohmann::json layered_config(const std::optional<std::filesystem::path> & file,
                              const std::map<std::string, std::string> & env,
                              const std::vector<std::string> & overrides);

std::map<std::string, std::string> process_environment();

// Entry point shared by the executable and the tests. args[0] is the program name.
int run(const std::vector<std::string> & args, std::ostream & out, std::ostream & err,
        const std::map<std::string, std::string> & env);
int run(const std::vector<std::string> & args, std::ostream & out, std::ostream & err);

}  // namespace cuboidlift::cli

#endif  // CUBOIDLIFT__CLI_HPP_
