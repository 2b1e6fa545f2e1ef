// Copyright 2026 The augdoc Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// The augdoc command-line front end: build-vocab, augment-preview, train,
// embed, eval-classify, eval-cluster.

#ifndef AUGDOC_TOOLS_CLI_H_
#define AUGDOC_TOOLS_CLI_H_

#include <map>
#include <ostream>
#include <string>
#include <vector>

namespace augdoc::cli {

enum ExitCode : int {
  kOk = 0,
  kInternal = 1,
  kUsage = 2,           // unknown flag, missing required flag, bad subcommand
  kMissingFile = 3,     // an input file could not be opened
  kConfigConflict = 4,  // invalid or contradictory configuration
  kDataError = 5,       // malformed input data or checkpoint
  kTrainingFailed = 6,  // non-finite loss
};

// Runs one subcommand. args excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

// Flat `key=value` config file; '#' starts a comment. Keys may use '-' or
// '_'. Throws IoError or ConfigError.
std::map<std::string, std::string> read_config_file(const std::string& path);

}  // namespace augdoc::cli

#endif  // AUGDOC_TOOLS_CLI_H_
