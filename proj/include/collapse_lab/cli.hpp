// Copyright 2026 The collapse-lab Authors
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

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace collapse_lab {

enum ExitCode : int {
  kExitOk = 0,
  kExitFailure = 1,
  kExitConfig = 2,
  kExitNumerical = 3,
  kExitTimeout = 4,
  kExitBornRejected = 5,
};

struct CliOptions {
  std::filesystem::path config;
  std::filesystem::path out_dir = "out";
  std::optional<std::uint64_t> seed;
  unsigned threads = 0;  ///< 0 = all cores
  bool enforce_born = false;
  bool verbose = false;
  std::string inject_fault;  ///< hidden; "kernel" corrupts validation kernels
};

struct ManifestEntry {
  std::string path;  ///< relative to the output directory
  std::string sha256;
};

struct RunManifest {
  std::string subcommand;
  std::string config_path;
  std::string out_dir;
  int verbosity = 0;
  std::vector<ManifestEntry> files;
};

/// True when every listed file exists under `out_dir` and matches its checksum.
bool verify_manifest(const std::filesystem::path& out_dir);

/// COLLAPSE_LAB_OUT, when set, wins over --out.
std::filesystem::path resolve_out_dir(const CliOptions& options);

int cmd_evolve(const CliOptions& options);
int cmd_measure(const CliOptions& options);
int cmd_ensemble(const CliOptions& options);
int cmd_validate(const CliOptions& options);

int run_cli(int argc, char** argv);

}  // namespace collapse_lab
