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

#include <filesystem>
#include <span>
#include <string>
#include <string_view>

#include "collapse_lab/wavefield.hpp"

namespace collapse_lab {

/// Shortest round-trip decimal form with '.' separator.
std::string format_double(double value);

/// Writes to a sibling temp file, then renames over the target.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

/// Columns x,re,im,density; header row; '\n' line endings.
std::string field_csv(const WaveField<double>& wf);

std::string sha256_hex(std::string_view data);
std::string sha256_file(const std::filesystem::path& path);

/// Grouped bar chart of observed frequency vs Born weight per grain.
std::string frequency_chart_svg(std::span<const double> frequencies, std::span<const double> born_weights);

}  // namespace collapse_lab
