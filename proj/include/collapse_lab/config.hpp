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
#include <string>

#include "json.hpp"

#include "collapse_lab/experiment.hpp"

namespace collapse_lab {

/// Parses an experiment config document; errors name the offending field.
ExperimentConfig config_from_json(const nlohmann::json& doc);
ExperimentConfig load_config(const std::filesystem::path& path);

nlohmann::json config_to_json(const ExperimentConfig& cfg);

nlohmann::json grid_to_json(const Grid<double>& grid);
Grid<double> grid_from_json(const nlohmann::json& j);
nlohmann::json potential_to_json(const PotentialSpec<double>& potential);
PotentialSpec<double> potential_from_json(const nlohmann::json& j);

nlohmann::json event_to_json(const CollapseEvent& event);
nlohmann::json trial_to_json(const TrialResult& trial);
nlohmann::json statistics_to_json(const RunStatistics& stats);

}  // namespace collapse_lab
