#pragma once

#include <filesystem>

#include "json.hpp"
#include "jamloc/pipeline.hpp"

namespace jamloc {

// JSON form of the full run configuration. Keys absent from a file keep
// their defaults; schedules without "total_epochs" span their phase.
nlohmann::json default_config_json();
PipelineConfig config_from_json(const nlohmann::json& j);
nlohmann::json config_to_json(const PipelineConfig& cfg);

nlohmann::json schedule_to_json(const ScheduleSpec& s);
ScheduleSpec schedule_from_json(const nlohmann::json& j, int default_total);
nlohmann::json phase_to_json(const PhaseConfig& p);
PhaseConfig phase_from_json(const nlohmann::json& j, const PhaseConfig& defaults);

// Reads a config file (empty path: defaults). Throws std::invalid_argument
// on malformed content.
PipelineConfig load_config(const std::filesystem::path& file);

// FNV-1a of the canonical JSON dump.
std::string config_hash(const PipelineConfig& cfg);

}  // namespace jamloc
