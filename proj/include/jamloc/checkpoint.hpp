#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "json.hpp"
#include "jamloc/training.hpp"

namespace jamloc {

inline constexpr int kCheckpointSchemaVersion = 1;

// A checkpoint directory holds checkpoint.json (spec, spec hash, phase,
// epoch, seed, RNG states, history, metrics) and state.bin (parameters,
// optimizer moments, best-epoch snapshot).
template <typename T>
void save_checkpoint(TrainingState<T>& state, const std::filesystem::path& dir,
                     const nlohmann::json& metrics = nlohmann::json::object());

// Throws std::runtime_error on a missing file, a spec-hash mismatch, a
// dtype mismatch or a parameter missing from the blob.
template <typename T>
TrainingState<T> load_checkpoint(const std::filesystem::path& dir);

nlohmann::json read_checkpoint_info(const std::filesystem::path& dir);

nlohmann::json spec_to_json(const AutoencoderSpec& spec);
AutoencoderSpec spec_from_json(const nlohmann::json& j);

nlohmann::json to_json(const EpochRecord& r);
EpochRecord epoch_record_from_json(const nlohmann::json& j);

// One JSON object per line.
void write_history(const std::vector<EpochRecord>& history, const std::filesystem::path& file);
std::vector<EpochRecord> read_history(const std::filesystem::path& file);

}  // namespace jamloc
