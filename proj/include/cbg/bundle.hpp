#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>

#include "cbg/experiment.hpp"

namespace cbg {

inline constexpr const char* kBundleFormatVersion = "1";

struct BundleMeta {
  std::string format_version = kBundleFormatVersion;
  std::uint64_t seed = 0;
  std::map<std::string, std::string> params;
};

// Self-describing container for one trial: the game spec plus whatever stages
// have been run. Serialized as a directory holding manifest.json and
// line-delimited observation records.
struct ArtifactBundle {
  Game game;
  std::optional<ObservationSet> observations;
  std::optional<ClusterModel> model;
  std::optional<ResultTable> results;
  BundleMeta meta;
};

void save_bundle(const ArtifactBundle& bundle, const std::filesystem::path& dir);
ArtifactBundle load_bundle(const std::filesystem::path& dir);

// Line-delimited record files, one "profile | payoffs" line per iteration.
void save_play_record(const PlayRecord& record, const std::filesystem::path& file);
PlayRecord load_play_record(const std::filesystem::path& file);

// JSON experiment configuration; unknown fields are rejected.
ExperimentConfig parse_experiment_config(const std::string& json_text);
ExperimentConfig load_experiment_config(const std::filesystem::path& file);

}  // namespace cbg
