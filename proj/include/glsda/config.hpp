#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>

#include "glsda/csi_data.hpp"
#include "glsda/signal.hpp"
#include "glsda/train.hpp"

namespace glsda {

// Everything a run needs: synthesis, preprocessing, training and split
// settings. Populated from flat "key = value" config files.
struct RunConfig {
  SynthParams synth;
  RatioParams ratio;
  DfsParams dfs;
  TrainConfig train;
  double train_fraction{0.8};
  int holdout{0};
  double teacher_max_cos{0.3};
};

// Flat "key = value" pairs; '#' starts a comment; unknown keys rejected.
std::map<std::string, std::string> parse_config_text(const std::string& text);
std::map<std::string, std::string> parse_config_file(const std::filesystem::path& path);

// Applies parsed pairs onto defaults. Throws UsageError on unknown keys or
// malformed values.
void apply_config(const std::map<std::string, std::string>& pairs, RunConfig& config);

// Canonical serialization of the effective configuration (sorted keys, one
// "key = value" per line); its FNV-1a hash identifies a run.
std::string canonical_config(const RunConfig& config);
std::uint64_t fnv1a64(const std::string& text);
std::string config_hash(const RunConfig& config);

}  // namespace glsda
