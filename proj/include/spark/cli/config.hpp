#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "spark/continual/continual.hpp"
#include "spark/spectral/config.hpp"

namespace spark::cli {

// Everything a command needs, serializable as flat `key = value` text.
struct RunConfig {
  spectral::ModelConfig model;
  spectral::Ablation ablation;
  continual::ContinualConfig continual;
  continual::TrainConfig train;  // seed unused; see train_config()

  // Optional SPKE file replacing the frozen random semantic trunk.
  std::string semantic_embeddings;

  std::string train_manifest;
  std::string index_manifest;  // falls back to train_manifest
  std::vector<std::string> eval_manifests;
  std::vector<std::uint32_t> eval_phases;  // empty means all 0
  std::vector<std::string> phase_manifests;

  std::uint64_t seed = 0;
  std::string store_path = "spark.store";
  std::string checkpoint_path = "spark.ckpt";
  std::string out_path;
  std::vector<std::size_t> k_list{1, 3, 5, 10, 15, 20};
  std::uint32_t index_phase = 0;

  // Throws a config error naming the offending key.
  void validate() const;

  // Applies one `key = value` assignment; unknown keys are rejected.
  void set(const std::string& key, const std::string& value);
  std::string get(const std::string& key) const;

  // Every key in a fixed order with its current value. Parsing the
  // result reproduces the config exactly.
  std::string to_text() const;

  continual::TrainConfig train_config() const {
    auto t = train;
    t.seed = seed;
    return t;
  }
  const std::string& index_source() const { return index_manifest.empty() ? train_manifest : index_manifest; }
};

const std::vector<std::string>& config_keys();

// Starts from defaults and applies every assignment in the text.
// Blank lines and lines starting with '#' are ignored.
RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::string& path);

// Splits "key=value" for command-line overrides.
void apply_override(RunConfig& config, const std::string& assignment);

}  // namespace spark::cli
