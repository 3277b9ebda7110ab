#pragma once

#include <filesystem>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "tdmix/aum.hpp"
#include "tdmix/dataset.hpp"
#include "tdmix/mixup.hpp"
#include "tdmix/trainer.hpp"

namespace tdmix {

// Flat pipeline configuration. Every stage seed is explicit: unset stage
// seeds resolve to fixed offsets from the base seed.
struct PipelineConfig {
  std::filesystem::path train_path;
  std::filesystem::path dev_path;
  std::filesystem::path test_path;
  std::filesystem::path ood_test_path;
  std::filesystem::path workdir = "tdmix_out";
  DatasetFormat data_format = DatasetFormat::Vectors;

  int epochs = 6;
  double learning_rate = 0.1;
  int batch_size = 32;
  int hidden_width = 32;
  Optimizer optimizer = Optimizer::Sgd;
  double l2 = 0.0;

  double fraction = 0.33;

  double aum_k_easy = 80.0;
  double aum_k_ambiguous = 80.0;
  double aum_k_all = 80.0;
  ThresholdMode threshold_mode = ThresholdMode::Total;

  double mixup_alpha = 0.4;
  MixSpace mix_space = MixSpace::Hidden;

  std::uint64_t seed = 1;
  std::optional<std::uint64_t> train_seed;
  std::optional<std::uint64_t> plan_seed;
  std::optional<std::uint64_t> threshold_train_seed;
  std::optional<std::uint64_t> mixup_seed;
  std::vector<std::uint64_t> ablation_seeds = {101, 102, 103, 104, 105};

  std::uint64_t effective_train_seed() const { return train_seed.value_or(seed); }
  std::uint64_t effective_plan_seed() const { return plan_seed.value_or(seed + 1000); }
  std::uint64_t effective_threshold_train_seed() const {
    return threshold_train_seed.value_or(seed + 2000);
  }
  std::uint64_t effective_mixup_seed() const { return mixup_seed.value_or(seed + 3000); }

  TrainerConfig trainer_config(std::uint64_t run_seed) const;
  MixupConfig mixup_config(std::uint64_t run_seed) const;
};

// Parses a flat `key = value` document (# comments, blank lines allowed).
// Unknown keys or malformed values throw ConfigError.
PipelineConfig load_config_file(const std::filesystem::path& path);

// Applies one key=value override (the CLI flag path shares the file parser's
// key table).
void apply_config_entry(PipelineConfig& config, const std::string& key,
                        const std::string& value);

}  // namespace tdmix
