#include "tdmix/config.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>
#include <string>

#include "tdmix/error.hpp"

namespace tdmix {

TrainerConfig PipelineConfig::trainer_config(std::uint64_t run_seed) const {
  TrainerConfig trainer;
  trainer.epochs = epochs;
  trainer.learning_rate = learning_rate;
  trainer.batch_size = batch_size;
  trainer.hidden_width = hidden_width;
  trainer.optimizer = optimizer;
  trainer.l2 = l2;
  trainer.rng_seed = run_seed;
  return trainer;
}

MixupConfig PipelineConfig::mixup_config(std::uint64_t run_seed) const {
  MixupConfig mixup;
  mixup.alpha = mixup_alpha;
  mixup.mix_space = mix_space;
  mixup.batch_size = batch_size;
  mixup.rng_seed = run_seed;
  return mixup;
}

namespace {

std::string trim(const std::string& text) {
  std::size_t begin = 0;
  std::size_t end = text.size();
  while (begin < end && std::isspace(static_cast<unsigned char>(text[begin]))) {
    ++begin;
  }
  while (end > begin && std::isspace(static_cast<unsigned char>(text[end - 1]))) {
    --end;
  }
  return text.substr(begin, end - begin);
}

double parse_double(const std::string& key, const std::string& value) {
  try {
    std::size_t used = 0;
    const double parsed = std::stod(value, &used);
    if (used != value.size()) throw std::invalid_argument(value);
    return parsed;
  } catch (const std::exception&) {
    throw ConfigError("config key " + key + ": not a number: " + value);
  }
}

int parse_int(const std::string& key, const std::string& value) {
  try {
    std::size_t used = 0;
    const long parsed = std::stol(value, &used);
    if (used != value.size()) throw std::invalid_argument(value);
    return static_cast<int>(parsed);
  } catch (const std::exception&) {
    throw ConfigError("config key " + key + ": not an integer: " + value);
  }
}

std::uint64_t parse_seed(const std::string& key, const std::string& value) {
  try {
    std::size_t used = 0;
    const unsigned long long parsed = std::stoull(value, &used);
    if (used != value.size()) throw std::invalid_argument(value);
    return parsed;
  } catch (const std::exception&) {
    throw ConfigError("config key " + key + ": not a seed: " + value);
  }
}

std::vector<std::uint64_t> parse_seed_list(const std::string& key,
                                           const std::string& value) {
  std::vector<std::uint64_t> seeds;
  std::stringstream stream(value);
  std::string item;
  while (std::getline(stream, item, ',')) {
    item = trim(item);
    if (item.empty()) continue;
    seeds.push_back(parse_seed(key, item));
  }
  if (seeds.empty()) throw ConfigError("config key " + key + ": empty seed list");
  return seeds;
}

}  // namespace

void apply_config_entry(PipelineConfig& config, const std::string& key,
                        const std::string& value) {
  if (key == "train") {
    config.train_path = value;
  } else if (key == "dev") {
    config.dev_path = value;
  } else if (key == "test") {
    config.test_path = value;
  } else if (key == "ood_test") {
    config.ood_test_path = value;
  } else if (key == "workdir") {
    config.workdir = value;
  } else if (key == "format") {
    config.data_format = dataset_format_from_name(value);
  } else if (key == "epochs") {
    config.epochs = parse_int(key, value);
    if (config.epochs < 1) throw ConfigError("epochs must be >= 1");
  } else if (key == "learning_rate") {
    config.learning_rate = parse_double(key, value);
    if (config.learning_rate < 0.0) throw ConfigError("learning_rate must be >= 0");
  } else if (key == "batch_size") {
    config.batch_size = parse_int(key, value);
    if (config.batch_size < 1) throw ConfigError("batch_size must be >= 1");
  } else if (key == "hidden_width") {
    config.hidden_width = parse_int(key, value);
    if (config.hidden_width < 0) throw ConfigError("hidden_width must be >= 0");
  } else if (key == "optimizer") {
    config.optimizer = optimizer_from_name(value);
  } else if (key == "l2") {
    config.l2 = parse_double(key, value);
    if (config.l2 < 0.0) throw ConfigError("l2 must be >= 0");
  } else if (key == "fraction") {
    config.fraction = parse_double(key, value);
    if (!(config.fraction > 0.0 && config.fraction <= 0.5)) {
      throw ConfigError("fraction must be in (0, 0.5]");
    }
  } else if (key == "aum_k_easy" || key == "aum_k_ambiguous" || key == "aum_k_all") {
    const double k = parse_double(key, value);
    if (!(k > 0.0 && k <= 100.0)) throw ConfigError(key + " must be in (0, 100]");
    if (key == "aum_k_easy") {
      config.aum_k_easy = k;
    } else if (key == "aum_k_ambiguous") {
      config.aum_k_ambiguous = k;
    } else {
      config.aum_k_all = k;
    }
  } else if (key == "threshold_mode") {
    if (value == "total") {
      config.threshold_mode = ThresholdMode::Total;
    } else if (value == "per_class") {
      config.threshold_mode = ThresholdMode::PerClass;
    } else {
      throw ConfigError("threshold_mode must be total or per_class: " + value);
    }
  } else if (key == "mixup_alpha") {
    config.mixup_alpha = parse_double(key, value);
    if (!(config.mixup_alpha > 0.0)) throw ConfigError("mixup_alpha must be > 0");
  } else if (key == "mix_space") {
    config.mix_space = mix_space_from_name(value);
  } else if (key == "seed") {
    config.seed = parse_seed(key, value);
  } else if (key == "train_seed") {
    config.train_seed = parse_seed(key, value);
  } else if (key == "plan_seed") {
    config.plan_seed = parse_seed(key, value);
  } else if (key == "threshold_train_seed") {
    config.threshold_train_seed = parse_seed(key, value);
  } else if (key == "mixup_seed") {
    config.mixup_seed = parse_seed(key, value);
  } else if (key == "ablation_seeds") {
    config.ablation_seeds = parse_seed_list(key, value);
  } else {
    throw ConfigError("unknown config key: " + key);
  }
}

PipelineConfig load_config_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path.string());

  PipelineConfig config;
  std::string line;
  long line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    const std::size_t hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;

    const std::size_t eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(path.string() + ":" + std::to_string(line_number) +
                        ": expected key = value");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty() || value.empty()) {
      throw ConfigError(path.string() + ":" + std::to_string(line_number) +
                        ": expected key = value");
    }
    try {
      apply_config_entry(config, key, value);
    } catch (const ConfigError& error) {
      throw ConfigError(path.string() + ":" + std::to_string(line_number) + ": " +
                        error.what());
    }
  }
  return config;
}

}  // namespace tdmix
