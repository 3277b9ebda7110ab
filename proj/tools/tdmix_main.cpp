#include <cstdio>
#include <exception>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "tdmix/error.hpp"
#include "tdmix/pipeline.hpp"
#include "tdmix/serialize.hpp"

namespace {

using tdmix::PipelineConfig;

// Applies the layered configuration: file, then --set overrides, then the
// dedicated global flags.
PipelineConfig resolve_config(const std::optional<std::string>& config_path,
                              const std::vector<std::string>& overrides,
                              const std::optional<std::uint64_t>& seed,
                              const std::optional<std::string>& workdir) {
  PipelineConfig config;
  if (config_path.has_value()) config = tdmix::load_config_file(*config_path);
  for (const std::string& entry : overrides) {
    const std::size_t eq = entry.find('=');
    if (eq == std::string::npos || eq == 0 || eq + 1 == entry.size()) {
      throw tdmix::ConfigError("--set expects key=value, got: " + entry);
    }
    tdmix::apply_config_entry(config, entry.substr(0, eq), entry.substr(eq + 1));
  }
  if (seed.has_value()) config.seed = *seed;
  if (workdir.has_value()) config.workdir = *workdir;
  return config;
}

std::vector<double> parse_k_grid(const std::string& grid) {
  std::vector<double> ks;
  std::size_t begin = 0;
  while (begin <= grid.size()) {
    const std::size_t comma = grid.find(',', begin);
    const std::string item =
        grid.substr(begin, comma == std::string::npos ? comma : comma - begin);
    if (!item.empty()) {
      try {
        std::size_t used = 0;
        const double k = std::stod(item, &used);
        if (used != item.size() || !(k > 0.0 && k <= 100.0)) {
          throw std::invalid_argument(item);
        }
        ks.push_back(k);
      } catch (const std::exception&) {
        throw tdmix::ConfigError("--sweep-k expects percentiles in (0,100]: " + item);
      }
    }
    if (comma == std::string::npos) break;
    begin = comma + 1;
  }
  if (ks.empty()) throw tdmix::ConfigError("--sweep-k got an empty grid");
  return ks;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"tdmix: training-dynamics data curation and mixup training"};
  app.require_subcommand(1);
  app.fallthrough();

  std::optional<std::string> config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> workdir;
  std::vector<std::string> overrides;
  app.add_option("--config", config_path, "flat key = value configuration file");
  app.add_option("--seed", seed, "base seed (overrides the config file)");
  app.add_option("--workdir", workdir, "artifact directory (default tdmix_out)");
  app.add_option("--set", overrides, "override one config key, as key=value")
      ->take_all();

  CLI::App* cmd_train = app.add_subcommand(
      "train-dynamics", "train the base model, write dynamics log + checkpoint");
  CLI::App* cmd_datamap = app.add_subcommand(
      "datamap", "categorize samples from the dynamics log, write SVG map");

  CLI::App* cmd_aum = app.add_subcommand(
      "aum-filter", "threshold-sample run over a target set, write AUM report");
  std::string aum_target = "easy";
  std::optional<double> aum_k;
  std::string sweep_grid;
  cmd_aum->add_option("--target", aum_target, "easy | ambiguous | all")
      ->check(CLI::IsMember({"easy", "ambiguous", "all"}));
  cmd_aum->add_option("--k", aum_k, "percentile threshold in (0,100]");
  cmd_aum->add_option("--sweep-k", sweep_grid,
                      "comma-separated percentile grid to report (no files)");

  CLI::App* cmd_tdmixup = app.add_subcommand(
      "tdmixup-train", "compose the full pipeline and train with easy x "
                       "ambiguous mixup");
  std::optional<std::string> schedule_dump;
  cmd_tdmixup->add_option("--dump-schedule", schedule_dump,
                          "also write the first epoch's pair schedule here");

  CLI::App* cmd_evaluate = app.add_subcommand(
      "evaluate", "score a checkpoint: accuracy and calibration report");
  std::string checkpoint_path;
  std::string test_path;
  std::optional<std::string> ood_path;
  cmd_evaluate->add_option("--checkpoint", checkpoint_path, "model checkpoint")
      ->required();
  cmd_evaluate->add_option("--test", test_path, "test set path")->required();
  cmd_evaluate->add_option("--ood-test", ood_path, "out-of-domain test set path");

  CLI::App* cmd_ablation = app.add_subcommand(
      "ablation", "random-pair mixup vs tdmixup over matched seeds");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& error) {
    const int code = app.exit(error);
    return code == 0 ? 0 : 1;
  }

  try {
    const PipelineConfig config =
        resolve_config(config_path, overrides, seed, workdir);

    if (cmd_train->parsed()) {
      tdmix::run_train_dynamics(config);
      std::cout << "wrote " << (config.workdir / tdmix::artifacts::kDynamicsLog).string()
                << "\nwrote "
                << (config.workdir / tdmix::artifacts::kBaseCheckpoint).string()
                << "\n";
    } else if (cmd_datamap->parsed()) {
      tdmix::run_datamap(config);
      std::cout << "wrote " << (config.workdir / tdmix::artifacts::kCategories).string()
                << "\nwrote "
                << (config.workdir / tdmix::artifacts::kDatamapSvg).string() << "\n";
    } else if (cmd_aum->parsed()) {
      std::vector<double> sweep_ks;
      if (!sweep_grid.empty()) sweep_ks = parse_k_grid(sweep_grid);
      const tdmix::AumStageResult result = tdmix::run_aum_filter(
          config, tdmix::aum_target_from_name(aum_target), aum_k, sweep_ks);
      std::printf("target %s: %d samples, threshold %.6f (k=%g), "
                  "%zu threshold samples, %zu filtered\n",
                  aum_target.c_str(), result.target_size,
                  result.report.threshold_value, result.report.percentile_k,
                  result.report.threshold_ids.size(),
                  result.report.filtered_ids.size());
      std::cout << "wrote " << result.report_path.string() << "\n";
    } else if (cmd_tdmixup->parsed()) {
      std::optional<std::filesystem::path> dump;
      if (schedule_dump.has_value()) dump = *schedule_dump;
      tdmix::run_tdmixup_train(config, dump);
      std::cout << "wrote "
                << (config.workdir / tdmix::artifacts::kTdmixupCheckpoint).string()
                << "\n";
    } else if (cmd_evaluate->parsed()) {
      std::optional<std::filesystem::path> ood;
      if (ood_path.has_value()) ood = *ood_path;
      const tdmix::EvaluationResult result =
          tdmix::run_evaluate(config, checkpoint_path, test_path, ood);
      std::cout << result.rendered;
      std::cout << "wrote " << (config.workdir / tdmix::artifacts::kEvaluation).string()
                << "\n";
    } else if (cmd_ablation->parsed()) {
      const tdmix::AblationResult result = tdmix::run_ablation(config);
      std::cout << result.rendered;
      std::cout << "wrote " << (config.workdir / tdmix::artifacts::kAblation).string()
                << "\n";
    }
  } catch (const tdmix::ConfigError& error) {
    std::cerr << "config error: " << error.what() << "\n";
    return tdmix::ConfigError::exit_code;
  } catch (const tdmix::DataError& error) {
    std::cerr << "data error: " << error.what() << "\n";
    return tdmix::DataError::exit_code;
  } catch (const tdmix::NumericError& error) {
    std::cerr << "numerical error: " << error.what() << "\n";
    return tdmix::NumericError::exit_code;
  } catch (const std::exception& error) {
    std::cerr << "error: " << error.what() << "\n";
    return 2;
  }
  return 0;
}
