#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "tdmix/calibration.hpp"
#include "tdmix/config.hpp"

namespace tdmix {

// Workdir artifact names, shared by every stage.
namespace artifacts {
inline constexpr const char* kBaseCheckpoint = "base.ckpt";
inline constexpr const char* kDynamicsLog = "dynamics.jsonl";
inline constexpr const char* kCategories = "categories.jsonl";
inline constexpr const char* kDatamapSvg = "datamap.svg";
inline constexpr const char* kTdmixupCheckpoint = "tdmixup.ckpt";
inline constexpr const char* kEvaluation = "evaluation.json";
inline constexpr const char* kAblation = "ablation.json";
std::string aum_report_name(std::string_view target);  // "aum_<target>.jsonl"
}  // namespace artifacts

// train-dynamics: trains the base model on the train set, writes the
// dynamics log and base checkpoint.
void run_train_dynamics(const PipelineConfig& config);

// datamap: aggregates the dynamics log, categorizes samples, writes the
// category export and the SVG data map.
void run_datamap(const PipelineConfig& config);

enum class AumTarget { Easy, Ambiguous, All };
AumTarget aum_target_from_name(std::string_view name);
std::string_view aum_target_name(AumTarget target);

struct AumStageResult {
  AumReport report;
  int target_size = 0;
  std::filesystem::path report_path;
};

// aum-filter: builds the threshold plan over the target set, trains a fresh
// (c+1)-output model on that set with plan labels applied, computes AUMs
// from the run's dynamics, and writes the report. k_override replaces the
// configured percentile; sweep_ks additionally prints threshold/filter
// counts for each k in the grid (report written only for the primary k).
AumStageResult run_aum_filter(const PipelineConfig& config, AumTarget target,
                              std::optional<double> k_override = std::nullopt,
                              const std::vector<double>& sweep_ks = {});

// tdmixup-train: composes categorize -> aum-filter on the easy set ->
// TDMixUp training on (filtered easy, ambiguous); writes the final
// checkpoint. Reuses existing stage artifacts in the workdir and creates
// missing ones. Optionally dumps the first-epoch pair schedule.
void run_tdmixup_train(const PipelineConfig& config,
                       const std::optional<std::filesystem::path>& schedule_dump =
                           std::nullopt);

struct EvaluationResult {
  CalibrationReport in_domain;
  std::optional<CalibrationReport> out_of_domain;
  std::string rendered;  // aligned text tables
};

// evaluate: loads a checkpoint and scores the test set (and the optional
// second test set); writes evaluation.json and returns the rendered tables.
EvaluationResult run_evaluate(const PipelineConfig& config,
                              const std::filesystem::path& checkpoint_path,
                              const std::filesystem::path& test_path,
                              const std::optional<std::filesystem::path>& ood_path =
                                  std::nullopt);

struct AblationArmResult {
  std::string name;
  std::vector<double> accuracies;  // per seed
  std::vector<double> eces;
  double mean_accuracy = 0.0;
  double std_accuracy = 0.0;
  double mean_ece = 0.0;
  double std_ece = 0.0;
};

struct AblationResult {
  std::vector<std::uint64_t> seeds;
  AblationArmResult random_arm;
  AblationArmResult tdmixup_arm;
  std::string rendered;  // comparison table
};

// ablation: random-pair MixUp on the easy u ambiguous union vs TDMixUp,
// trained under matched seeds and budgets, evaluated on the test set.
// Both arms share one base categorization and AUM stage; the listed seeds
// vary only arm training and mixing. Writes ablation.json.
AblationResult run_ablation(const PipelineConfig& config);

}  // namespace tdmix
