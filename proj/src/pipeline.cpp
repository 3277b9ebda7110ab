#include "tdmix/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <iostream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "tdmix/error.hpp"
#include "tdmix/math.hpp"
#include "tdmix/serialize.hpp"
#include "tdmix/svg.hpp"
#include "tdmix/trainer.hpp"

namespace tdmix {

namespace artifacts {

std::string aum_report_name(std::string_view target) {
  return "aum_" + std::string(target) + ".jsonl";
}

}  // namespace artifacts

namespace {

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

Dataset load_train_set(const PipelineConfig& config) {
  if (config.train_path.empty()) {
    throw ConfigError("no training set configured (key: train)");
  }
  return ingest_dataset(config.train_path, config.data_format);
}

std::vector<SampleTrace> load_traces(const PipelineConfig& config) {
  const fs::path log_path = config.workdir / artifacts::kDynamicsLog;
  if (!fs::exists(log_path)) {
    throw DataError("missing dynamics log " + log_path.string() +
                    " (run train-dynamics first)");
  }
  return load_dynamics_log(log_path);
}

std::vector<CategoryAssignment> load_category_file(const PipelineConfig& config) {
  const fs::path path = config.workdir / artifacts::kCategories;
  if (!fs::exists(path)) {
    throw DataError("missing categories file " + path.string() +
                    " (run datamap first)");
  }
  return load_categories(path);
}

IdSet region_ids(const std::vector<CategoryAssignment>& assignments, Region region) {
  IdSet ids;
  for (const CategoryAssignment& assignment : assignments) {
    if (assignment.region == region) ids.insert(assignment.id);
  }
  return ids;
}

// AUM of every sample of a finished training run, keyed by id.
IdMap<double> aums_from_dynamics(const std::vector<DynamicsRecord>& records) {
  IdMap<double> sums;
  IdMap<int> counts;
  for (const DynamicsRecord& record : records) {
    sums[record.id] += margin(record.logits, record.gold_label);
    counts[record.id] += 1;
  }
  IdMap<double> aums;
  for (const auto& [id, sum] : sums) {
    aums.emplace(id, sum / counts.at(id));
  }
  return aums;
}

void write_evaluation_artifact(const PipelineConfig& config,
                               const EvaluationResult& result) {
  ordered_json out;
  out["in_domain"] =
      ordered_json::parse(calibration_report_to_json(result.in_domain));
  if (result.out_of_domain.has_value()) {
    out["out_of_domain"] =
        ordered_json::parse(calibration_report_to_json(*result.out_of_domain));
  }
  atomic_write(config.workdir / artifacts::kEvaluation, out.dump(2) + "\n");
}

double mean_of(const std::vector<double>& values) {
  double sum = 0.0;
  for (const double v : values) sum += v;
  return sum / static_cast<double>(values.size());
}

double std_of(const std::vector<double>& values) {
  const double mu = mean_of(values);
  double sq = 0.0;
  for (const double v : values) sq += (v - mu) * (v - mu);
  return std::sqrt(sq / static_cast<double>(values.size()));
}

void finalize_arm(AblationArmResult& arm) {
  arm.mean_accuracy = mean_of(arm.accuracies);
  arm.std_accuracy = std_of(arm.accuracies);
  arm.mean_ece = mean_of(arm.eces);
  arm.std_ece = std_of(arm.eces);
}

std::string render_ablation_table(const AblationResult& result) {
  std::ostringstream out;
  char line[256];
  out << "ablation: random-pair mixup vs tdmixup (" << result.seeds.size()
      << " seeds)\n";
  out << "  metric    method    ";
  for (const std::uint64_t seed : result.seeds) {
    std::snprintf(line, sizeof(line), "seed %-6llu",
                  static_cast<unsigned long long>(seed));
    out << line;
  }
  out << "mean +/- std\n";

  auto print_row = [&](const char* metric, const AblationArmResult& arm,
                       const std::vector<double>& values, double mean,
                       double std_dev) {
    std::snprintf(line, sizeof(line), "  %-9s %-9s ", metric, arm.name.c_str());
    out << line;
    for (const double v : values) {
      std::snprintf(line, sizeof(line), "%-11.4f", v);
      out << line;
    }
    std::snprintf(line, sizeof(line), "%.4f +/- %.4f\n", mean, std_dev);
    out << line;
  };
  print_row("accuracy", result.random_arm, result.random_arm.accuracies,
            result.random_arm.mean_accuracy, result.random_arm.std_accuracy);
  print_row("accuracy", result.tdmixup_arm, result.tdmixup_arm.accuracies,
            result.tdmixup_arm.mean_accuracy, result.tdmixup_arm.std_accuracy);
  print_row("ece", result.random_arm, result.random_arm.eces,
            result.random_arm.mean_ece, result.random_arm.std_ece);
  print_row("ece", result.tdmixup_arm, result.tdmixup_arm.eces,
            result.tdmixup_arm.mean_ece, result.tdmixup_arm.std_ece);

  std::snprintf(line, sizeof(line),
                "  ece delta (random - tdmixup): %+.4f (%s)\n",
                result.random_arm.mean_ece - result.tdmixup_arm.mean_ece,
                result.random_arm.mean_ece >= result.tdmixup_arm.mean_ece
                    ? "tdmixup <= random, as expected"
                    : "tdmixup > random on this run");
  out << line;
  return out.str();
}

ordered_json arm_to_json(const AblationArmResult& arm) {
  ordered_json out;
  out["name"] = arm.name;
  out["accuracy"] = arm.accuracies;
  out["ece"] = arm.eces;
  out["mean_accuracy"] = arm.mean_accuracy;
  out["std_accuracy"] = arm.std_accuracy;
  out["mean_ece"] = arm.mean_ece;
  out["std_ece"] = arm.std_ece;
  return out;
}

// The sample pools the mixup arms train on: AUM-filtered easy + ambiguous.
// Creates any missing upstream artifact, then loads from the artifacts so
// reruns agree with a stage-by-stage invocation byte for byte.
struct MixupPools {
  Dataset easy_set;
  Dataset ambiguous_set;
};

MixupPools prepare_mixup_pools(const PipelineConfig& config) {
  if (!fs::exists(config.workdir / artifacts::kDynamicsLog)) {
    run_train_dynamics(config);
  }
  if (!fs::exists(config.workdir / artifacts::kCategories)) {
    run_datamap(config);
  }
  const fs::path aum_path =
      config.workdir / artifacts::aum_report_name(aum_target_name(AumTarget::Easy));
  if (!fs::exists(aum_path)) {
    run_aum_filter(config, AumTarget::Easy);
  }

  const std::vector<CategoryAssignment> assignments = load_category_file(config);
  const AumReport report = load_aum_report(aum_path);

  IdSet easy_ids = region_ids(assignments, Region::EasyToLearn);
  for (const SampleId& id : report.threshold_ids) easy_ids.erase(id);
  for (const SampleId& id : report.filtered_ids) easy_ids.erase(id);
  if (easy_ids.empty()) {
    throw DataError("AUM filtering emptied the easy set; nothing to mix");
  }
  const IdSet ambiguous_ids = region_ids(assignments, Region::Ambiguous);
  if (ambiguous_ids.empty()) {
    throw DataError("empty ambiguous set; nothing to mix");
  }

  const Dataset train_set = load_train_set(config);
  MixupPools pools;
  pools.easy_set = train_set.subset(easy_ids);
  pools.ambiguous_set = train_set.subset(ambiguous_ids);
  return pools;
}

}  // namespace

AumTarget aum_target_from_name(std::string_view name) {
  if (name == "easy") return AumTarget::Easy;
  if (name == "ambiguous") return AumTarget::Ambiguous;
  if (name == "all") return AumTarget::All;
  throw ConfigError("unknown aum-filter target: " + std::string(name));
}

std::string_view aum_target_name(AumTarget target) {
  switch (target) {
    case AumTarget::Easy:
      return "easy";
    case AumTarget::Ambiguous:
      return "ambiguous";
    case AumTarget::All:
      return "all";
  }
  throw ConfigError("unknown aum-filter target");
}

void run_train_dynamics(const PipelineConfig& config) {
  const Dataset train_set = load_train_set(config);
  const TrainerConfig trainer =
      config.trainer_config(config.effective_train_seed());
  TrainResult result = train(train_set, trainer);
  atomic_write(config.workdir / artifacts::kDynamicsLog,
               dynamics_log_to_jsonl(result.dynamics));
  save_checkpoint(config.workdir / artifacts::kBaseCheckpoint, result.params,
                  trainer.rng_seed);
}

void run_datamap(const PipelineConfig& config) {
  const std::vector<SampleTrace> traces = load_traces(config);
  const std::vector<SampleStats> stats = aggregate_stats(traces);
  const std::vector<CategoryAssignment> assignments =
      categorize(stats, config.fraction);
  atomic_write(config.workdir / artifacts::kCategories,
               categories_to_jsonl(assignments));
  atomic_write(config.workdir / artifacts::kDatamapSvg,
               render_datamap_svg(datamap_points(stats, assignments)));
}

AumStageResult run_aum_filter(const PipelineConfig& config, AumTarget target,
                              std::optional<double> k_override,
                              const std::vector<double>& sweep_ks) {
  const Dataset train_set = load_train_set(config);

  Dataset target_set;
  if (target == AumTarget::All) {
    target_set = train_set;
  } else {
    const std::vector<CategoryAssignment> assignments = load_category_file(config);
    const Region region =
        target == AumTarget::Easy ? Region::EasyToLearn : Region::Ambiguous;
    const IdSet ids = region_ids(assignments, region);
    if (ids.empty()) {
      throw DataError(std::string("empty ") + std::string(aum_target_name(target)) +
                      " set; nothing to filter");
    }
    target_set = train_set.subset(ids);
  }

  // Threshold run: same samples, plan labels applied, one extra (fake) class.
  const ThresholdPlan plan =
      make_threshold_plan(target_set.labels(), train_set.num_classes,
                          config.threshold_mode, config.effective_plan_seed());
  Dataset threshold_set = target_set;
  threshold_set.num_classes = train_set.num_classes + 1;
  for (Sample& sample : threshold_set.samples) {
    const auto it = plan.flipped.find(sample.id);
    if (it != plan.flipped.end()) sample.label = it->second;
  }

  const TrainerConfig trainer =
      config.trainer_config(config.effective_threshold_train_seed());
  const TrainResult run = train(threshold_set, trainer);
  const IdMap<double> aums = aums_from_dynamics(run.dynamics);

  double k = config.aum_k_all;
  if (target == AumTarget::Easy) k = config.aum_k_easy;
  if (target == AumTarget::Ambiguous) k = config.aum_k_ambiguous;
  if (k_override.has_value()) k = *k_override;
  if (!(k > 0.0 && k <= 100.0)) throw ConfigError("percentile k must be in (0, 100]");

  AumStageResult result;
  result.report = build_aum_report(aums, plan, k);
  result.target_size = target_set.size();
  result.report_path =
      config.workdir / artifacts::aum_report_name(aum_target_name(target));

  for (const double sweep_k : sweep_ks) {
    std::vector<double> threshold_aums;
    threshold_aums.reserve(plan.flipped.size());
    for (const auto& [id, label] : plan.flipped) {
      threshold_aums.push_back(aums.at(id));
    }
    const double threshold_value = compute_threshold(threshold_aums, sweep_k);
    int removed = 0;
    for (const auto& [id, aum] : aums) {
      if (plan.flipped.count(id) == 0 && aum < threshold_value) ++removed;
    }
    std::printf("sweep k=%g: threshold %.6f, filters %d of %d samples\n", sweep_k,
                threshold_value, removed,
                result.target_size - plan.total_flipped);
  }

  atomic_write(result.report_path, aum_report_to_jsonl(result.report));

  // Reflect filtering in the categories artifact when one exists.
  const fs::path categories_path = config.workdir / artifacts::kCategories;
  if (fs::exists(categories_path)) {
    std::vector<CategoryAssignment> assignments = load_categories(categories_path);
    for (CategoryAssignment& assignment : assignments) {
      if (result.report.filtered_ids.count(assignment.id) != 0) {
        assignment.aum_filtered = true;
      }
    }
    atomic_write(categories_path, categories_to_jsonl(assignments));
  }
  return result;
}

void run_tdmixup_train(const PipelineConfig& config,
                       const std::optional<std::filesystem::path>& schedule_dump) {
  const MixupPools pools = prepare_mixup_pools(config);

  TrainerConfig trainer = config.trainer_config(config.effective_train_seed());
  trainer.mixup = config.mixup_config(config.effective_mixup_seed());

  if (schedule_dump.has_value()) {
    // The first epoch's schedule, regenerated from the same seed the trainer
    // will use, so the dump matches what training consumes.
    Rng rng(trainer.mixup->rng_seed);
    const std::vector<MixPair> schedule = build_td_schedule(
        pools.easy_set.ids(), pools.ambiguous_set.ids(), *trainer.mixup, rng);
    atomic_write(*schedule_dump, schedule_to_jsonl(schedule));
  }

  const ModelParams params =
      train_tdmixup(pools.easy_set, pools.ambiguous_set, trainer);
  save_checkpoint(config.workdir / artifacts::kTdmixupCheckpoint, params,
                  trainer.rng_seed);
}

EvaluationResult run_evaluate(const PipelineConfig& config,
                              const std::filesystem::path& checkpoint_path,
                              const std::filesystem::path& test_path,
                              const std::optional<std::filesystem::path>& ood_path) {
  const Checkpoint checkpoint = load_checkpoint(checkpoint_path);
  const Dataset test_set = ingest_dataset(test_path, config.data_format);

  EvaluationResult result;
  result.in_domain = calibration_report(evaluate(checkpoint.params, test_set));
  result.rendered = render_report_table(result.in_domain, "in-domain test");
  if (ood_path.has_value()) {
    const Dataset ood_set = ingest_dataset(*ood_path, config.data_format);
    result.out_of_domain =
        calibration_report(evaluate(checkpoint.params, ood_set));
    result.rendered +=
        "\n" + render_report_table(*result.out_of_domain, "out-of-domain test");
  }
  write_evaluation_artifact(config, result);
  return result;
}

AblationResult run_ablation(const PipelineConfig& config) {
  if (config.test_path.empty()) {
    throw ConfigError("ablation needs a test set (key: test)");
  }
  if (config.ablation_seeds.empty()) {
    throw ConfigError("ablation needs at least one seed");
  }
  const MixupPools pools = prepare_mixup_pools(config);
  const Dataset test_set = ingest_dataset(config.test_path, config.data_format);

  // Both arms train on the same raw samples (AUM-filtered easy + ambiguous)
  // with matched seeds; only the pairing strategy differs.
  Dataset union_pool = pools.easy_set;
  union_pool.samples.insert(union_pool.samples.end(),
                            pools.ambiguous_set.samples.begin(),
                            pools.ambiguous_set.samples.end());
  std::sort(union_pool.samples.begin(), union_pool.samples.end(),
            [](const Sample& a, const Sample& b) { return id_less(a.id, b.id); });

  AblationResult result;
  result.seeds = config.ablation_seeds;
  result.random_arm.name = "random";
  result.tdmixup_arm.name = "tdmixup";

  for (const std::uint64_t seed : config.ablation_seeds) {
    TrainerConfig trainer = config.trainer_config(seed);
    trainer.mixup = config.mixup_config(seed + 3000);

    const ModelParams random_params = train_random_mixup(union_pool, trainer);
    const CalibrationReport random_report =
        calibration_report(evaluate(random_params, test_set));
    result.random_arm.accuracies.push_back(random_report.accuracy);
    result.random_arm.eces.push_back(random_report.ece);

    const ModelParams td_params =
        train_tdmixup(pools.easy_set, pools.ambiguous_set, trainer);
    const CalibrationReport td_report =
        calibration_report(evaluate(td_params, test_set));
    result.tdmixup_arm.accuracies.push_back(td_report.accuracy);
    result.tdmixup_arm.eces.push_back(td_report.ece);
  }
  finalize_arm(result.random_arm);
  finalize_arm(result.tdmixup_arm);
  result.rendered = render_ablation_table(result);

  ordered_json out;
  out["seeds"] = result.seeds;
  out["random"] = arm_to_json(result.random_arm);
  out["tdmixup"] = arm_to_json(result.tdmixup_arm);
  atomic_write(config.workdir / artifacts::kAblation, out.dump(2) + "\n");
  return result;
}

}  // namespace tdmix
