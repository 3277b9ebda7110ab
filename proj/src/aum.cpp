#include "tdmix/aum.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "tdmix/error.hpp"
#include "tdmix/rng.hpp"

namespace tdmix {

double margin(const Vector& logits, int gold_label) {
  if (logits.size() < 2) {
    throw DataError("margin needs at least 2 logits, got " +
                    std::to_string(logits.size()));
  }
  if (gold_label < 0 || gold_label >= logits.size()) {
    throw DataError("margin: gold label " + std::to_string(gold_label) +
                    " out of range");
  }
  double largest_other = -std::numeric_limits<double>::infinity();
  for (Index k = 0; k < logits.size(); ++k) {
    if (k != gold_label && logits[k] > largest_other) largest_other = logits[k];
  }
  return logits[gold_label] - largest_other;
}

Vector margins(const Matrix& per_epoch_logits, int gold_label) {
  if (per_epoch_logits.rows() == 0) throw DataError("margins of an empty sequence");
  Vector out(per_epoch_logits.rows());
  for (Index e = 0; e < per_epoch_logits.rows(); ++e) {
    out[e] = margin(per_epoch_logits.row(e).transpose(), gold_label);
  }
  return out;
}

double area_under_margin(const Matrix& per_epoch_logits, int gold_label) {
  return margins(per_epoch_logits, gold_label).mean();
}

ThresholdPlan make_threshold_plan(
    const std::vector<std::pair<SampleId, int>>& dataset_labels,
    int num_classes, ThresholdMode mode, std::uint64_t rng_seed) {
  const int n = static_cast<int>(dataset_labels.size());
  if (num_classes < 2) throw ConfigError("threshold plan needs at least 2 classes");
  if (n < num_classes + 1) {
    throw DataError("threshold plan needs at least c+1 samples, got " +
                    std::to_string(n));
  }
  const int quota = static_cast<int>(
      std::llround(static_cast<double>(n) / static_cast<double>(num_classes + 1)));

  // Canonical population order, then seeded selection: deterministic per seed.
  std::vector<std::pair<SampleId, int>> population = dataset_labels;
  std::sort(population.begin(), population.end(),
            [](const auto& a, const auto& b) { return id_less(a.first, b.first); });

  Rng rng(rng_seed);
  ThresholdPlan plan;
  plan.fake_class_index = num_classes;

  auto flip = [&](const SampleId& id, int original) {
    // Uniform over the c+1 labels minus the original.
    int draw = static_cast<int>(rng.next_below(static_cast<std::uint64_t>(num_classes)));
    if (draw >= original) ++draw;
    plan.flipped.emplace(id, draw);
  };

  auto select_from = [&](std::vector<std::pair<SampleId, int>>& pool, int count) {
    if (count > static_cast<int>(pool.size())) {
      throw DataError("threshold plan: requested " + std::to_string(count) +
                      " samples from a pool of " + std::to_string(pool.size()));
    }
    // Partial Fisher-Yates: the first `count` entries are a uniform draw
    // without replacement.
    for (int i = 0; i < count; ++i) {
      const std::size_t j =
          i + static_cast<std::size_t>(rng.next_below(pool.size() - i));
      std::swap(pool[i], pool[j]);
      flip(pool[i].first, pool[i].second);
    }
  };

  if (mode == ThresholdMode::Total) {
    select_from(population, quota);
  } else {
    std::vector<std::vector<std::pair<SampleId, int>>> by_class(num_classes);
    for (const auto& [id, label] : population) {
      if (label < 0 || label >= num_classes) {
        throw DataError("threshold plan: label " + std::to_string(label) +
                        " out of range for sample " + id);
      }
      by_class[label].push_back({id, label});
    }
    for (int c = 0; c < num_classes; ++c) {
      select_from(by_class[c], quota);
    }
  }

  plan.total_flipped = static_cast<int>(plan.flipped.size());
  return plan;
}

double compute_threshold(std::vector<double> threshold_sample_aums, double k) {
  if (threshold_sample_aums.empty()) {
    throw DataError("percentile of an empty sequence");
  }
  if (!(k > 0.0 && k <= 100.0)) {
    throw ConfigError("percentile k must be in (0, 100], got " + std::to_string(k));
  }
  std::sort(threshold_sample_aums.begin(), threshold_sample_aums.end());
  const double n = static_cast<double>(threshold_sample_aums.size());
  std::size_t rank = static_cast<std::size_t>(std::ceil(k * n / 100.0));
  rank = std::clamp<std::size_t>(rank, 1, threshold_sample_aums.size());
  return threshold_sample_aums[rank - 1];
}

IdSet filter_retained(const IdMap<double>& aums, double threshold_value) {
  IdSet retained;
  for (const auto& [id, aum] : aums) {
    if (aum >= threshold_value) retained.insert(id);
  }
  return retained;
}

AumReport build_aum_report(const IdMap<double>& aum_by_sample,
                           const ThresholdPlan& plan, double percentile_k) {
  AumReport report;
  report.aum_by_sample = aum_by_sample;
  report.percentile_k = percentile_k;

  std::vector<double> threshold_aums;
  threshold_aums.reserve(plan.flipped.size());
  for (const auto& [id, unused] : plan.flipped) {
    const auto it = aum_by_sample.find(id);
    if (it == aum_by_sample.end()) {
      throw DataError("aum report: threshold sample " + id + " has no AUM");
    }
    report.threshold_ids.insert(id);
    threshold_aums.push_back(it->second);
  }
  report.threshold_value = compute_threshold(std::move(threshold_aums), percentile_k);

  for (const auto& [id, aum] : aum_by_sample) {
    if (report.threshold_ids.contains(id)) continue;
    if (aum < report.threshold_value) report.filtered_ids.insert(id);
  }
  return report;
}

}  // namespace tdmix
