#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "tdmix/types.hpp"

namespace tdmix {

// Gold logit minus the largest non-gold logit; negative when the model
// prefers another class. Requires at least two logits.
double margin(const Vector& logits, int gold_label);

// Margin at every epoch of a per-epoch logit matrix (rows = epochs).
Vector margins(const Matrix& per_epoch_logits, int gold_label);

// Area under the margin: mean per-epoch margin.
double area_under_margin(const Matrix& per_epoch_logits, int gold_label);

enum class ThresholdMode {
  Total,    // round(N/(c+1)) samples overall (default)
  PerClass  // round(N/(c+1)) samples from each class
};

// Threshold samples: deliberately re-labeled training samples whose AUM
// distribution calibrates the filter threshold. New labels are drawn
// uniformly from the c+1 labels (fake class included) minus the original.
struct ThresholdPlan {
  IdMap<int> flipped;        // sample id -> new label
  int fake_class_index = 0;  // == c: one class beyond the real ones
  int total_flipped = 0;
};

// Builds a deterministic plan over the given (id, label) population.
// Selection and label draws consume a fixed PRNG stream seeded by rng_seed.
// PerClass mode throws DataError when a class is smaller than the quota.
ThresholdPlan make_threshold_plan(
    const std::vector<std::pair<SampleId, int>>& dataset_labels,
    int num_classes, ThresholdMode mode, std::uint64_t rng_seed);

// k-th percentile (0 < k <= 100) by the nearest-rank method: the
// ceil(k/100 * n)-th smallest value.
double compute_threshold(std::vector<double> threshold_sample_aums, double k);

// Ids whose AUM is >= threshold_value ("lower AUM than" is strict, so an AUM
// exactly at the threshold stays).
IdSet filter_retained(const IdMap<double>& aums, double threshold_value);

struct AumReport {
  IdMap<double> aum_by_sample;  // every sample of the threshold run
  IdSet threshold_ids;
  double threshold_value = 0.0;
  double percentile_k = 0.0;
  IdSet filtered_ids;  // real samples removed: aum < threshold
};

// Assembles the report from a full run's AUMs and the plan that produced it.
AumReport build_aum_report(const IdMap<double>& aum_by_sample,
                           const ThresholdPlan& plan, double percentile_k);

}  // namespace tdmix
