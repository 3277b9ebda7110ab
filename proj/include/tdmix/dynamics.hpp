#pragma once

#include <istream>
#include <optional>
#include <vector>

#include "tdmix/types.hpp"

namespace tdmix {

// One sample's logits captured at the end of one training epoch.
struct DynamicsRecord {
  SampleId id;
  int epoch = 0;       // 1-based
  int gold_label = 0;  // class index; may equal the fake class in threshold runs
  Vector logits;
};

// All epochs of one sample, row e-1 holding the end-of-epoch-e logits.
struct SampleTrace {
  SampleId id;
  int gold_label = 0;
  Matrix logits;  // epochs x classes

  int epochs() const { return static_cast<int>(logits.rows()); }
};

// Per-sample aggregates over the training run.
struct SampleStats {
  SampleId id;
  double confidence = 0.0;   // mean gold-label probability
  double variability = 0.0;  // population std of the gold-label probability
  double correctness = 0.0;  // fraction of epochs with argmax == gold
  std::optional<double> aum;
  int epochs_observed = 0;
};

// Softmax probability of the gold label for one epoch's logits.
double gold_probability(const Vector& logits, int gold_label);

// Gold-label probability per epoch for a whole trace.
Vector gold_probabilities(const SampleTrace& trace);

// Mean of per-epoch gold probabilities. Throws DataError on empty input.
double confidence(const Vector& probs);

// Population standard deviation (divisor E) of per-epoch gold probabilities.
double variability(const Vector& probs);

// Parses a line-delimited dynamics log. Validates the whole stream and throws
// DataError naming the offending line on: malformed JSON, duplicate
// (id, epoch), inconsistent logit arity, missing or non-contiguous epochs,
// or a gold label that changes across one sample's epochs.
// Returns traces sorted by ascending id.
std::vector<SampleTrace> ingest_dynamics_log(std::istream& stream);

// Aggregates traces into SampleStats (sorted by ascending id). All traces
// must cover the same epoch count 1..E; ragged coverage throws DataError.
// When aum_values is given, each sample's AUM is attached (absent otherwise).
std::vector<SampleStats> aggregate_stats(
    const std::vector<SampleTrace>& traces,
    const IdMap<double>* aum_values = nullptr);

}  // namespace tdmix
