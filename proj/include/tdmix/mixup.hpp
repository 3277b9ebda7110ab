#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "tdmix/rng.hpp"
#include "tdmix/types.hpp"

namespace tdmix {

enum class MixSpace {
  Input,  // mix raw feature vectors before the forward pass
  Hidden  // mix post-activation hidden states (input features when h == 0)
};

MixSpace mix_space_from_name(std::string_view name);
std::string_view mix_space_name(MixSpace space);

struct MixupConfig {
  double alpha = 0.4;  // Beta shape; lambda ~ Beta(alpha, alpha)
  MixSpace mix_space = MixSpace::Hidden;
  int batch_size = 32;
  std::uint64_t rng_seed = 0;
};

// An interpolated sample: features lambda*x_i + (1-lambda)*x_j with the
// matching convex combination of one-hot labels.
struct MixedSample {
  Vector features;
  Vector soft_label;
  double lambda = 0.0;
  std::pair<SampleId, SampleId> parent_ids;
};

// One Beta(alpha, alpha) draw. Throws ConfigError for alpha <= 0.
double sample_lambda(double alpha, Rng& rng);

// Convex combination of two labeled samples. Feature arities must match and
// labels must lie in [0, num_classes).
MixedSample mix_pair(const Vector& features_a, int label_a, const SampleId& id_a,
                     const Vector& features_b, int label_b, const SampleId& id_b,
                     double lambda, int num_classes);

struct MixPair {
  SampleId first;
  SampleId second;
  double lambda = 0.0;
};

// One epoch of easy x ambiguous pairs: per mini-batch, one batch is drawn
// from each pool (independent uniform shuffles, reshuffled cycling when a
// pool runs out) and zipped positionally with one lambda per pair. The
// schedule covers one epoch of the larger pool. Chunk by config.batch_size
// to recover the per-step batches.
std::vector<MixPair> build_td_schedule(const std::vector<SampleId>& easy_ids,
                                       const std::vector<SampleId>& ambiguous_ids,
                                       const MixupConfig& config, Rng& rng);

// Baseline: the pool shuffled against an independently shuffled copy of
// itself, self-pairs forbidden via re-draw. Covers one epoch of the pool.
std::vector<MixPair> build_random_schedule(const std::vector<SampleId>& pool_ids,
                                           const MixupConfig& config, Rng& rng);

}  // namespace tdmix
