#pragma once

#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

#include "tdmix/dataset.hpp"
#include "tdmix/dynamics.hpp"
#include "tdmix/mixup.hpp"
#include "tdmix/model.hpp"

namespace tdmix {

enum class Optimizer { Sgd, Adam };

Optimizer optimizer_from_name(std::string_view name);

struct TrainerConfig {
  int epochs = 6;
  double learning_rate = 0.1;
  int batch_size = 32;
  int hidden_width = 32;  // 0 = linear model
  Optimizer optimizer = Optimizer::Sgd;
  double l2 = 0.0;  // weight penalty (l2/2)*||W||^2, biases excluded
  std::uint64_t rng_seed = 0;
  std::optional<MixupConfig> mixup;
};

// A raw mini-batch, one sample per column.
struct RawBatch {
  Matrix features;  // d x B
  std::vector<int> labels;
};

// A mixed mini-batch carrying both parents so either mix space can be
// applied at forward time.
struct MixedBatch {
  Matrix parents_a;    // d x B
  Matrix parents_b;    // d x B
  Vector lambdas;      // B
  Matrix soft_labels;  // c x B
};

struct Gradients {
  Matrix w_hidden;
  Vector b_hidden;
  Matrix w_out;
  Vector b_out;
};

// Combined step loss: mean CE over the raw batch plus mean soft-CE over the
// mixed batch (either may be null), plus the l2 penalty. This is the exact
// objective the analytic gradients differentiate.
double training_loss(const ModelParams& params, const RawBatch* raw,
                     const MixedBatch* mixed, MixSpace mix_space, double l2);

// Analytic gradients of training_loss. loss_out, when given, receives the
// loss from the same pass.
Gradients training_gradients(const ModelParams& params, const RawBatch* raw,
                             const MixedBatch* mixed, MixSpace mix_space,
                             double l2, double* loss_out = nullptr);

struct TrainResult {
  ModelParams params;
  std::vector<DynamicsRecord> dynamics;  // E records per sample
};

// Mini-batch cross-entropy training over E epochs. At the end of each epoch
// a full inference pass appends one DynamicsRecord per sample (ascending id
// order). Bit-reproducible per seed. Throws NumericError with epoch/batch
// coordinates when the loss or parameters go non-finite.
TrainResult train(const Dataset& dataset, const TrainerConfig& config);

// TDMixUp training: per step, one raw mini-batch from easy u ambiguous plus
// one mixed mini-batch from the easy x ambiguous schedule, equally weighted.
// Dynamics are not logged. config.mixup must be present.
ModelParams train_tdmixup(const Dataset& easy_set, const Dataset& ambiguous_set,
                          const TrainerConfig& config);

// Random-pair baseline: identical loop shape, but pairs come from the
// single pool shuffled against itself.
ModelParams train_random_mixup(const Dataset& pool, const TrainerConfig& config);

}  // namespace tdmix
