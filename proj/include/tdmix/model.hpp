#pragma once

#include <cstdint>
#include <filesystem>

#include "tdmix/types.hpp"

namespace tdmix {

// Classifier parameters: optional input->hidden linear map with tanh
// activation, then hidden->output linear map producing the logits.
// hidden_width 0 means a plain linear (softmax-regression) model.
struct ModelParams {
  Matrix w_hidden;  // h x d, empty when h == 0
  Vector b_hidden;  // h
  Matrix w_out;     // outputs x (h, or d when h == 0)
  Vector b_out;     // outputs

  int input_dim() const {
    return static_cast<int>(hidden_width() > 0 ? w_hidden.cols() : w_out.cols());
  }
  int hidden_width() const { return static_cast<int>(w_hidden.rows()); }
  int num_outputs() const { return static_cast<int>(w_out.rows()); }
  bool all_finite() const;
};

// Seeded init: every entry uniform in [-s, s] with s = 1/sqrt(fan_in).
ModelParams init_params(int input_dim, int hidden_width, int num_outputs,
                        std::uint64_t seed);

struct ForwardResult {
  Vector hidden;  // post-tanh activations; empty for a linear model
  Vector logits;
  Vector probabilities;  // stable softmax of logits
};

// Deterministic forward pass for one feature vector. Throws DataError on
// arity mismatch or non-finite input.
ForwardResult forward(const ModelParams& params, const Vector& features);

// Batched logits for features stored one sample per column (d x B).
Matrix forward_logits(const ModelParams& params, const Matrix& features);

// Cross-entropy against a soft target: -sum_k y_k log p_k, with the log
// clamped at 1e-12. Both arguments must be probability vectors of equal
// arity.
double soft_cross_entropy(const Vector& probabilities, const Vector& soft_label);

// Versioned text checkpoint (header: arity, hidden width, outputs, seed).
void save_checkpoint(const std::filesystem::path& path, const ModelParams& params,
                     std::uint64_t seed);
struct Checkpoint {
  ModelParams params;
  std::uint64_t seed = 0;
};
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace tdmix
