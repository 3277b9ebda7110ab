#include "tdmix/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <string>

#include "tdmix/error.hpp"
#include "tdmix/math.hpp"
#include "tdmix/rng.hpp"

namespace tdmix {

namespace {

Matrix softmax_columns(const Matrix& logits) {
  Matrix probs(logits.rows(), logits.cols());
  for (Index j = 0; j < logits.cols(); ++j) {
    probs.col(j) = softmax(logits.col(j));
  }
  return probs;
}

double clamped_cross_entropy(const Matrix& probs, const Matrix& targets) {
  double total = 0.0;
  for (Index j = 0; j < probs.cols(); ++j) {
    for (Index k = 0; k < probs.rows(); ++k) {
      if (targets(k, j) != 0.0) {
        total -= targets(k, j) * std::log(std::max(probs(k, j), 1e-12));
      }
    }
  }
  return total / static_cast<double>(probs.cols());
}

Matrix one_hot_columns(const std::vector<int>& labels, Index num_classes) {
  Matrix y = Matrix::Zero(num_classes, static_cast<Index>(labels.size()));
  for (std::size_t b = 0; b < labels.size(); ++b) {
    const int label = labels[b];
    if (label < 0 || label >= num_classes) {
      throw DataError("label " + std::to_string(label) + " out of range");
    }
    y(label, static_cast<Index>(b)) = 1.0;
  }
  return y;
}

struct BatchPass {
  double loss = 0.0;
  Gradients grads;
};

Gradients zero_gradients(const ModelParams& params) {
  Gradients g;
  g.w_hidden = Matrix::Zero(params.w_hidden.rows(), params.w_hidden.cols());
  g.b_hidden = Vector::Zero(params.b_hidden.size());
  g.w_out = Matrix::Zero(params.w_out.rows(), params.w_out.cols());
  g.b_out = Vector::Zero(params.b_out.size());
  return g;
}

// Forward + backward for one raw batch; accumulates into grads.
double accumulate_raw(const ModelParams& params, const RawBatch& raw,
                      Gradients& grads) {
  const Index batch = raw.features.cols();
  if (batch == 0) throw DataError("empty raw batch");
  if (raw.features.rows() != params.input_dim()) {
    throw DataError("raw batch arity mismatch");
  }
  const Matrix targets = one_hot_columns(raw.labels, params.num_outputs());

  if (params.hidden_width() > 0) {
    const Matrix hidden =
        ((params.w_hidden * raw.features).colwise() + params.b_hidden).array().tanh();
    const Matrix logits = (params.w_out * hidden).colwise() + params.b_out;
    const Matrix probs = softmax_columns(logits);
    const double loss = clamped_cross_entropy(probs, targets);

    const Matrix dlogits = (probs - targets) / static_cast<double>(batch);
    grads.w_out += dlogits * hidden.transpose();
    grads.b_out += dlogits.rowwise().sum();
    const Matrix dhidden = params.w_out.transpose() * dlogits;
    const Matrix dpre = dhidden.array() * (1.0 - hidden.array().square());
    grads.w_hidden += dpre * raw.features.transpose();
    grads.b_hidden += dpre.rowwise().sum();
    return loss;
  }

  const Matrix logits = (params.w_out * raw.features).colwise() + params.b_out;
  const Matrix probs = softmax_columns(logits);
  const double loss = clamped_cross_entropy(probs, targets);
  const Matrix dlogits = (probs - targets) / static_cast<double>(batch);
  grads.w_out += dlogits * raw.features.transpose();
  grads.b_out += dlogits.rowwise().sum();
  return loss;
}

// Forward + backward for one mixed batch in the configured space.
double accumulate_mixed(const ModelParams& params, const MixedBatch& mixed,
                        MixSpace mix_space, Gradients& grads) {
  const Index batch = mixed.parents_a.cols();
  if (batch == 0) throw DataError("empty mixed batch");
  if (mixed.parents_b.cols() != batch || mixed.lambdas.size() != batch ||
      mixed.soft_labels.cols() != batch) {
    throw DataError("mixed batch shape mismatch");
  }
  if (mixed.parents_a.rows() != params.input_dim() ||
      mixed.parents_b.rows() != params.input_dim()) {
    throw DataError("mixed batch arity mismatch");
  }
  if (mixed.soft_labels.rows() != params.num_outputs()) {
    throw DataError("mixed batch label arity mismatch");
  }

  const Vector& lam = mixed.lambdas;

  // A linear model has no interior representation, so hidden-space mixing
  // degenerates to input-space mixing.
  const bool mix_inputs = mix_space == MixSpace::Input || params.hidden_width() == 0;

  if (mix_inputs) {
    Matrix blended(mixed.parents_a.rows(), batch);
    for (Index j = 0; j < batch; ++j) {
      blended.col(j) =
          lam[j] * mixed.parents_a.col(j) + (1.0 - lam[j]) * mixed.parents_b.col(j);
    }
    RawBatch as_raw;
    as_raw.features = std::move(blended);

    if (params.hidden_width() > 0) {
      const Matrix hidden =
          ((params.w_hidden * as_raw.features).colwise() + params.b_hidden)
              .array()
              .tanh();
      const Matrix logits = (params.w_out * hidden).colwise() + params.b_out;
      const Matrix probs = softmax_columns(logits);
      const double loss = clamped_cross_entropy(probs, mixed.soft_labels);
      const Matrix dlogits = (probs - mixed.soft_labels) / static_cast<double>(batch);
      grads.w_out += dlogits * hidden.transpose();
      grads.b_out += dlogits.rowwise().sum();
      const Matrix dhidden = params.w_out.transpose() * dlogits;
      const Matrix dpre = dhidden.array() * (1.0 - hidden.array().square());
      grads.w_hidden += dpre * as_raw.features.transpose();
      grads.b_hidden += dpre.rowwise().sum();
      return loss;
    }
    const Matrix logits = (params.w_out * as_raw.features).colwise() + params.b_out;
    const Matrix probs = softmax_columns(logits);
    const double loss = clamped_cross_entropy(probs, mixed.soft_labels);
    const Matrix dlogits = (probs - mixed.soft_labels) / static_cast<double>(batch);
    grads.w_out += dlogits * as_raw.features.transpose();
    grads.b_out += dlogits.rowwise().sum();
    return loss;
  }

  // Hidden-space mixing: forward both parents to post-tanh activations,
  // blend, resume the forward pass.
  const Matrix hidden_a =
      ((params.w_hidden * mixed.parents_a).colwise() + params.b_hidden).array().tanh();
  const Matrix hidden_b =
      ((params.w_hidden * mixed.parents_b).colwise() + params.b_hidden).array().tanh();
  Matrix blended(hidden_a.rows(), batch);
  for (Index j = 0; j < batch; ++j) {
    blended.col(j) = lam[j] * hidden_a.col(j) + (1.0 - lam[j]) * hidden_b.col(j);
  }
  const Matrix logits = (params.w_out * blended).colwise() + params.b_out;
  const Matrix probs = softmax_columns(logits);
  const double loss = clamped_cross_entropy(probs, mixed.soft_labels);

  const Matrix dlogits = (probs - mixed.soft_labels) / static_cast<double>(batch);
  grads.w_out += dlogits * blended.transpose();
  grads.b_out += dlogits.rowwise().sum();
  const Matrix dblended = params.w_out.transpose() * dlogits;
  Matrix dpre_a(hidden_a.rows(), batch);
  Matrix dpre_b(hidden_b.rows(), batch);
  for (Index j = 0; j < batch; ++j) {
    dpre_a.col(j) = lam[j] * dblended.col(j).array() *
                    (1.0 - hidden_a.col(j).array().square());
    dpre_b.col(j) = (1.0 - lam[j]) * dblended.col(j).array() *
                    (1.0 - hidden_b.col(j).array().square());
  }
  grads.w_hidden += dpre_a * mixed.parents_a.transpose();
  grads.w_hidden += dpre_b * mixed.parents_b.transpose();
  grads.b_hidden += dpre_a.rowwise().sum();
  grads.b_hidden += dpre_b.rowwise().sum();
  return loss;
}

BatchPass run_batch(const ModelParams& params, const RawBatch* raw,
                    const MixedBatch* mixed, MixSpace mix_space, double l2) {
  if (raw == nullptr && mixed == nullptr) {
    throw DataError("training step needs at least one batch");
  }
  BatchPass pass;
  pass.grads = zero_gradients(params);
  if (raw != nullptr) pass.loss += accumulate_raw(params, *raw, pass.grads);
  if (mixed != nullptr) {
    pass.loss += accumulate_mixed(params, *mixed, mix_space, pass.grads);
  }
  if (l2 > 0.0) {
    pass.loss += 0.5 * l2 *
                 (params.w_hidden.squaredNorm() + params.w_out.squaredNorm());
    pass.grads.w_hidden += l2 * params.w_hidden;
    pass.grads.w_out += l2 * params.w_out;
  }
  return pass;
}

// Optimizer state; Adam moments are kept per tensor.
struct OptimizerState {
  Optimizer kind = Optimizer::Sgd;
  double learning_rate = 0.0;
  Gradients m;
  Gradients v;
  long step = 0;

  static constexpr double kBeta1 = 0.9;
  static constexpr double kBeta2 = 0.999;
  static constexpr double kEps = 1e-8;

  OptimizerState(Optimizer kind, double lr, const ModelParams& params)
      : kind(kind), learning_rate(lr) {
    if (kind == Optimizer::Adam) {
      m = zero_gradients(params);
      v = zero_gradients(params);
    }
  }

  void apply(ModelParams& params, const Gradients& grads) {
    if (kind == Optimizer::Sgd) {
      params.w_hidden -= learning_rate * grads.w_hidden;
      params.b_hidden -= learning_rate * grads.b_hidden;
      params.w_out -= learning_rate * grads.w_out;
      params.b_out -= learning_rate * grads.b_out;
      return;
    }
    ++step;
    const double bias1 = 1.0 - std::pow(kBeta1, static_cast<double>(step));
    const double bias2 = 1.0 - std::pow(kBeta2, static_cast<double>(step));
    auto update = [&](auto& theta, auto& m_t, auto& v_t, const auto& g) {
      m_t = kBeta1 * m_t + (1.0 - kBeta1) * g;
      v_t = kBeta2 * v_t + (1.0 - kBeta2) * g.cwiseProduct(g);
      theta.array() -= learning_rate * (m_t.array() / bias1) /
                       ((v_t.array() / bias2).sqrt() + kEps);
    };
    update(params.w_hidden, m.w_hidden, v.w_hidden, grads.w_hidden);
    update(params.b_hidden, m.b_hidden, v.b_hidden, grads.b_hidden);
    update(params.w_out, m.w_out, v.w_out, grads.w_out);
    update(params.b_out, m.b_out, v.b_out, grads.b_out);
  }
};

Matrix feature_matrix(const Dataset& dataset) {
  Matrix features(dataset.feature_dim, dataset.size());
  for (int i = 0; i < dataset.size(); ++i) {
    features.col(i) = dataset.samples[static_cast<std::size_t>(i)].features;
  }
  return features;
}

RawBatch slice_batch(const Dataset& dataset, const Matrix& all_features,
                     const std::vector<int>& order, std::size_t start,
                     std::size_t count) {
  RawBatch batch;
  batch.features.resize(all_features.rows(), static_cast<Index>(count));
  batch.labels.resize(count);
  for (std::size_t i = 0; i < count; ++i) {
    const int idx = order[start + i];
    batch.features.col(static_cast<Index>(i)) = all_features.col(idx);
    batch.labels[i] = dataset.samples[static_cast<std::size_t>(idx)].label;
  }
  return batch;
}

void ensure_finite_step(double loss, const ModelParams& params, int epoch,
                        std::size_t batch_index) {
  if (!std::isfinite(loss) || !params.all_finite()) {
    throw NumericError("non-finite training state at epoch " +
                       std::to_string(epoch) + ", batch " +
                       std::to_string(batch_index));
  }
}

// Cycling index loader over a dataset: shuffled order, reshuffled on exhaust.
class IndexLoader {
 public:
  IndexLoader(int size, Rng& rng) : indices_(static_cast<std::size_t>(size)), rng_(rng) {
    std::iota(indices_.begin(), indices_.end(), 0);
    rng_.shuffle(indices_);
  }

  int next() {
    if (pos_ == indices_.size()) {
      rng_.shuffle(indices_);
      pos_ = 0;
    }
    return indices_[pos_++];
  }

 private:
  std::vector<int> indices_;
  Rng& rng_;
  std::size_t pos_ = 0;
};

}  // namespace

Optimizer optimizer_from_name(std::string_view name) {
  if (name == "sgd") return Optimizer::Sgd;
  if (name == "adam") return Optimizer::Adam;
  throw ConfigError("unknown optimizer: " + std::string(name));
}

double training_loss(const ModelParams& params, const RawBatch* raw,
                     const MixedBatch* mixed, MixSpace mix_space, double l2) {
  return run_batch(params, raw, mixed, mix_space, l2).loss;
}

Gradients training_gradients(const ModelParams& params, const RawBatch* raw,
                             const MixedBatch* mixed, MixSpace mix_space,
                             double l2, double* loss_out) {
  BatchPass pass = run_batch(params, raw, mixed, mix_space, l2);
  if (loss_out != nullptr) *loss_out = pass.loss;
  return pass.grads;
}

TrainResult train(const Dataset& dataset, const TrainerConfig& config) {
  if (dataset.samples.empty()) throw DataError("train: empty dataset");
  if (config.epochs < 1) throw ConfigError("train: epochs must be >= 1");
  if (config.batch_size < 1) throw ConfigError("train: batch_size must be >= 1");

  Rng rng(config.rng_seed);
  ModelParams params = init_params(dataset.feature_dim, config.hidden_width,
                                   dataset.num_classes, rng.next_u64());
  OptimizerState optimizer(config.optimizer, config.learning_rate, params);
  const Matrix all_features = feature_matrix(dataset);

  std::vector<int> order(dataset.samples.size());
  std::iota(order.begin(), order.end(), 0);

  TrainResult result;
  result.dynamics.reserve(dataset.samples.size() *
                          static_cast<std::size_t>(config.epochs));

  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    rng.shuffle(order);
    std::size_t batch_index = 0;
    for (std::size_t start = 0; start < order.size();
         start += static_cast<std::size_t>(config.batch_size), ++batch_index) {
      const std::size_t count =
          std::min<std::size_t>(config.batch_size, order.size() - start);
      const RawBatch batch = slice_batch(dataset, all_features, order, start, count);
      BatchPass pass = run_batch(params, &batch, nullptr, MixSpace::Input, config.l2);
      ensure_finite_step(pass.loss, params, epoch, batch_index);
      optimizer.apply(params, pass.grads);
    }
    if (!params.all_finite()) {
      throw NumericError("non-finite parameters after epoch " + std::to_string(epoch));
    }

    // End-of-epoch dynamics: full inference pass in dataset (id) order.
    const Matrix logits = forward_logits(params, all_features);
    for (int i = 0; i < dataset.size(); ++i) {
      const Sample& sample = dataset.samples[static_cast<std::size_t>(i)];
      result.dynamics.push_back(
          {sample.id, epoch, sample.label, logits.col(i)});
    }
  }
  result.params = std::move(params);
  return result;
}

namespace {

ModelParams train_with_mixing(
    const Dataset& raw_pool, int num_classes, const TrainerConfig& config,
    std::size_t pairs_per_epoch,
    const std::function<std::vector<MixPair>(Rng&)>& schedule_for_epoch) {
  if (raw_pool.samples.empty()) throw DataError("mixup training: empty pool");
  if (!config.mixup.has_value()) {
    throw ConfigError("mixup training requires a mixup config");
  }
  const MixupConfig& mix = *config.mixup;

  IdMap<int> index_of;
  for (int i = 0; i < raw_pool.size(); ++i) {
    index_of.emplace(raw_pool.samples[static_cast<std::size_t>(i)].id, i);
  }
  const Matrix all_features = feature_matrix(raw_pool);

  Rng rng(config.rng_seed);
  ModelParams params = init_params(raw_pool.feature_dim, config.hidden_width,
                                   num_classes, rng.next_u64());
  OptimizerState optimizer(config.optimizer, config.learning_rate, params);
  IndexLoader raw_loader(raw_pool.size(), rng);
  Rng mix_rng(mix.rng_seed);

  auto column_for = [&](const SampleId& id) {
    const auto it = index_of.find(id);
    if (it == index_of.end()) {
      throw DataError("mixup schedule references unknown sample " + id);
    }
    return it->second;
  };

  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    const std::vector<MixPair> schedule = schedule_for_epoch(mix_rng);
    if (schedule.size() != pairs_per_epoch) {
      throw DataError("mixup schedule length mismatch");
    }
    std::size_t batch_index = 0;
    for (std::size_t start = 0; start < schedule.size();
         start += static_cast<std::size_t>(mix.batch_size), ++batch_index) {
      const std::size_t count =
          std::min<std::size_t>(mix.batch_size, schedule.size() - start);

      MixedBatch mixed;
      mixed.parents_a.resize(raw_pool.feature_dim, static_cast<Index>(count));
      mixed.parents_b.resize(raw_pool.feature_dim, static_cast<Index>(count));
      mixed.lambdas.resize(static_cast<Index>(count));
      mixed.soft_labels = Matrix::Zero(num_classes, static_cast<Index>(count));
      RawBatch raw;
      raw.features.resize(raw_pool.feature_dim, static_cast<Index>(count));
      raw.labels.resize(count);

      for (std::size_t i = 0; i < count; ++i) {
        const MixPair& pair = schedule[start + i];
        const int a = column_for(pair.first);
        const int b = column_for(pair.second);
        const Index col = static_cast<Index>(i);
        mixed.parents_a.col(col) = all_features.col(a);
        mixed.parents_b.col(col) = all_features.col(b);
        mixed.lambdas[col] = pair.lambda;
        const int label_a = raw_pool.samples[static_cast<std::size_t>(a)].label;
        const int label_b = raw_pool.samples[static_cast<std::size_t>(b)].label;
        mixed.soft_labels(label_a, col) += pair.lambda;
        mixed.soft_labels(label_b, col) += 1.0 - pair.lambda;

        const int r = raw_loader.next();
        raw.features.col(col) = all_features.col(r);
        raw.labels[i] = raw_pool.samples[static_cast<std::size_t>(r)].label;
      }

      BatchPass pass = run_batch(params, &raw, &mixed, mix.mix_space, config.l2);
      ensure_finite_step(pass.loss, params, epoch, batch_index);
      optimizer.apply(params, pass.grads);
    }
    if (!params.all_finite()) {
      throw NumericError("non-finite parameters after epoch " + std::to_string(epoch));
    }
  }
  return params;
}

Dataset merge_pools(const Dataset& easy_set, const Dataset& ambiguous_set) {
  if (easy_set.feature_dim != ambiguous_set.feature_dim ||
      easy_set.num_classes != ambiguous_set.num_classes) {
    throw DataError("mixup pools disagree on arity or class count");
  }
  Dataset merged;
  merged.num_classes = easy_set.num_classes;
  merged.feature_dim = easy_set.feature_dim;
  merged.provenance = easy_set.provenance;
  merged.samples = easy_set.samples;
  merged.samples.insert(merged.samples.end(), ambiguous_set.samples.begin(),
                        ambiguous_set.samples.end());
  std::sort(merged.samples.begin(), merged.samples.end(),
            [](const Sample& a, const Sample& b) { return id_less(a.id, b.id); });
  for (std::size_t i = 1; i < merged.samples.size(); ++i) {
    if (merged.samples[i - 1].id == merged.samples[i].id) {
      throw DataError("mixup pools overlap on sample " + merged.samples[i].id);
    }
  }
  return merged;
}

}  // namespace

ModelParams train_tdmixup(const Dataset& easy_set, const Dataset& ambiguous_set,
                          const TrainerConfig& config) {
  if (!config.mixup.has_value()) {
    throw ConfigError("mixup training requires a mixup config");
  }
  if (easy_set.samples.empty() || ambiguous_set.samples.empty()) {
    throw DataError("tdmixup training: both sets must be non-empty");
  }
  const Dataset merged = merge_pools(easy_set, ambiguous_set);
  const std::vector<SampleId> easy_ids = easy_set.ids();
  const std::vector<SampleId> ambiguous_ids = ambiguous_set.ids();
  const std::size_t pairs = std::max(easy_ids.size(), ambiguous_ids.size());
  const MixupConfig& mix = config.mixup.value();
  return train_with_mixing(
      merged, merged.num_classes, config, pairs, [&](Rng& rng) {
        return build_td_schedule(easy_ids, ambiguous_ids, mix, rng);
      });
}

ModelParams train_random_mixup(const Dataset& pool, const TrainerConfig& config) {
  if (!config.mixup.has_value()) {
    throw ConfigError("mixup training requires a mixup config");
  }
  const std::vector<SampleId> pool_ids = pool.ids();
  const MixupConfig& mix = config.mixup.value();
  return train_with_mixing(pool, pool.num_classes, config, pool_ids.size(),
                           [&](Rng& rng) {
                             return build_random_schedule(pool_ids, mix, rng);
                           });
}

}  // namespace tdmix
