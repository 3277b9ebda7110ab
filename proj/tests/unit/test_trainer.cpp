#include <doctest.h>

#include <cmath>
#include <string>
#include <vector>

#include "support/synth.hpp"
#include "tdmix/calibration.hpp"
#include "tdmix/error.hpp"
#include "tdmix/rng.hpp"
#include "tdmix/serialize.hpp"
#include "tdmix/trainer.hpp"

using namespace tdmix;

namespace {

// Flat views over every parameter entry, in a fixed order shared with the
// gradient struct, so analytic and numeric derivatives can be indexed alike.
std::vector<double*> flat_entries(ModelParams& params) {
  std::vector<double*> entries;
  auto add = [&](auto& tensor) {
    for (Index i = 0; i < tensor.size(); ++i) entries.push_back(tensor.data() + i);
  };
  add(params.w_hidden);
  add(params.b_hidden);
  add(params.w_out);
  add(params.b_out);
  return entries;
}

std::vector<double> flat_gradients(const Gradients& grads) {
  std::vector<double> values;
  auto add = [&](const auto& tensor) {
    for (Index i = 0; i < tensor.size(); ++i) values.push_back(tensor(i));
  };
  add(grads.w_hidden);
  add(grads.b_hidden);
  add(grads.w_out);
  add(grads.b_out);
  return values;
}

RawBatch random_raw_batch(int dim, int classes, int batch, Rng& rng) {
  RawBatch raw;
  raw.features.resize(dim, batch);
  raw.labels.resize(static_cast<std::size_t>(batch));
  for (Index j = 0; j < batch; ++j) {
    for (Index i = 0; i < dim; ++i) raw.features(i, j) = rng.next_normal();
    raw.labels[static_cast<std::size_t>(j)] =
        static_cast<int>(rng.next_below(static_cast<std::uint64_t>(classes)));
  }
  return raw;
}

MixedBatch random_mixed_batch(int dim, int classes, int batch, Rng& rng) {
  MixedBatch mixed;
  mixed.parents_a.resize(dim, batch);
  mixed.parents_b.resize(dim, batch);
  mixed.lambdas.resize(batch);
  mixed.soft_labels = Matrix::Zero(classes, batch);
  for (Index j = 0; j < batch; ++j) {
    for (Index i = 0; i < dim; ++i) {
      mixed.parents_a(i, j) = rng.next_normal();
      mixed.parents_b(i, j) = rng.next_normal();
    }
    const double lambda = sample_lambda(0.4, rng);
    mixed.lambdas[j] = lambda;
    const int label_a = static_cast<int>(rng.next_below(classes));
    const int label_b = static_cast<int>(rng.next_below(classes));
    mixed.soft_labels(label_a, j) += lambda;
    mixed.soft_labels(label_b, j) += 1.0 - lambda;
  }
  return mixed;
}

// Central finite differences against the analytic gradient on a sample of
// parameter entries.
void check_gradients(int hidden, MixSpace space, std::uint64_t seed) {
  const int dim = 4;
  const int classes = 3;
  Rng rng(seed);
  ModelParams params = init_params(dim, hidden, classes, rng.next_u64());
  const double l2 = 0.01;

  for (int batch_trial = 0; batch_trial < 5; ++batch_trial) {
    const RawBatch raw = random_raw_batch(dim, classes, 6, rng);
    const MixedBatch mixed = random_mixed_batch(dim, classes, 5, rng);
    const Gradients analytic =
        training_gradients(params, &raw, &mixed, space, l2);
    const std::vector<double> analytic_flat = flat_gradients(analytic);
    std::vector<double*> entries = flat_entries(params);
    REQUIRE(entries.size() == analytic_flat.size());

    for (int probe = 0; probe < 10; ++probe) {
      const auto pick = static_cast<std::size_t>(
          rng.next_below(static_cast<std::uint64_t>(entries.size())));
      const double original = *entries[pick];
      const double step = 1e-5;
      *entries[pick] = original + step;
      const double loss_plus = training_loss(params, &raw, &mixed, space, l2);
      *entries[pick] = original - step;
      const double loss_minus = training_loss(params, &raw, &mixed, space, l2);
      *entries[pick] = original;

      const double numeric = (loss_plus - loss_minus) / (2.0 * step);
      const double analytic_value = analytic_flat[pick];
      const double scale =
          std::max({1e-6, std::abs(numeric), std::abs(analytic_value)});
      const double rel_error = std::abs(numeric - analytic_value) / scale;
      CAPTURE(hidden);
      CAPTURE(batch_trial);
      CAPTURE(pick);
      CHECK(rel_error < 1e-4);
    }
  }
}

Dataset split_by_ids(const Dataset& dataset, int from, int to) {
  IdSet keep;
  for (int i = from; i < to; ++i) {
    keep.insert(dataset.samples[static_cast<std::size_t>(i)].id);
  }
  return dataset.subset(keep);
}

}  // namespace

TEST_CASE("analytic gradients match finite differences in every mode") {
  check_gradients(0, MixSpace::Input, 31);
  check_gradients(0, MixSpace::Hidden, 32);  // degenerates to input mixing
  check_gradients(32, MixSpace::Input, 33);
  check_gradients(32, MixSpace::Hidden, 34);
}

TEST_CASE("a lambda = 1 mixed batch scores like its first parents") {
  Rng rng(41);
  ModelParams params = init_params(3, 8, 3, rng.next_u64());
  MixedBatch mixed = random_mixed_batch(3, 3, 7, rng);
  RawBatch as_raw;
  as_raw.features = mixed.parents_a;
  as_raw.labels.resize(7);
  for (Index j = 0; j < 7; ++j) {
    mixed.lambdas[j] = 1.0;
    // Rebuild the soft label as the pure first-parent one-hot.
    int label = 0;
    for (Index k = 0; k < 3; ++k) {
      if (mixed.soft_labels(k, j) > mixed.soft_labels(label, j)) {
        label = static_cast<int>(k);
      }
    }
    mixed.soft_labels.col(j).setZero();
    mixed.soft_labels(label, j) = 1.0;
    as_raw.labels[static_cast<std::size_t>(j)] = label;
  }
  for (const MixSpace space : {MixSpace::Input, MixSpace::Hidden}) {
    const double mixed_loss = training_loss(params, nullptr, &mixed, space, 0.0);
    const double raw_loss = training_loss(params, &as_raw, nullptr, space, 0.0);
    CHECK(mixed_loss == doctest::Approx(raw_loss).epsilon(1e-12));
  }
}

TEST_CASE("combined loss is the sum of the raw and mixed terms plus l2") {
  Rng rng(43);
  ModelParams params = init_params(4, 6, 3, rng.next_u64());
  const RawBatch raw = random_raw_batch(4, 3, 5, rng);
  const MixedBatch mixed = random_mixed_batch(4, 3, 4, rng);
  const double both = training_loss(params, &raw, &mixed, MixSpace::Hidden, 0.0);
  const double raw_only = training_loss(params, &raw, nullptr, MixSpace::Hidden, 0.0);
  const double mixed_only =
      training_loss(params, nullptr, &mixed, MixSpace::Hidden, 0.0);
  CHECK(both == doctest::Approx(raw_only + mixed_only).epsilon(1e-12));

  const double with_l2 = training_loss(params, &raw, &mixed, MixSpace::Hidden, 0.1);
  const double penalty =
      0.05 * (params.w_hidden.squaredNorm() + params.w_out.squaredNorm());
  CHECK(with_l2 == doctest::Approx(both + penalty).epsilon(1e-12));
}

TEST_CASE("soft cross-entropy of a uniform prediction is log c") {
  Vector probs = Vector::Constant(4, 0.25);
  Vector target = Vector::Constant(4, 0.25);
  CHECK(soft_cross_entropy(probs, target) ==
        doctest::Approx(std::log(4.0)).epsilon(1e-12));
}

TEST_CASE("init draws stay inside +/- 1/sqrt(fan_in) and reproduce per seed") {
  const ModelParams params = init_params(16, 8, 3, 77);
  const double hidden_bound = 1.0 / std::sqrt(16.0);
  const double out_bound = 1.0 / std::sqrt(8.0);
  for (Index i = 0; i < params.w_hidden.size(); ++i) {
    CHECK(std::abs(params.w_hidden(i)) <= hidden_bound);
  }
  for (Index i = 0; i < params.w_out.size(); ++i) {
    CHECK(std::abs(params.w_out(i)) <= out_bound);
  }
  const ModelParams again = init_params(16, 8, 3, 77);
  CHECK(params.w_hidden == again.w_hidden);
  CHECK(params.w_out == again.w_out);
  CHECK(params.b_hidden == again.b_hidden);
  CHECK(params.b_out == again.b_out);

  const ModelParams linear = init_params(5, 0, 4, 78);
  CHECK(linear.hidden_width() == 0);
  CHECK(linear.input_dim() == 5);
  CHECK(linear.num_outputs() == 4);
}

TEST_CASE("zero learning rate leaves the initialization untouched") {
  const synth::BlobData data = synth::make_blobs({.total = 60, .seed = 51});
  TrainerConfig config;
  config.epochs = 3;
  config.learning_rate = 0.0;
  config.batch_size = 16;
  config.hidden_width = 8;
  config.rng_seed = 99;
  const TrainResult result = train(data.dataset, config);

  Rng rng(99);
  const ModelParams expected = init_params(2, 8, 3, rng.next_u64());
  CHECK(result.params.w_hidden == expected.w_hidden);
  CHECK(result.params.b_hidden == expected.b_hidden);
  CHECK(result.params.w_out == expected.w_out);
  CHECK(result.params.b_out == expected.b_out);

  // Dynamics repeat identically across epochs: nothing moved.
  const std::size_t n = data.dataset.samples.size();
  REQUIRE(result.dynamics.size() == 3 * n);
  for (std::size_t i = 0; i < n; ++i) {
    CHECK(result.dynamics[i].logits == result.dynamics[i + n].logits);
    CHECK(result.dynamics[i].logits == result.dynamics[i + 2 * n].logits);
  }
}

TEST_CASE("dynamics are logged per epoch in ascending id order") {
  const synth::BlobData data = synth::make_blobs({.total = 30, .seed = 52});
  TrainerConfig config;
  config.epochs = 2;
  config.batch_size = 8;
  config.hidden_width = 4;
  config.rng_seed = 7;
  const TrainResult result = train(data.dataset, config);
  const std::size_t n = data.dataset.samples.size();
  REQUIRE(result.dynamics.size() == 2 * n);
  for (std::size_t e = 0; e < 2; ++e) {
    for (std::size_t i = 0; i < n; ++i) {
      const DynamicsRecord& record = result.dynamics[e * n + i];
      CHECK(record.epoch == static_cast<int>(e) + 1);
      CHECK(record.id == data.dataset.samples[i].id);
      CHECK(record.gold_label == data.dataset.samples[i].label);
      if (i > 0) CHECK(id_less(result.dynamics[e * n + i - 1].id, record.id));
    }
  }
}

TEST_CASE("training separates well-separated clusters") {
  const synth::BlobData data =
      synth::make_blobs({.total = 150, .sigma = 0.6, .seed = 53});
  TrainerConfig config;
  config.epochs = 6;
  config.learning_rate = 0.3;
  config.batch_size = 16;
  config.hidden_width = 16;
  config.rng_seed = 11;
  const TrainResult result = train(data.dataset, config);
  const double train_accuracy = accuracy(evaluate(result.params, data.dataset));
  CHECK(train_accuracy >= 0.99);
}

TEST_CASE("adam also learns and differs from sgd") {
  const synth::BlobData data =
      synth::make_blobs({.total = 120, .sigma = 0.6, .seed = 54});
  TrainerConfig config;
  config.epochs = 6;
  config.learning_rate = 0.05;
  config.batch_size = 16;
  config.hidden_width = 16;
  config.optimizer = Optimizer::Adam;
  config.rng_seed = 12;
  const TrainResult adam = train(data.dataset, config);
  CHECK(accuracy(evaluate(adam.params, data.dataset)) >= 0.95);

  config.optimizer = Optimizer::Sgd;
  const TrainResult sgd = train(data.dataset, config);
  CHECK(adam.params.w_out != sgd.params.w_out);
}

TEST_CASE("training is bit-reproducible per seed") {
  const synth::BlobData data = synth::make_blobs({.total = 80, .seed = 55});
  TrainerConfig config;
  config.epochs = 3;
  config.batch_size = 16;
  config.hidden_width = 8;
  config.rng_seed = 13;
  const TrainResult a = train(data.dataset, config);
  const TrainResult b = train(data.dataset, config);
  CHECK(dynamics_log_to_jsonl(a.dynamics) == dynamics_log_to_jsonl(b.dynamics));
  CHECK(a.params.w_out == b.params.w_out);

  config.rng_seed = 14;
  const TrainResult c = train(data.dataset, config);
  CHECK(dynamics_log_to_jsonl(a.dynamics) != dynamics_log_to_jsonl(c.dynamics));
}

TEST_CASE("numerical blowups abort with coordinates") {
  const synth::BlobData data = synth::make_blobs({.total = 20, .seed = 56});
  TrainerConfig config;
  config.epochs = 4;  // the l2 blowup needs several steps to reach overflow
  config.learning_rate = 1e20;
  config.l2 = 1e20;
  config.batch_size = 5;
  config.hidden_width = 4;
  config.rng_seed = 15;
  try {
    train(data.dataset, config);
    FAIL_CHECK("expected NumericError");
  } catch (const NumericError& error) {
    const std::string message = error.what();
    CAPTURE(message);
    CHECK(message.find("epoch") != std::string::npos);
  }
}

TEST_CASE("tdmixup training runs deterministically on disjoint pools") {
  const synth::BlobData data = synth::make_blobs({.total = 90, .seed = 57});
  const Dataset easy = split_by_ids(data.dataset, 0, 30);
  const Dataset ambiguous = split_by_ids(data.dataset, 30, 90);

  TrainerConfig config;
  config.epochs = 3;
  config.batch_size = 16;
  config.hidden_width = 8;
  config.rng_seed = 17;
  MixupConfig mixup;
  mixup.rng_seed = 18;
  mixup.batch_size = config.batch_size;
  config.mixup = mixup;

  const ModelParams a = train_tdmixup(easy, ambiguous, config);
  const ModelParams b = train_tdmixup(easy, ambiguous, config);
  CHECK(a.w_out == b.w_out);
  CHECK(a.w_hidden == b.w_hidden);

  const ModelParams random_arm = train_random_mixup(data.dataset, config);
  CHECK(random_arm.w_out != a.w_out);
}

TEST_CASE("mixup training rejects overlapping pools and missing config") {
  const synth::BlobData data = synth::make_blobs({.total = 40, .seed = 58});
  const Dataset easy = split_by_ids(data.dataset, 0, 20);
  const Dataset overlapping = split_by_ids(data.dataset, 10, 40);

  TrainerConfig config;
  config.epochs = 1;
  config.batch_size = 8;
  config.hidden_width = 4;
  config.rng_seed = 19;

  CHECK_THROWS_AS(train_tdmixup(easy, overlapping, config), ConfigError);

  MixupConfig mixup;
  mixup.batch_size = config.batch_size;
  config.mixup = mixup;
  CHECK_THROWS_AS(train_tdmixup(easy, overlapping, config), DataError);

  const Dataset ambiguous = split_by_ids(data.dataset, 20, 40);
  CHECK_NOTHROW(train_tdmixup(easy, ambiguous, config));
}

TEST_CASE("checkpoints round-trip bit-exactly and reject corruption") {
  Rng rng(61);
  const ModelParams params = init_params(6, 5, 3, rng.next_u64());
  const std::filesystem::path path = "/tmp/tdmix_test_ckpt.ckpt";
  save_checkpoint(path, params, 1234);
  const Checkpoint loaded = load_checkpoint(path);
  CHECK(loaded.seed == 1234);
  CHECK(loaded.params.w_hidden == params.w_hidden);
  CHECK(loaded.params.b_hidden == params.b_hidden);
  CHECK(loaded.params.w_out == params.w_out);
  CHECK(loaded.params.b_out == params.b_out);

  atomic_write(path, "not a checkpoint\n");
  CHECK_THROWS_AS(load_checkpoint(path), DataError);
  std::filesystem::remove(path);
  CHECK_THROWS_AS(load_checkpoint(path), DataError);

  // A linear model (h = 0) round-trips too.
  const ModelParams linear = init_params(3, 0, 2, 9);
  save_checkpoint(path, linear, 9);
  const Checkpoint linear_loaded = load_checkpoint(path);
  CHECK(linear_loaded.params.hidden_width() == 0);
  CHECK(linear_loaded.params.w_out == linear.w_out);
  std::filesystem::remove(path);
}
