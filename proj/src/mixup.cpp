#include "tdmix/mixup.hpp"

#include <algorithm>
#include <string>

#include "tdmix/error.hpp"

namespace tdmix {

MixSpace mix_space_from_name(std::string_view name) {
  if (name == "input") return MixSpace::Input;
  if (name == "hidden") return MixSpace::Hidden;
  throw ConfigError("unknown mix space: " + std::string(name));
}

std::string_view mix_space_name(MixSpace space) {
  return space == MixSpace::Input ? "input" : "hidden";
}

double sample_lambda(double alpha, Rng& rng) {
  if (!(alpha > 0.0)) {
    throw ConfigError("mixup alpha must be > 0, got " + std::to_string(alpha));
  }
  return rng.next_beta(alpha, alpha);
}

MixedSample mix_pair(const Vector& features_a, int label_a, const SampleId& id_a,
                     const Vector& features_b, int label_b, const SampleId& id_b,
                     double lambda, int num_classes) {
  if (features_a.size() != features_b.size()) {
    throw DataError("mix_pair: feature arity mismatch (" +
                    std::to_string(features_a.size()) + " vs " +
                    std::to_string(features_b.size()) + ")");
  }
  if (label_a < 0 || label_a >= num_classes || label_b < 0 || label_b >= num_classes) {
    throw DataError("mix_pair: label out of range");
  }
  if (!(lambda >= 0.0 && lambda <= 1.0)) {
    throw DataError("mix_pair: lambda outside [0, 1]: " + std::to_string(lambda));
  }
  MixedSample mixed;
  mixed.features = lambda * features_a + (1.0 - lambda) * features_b;
  mixed.soft_label = Vector::Zero(num_classes);
  mixed.soft_label[label_a] += lambda;
  mixed.soft_label[label_b] += 1.0 - lambda;
  mixed.lambda = lambda;
  mixed.parent_ids = {id_a, id_b};
  return mixed;
}

namespace {

// Cycling loader: uniform shuffle, sequential draws, reshuffle on exhaust.
class PoolLoader {
 public:
  PoolLoader(std::vector<SampleId> ids, Rng& rng) : ids_(std::move(ids)), rng_(rng) {
    std::sort(ids_.begin(), ids_.end(), id_less);
    rng_.shuffle(ids_);
  }

  const SampleId& next() {
    if (pos_ == ids_.size()) {
      rng_.shuffle(ids_);
      pos_ = 0;
    }
    return ids_[pos_++];
  }

 private:
  std::vector<SampleId> ids_;
  Rng& rng_;
  std::size_t pos_ = 0;
};

}  // namespace

std::vector<MixPair> build_td_schedule(const std::vector<SampleId>& easy_ids,
                                       const std::vector<SampleId>& ambiguous_ids,
                                       const MixupConfig& config, Rng& rng) {
  if (easy_ids.empty() || ambiguous_ids.empty()) {
    throw DataError("td schedule: both pools must be non-empty");
  }
  if (config.batch_size < 1) throw ConfigError("td schedule: batch_size must be >= 1");

  const std::size_t pairs = std::max(easy_ids.size(), ambiguous_ids.size());
  PoolLoader easy(easy_ids, rng);
  PoolLoader ambiguous(ambiguous_ids, rng);

  std::vector<MixPair> schedule;
  schedule.reserve(pairs);
  std::size_t produced = 0;
  while (produced < pairs) {
    const std::size_t batch =
        std::min<std::size_t>(config.batch_size, pairs - produced);
    // Per step: one mini-batch from each loader, zipped positionally.
    std::vector<SampleId> from_easy(batch);
    std::vector<SampleId> from_ambiguous(batch);
    for (std::size_t i = 0; i < batch; ++i) from_easy[i] = easy.next();
    for (std::size_t i = 0; i < batch; ++i) from_ambiguous[i] = ambiguous.next();
    for (std::size_t i = 0; i < batch; ++i) {
      schedule.push_back(
          {from_easy[i], from_ambiguous[i], sample_lambda(config.alpha, rng)});
    }
    produced += batch;
  }
  return schedule;
}

std::vector<MixPair> build_random_schedule(const std::vector<SampleId>& pool_ids,
                                           const MixupConfig& config, Rng& rng) {
  if (pool_ids.size() < 2) {
    throw DataError("random schedule: pool needs at least 2 samples");
  }
  if (config.batch_size < 1) {
    throw ConfigError("random schedule: batch_size must be >= 1");
  }

  std::vector<SampleId> first(pool_ids);
  std::sort(first.begin(), first.end(), id_less);
  std::vector<SampleId> second = first;
  rng.shuffle(first);
  rng.shuffle(second);

  std::vector<SampleId> sorted_pool(pool_ids);
  std::sort(sorted_pool.begin(), sorted_pool.end(), id_less);

  std::vector<MixPair> schedule;
  schedule.reserve(first.size());
  for (std::size_t i = 0; i < first.size(); ++i) {
    SampleId partner = second[i];
    while (partner == first[i]) {
      partner = sorted_pool[rng.next_below(sorted_pool.size())];
    }
    schedule.push_back({first[i], partner, sample_lambda(config.alpha, rng)});
  }
  return schedule;
}

}  // namespace tdmix
