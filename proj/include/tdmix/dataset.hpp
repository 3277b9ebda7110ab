#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "tdmix/types.hpp"

namespace tdmix {

struct Sample {
  SampleId id;
  Vector features;
  int label = 0;
};

struct Dataset {
  std::vector<Sample> samples;  // ascending id order
  int num_classes = 0;
  int feature_dim = 0;
  std::string provenance;

  int size() const { return static_cast<int>(samples.size()); }
  const Sample& by_id(const SampleId& id) const;
  std::vector<SampleId> ids() const;
  std::vector<std::pair<SampleId, int>> labels() const;

  // Subset restricted to the given ids (all must exist).
  Dataset subset(const IdSet& keep) const;
};

enum class DatasetFormat { Vectors, Text };

DatasetFormat dataset_format_from_name(std::string_view name);

// Reads a line-delimited dataset file.
//   vectors: {"id":..., "label": <int>, "features": [<float>...]}
//   text:    {"id":..., "label": <int>, "text": "...", "text2": "..."?}
// Text is featurized with the hashed character-n-gram featurizer. The class
// count is max label + 1. Throws DataError naming the offending line on
// parse failures, duplicate ids, negative labels, or ragged arity.
Dataset ingest_dataset(const std::filesystem::path& path, DatasetFormat format);

}  // namespace tdmix
