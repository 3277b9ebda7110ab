#include "tdmix/dataset.hpp"

#include <algorithm>
#include <fstream>
#include <string>

#include <nlohmann/json.hpp>

#include "tdmix/error.hpp"
#include "tdmix/featurizer.hpp"

namespace tdmix {

namespace {

using nlohmann::json;

SampleId id_from_json(const json& value, const std::string& where) {
  if (value.is_string()) return value.get<std::string>();
  if (value.is_number_integer()) return std::to_string(value.get<long long>());
  throw DataError(where + ": id must be a string or integer");
}

}  // namespace

const Sample& Dataset::by_id(const SampleId& id) const {
  const auto it = std::lower_bound(
      samples.begin(), samples.end(), id,
      [](const Sample& s, const SampleId& key) { return id_less(s.id, key); });
  if (it == samples.end() || it->id != id) {
    throw DataError("unknown sample id: " + id);
  }
  return *it;
}

std::vector<SampleId> Dataset::ids() const {
  std::vector<SampleId> out;
  out.reserve(samples.size());
  for (const Sample& s : samples) out.push_back(s.id);
  return out;
}

std::vector<std::pair<SampleId, int>> Dataset::labels() const {
  std::vector<std::pair<SampleId, int>> out;
  out.reserve(samples.size());
  for (const Sample& s : samples) out.emplace_back(s.id, s.label);
  return out;
}

Dataset Dataset::subset(const IdSet& keep) const {
  Dataset out;
  out.num_classes = num_classes;
  out.feature_dim = feature_dim;
  out.provenance = provenance;
  out.samples.reserve(keep.size());
  for (const Sample& s : samples) {
    if (keep.count(s.id) != 0) out.samples.push_back(s);
  }
  if (out.samples.size() != keep.size()) {
    for (const SampleId& id : keep) {
      bool found = false;
      for (const Sample& s : out.samples) {
        if (s.id == id) {
          found = true;
          break;
        }
      }
      if (!found) throw DataError("subset: unknown sample id: " + id);
    }
  }
  return out;
}

DatasetFormat dataset_format_from_name(std::string_view name) {
  if (name == "vectors") return DatasetFormat::Vectors;
  if (name == "text") return DatasetFormat::Text;
  throw ConfigError("unknown dataset format: " + std::string(name));
}

Dataset ingest_dataset(const std::filesystem::path& path, DatasetFormat format) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open dataset file: " + path.string());

  Dataset dataset;
  dataset.provenance = path.string();

  std::string line;
  long line_number = 0;
  int max_label = -1;
  while (std::getline(in, line)) {
    ++line_number;
    if (line.empty()) continue;
    const std::string where = path.string() + ":" + std::to_string(line_number);

    const json record = json::parse(line, nullptr, false);
    if (record.is_discarded() || !record.is_object()) {
      throw DataError(where + ": malformed JSON record");
    }
    if (!record.contains("id") || !record.contains("label")) {
      throw DataError(where + ": record needs \"id\" and \"label\"");
    }

    Sample sample;
    sample.id = id_from_json(record.at("id"), where);
    if (!record.at("label").is_number_integer()) {
      throw DataError(where + ": label must be an integer");
    }
    sample.label = record.at("label").get<int>();
    if (sample.label < 0) throw DataError(where + ": negative label");
    max_label = std::max(max_label, sample.label);

    if (format == DatasetFormat::Vectors) {
      if (!record.contains("features") || !record.at("features").is_array()) {
        throw DataError(where + ": vectors record needs a \"features\" array");
      }
      const json& values = record.at("features");
      sample.features.resize(static_cast<Index>(values.size()));
      Index k = 0;
      for (const json& v : values) {
        if (!v.is_number()) throw DataError(where + ": non-numeric feature");
        sample.features[k++] = v.get<double>();
      }
    } else {
      if (!record.contains("text") || !record.at("text").is_string()) {
        throw DataError(where + ": text record needs a \"text\" string");
      }
      const auto text = record.at("text").get<std::string>();
      if (record.contains("text2")) {
        if (!record.at("text2").is_string()) {
          throw DataError(where + ": \"text2\" must be a string");
        }
        sample.features =
            featurize_text_pair(text, record.at("text2").get<std::string>());
      } else {
        sample.features = featurize_text(text);
      }
    }

    if (dataset.samples.empty()) {
      dataset.feature_dim = static_cast<int>(sample.features.size());
      if (dataset.feature_dim == 0) throw DataError(where + ": empty feature vector");
    } else if (sample.features.size() != dataset.feature_dim) {
      throw DataError(where + ": ragged feature arity");
    }
    dataset.samples.push_back(std::move(sample));
  }

  if (dataset.samples.empty()) {
    throw DataError("dataset file has no records: " + path.string());
  }

  std::sort(dataset.samples.begin(), dataset.samples.end(),
            [](const Sample& a, const Sample& b) { return id_less(a.id, b.id); });
  for (std::size_t i = 1; i < dataset.samples.size(); ++i) {
    if (dataset.samples[i - 1].id == dataset.samples[i].id) {
      throw DataError("duplicate sample id in " + path.string() + ": " +
                      dataset.samples[i].id);
    }
  }
  dataset.num_classes = max_label + 1;
  if (dataset.num_classes < 2) {
    throw DataError("dataset needs at least two classes: " + path.string());
  }
  return dataset;
}

}  // namespace tdmix
