#include "tdmix/dynamics.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <sstream>
#include <string>
#include <utility>

#include "tdmix/error.hpp"
#include "tdmix/math.hpp"

namespace tdmix {

namespace {

using nlohmann::json;

SampleId id_from_json(const json& value, std::size_t line_no) {
  if (value.is_string()) return value.get<std::string>();
  if (value.is_number_integer()) return std::to_string(value.get<long long>());
  throw DataError("line " + std::to_string(line_no) +
                  ": \"id\" must be a string or integer");
}

}  // namespace

double gold_probability(const Vector& logits, int gold_label) {
  if (gold_label < 0 || gold_label >= logits.size()) {
    throw DataError("gold label " + std::to_string(gold_label) +
                    " out of range for " + std::to_string(logits.size()) +
                    " logits");
  }
  return softmax(logits)[gold_label];
}

Vector gold_probabilities(const SampleTrace& trace) {
  Vector probs(trace.logits.rows());
  for (Index e = 0; e < trace.logits.rows(); ++e) {
    probs[e] = gold_probability(trace.logits.row(e).transpose(), trace.gold_label);
  }
  return probs;
}

double confidence(const Vector& probs) {
  if (probs.size() == 0) throw DataError("confidence of an empty sequence");
  return probs.mean();
}

double variability(const Vector& probs) {
  if (probs.size() == 0) throw DataError("variability of an empty sequence");
  return population_std(probs);
}

std::vector<SampleTrace> ingest_dynamics_log(std::istream& stream) {
  struct PendingTrace {
    int gold_label = 0;
    std::vector<std::pair<int, Vector>> rows;  // (epoch, logits)
  };
  IdMap<PendingTrace> pending;
  Index arity = -1;

  std::string line;
  std::size_t line_no = 0;
  while (std::getline(stream, line)) {
    ++line_no;
    if (line.empty()) continue;
    json record = json::parse(line, nullptr, false);
    if (record.is_discarded() || !record.is_object()) {
      throw DataError("line " + std::to_string(line_no) + ": malformed record");
    }
    if (!record.contains("id") || !record.contains("epoch") ||
        !record.contains("gold") || !record.contains("logits")) {
      throw DataError("line " + std::to_string(line_no) +
                      ": record needs id, epoch, gold, logits");
    }
    const SampleId id = id_from_json(record["id"], line_no);
    if (!record["epoch"].is_number_integer() || !record["gold"].is_number_integer() ||
        !record["logits"].is_array()) {
      throw DataError("line " + std::to_string(line_no) + ": malformed record");
    }
    const int epoch = record["epoch"].get<int>();
    const int gold = record["gold"].get<int>();
    if (epoch < 1) {
      throw DataError("line " + std::to_string(line_no) + ": epoch must be >= 1");
    }
    Vector logits(record["logits"].size());
    for (std::size_t k = 0; k < record["logits"].size(); ++k) {
      if (!record["logits"][k].is_number()) {
        throw DataError("line " + std::to_string(line_no) +
                        ": logits must be numbers");
      }
      logits[static_cast<Index>(k)] = record["logits"][k].get<double>();
    }
    if (arity < 0) arity = logits.size();
    if (logits.size() != arity) {
      throw DataError("line " + std::to_string(line_no) + ": logit vector of length " +
                      std::to_string(logits.size()) + ", expected " +
                      std::to_string(arity));
    }
    if (gold < 0 || gold >= arity) {
      throw DataError("line " + std::to_string(line_no) + ": gold label " +
                      std::to_string(gold) + " out of range");
    }

    auto [it, inserted] = pending.try_emplace(id);
    if (inserted) {
      it->second.gold_label = gold;
    } else if (it->second.gold_label != gold) {
      throw DataError("line " + std::to_string(line_no) + ": sample " + id +
                      " changes gold label across epochs");
    }
    for (const auto& [e, unused] : it->second.rows) {
      if (e == epoch) {
        throw DataError("duplicate record for sample " + id + ", epoch " +
                        std::to_string(epoch));
      }
    }
    it->second.rows.emplace_back(epoch, std::move(logits));
  }

  std::vector<SampleTrace> traces;
  traces.reserve(pending.size());
  for (auto& [id, p] : pending) {
    std::sort(p.rows.begin(), p.rows.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    const int epochs = static_cast<int>(p.rows.size());
    for (int e = 0; e < epochs; ++e) {
      if (p.rows[e].first != e + 1) {
        throw DataError("sample " + id + ": epochs are not contiguous 1.." +
                        std::to_string(epochs) + " (missing epoch " +
                        std::to_string(e + 1) + ")");
      }
    }
    SampleTrace trace;
    trace.id = id;
    trace.gold_label = p.gold_label;
    trace.logits.resize(epochs, arity);
    for (int e = 0; e < epochs; ++e) {
      trace.logits.row(e) = p.rows[e].second.transpose();
    }
    traces.push_back(std::move(trace));
  }
  return traces;
}

std::vector<SampleStats> aggregate_stats(const std::vector<SampleTrace>& traces,
                                         const IdMap<double>* aum_values) {
  if (traces.empty()) return {};
  const int epochs = traces.front().epochs();
  std::vector<SampleStats> stats;
  stats.reserve(traces.size());
  for (const SampleTrace& trace : traces) {
    if (trace.epochs() != epochs) {
      throw DataError("ragged epoch coverage: sample " + trace.id + " has " +
                      std::to_string(trace.epochs()) + " epochs, expected " +
                      std::to_string(epochs));
    }
    const Vector probs = gold_probabilities(trace);
    SampleStats s;
    s.id = trace.id;
    s.confidence = confidence(probs);
    s.variability = variability(probs);
    int correct = 0;
    for (Index e = 0; e < trace.logits.rows(); ++e) {
      if (argmax(trace.logits.row(e).transpose()) == trace.gold_label) ++correct;
    }
    s.correctness = static_cast<double>(correct) / static_cast<double>(epochs);
    s.epochs_observed = epochs;
    if (aum_values != nullptr) {
      if (auto it = aum_values->find(trace.id); it != aum_values->end()) {
        s.aum = it->second;
      }
    }
    stats.push_back(std::move(s));
  }
  std::sort(stats.begin(), stats.end(),
            [](const SampleStats& a, const SampleStats& b) { return id_less(a.id, b.id); });
  return stats;
}

}  // namespace tdmix
