#include "tdmix/serialize.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <system_error>

#include <nlohmann/json.hpp>

#include "tdmix/error.hpp"

namespace tdmix {

namespace {

using ordered_json = nlohmann::ordered_json;
using nlohmann::json;

json parse_line(const std::string& line, const std::string& where) {
  const json record = json::parse(line, nullptr, false);
  if (record.is_discarded() || !record.is_object()) {
    throw DataError(where + ": malformed JSON record");
  }
  return record;
}

SampleId id_field(const json& record, const std::string& where) {
  if (!record.contains("id")) throw DataError(where + ": missing \"id\"");
  const json& value = record.at("id");
  if (value.is_string()) return value.get<std::string>();
  if (value.is_number_integer()) return std::to_string(value.get<long long>());
  throw DataError(where + ": id must be a string or integer");
}

}  // namespace

void atomic_write(const std::filesystem::path& path, const std::string& content) {
  namespace fs = std::filesystem;
  const fs::path parent = path.parent_path();
  if (!parent.empty()) {
    std::error_code ec;
    fs::create_directories(parent, ec);
    if (ec) throw DataError("cannot create directory " + parent.string());
  }
  const fs::path temp = path.string() + ".tmp";
  {
    std::ofstream out(temp, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot open " + temp.string() + " for writing");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out) throw DataError("failed writing " + temp.string());
  }
  std::error_code ec;
  fs::rename(temp, path, ec);
  if (ec) {
    fs::remove(temp, ec);
    throw DataError("cannot move " + temp.string() + " into place");
  }
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open file: " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

std::string dynamics_log_to_jsonl(const std::vector<DynamicsRecord>& records) {
  std::string out;
  for (const DynamicsRecord& record : records) {
    ordered_json line;
    line["id"] = record.id;
    line["epoch"] = record.epoch;
    line["gold"] = record.gold_label;
    json logits = json::array();
    for (Index k = 0; k < record.logits.size(); ++k) {
      logits.push_back(record.logits[k]);
    }
    line["logits"] = std::move(logits);
    out += line.dump();
    out += '\n';
  }
  return out;
}

std::vector<SampleTrace> load_dynamics_log(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open dynamics log: " + path.string());
  return ingest_dynamics_log(in);
}

std::string categories_to_jsonl(const std::vector<CategoryAssignment>& assignments) {
  std::string out;
  for (const CategoryAssignment& assignment : assignments) {
    ordered_json line;
    line["id"] = assignment.id;
    line["region"] = std::string(region_name(assignment.region));
    line["aum_filtered"] = assignment.aum_filtered;
    out += line.dump();
    out += '\n';
  }
  return out;
}

std::vector<CategoryAssignment> load_categories(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open categories file: " + path.string());

  std::vector<CategoryAssignment> assignments;
  std::string line;
  long line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    if (line.empty()) continue;
    const std::string where = path.string() + ":" + std::to_string(line_number);
    const json record = parse_line(line, where);
    CategoryAssignment assignment;
    assignment.id = id_field(record, where);
    if (!record.contains("region") || !record.at("region").is_string()) {
      throw DataError(where + ": missing \"region\"");
    }
    assignment.region = region_from_name(record.at("region").get<std::string>());
    if (!record.contains("aum_filtered") || !record.at("aum_filtered").is_boolean()) {
      throw DataError(where + ": missing \"aum_filtered\"");
    }
    assignment.aum_filtered = record.at("aum_filtered").get<bool>();
    assignments.push_back(std::move(assignment));
  }
  if (assignments.empty()) {
    throw DataError("categories file has no records: " + path.string());
  }
  return assignments;
}

std::string aum_report_to_jsonl(const AumReport& report) {
  std::string out;
  ordered_json header;
  header["threshold_value"] = report.threshold_value;
  header["k"] = report.percentile_k;
  out += header.dump();
  out += '\n';
  for (const auto& [id, aum] : report.aum_by_sample) {
    ordered_json line;
    line["id"] = id;
    line["aum"] = aum;
    line["is_threshold_sample"] = report.threshold_ids.count(id) != 0;
    line["filtered"] = report.filtered_ids.count(id) != 0;
    out += line.dump();
    out += '\n';
  }
  return out;
}

AumReport load_aum_report(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open AUM report: " + path.string());

  AumReport report;
  std::string line;
  long line_number = 0;
  bool saw_header = false;
  while (std::getline(in, line)) {
    ++line_number;
    if (line.empty()) continue;
    const std::string where = path.string() + ":" + std::to_string(line_number);
    const json record = parse_line(line, where);
    if (!saw_header) {
      if (!record.contains("threshold_value") || !record.contains("k")) {
        throw DataError(where + ": first record must be the threshold header");
      }
      report.threshold_value = record.at("threshold_value").get<double>();
      report.percentile_k = record.at("k").get<double>();
      saw_header = true;
      continue;
    }
    const SampleId id = id_field(record, where);
    if (!record.contains("aum") || !record.at("aum").is_number()) {
      throw DataError(where + ": missing \"aum\"");
    }
    if (!report.aum_by_sample.emplace(id, record.at("aum").get<double>()).second) {
      throw DataError(where + ": duplicate id " + id);
    }
    if (record.value("is_threshold_sample", false)) report.threshold_ids.insert(id);
    if (record.value("filtered", false)) report.filtered_ids.insert(id);
  }
  if (!saw_header || report.aum_by_sample.empty()) {
    throw DataError("AUM report is empty: " + path.string());
  }
  return report;
}

std::string schedule_to_jsonl(const std::vector<MixPair>& schedule) {
  std::string out;
  for (const MixPair& pair : schedule) {
    ordered_json line;
    line["i"] = pair.first;
    line["j"] = pair.second;
    line["lambda"] = pair.lambda;
    out += line.dump();
    out += '\n';
  }
  return out;
}

std::string calibration_report_to_json(const CalibrationReport& report) {
  ordered_json out;
  out["accuracy"] = report.accuracy;
  out["ece"] = report.ece;
  out["n_bins"] = report.n_bins;
  ordered_json bins = ordered_json::array();
  for (const CalibrationBin& bin : report.bins) {
    ordered_json entry;
    entry["lower"] = bin.lower;
    entry["upper"] = bin.upper;
    entry["count"] = bin.count;
    entry["confidence"] = bin.mean_confidence;
    entry["accuracy"] = bin.mean_accuracy;
    bins.push_back(std::move(entry));
  }
  out["bins"] = std::move(bins);
  return out.dump(2) + "\n";
}

}  // namespace tdmix
