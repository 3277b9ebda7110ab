#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "tdmix/aum.hpp"
#include "tdmix/calibration.hpp"
#include "tdmix/cartography.hpp"
#include "tdmix/dynamics.hpp"
#include "tdmix/mixup.hpp"

namespace tdmix {

// Atomically replaces path with content (temp file + rename).
void atomic_write(const std::filesystem::path& path, const std::string& content);

std::string read_file(const std::filesystem::path& path);

// Dynamics log: one {"id", "epoch", "gold", "logits"} object per line,
// floats at full round-trip precision.
std::string dynamics_log_to_jsonl(const std::vector<DynamicsRecord>& records);
std::vector<SampleTrace> load_dynamics_log(const std::filesystem::path& path);

// Categories: {"id", "region", "aum_filtered"} per line.
std::string categories_to_jsonl(const std::vector<CategoryAssignment>& assignments);
std::vector<CategoryAssignment> load_categories(const std::filesystem::path& path);

// AUM report: header {"threshold_value", "k"} then one
// {"id", "aum", "is_threshold_sample", "filtered"} line per sample.
std::string aum_report_to_jsonl(const AumReport& report);
AumReport load_aum_report(const std::filesystem::path& path);

// Mixed-pair schedule: {"i", "j", "lambda"} per line, for debugging/repro.
std::string schedule_to_jsonl(const std::vector<MixPair>& schedule);

std::string calibration_report_to_json(const CalibrationReport& report);

}  // namespace tdmix
