#pragma once

#include <string>
#include <vector>

#include "tdmix/dataset.hpp"
#include "tdmix/model.hpp"

namespace tdmix {

struct Prediction {
  int predicted_label = 0;  // argmax probability, ties to the lowest index
  double confidence = 0.0;  // max probability
  bool correct = false;
};

// One prediction per test sample, in dataset order.
std::vector<Prediction> evaluate(const ModelParams& params, const Dataset& test_set);

double accuracy(const std::vector<Prediction>& predictions);

struct CalibrationBin {
  double lower = 0.0;  // half-open (lower, upper]
  double upper = 0.0;
  int count = 0;
  double mean_confidence = 0.0;
  double mean_accuracy = 0.0;
};

struct CalibrationReport {
  double accuracy = 0.0;
  double ece = 0.0;  // stored as a fraction; render x100 for percent
  int n_bins = 0;
  std::vector<CalibrationBin> bins;
};

// Expected calibration error over equal-width bins on (0, 1]: a confidence v
// lands in bin ceil(v * n_bins) (v == 0 goes to bin 1); empty bins
// contribute zero.
double expected_calibration_error(const std::vector<Prediction>& predictions,
                                  int n_bins = 10);

CalibrationReport calibration_report(const std::vector<Prediction>& predictions,
                                     int n_bins = 10);

// Fixed-width text rendering of a report (the CLI output).
std::string render_report_table(const CalibrationReport& report,
                                const std::string& title);

}  // namespace tdmix
