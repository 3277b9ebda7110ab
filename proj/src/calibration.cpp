#include "tdmix/calibration.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "tdmix/error.hpp"
#include "tdmix/math.hpp"

namespace tdmix {

std::vector<Prediction> evaluate(const ModelParams& params, const Dataset& test_set) {
  if (test_set.samples.empty()) throw DataError("evaluate: empty test set");
  if (test_set.feature_dim != params.input_dim()) {
    throw DataError("evaluate: feature arity mismatch");
  }
  if (test_set.num_classes > params.num_outputs()) {
    throw DataError("evaluate: test set has labels the model cannot produce");
  }

  std::vector<Prediction> predictions;
  predictions.reserve(test_set.samples.size());
  for (const Sample& sample : test_set.samples) {
    const ForwardResult out = forward(params, sample.features);
    const int predicted = argmax(out.probabilities);
    Prediction p;
    p.predicted_label = predicted;
    p.confidence = out.probabilities[predicted];
    p.correct = predicted == sample.label;
    predictions.push_back(p);
  }
  return predictions;
}

double accuracy(const std::vector<Prediction>& predictions) {
  if (predictions.empty()) throw DataError("accuracy: no predictions");
  std::size_t correct = 0;
  for (const Prediction& p : predictions) {
    if (p.correct) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(predictions.size());
}

namespace {

// Bin index in [0, n_bins) for a confidence in [0, 1]: equal-width bins over
// (0, 1], upper edge inclusive; a confidence of exactly 0 joins the first bin.
int bin_index(double confidence, int n_bins) {
  if (!(confidence >= 0.0 && confidence <= 1.0)) {
    throw DataError("confidence outside [0, 1]");
  }
  const int raw = static_cast<int>(std::ceil(confidence * n_bins));
  return std::clamp(raw, 1, n_bins) - 1;
}

}  // namespace

CalibrationReport calibration_report(const std::vector<Prediction>& predictions,
                                     int n_bins) {
  if (n_bins < 1) throw ConfigError("calibration: n_bins must be >= 1");
  if (predictions.empty()) throw DataError("calibration: no predictions");

  CalibrationReport report;
  report.n_bins = n_bins;
  report.accuracy = accuracy(predictions);
  report.bins.resize(static_cast<std::size_t>(n_bins));
  std::vector<double> conf_sum(static_cast<std::size_t>(n_bins), 0.0);
  std::vector<double> acc_sum(static_cast<std::size_t>(n_bins), 0.0);

  for (int m = 0; m < n_bins; ++m) {
    report.bins[static_cast<std::size_t>(m)].lower =
        static_cast<double>(m) / n_bins;
    report.bins[static_cast<std::size_t>(m)].upper =
        static_cast<double>(m + 1) / n_bins;
  }
  for (const Prediction& p : predictions) {
    const auto m = static_cast<std::size_t>(bin_index(p.confidence, n_bins));
    report.bins[m].count += 1;
    conf_sum[m] += p.confidence;
    acc_sum[m] += p.correct ? 1.0 : 0.0;
  }

  double ece = 0.0;
  const auto n = static_cast<double>(predictions.size());
  for (std::size_t m = 0; m < report.bins.size(); ++m) {
    CalibrationBin& bin = report.bins[m];
    if (bin.count == 0) continue;
    bin.mean_confidence = conf_sum[m] / bin.count;
    bin.mean_accuracy = acc_sum[m] / bin.count;
    ece += (bin.count / n) * std::abs(bin.mean_accuracy - bin.mean_confidence);
  }
  report.ece = ece;
  return report;
}

double expected_calibration_error(const std::vector<Prediction>& predictions,
                                  int n_bins) {
  return calibration_report(predictions, n_bins).ece;
}

std::string render_report_table(const CalibrationReport& report,
                                const std::string& title) {
  std::ostringstream out;
  char line[160];
  out << title << "\n";
  std::snprintf(line, sizeof(line), "  accuracy: %.4f\n  ECE: %.2f%%\n",
                report.accuracy, report.ece * 100.0);
  out << line;
  out << "  bin        count  confidence  accuracy\n";
  for (const CalibrationBin& bin : report.bins) {
    if (bin.count == 0) {
      std::snprintf(line, sizeof(line), "  (%.2f,%.2f]  %5d           -         -\n",
                    bin.lower, bin.upper, 0);
    } else {
      std::snprintf(line, sizeof(line), "  (%.2f,%.2f]  %5ld      %.4f    %.4f\n",
                    bin.lower, bin.upper, static_cast<long>(bin.count),
                    bin.mean_confidence, bin.mean_accuracy);
    }
    out << line;
  }
  return out.str();
}

}  // namespace tdmix
