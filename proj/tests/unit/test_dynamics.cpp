#include <doctest.h>

#include <cmath>
#include <sstream>
#include <string>
#include <vector>

#include "tdmix/dynamics.hpp"
#include "tdmix/error.hpp"
#include "tdmix/math.hpp"

using namespace tdmix;

namespace {

// Runs fn and checks it throws a DataError whose message contains needle.
template <typename Fn>
void check_data_error(Fn&& fn, const std::string& needle) {
  try {
    fn();
    FAIL_CHECK("expected DataError containing '" << needle << "'");
  } catch (const DataError& error) {
    CAPTURE(error.what());
    CHECK(std::string(error.what()).find(needle) != std::string::npos);
  }
}

Vector vec(std::initializer_list<double> values) {
  Vector v(static_cast<Index>(values.size()));
  Index i = 0;
  for (const double x : values) v[i++] = x;
  return v;
}

}  // namespace

TEST_CASE("gold probability is the softmax of the gold logit") {
  // logits [ln 2, 0]: softmax = [2/3, 1/3].
  const Vector logits = vec({std::log(2.0), 0.0});
  CHECK(gold_probability(logits, 0) == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
  CHECK(gold_probability(logits, 1) == doctest::Approx(1.0 / 3.0).epsilon(1e-12));

  // Shift invariance: adding a constant to all logits changes nothing.
  const Vector shifted = vec({std::log(2.0) + 500.0, 500.0});
  CHECK(gold_probability(shifted, 0) == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
}

TEST_CASE("confidence and variability on a hand-computable sequence") {
  const Vector probs = vec({0.5, 1.0});
  CHECK(std::abs(confidence(probs) - 0.75) < 1e-12);
  // Population std with divisor E=2: sqrt(((0.25)^2 + (0.25)^2)/2) = 0.25.
  CHECK(std::abs(variability(probs) - 0.25) < 1e-12);
}

TEST_CASE("variability uses the population divisor, not the sample one") {
  const Vector probs = vec({0.0, 1.0, 1.0, 1.0});
  // mean 0.75; population var = (0.5625 + 3 * 0.0625) / 4 = 0.1875.
  const double expected = std::sqrt(0.1875);
  CHECK(std::abs(variability(probs) - expected) < 1e-12);
  // The sample-divisor value would be 0.5; make sure that's not what we get.
  CHECK(std::abs(variability(probs) - 0.5) > 1e-3);
}

TEST_CASE("constant sequence has zero variability") {
  const Vector probs = vec({0.7, 0.7, 0.7});
  CHECK(std::abs(confidence(probs) - 0.7) < 1e-12);
  CHECK(variability(probs) == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("empty sequences are rejected") {
  const Vector empty(0);
  CHECK_THROWS_AS(confidence(empty), DataError);
  CHECK_THROWS_AS(variability(empty), DataError);
}

TEST_CASE("trace aggregation: correctness counts argmax hits") {
  SampleTrace trace;
  trace.id = "a";
  trace.gold_label = 0;
  trace.logits.resize(2, 2);
  trace.logits.row(0) << 2.0, 0.0;  // epoch 1: argmax 0 == gold
  trace.logits.row(1) << 0.0, 2.0;  // epoch 2: argmax 1 != gold
  const std::vector<SampleStats> stats = aggregate_stats({trace});
  REQUIRE(stats.size() == 1);
  CHECK(stats[0].id == "a");
  CHECK(stats[0].epochs_observed == 2);
  CHECK(stats[0].correctness == doctest::Approx(0.5).epsilon(1e-12));
  CHECK_FALSE(stats[0].aum.has_value());

  const double p1 = gold_probability(vec({2.0, 0.0}), 0);
  const double p2 = gold_probability(vec({0.0, 2.0}), 0);
  CHECK(stats[0].confidence ==
        doctest::Approx((p1 + p2) / 2.0).epsilon(1e-12));
  const Vector probs = vec({p1, p2});
  CHECK(stats[0].variability ==
        doctest::Approx(variability(probs)).epsilon(1e-12));
}

TEST_CASE("aggregation attaches AUM values when given") {
  SampleTrace trace;
  trace.id = "a";
  trace.gold_label = 0;
  trace.logits.resize(1, 2);
  trace.logits.row(0) << 1.0, 0.0;
  IdMap<double> aums;
  aums.emplace("a", -0.25);
  const std::vector<SampleStats> stats = aggregate_stats({trace}, &aums);
  REQUIRE(stats.size() == 1);
  REQUIRE(stats[0].aum.has_value());
  CHECK(*stats[0].aum == doctest::Approx(-0.25).epsilon(1e-12));
}

TEST_CASE("log ingestion sorts traces by id and orders epochs") {
  std::istringstream log(
      R"({"id":"b","epoch":2,"gold":1,"logits":[0.5,1.5]})"
      "\n"
      R"({"id":"a","epoch":1,"gold":0,"logits":[1.0,0.0]})"
      "\n"
      R"({"id":"b","epoch":1,"gold":1,"logits":[0.0,1.0]})"
      "\n"
      R"({"id":"a","epoch":2,"gold":0,"logits":[2.0,0.0]})"
      "\n");
  const std::vector<SampleTrace> traces = ingest_dynamics_log(log);
  REQUIRE(traces.size() == 2);
  CHECK(traces[0].id == "a");
  CHECK(traces[1].id == "b");
  CHECK(traces[0].epochs() == 2);
  CHECK(traces[0].logits(0, 0) == 1.0);   // epoch 1 in row 0
  CHECK(traces[0].logits(1, 0) == 2.0);   // epoch 2 in row 1
  CHECK(traces[1].gold_label == 1);
  CHECK(traces[1].logits(1, 1) == 1.5);
}

TEST_CASE("integer ids are accepted and normalized to strings") {
  std::istringstream log(
      R"({"id":7,"epoch":1,"gold":0,"logits":[1.0,0.0]})"
      "\n");
  const std::vector<SampleTrace> traces = ingest_dynamics_log(log);
  REQUIRE(traces.size() == 1);
  CHECK(traces[0].id == "7");
}

TEST_CASE("fake-class gold labels are legal in threshold-run logs") {
  // Three logits, gold = 2 (the extra class of a threshold run).
  std::istringstream log(
      R"({"id":"t","epoch":1,"gold":2,"logits":[0.0,0.0,3.0]})"
      "\n"
      R"({"id":"t","epoch":2,"gold":2,"logits":[3.0,0.0,0.0]})"
      "\n");
  const std::vector<SampleTrace> traces = ingest_dynamics_log(log);
  REQUIRE(traces.size() == 1);
  const std::vector<SampleStats> stats = aggregate_stats(traces);
  CHECK(stats[0].correctness == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("log ingestion rejects malformed input with the line number") {
  auto ingest = [](const std::string& text) {
    std::istringstream stream(text);
    ingest_dynamics_log(stream);
  };
  const std::string good = R"({"id":"a","epoch":1,"gold":0,"logits":[1.0,0.0]})";

  check_data_error([&] { ingest(good + "\nnot json\n"); }, "line 2");
  check_data_error(
      [&] {
        ingest(good + "\n" + R"({"id":"a","epoch":1,"gold":0,"logits":[1,0]})" +
               "\n");
      },
      "duplicate");
  check_data_error(
      [&] {
        ingest(good + "\n" +
               R"({"id":"a","epoch":2,"gold":0,"logits":[1.0,0.0,0.0]})" + "\n");
      },
      "logit");
  check_data_error(
      [&] {
        ingest(good + "\n" + R"({"id":"a","epoch":2,"gold":1,"logits":[1,0]})" +
               "\n");
      },
      "gold");
  check_data_error(
      [&] {
        // Epochs 1 and 3: not contiguous.
        ingest(good + "\n" + R"({"id":"a","epoch":3,"gold":0,"logits":[1,0]})" +
               "\n");
      },
      "contiguous");
  check_data_error(
      [&] { ingest(R"({"id":"a","epoch":0,"gold":0,"logits":[1,0]})"); },
      "epoch");
  check_data_error(
      [&] { ingest(R"({"id":"a","epoch":1,"gold":5,"logits":[1,0]})"); },
      "gold");
}

TEST_CASE("ragged epoch coverage across samples is rejected") {
  std::istringstream log(
      R"({"id":"a","epoch":1,"gold":0,"logits":[1.0,0.0]})"
      "\n"
      R"({"id":"a","epoch":2,"gold":0,"logits":[1.0,0.0]})"
      "\n"
      R"({"id":"b","epoch":1,"gold":0,"logits":[1.0,0.0]})"
      "\n");
  const std::vector<SampleTrace> traces = ingest_dynamics_log(log);
  check_data_error([&] { aggregate_stats(traces); }, "ragged");
}

TEST_CASE("argmax ties go to the lowest index") {
  CHECK(argmax(vec({1.0, 1.0, 0.5})) == 0);
  CHECK(argmax(vec({0.5, 1.0, 1.0})) == 1);
}
