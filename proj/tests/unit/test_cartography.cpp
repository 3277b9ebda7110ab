#include <doctest.h>

#include <algorithm>
#include <cstdio>
#include <set>
#include <string>
#include <vector>

#include "tdmix/cartography.hpp"
#include "tdmix/error.hpp"
#include "tdmix/rng.hpp"

using namespace tdmix;

namespace {

SampleStats stat(const std::string& id, double conf, double var) {
  SampleStats s;
  s.id = id;
  s.confidence = conf;
  s.variability = var;
  s.correctness = conf;
  s.epochs_observed = 4;
  return s;
}

std::vector<SampleStats> random_stats(int n, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<SampleStats> stats;
  for (int i = 0; i < n; ++i) {
    char id[16];
    std::snprintf(id, sizeof(id), "r%04d", i);
    stats.push_back(stat(id, rng.next_unit(), 0.5 * rng.next_unit()));
  }
  return stats;
}

IdSet ids_in(const std::vector<CategoryAssignment>& assignments, Region region) {
  IdSet out;
  for (const CategoryAssignment& a : assignments) {
    if (a.region == region) out.insert(a.id);
  }
  return out;
}

}  // namespace

TEST_CASE("region fractions: floor(0.33 N) ambiguous and easy, rest hard") {
  const auto stats = random_stats(100, 5);
  const auto assignments = categorize(stats, 0.33);
  REQUIRE(assignments.size() == 100);
  CHECK(ids_in(assignments, Region::Ambiguous).size() == 33);
  CHECK(ids_in(assignments, Region::EasyToLearn).size() == 33);
  CHECK(ids_in(assignments, Region::HardToLearn).size() == 34);

  // Assignments come back sorted by id and cover every sample exactly once.
  for (std::size_t i = 1; i < assignments.size(); ++i) {
    CHECK(id_less(assignments[i - 1].id, assignments[i].id));
  }
}

TEST_CASE("regions partition the sample set disjointly") {
  const auto stats = random_stats(59, 6);
  const auto assignments = categorize(stats, 0.33);
  const IdSet easy = ids_in(assignments, Region::EasyToLearn);
  const IdSet ambiguous = ids_in(assignments, Region::Ambiguous);
  const IdSet hard = ids_in(assignments, Region::HardToLearn);
  CHECK(easy.size() + ambiguous.size() + hard.size() == stats.size());
  for (const SampleId& id : easy) {
    CHECK(ambiguous.count(id) == 0);
    CHECK(hard.count(id) == 0);
  }
  for (const SampleId& id : ambiguous) CHECK(hard.count(id) == 0);
}

TEST_CASE("membership matches an independently ranked oracle") {
  const auto stats = random_stats(200, 7);
  const auto assignments = categorize(stats, 0.25);
  const std::size_t quota = 50;  // floor(0.25 * 200)

  // Oracle: sort copies with plain comparators and take prefixes.
  std::vector<SampleStats> by_variability = stats;
  std::sort(by_variability.begin(), by_variability.end(),
            [](const SampleStats& a, const SampleStats& b) {
              return a.variability > b.variability;
            });
  IdSet expect_ambiguous;
  for (std::size_t i = 0; i < quota; ++i) {
    expect_ambiguous.insert(by_variability[i].id);
  }

  std::vector<SampleStats> rest;
  for (const SampleStats& s : stats) {
    if (expect_ambiguous.count(s.id) == 0) rest.push_back(s);
  }
  std::sort(rest.begin(), rest.end(),
            [](const SampleStats& a, const SampleStats& b) {
              return a.confidence > b.confidence;
            });
  IdSet expect_easy;
  for (std::size_t i = 0; i < quota; ++i) expect_easy.insert(rest[i].id);

  CHECK(ids_in(assignments, Region::Ambiguous) == expect_ambiguous);
  CHECK(ids_in(assignments, Region::EasyToLearn) == expect_easy);
}

TEST_CASE("tie-breaks are deterministic: lower variability, then id") {
  // Four samples with equal confidence; easy selection must prefer the lower
  // variability and then the smaller id.
  std::vector<SampleStats> stats{
      stat("d", 0.9, 0.40),
      stat("c", 0.9, 0.10),
      stat("b", 0.9, 0.10),
      stat("a", 0.5, 0.45),
  };
  // fraction 0.25 of 4 -> 1 ambiguous (a, top variability... d has 0.40, a has
  // 0.45 -> a), then 1 easy from {b, c, d}: confidence ties at 0.9, lower
  // variability ties between b and c, id b wins.
  const auto assignments = categorize(stats, 0.25);
  const IdSet ambiguous = ids_in(assignments, Region::Ambiguous);
  const IdSet easy = ids_in(assignments, Region::EasyToLearn);
  REQUIRE(ambiguous.size() == 1);
  REQUIRE(easy.size() == 1);
  CHECK(ambiguous.count("a") == 1);
  CHECK(easy.count("b") == 1);

  // Identical stats in, identical assignment out.
  const auto again = categorize(stats, 0.25);
  REQUIRE(assignments.size() == again.size());
  for (std::size_t i = 0; i < assignments.size(); ++i) {
    CHECK(assignments[i].id == again[i].id);
    CHECK(assignments[i].region == again[i].region);
  }
}

TEST_CASE("degenerate inputs are rejected") {
  const auto stats = random_stats(10, 8);
  CHECK_THROWS_AS(categorize(stats, 0.0), ConfigError);
  CHECK_THROWS_AS(categorize(stats, 0.51), ConfigError);
  CHECK_THROWS_AS(categorize(stats, -0.1), ConfigError);
  CHECK_THROWS_AS(categorize(random_stats(2, 9), 0.33), DataError);
}

TEST_CASE("fresh assignments start with aum_filtered = false") {
  const auto assignments = categorize(random_stats(12, 10), 0.33);
  for (const CategoryAssignment& a : assignments) {
    CHECK_FALSE(a.aum_filtered);
  }
}

TEST_CASE("region names round-trip") {
  for (const Region region :
       {Region::EasyToLearn, Region::Ambiguous, Region::HardToLearn}) {
    CHECK(region_from_name(region_name(region)) == region);
  }
  CHECK_THROWS_AS(region_from_name("???"), DataError);
}

TEST_CASE("datamap points pass coordinates through in id order") {
  const auto stats = random_stats(20, 11);
  const auto assignments = categorize(stats, 0.33);
  const auto points = datamap_points(stats, assignments);
  REQUIRE(points.size() == stats.size());
  for (std::size_t i = 0; i < points.size(); ++i) {
    CHECK(points[i].id == assignments[i].id);
    CHECK(points[i].region == assignments[i].region);
  }
  // Spot-check one sample's coordinates against its stats.
  for (const SampleStats& s : stats) {
    const auto it = std::find_if(
        points.begin(), points.end(),
        [&](const DatamapPoint& p) { return p.id == s.id; });
    REQUIRE(it != points.end());
    CHECK(it->confidence == s.confidence);
    CHECK(it->variability == s.variability);
    CHECK(it->correctness == s.correctness);
  }
}
