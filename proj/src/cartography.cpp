#include "tdmix/cartography.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "tdmix/error.hpp"

namespace tdmix {

std::string_view region_name(Region region) {
  switch (region) {
    case Region::EasyToLearn: return "easy";
    case Region::Ambiguous: return "ambiguous";
    case Region::HardToLearn: return "hard";
  }
  return "hard";
}

Region region_from_name(std::string_view name) {
  if (name == "easy") return Region::EasyToLearn;
  if (name == "ambiguous") return Region::Ambiguous;
  if (name == "hard") return Region::HardToLearn;
  throw DataError("unknown region name: " + std::string(name));
}

std::vector<CategoryAssignment> categorize(const std::vector<SampleStats>& stats,
                                           double fraction) {
  if (stats.empty()) throw DataError("categorize: empty stats");
  if (!(fraction > 0.0 && fraction <= 0.5)) {
    throw ConfigError("categorize: fraction must be in (0, 0.5], got " +
                      std::to_string(fraction));
  }
  const std::size_t n = stats.size();
  if (n < 3) throw DataError("categorize: need at least 3 samples");
  const std::size_t take =
      static_cast<std::size_t>(std::floor(fraction * static_cast<double>(n)));

  std::vector<const SampleStats*> by_variability;
  by_variability.reserve(n);
  for (const SampleStats& s : stats) by_variability.push_back(&s);
  std::sort(by_variability.begin(), by_variability.end(),
            [](const SampleStats* a, const SampleStats* b) {
              if (a->variability != b->variability) return a->variability > b->variability;
              return id_less(a->id, b->id);
            });

  IdMap<Region> regions;
  for (std::size_t i = 0; i < take; ++i) {
    regions.emplace(by_variability[i]->id, Region::Ambiguous);
  }

  std::vector<const SampleStats*> remaining(by_variability.begin() + take,
                                            by_variability.end());
  std::sort(remaining.begin(), remaining.end(),
            [](const SampleStats* a, const SampleStats* b) {
              if (a->confidence != b->confidence) return a->confidence > b->confidence;
              if (a->variability != b->variability) return a->variability < b->variability;
              return id_less(a->id, b->id);
            });
  for (std::size_t i = 0; i < remaining.size(); ++i) {
    regions.emplace(remaining[i]->id,
                    i < take ? Region::EasyToLearn : Region::HardToLearn);
  }

  std::vector<CategoryAssignment> assignments;
  assignments.reserve(n);
  for (const auto& [id, region] : regions) {
    assignments.push_back({id, region, false});
  }
  return assignments;
}

std::vector<DatamapPoint> datamap_points(
    const std::vector<SampleStats>& stats,
    const std::vector<CategoryAssignment>& assignments) {
  if (stats.empty()) throw DataError("datamap_points: empty stats");
  IdMap<Region> regions;
  for (const CategoryAssignment& a : assignments) regions.emplace(a.id, a.region);

  std::vector<const SampleStats*> ordered;
  ordered.reserve(stats.size());
  for (const SampleStats& s : stats) ordered.push_back(&s);
  std::sort(ordered.begin(), ordered.end(),
            [](const SampleStats* a, const SampleStats* b) { return id_less(a->id, b->id); });

  std::vector<DatamapPoint> points;
  points.reserve(stats.size());
  for (const SampleStats* s : ordered) {
    const auto it = regions.find(s->id);
    if (it == regions.end()) {
      throw DataError("datamap_points: sample " + s->id + " has no region");
    }
    points.push_back({s->id, s->variability, s->confidence, s->correctness, it->second});
  }
  return points;
}

}  // namespace tdmix
