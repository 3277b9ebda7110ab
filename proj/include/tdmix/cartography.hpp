#pragma once

#include <string_view>
#include <vector>

#include "tdmix/dynamics.hpp"
#include "tdmix/types.hpp"

namespace tdmix {

enum class Region { EasyToLearn, Ambiguous, HardToLearn };

std::string_view region_name(Region region);  // "easy" / "ambiguous" / "hard"
Region region_from_name(std::string_view name);

struct CategoryAssignment {
  SampleId id;
  Region region = Region::HardToLearn;
  bool aum_filtered = false;  // set by the AUM stage, false until then
};

// Assigns each sample to exactly one region:
//   Ambiguous    = top floor(fraction*N) by variability (descending)
//   EasyToLearn  = top floor(fraction*N) by confidence (descending) among the
//                  samples not already Ambiguous
//   HardToLearn  = the rest
// Ties break by lower variability (easy selection) then ascending id.
// Requires N >= 3 and 0 < fraction <= 0.5. Returns assignments sorted by id.
std::vector<CategoryAssignment> categorize(const std::vector<SampleStats>& stats,
                                           double fraction = 0.33);

struct DatamapPoint {
  SampleId id;
  double variability = 0.0;
  double confidence = 0.0;
  double correctness = 0.0;
  Region region = Region::HardToLearn;
};

// One point per sample in ascending id order; coordinates pass through
// unchanged from the stats.
std::vector<DatamapPoint> datamap_points(
    const std::vector<SampleStats>& stats,
    const std::vector<CategoryAssignment>& assignments);

}  // namespace tdmix
