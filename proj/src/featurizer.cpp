#include "tdmix/featurizer.hpp"

#include <cstdint>
#include <string>

namespace tdmix {

namespace {

constexpr char kTextStart = '\x02';
constexpr char kTextEnd = '\x03';
constexpr char kPairSeparator = '\x1f';

// FNV-1a, 64-bit. Stable across platforms, no seeding.
std::uint64_t fnv1a(const char* data, std::size_t len) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (std::size_t i = 0; i < len; ++i) {
    h ^= static_cast<unsigned char>(data[i]);
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace

Vector featurize_text(std::string_view text) {
  Vector features = Vector::Zero(kTextFeatureDim);

  // Sentinels make boundary n-grams distinct from interior ones.
  std::string padded;
  padded.reserve(text.size() + 2);
  padded.push_back(kTextStart);
  padded.append(text);
  padded.push_back(kTextEnd);

  for (std::size_t n = 2; n <= 4; ++n) {
    if (padded.size() < n) break;
    for (std::size_t i = 0; i + n <= padded.size(); ++i) {
      const std::uint64_t h = fnv1a(padded.data() + i, n);
      const auto bucket = static_cast<Index>((h >> 1) % kTextFeatureDim);
      const double sign = (h & 1U) != 0 ? 1.0 : -1.0;
      features[bucket] += sign;
    }
  }

  const double norm = features.norm();
  if (norm > 0.0) features /= norm;
  return features;
}

Vector featurize_text_pair(std::string_view first, std::string_view second) {
  std::string combined;
  combined.reserve(first.size() + second.size() + 1);
  combined.append(first);
  combined.push_back(kPairSeparator);
  combined.append(second);
  return featurize_text(combined);
}

}  // namespace tdmix
