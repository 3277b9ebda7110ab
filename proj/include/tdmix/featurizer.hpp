#pragma once

#include <string_view>

#include "tdmix/types.hpp"

namespace tdmix {

// Hashed bag of character n-grams (n = 2..4) with signed hashing into a
// 2048-dimensional vector, L2-normalized. Text is wrapped in STX/ETX
// boundary sentinels so even single-character input produces n-grams.
inline constexpr int kTextFeatureDim = 2048;

Vector featurize_text(std::string_view text);

// Sentence pair: both parts joined with a separator token, then featurized.
Vector featurize_text_pair(std::string_view first, std::string_view second);

}  // namespace tdmix
