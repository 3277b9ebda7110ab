#include "tdmix/types.hpp"

#include <algorithm>
#include <cctype>

namespace tdmix {

namespace {

bool all_digits(const SampleId& s) {
  return !s.empty() && std::all_of(s.begin(), s.end(), [](unsigned char c) {
    return std::isdigit(c) != 0;
  });
}

}  // namespace

bool id_less(const SampleId& a, const SampleId& b) {
  if (all_digits(a) && all_digits(b)) {
    const std::size_t za = a.find_first_not_of('0');
    const std::size_t zb = b.find_first_not_of('0');
    const std::string_view na =
        za == std::string::npos ? std::string_view("0") : std::string_view(a).substr(za);
    const std::string_view nb =
        zb == std::string::npos ? std::string_view("0") : std::string_view(b).substr(zb);
    if (na.size() != nb.size()) return na.size() < nb.size();
    if (na != nb) return na < nb;
    return a < b;  // "007" vs "7": total order on the raw text
  }
  return a < b;
}

}  // namespace tdmix
