#pragma once

#include <Eigen/Core>

#include <map>
#include <set>
#include <string>

namespace tdmix {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using Index = Eigen::Index;

// Sample identifiers are stored as strings; integer ids from input files are
// normalized to their decimal form.
using SampleId = std::string;

// Ascending id order. Digit-only ids compare numerically (so "9" < "10"),
// everything else compares byte-wise.
bool id_less(const SampleId& a, const SampleId& b);

struct IdLess {
  bool operator()(const SampleId& a, const SampleId& b) const {
    return id_less(a, b);
  }
};

template <typename T>
using IdMap = std::map<SampleId, T, IdLess>;
using IdSet = std::set<SampleId, IdLess>;

}  // namespace tdmix
