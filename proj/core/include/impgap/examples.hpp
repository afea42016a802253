#pragma once

// Bundled problems with a known extended minimizer and one multiplier set each.

#include "impgap/model.hpp"
#include "impgap/pmp.hpp"
#include "impgap/process.hpp"

#include <stdexcept>
#include <string>
#include <vector>

namespace impgap {

struct BundledExample {
  std::string id;
  std::string summary;
  std::string problem_yaml;
  ProblemSpec problem;
  ExtendedProcess minimizer;  // 40 uniform intervals on [0, 2]
  MultiplierSet multipliers;
};

class UnknownExampleError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

std::vector<std::string> example_ids();
const BundledExample& bundled_example(const std::string& id);

}  // namespace impgap
