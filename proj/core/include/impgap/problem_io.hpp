#pragma once

// YAML problem files.
//
//   name: ex1
//   n: 2
//   m: 1
//   f: ["0", "x1"]
//   g:
//     - ["1", "0"]            # one list of n expressions per control
//   cone: {kind: orthant, tags: [nonneg]}     # or {kind: full}
//                                             # or {kind: generated, generators: [[1, 0], [1, 1]]}
//   K: 1                      # a number or "inf"
//   cost: "-x2_1"             # variables t1, x1_i, t2, x2_i, v
//   target:
//     t1: {fixed: 0}
//     x1: [{fixed: 0}, {fixed: 0}]
//     t2: {fixed: 1}
//     x2: [free, {hi: 0}]     # free | {fixed: a} | {lo: a} | {hi: b} | {lo: a, hi: b}
//     halfspaces:             # optional, a over (t1, x1, t2, x2)
//       - {a: [0, 0, 0, 0, 1, 1], b: 0}
//     epigraph: false

#include "impgap/model.hpp"

#include <stdexcept>
#include <string>
#include <string_view>

namespace impgap {

class ProblemFormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

ProblemSpec parse_problem(std::string_view text);
ProblemSpec load_problem(const std::string& path);
std::string dump_problem(const ProblemSpec& p);

}  // namespace impgap
