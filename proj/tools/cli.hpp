#pragma once

#include <iosfwd>

namespace impgap::cli {

enum ExitCode {
  kOk = 0,
  kInputError = 1,
  kInfeasible = 2,
  kResidualFail = 3,
  kGapDetected = 4,
  kInconclusive = 5,
};

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace impgap::cli
