#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace orbita::cli {

/// Runs one verb. Returns the process exit status: 0 on success, 2 for bad
/// flags (usage on err), 1 for failures (JSON error record on err).
int dispatch(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

// Table generators behind the sweep and reproduce verbs, exposed for tests.
struct SweepTable {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
};
SweepTable matched_variance_sweep(const std::vector<std::string>& families, int gridPoints, double lo = 0.1,
                                  double hi = 0.95);
SweepTable mathieu_curves(int nMax, int gridPoints);

}  // namespace orbita::cli
