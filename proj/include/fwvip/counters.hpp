#pragma once

namespace fwvip {

// Cumulative oracle work. `diag` collects projections and LMO calls made
// only to evaluate certificates or metrics; solvers never feed those back
// into their iterates.
struct OracleCounters {
  long lmo = 0;
  long proj = 0;
  long g_evals = 0;
  long diag = 0;

  friend bool operator==(const OracleCounters&, const OracleCounters&) = default;
};

}  // namespace fwvip
