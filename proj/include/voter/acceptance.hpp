#pragma once

// The go/no-go battery: fourteen numbered checks covering the exact moment
// identities, the spectral and bottleneck facts, the three limit laws
// (exponential meeting, diffusive densities, Kingman coalescence), the
// mean-field residual and torus scaling behaviour, and thread-count
// determinism of every randomized statistic.  One PASS/FAIL line per check.
//
// All Monte Carlo statistics are deterministic functions of master_seed
// alone; check 14 re-runs them at a different worker count and requires the
// printed fingerprints to match byte for byte.

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace vm {

struct CriterionResult {
  int index = 0;
  std::string name;
  bool pass = false;
  std::string detail;       // one-line numeric summary
  std::string fingerprint;  // %.17g dump of the randomized statistics ("" if exact-only)
};

struct AcceptanceOptions {
  std::uint64_t master_seed = 20260819ull;
  unsigned threads = 0;        // 0 = default_threads()
  std::vector<int> only;       // restrict to these criterion indices (empty = all)
  std::ostream* log = nullptr; // when set, one line per criterion as it finishes
};

std::vector<CriterionResult> run_acceptance(const AcceptanceOptions& opts);

bool all_passed(const std::vector<CriterionResult>& results);

}  // namespace vm
