#pragma once

// Systems of coalescing q-chains.  Lineages jump independently (site x at
// rate q(x), target law q(x,y)/q(x)) until two share a site, at which point
// they merge and move together; we track one walker per block.  Recorded
// output: the first time the block count reaches each level on the way down
// to `stop_at`, plus the merge log over initial lineage labels.

#include <vector>

#include "voter/kernel.hpp"
#include "voter/rng.hpp"

namespace vm {

struct MergeEvent {
  double time = 0.0;
  int a = -1, b = -1;  // representative labels of the merged blocks
};

struct CoalescentResult {
  int started = 0;  // lineages at time 0 (k, or n for the full system)
  int stop_at = 0;

  // Parallel arrays: first time the block count was <= level[i].  Partial
  // runs lead with (started, 0) — the "already there" convention — and
  // π-collisions at time 0 contribute further zero entries.
  std::vector<int> level;
  std::vector<double> time;

  std::vector<MergeEvent> merges;

  // Union-find over initial labels, fully path-compressed at the end.
  std::vector<int> block_of;

  double time_to(int j) const;  // first time the count is <= j
};

// k i.i.d. π-positions, coalesce down to j lineages.
CoalescentResult run_partial(const Kernel& k, int lineages, int stop_at, Rng& rng);

// One lineage per site, coalesce down to j lineages.
CoalescentResult run_full(const Kernel& k, int stop_at, Rng& rng);

// Kingman block-counting time from k blocks down to j: a sum of independent
// Exp(i(i-1)/2) holds for i = k, ..., j+1.  Pass kKingmanInfinite to start
// from the entrance law; that truncates at 2000 blocks, whose neglected mean
// is 2/2000 = 1e-3.
inline constexpr int kKingmanInfinite = -1;

double kingman_sampler(int k, int j, Rng& rng);

}  // namespace vm
