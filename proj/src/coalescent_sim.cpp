#include "voter/coalescent_sim.hpp"

#include <algorithm>

#include "voter/errors.hpp"

namespace vm {

namespace {

int uf_find(std::vector<int>& parent, int a) {
  while (parent[a] != a) {
    parent[a] = parent[parent[a]];
    a = parent[a];
  }
  return a;
}

// Live-lineage bookkeeping: slots [0, count) hold one walker per block, a
// Fenwick tree over slots carries the jump rates, and site_of inverts the
// position map so collisions are O(1) to detect.
struct LineageSystem {
  const Kernel* k;
  std::vector<int> pos, label, site_of;
  Fenwick rates;
  int count = 0;

  explicit LineageSystem(const Kernel& kernel, int capacity) : k(&kernel) {
    pos.reserve(capacity);
    label.reserve(capacity);
    site_of.assign(kernel.n, -1);
    rates.assign(capacity);
  }

  // Returns the occupying slot on a collision, -1 otherwise.
  int occupant(int site) const { return site_of[site]; }

  void place(int site, int lab) {
    pos.push_back(site);
    label.push_back(lab);
    site_of[site] = count;
    rates.set(count, k->total_rate[site]);
    ++count;
  }

  void remove(int slot) {
    int last = count - 1;
    if (slot != last) {
      pos[slot] = pos[last];
      label[slot] = label[last];
      site_of[pos[slot]] = slot;
      rates.set(slot, rates.value(last));
    }
    rates.set(last, 0.0);
    pos.pop_back();
    label.pop_back();
    count = last;
  }
};

CoalescentResult coalesce(const Kernel& k, LineageSystem& sys,
                          std::vector<int>& parent, CoalescentResult res, Rng& rng) {
  double t = 0.0;
  while (sys.count > res.stop_at) {
    double total = sys.rates.total();
    t += rng.exponential(total);
    int slot = static_cast<int>(sys.rates.sample(rng.u01() * total));
    int x = sys.pos[slot];
    int y = k.sample_target(x, rng);
    sys.site_of[x] = -1;
    int other = sys.occupant(y);
    if (other >= 0) {
      int ra = uf_find(parent, sys.label[slot]);
      int rb = uf_find(parent, sys.label[other]);
      parent[ra] = rb;
      res.merges.push_back({t, ra, rb});
      sys.remove(slot);
      res.level.push_back(sys.count);
      res.time.push_back(t);
    } else {
      sys.pos[slot] = y;
      sys.site_of[y] = slot;
      sys.rates.set(slot, k.total_rate[y]);
    }
  }
  res.block_of.resize(parent.size());
  for (std::size_t i = 0; i < parent.size(); ++i)
    res.block_of[i] = uf_find(parent, static_cast<int>(i));
  return res;
}

}  // namespace

double CoalescentResult::time_to(int j) const {
  require(j >= stop_at, "BadParams", "level below the recorded range");
  if (j >= started) return 0.0;
  for (std::size_t i = 0; i < level.size(); ++i)
    if (level[i] <= j) return time[i];
  fail("BadParams", "level above the recorded range");
}

CoalescentResult run_partial(const Kernel& k, int lineages, int stop_at, Rng& rng) {
  require(lineages >= 1 && lineages <= k.n, "BadParams",
          "lineage count must lie in [1, n]");
  require(stop_at >= 1 && stop_at <= lineages, "BadParams",
          "stop level must lie in [1, lineages]");

  LineageSystem sys(k, lineages);
  std::vector<int> parent(lineages);
  CoalescentResult res;
  res.started = lineages;
  res.stop_at = stop_at;
  res.level.push_back(lineages);  // C_{k,k} = 0 by convention
  res.time.push_back(0.0);
  for (int i = 0; i < lineages; ++i) {
    parent[i] = i;
    int site = k.sample_pi(rng);
    int other = sys.occupant(site);
    if (other >= 0) {  // π-collision: merged from the start
      int rb = uf_find(parent, sys.label[other]);
      parent[i] = rb;
      res.merges.push_back({0.0, i, rb});
      res.level.push_back(lineages - static_cast<int>(res.merges.size()));
      res.time.push_back(0.0);
    } else {
      sys.place(site, i);
    }
  }
  return coalesce(k, sys, parent, std::move(res), rng);
}

CoalescentResult run_full(const Kernel& k, int stop_at, Rng& rng) {
  require(stop_at >= 1 && stop_at < k.n, "BadParams",
          "stop level must lie in [1, n)");

  LineageSystem sys(k, k.n);
  std::vector<int> parent(k.n);
  CoalescentResult res;
  res.started = k.n;
  res.stop_at = stop_at;
  for (int i = 0; i < k.n; ++i) {
    parent[i] = i;
    sys.place(i, i);
  }
  return coalesce(k, sys, parent, std::move(res), rng);
}

double kingman_sampler(int k, int j, Rng& rng) {
  if (k == kKingmanInfinite) k = 2000;
  require(k >= 2, "BadParams", "need at least two blocks");
  require(j >= 1 && j < k, "BadParams", "target level must lie in [1, k)");
  double t = 0.0;
  for (int i = k; i > j; --i) {
    double rate = 0.5 * static_cast<double>(i) * static_cast<double>(i - 1);
    t += rng.exponential(rate);
  }
  return t;
}

}  // namespace vm
