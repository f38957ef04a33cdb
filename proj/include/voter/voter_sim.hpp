#pragma once

// Event-driven voter-model simulation.  At rate q(x,y), site x adopts the
// opinion at y.  Two exact event engines:
//
//   keep_noops       one alias-table draw per adoption event at total rate
//                    sum_x q(x); concordant events advance time and change
//                    nothing.  O(1) per event, best for dense kernels.
//   discordant_only  a Fenwick tree tracks each site's discordant out-rate,
//                    so the clock jumps straight between genuine flips (the
//                    thinned process has exactly this intensity).  O(deg)
//                    per flip, best for sparse kernels.
//
// Both engines produce the same process law; tests compare them by KS.
// Observables are maintained incrementally: p1 changes by +-pi(x) per flip,
// the pair sums by rescanning the flipped site's in/out edges, and the
// running integrals are exact piecewise-constant sums (no discretization
// error anywhere).  A drift audit every 2^16 events recomputes everything
// from scratch and resyncs.

#include <cstdint>
#include <vector>

#include "voter/kernel.hpp"
#include "voter/rng.hpp"

namespace vm {

enum class EventMode { auto_select, keep_noops, discordant_only };

// Immutable per-kernel tables shared by every replica of an ensemble.
struct SimContext {
  const Kernel* kernel = nullptr;
  EventMode mode = EventMode::keep_noops;
  double q_total = 0.0;
  AliasTable edge_alias;      // keep_noops: adoption events by rate weight
  std::vector<int> edge_row;  // CSR slot -> source row

  static SimContext make(const Kernel& k, EventMode request = EventMode::auto_select);
};

struct EventRecord {
  double time = 0.0;  // clock after the event
  int site = -1;      // adopter x
  int source = -1;    // neighbour y copied from
  bool flipped = false;
};

class VoterState {
public:
  VoterState(const SimContext& ctx, std::vector<std::uint8_t> opinions);

  const std::vector<std::uint8_t>& opinions() const { return xi_; }
  double clock() const { return clock_; }
  double p1() const { return p1_; }
  double p10() const { return pair_sum10_ / ctx_->kernel->nu_total; }
  double p01() const { return pair_sum01_ / ctx_->kernel->nu_total; }
  bool absorbed() const { return discordant_edges_ == 0; }
  int consensus_value() const { return absorbed() ? (xi_[0] ? 1 : 0) : -1; }

  // Raw time integrals: int p1(1-p1) dt and int (s10 + s01) dt where the
  // pair sums are unnormalized (sum of pi(x)^2 q(x,y) over discordant
  // edges); callers rescale into the time units they need.
  double int_p1p0_raw() const { return int_p1p0_; }
  double int_pairs_raw() const { return int_pairs_; }

  // Advance one event (AbsorbedState if at consensus).
  EventRecord step(Rng& rng);

  // Lower-level pieces of step(), for drivers that need to see the next
  // event time before committing to it (horizon / grid handling):
  // exponential holding time at the current total event rate, and the event
  // itself once the clock has been advanced.
  double draw_wait(Rng& rng);
  EventRecord fire(Rng& rng);

  // Let the clock run to `t` with no further events (integral bookkeeping
  // only); `t` must be >= clock and must not cross the next event -- the
  // caller owns that logic.
  void advance_to(double t);

  // Recompute every incremental quantity from scratch, verify the
  // incremental copies (1e-10), and resync.
  void audit_and_resync();

  long long events() const { return events_; }
  long long flips() const { return flips_; }

private:
  void apply_flip(int x, std::uint8_t value);

  const SimContext* ctx_;
  std::vector<std::uint8_t> xi_;
  double clock_ = 0.0;
  double p1_ = 0.0;
  double pair_sum10_ = 0.0;
  double pair_sum01_ = 0.0;
  double int_p1p0_ = 0.0;
  double int_pairs_ = 0.0;
  long long discordant_edges_ = 0;           // ordered pairs with xi(x) != xi(y)
  std::vector<int> discordant_out_;          // per-site count of discordant out-edges
  Fenwick discordant_rate_;                  // discordant_only: r_out(x)
  long long events_ = 0;
  long long flips_ = 0;
};

VoterState init_bernoulli(const SimContext& ctx, double u, Rng& rng);

// One simulated path of the rescaled process s -> p1(xi_{gamma s}).
struct Trajectory {
  std::vector<double> grid;       // s-units, ascending, within [0, T]
  std::vector<double> p1;         // right-continuous values at grid times
  std::vector<double> p1p0;       // p1 (1 - p1) at grid times
  std::vector<double> int_pairs;  // gamma nu int_0^s (p10+p01) ds' at grid times

  bool absorbed = false;
  int consensus = -1;
  bool has_tau1 = false;
  double tau1 = 0.0;  // s-units

  double terminal_int_pairs = 0.0;  // gamma nu int_0^T (p10+p01) ds
  double terminal_int_p1p0 = 0.0;   // int_0^T p1(1-p1) ds
  std::uint64_t replica_seed = 0;
  long long events = 0;
  long long flips = 0;
};

Trajectory run(const SimContext& ctx, double u, double horizon, double gamma,
               const std::vector<double>& grid, Rng& rng);

// R(T): the gap between the pair-integral compensator and the mean-field
// integrand it should track.
double mean_field_residual(const Trajectory& traj);

struct EnsembleSummary {
  std::vector<double> grid;
  std::vector<double> mean_p1, var_p1, se_p1;
  std::vector<double> mean_p1p0, var_p1p0, se_p1p0;
  std::vector<double> mean_int_pairs, se_int_pairs;
  std::vector<double> tau1_samples;  // replica-index order, absorbed-at-1 only
  long long replicas = 0;
  long long absorbed_at_0 = 0;
  long long absorbed_at_1 = 0;
  double mean_residual = 0.0, se_residual = 0.0;
  double mean_abs_residual = 0.0, se_abs_residual = 0.0;
};

// Replica r uses the derived stream (master_seed, r); reductions happen in
// replica-index order, so the summary is bit-identical at any thread count.
EnsembleSummary ensemble(const SimContext& ctx, double u, double gamma, double horizon,
                         const std::vector<double>& grid, long long replicas,
                         std::uint64_t master_seed, unsigned threads);

}  // namespace vm
