#include "voter/voter_sim.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "voter/errors.hpp"
#include "voter/parallel.hpp"

namespace vm {

namespace {

// Above this mean degree the O(deg)-per-flip bookkeeping of the discordant
// engine loses to plain O(1) alias events, no-ops and all.
constexpr double kDenseDegreeCutoff = 48.0;

constexpr long long kAuditPeriod = 1 << 16;

}  // namespace

SimContext SimContext::make(const Kernel& k, EventMode request) {
  SimContext ctx;
  ctx.kernel = &k;
  if (request == EventMode::auto_select) {
    double mean_degree =
        static_cast<double>(k.edge_count()) / static_cast<double>(std::max(k.n, 1));
    ctx.mode = mean_degree > kDenseDegreeCutoff ? EventMode::keep_noops
                                                : EventMode::discordant_only;
  } else {
    ctx.mode = request;
  }
  for (int x = 0; x < k.n; ++x) ctx.q_total += k.total_rate[x];
  if (ctx.mode == EventMode::keep_noops) {
    ctx.edge_alias.build(k.rate);
    ctx.edge_row.resize(k.edge_count());
    for (int x = 0; x < k.n; ++x)
      for (std::size_t e = k.row_ptr[x]; e < k.row_ptr[x + 1]; ++e)
        ctx.edge_row[e] = x;
  }
  return ctx;
}

VoterState::VoterState(const SimContext& ctx, std::vector<std::uint8_t> opinions)
    : ctx_(&ctx), xi_(std::move(opinions)) {
  const Kernel& k = *ctx_->kernel;
  require(static_cast<int>(xi_.size()) == k.n, "BadParam",
          "opinion vector length must equal the site count");
  for (std::uint8_t v : xi_)
    require(v == 0 || v == 1, "BadParam", "opinions must be 0 or 1");
  discordant_out_.assign(k.n, 0);
  if (ctx_->mode == EventMode::discordant_only) discordant_rate_.assign(k.n);
  audit_and_resync();  // doubles as the from-scratch initialization
}

void VoterState::advance_to(double t) {
  double dt = t - clock_;
  if (dt <= 0.0) return;
  int_p1p0_ += p1_ * (1.0 - p1_) * dt;
  int_pairs_ += (pair_sum10_ + pair_sum01_) * dt;
  clock_ = t;
}

void VoterState::apply_flip(int x, std::uint8_t value) {
  const Kernel& k = *ctx_->kernel;
  const std::uint8_t old = xi_[x];
  const double pi_x2 = k.pi[x] * k.pi[x];

  // Out-edges x -> y: pair-sum contributions with x as the source, the
  // site's discordant out-count, and (discordant engine) its out-rate.
  double new_out_rate = 0.0;
  int new_out_count = 0;
  for (std::size_t e = k.row_ptr[x]; e < k.row_ptr[x + 1]; ++e) {
    const int y = k.col[e];
    const double w = pi_x2 * k.rate[e];
    if (old != xi_[y]) {
      (old ? pair_sum10_ : pair_sum01_) -= w;
    }
    if (value != xi_[y]) {
      (value ? pair_sum10_ : pair_sum01_) += w;
      new_out_rate += k.rate[e];
      ++new_out_count;
    }
  }
  discordant_edges_ += new_out_count - discordant_out_[x];
  discordant_out_[x] = new_out_count;
  if (ctx_->mode == EventMode::discordant_only) discordant_rate_.set(x, new_out_rate);

  // In-edges z -> x: contributions with x as the target; every such edge
  // toggles its discordance when x flips.
  for (std::size_t e = k.in_ptr[x]; e < k.in_ptr[x + 1]; ++e) {
    const int z = k.in_src[e];
    const double w = k.pi[z] * k.pi[z] * k.in_rate[e];
    const std::uint8_t zv = xi_[z];
    if (zv != old) {
      (zv ? pair_sum10_ : pair_sum01_) -= w;
      --discordant_out_[z];
      --discordant_edges_;
      if (ctx_->mode == EventMode::discordant_only)
        discordant_rate_.add(z, -k.in_rate[e]);
    }
    if (zv != value) {
      (zv ? pair_sum10_ : pair_sum01_) += w;
      ++discordant_out_[z];
      ++discordant_edges_;
      if (ctx_->mode == EventMode::discordant_only)
        discordant_rate_.add(z, k.in_rate[e]);
    }
  }

  xi_[x] = value;
  p1_ += value ? k.pi[x] : -k.pi[x];
  ++flips_;
}

EventRecord VoterState::step(Rng& rng) {
  double dt = draw_wait(rng);
  advance_to(clock_ + dt);
  return fire(rng);
}

double VoterState::draw_wait(Rng& rng) {
  require(!absorbed(), "AbsorbedState", "voter state is at consensus; no further events");
  if (ctx_->mode == EventMode::keep_noops) return rng.exponential(ctx_->q_total);
  return rng.exponential(discordant_rate_.total());
}

EventRecord VoterState::fire(Rng& rng) {
  require(!absorbed(), "AbsorbedState", "voter state is at consensus; no further events");
  const Kernel& k = *ctx_->kernel;
  EventRecord rec;
  if (ctx_->mode == EventMode::keep_noops) {
    std::size_t slot = ctx_->edge_alias.sample(rng);
    rec.site = ctx_->edge_row[slot];
    rec.source = k.col[slot];
    rec.flipped = xi_[rec.site] != xi_[rec.source];
    if (rec.flipped) apply_flip(rec.site, xi_[rec.source]);
  } else {
    const int x = static_cast<int>(discordant_rate_.sample(rng.u01() * discordant_rate_.total()));
    // Jump target among the discordant out-neighbours, weight q(x,y).
    double target = rng.u01() * discordant_rate_.value(x);
    double acc = 0.0;
    int y = -1;
    for (std::size_t e = k.row_ptr[x]; e < k.row_ptr[x + 1]; ++e) {
      if (xi_[k.col[e]] == xi_[x]) continue;
      acc += k.rate[e];
      y = k.col[e];
      if (acc > target) break;
    }
    require(y >= 0, "ConvergenceFailure", "discordant engine picked a concordant site");
    rec.site = x;
    rec.source = y;
    rec.flipped = true;
    apply_flip(x, xi_[y]);
  }
  rec.time = clock_;
  ++events_;
  if (events_ % kAuditPeriod == 0) audit_and_resync();
  return rec;
}

void VoterState::audit_and_resync() {
  const Kernel& k = *ctx_->kernel;
  const bool initializing = (events_ == 0 && flips_ == 0 && clock_ == 0.0);

  double p1 = 0.0;
  for (int x = 0; x < k.n; ++x)
    if (xi_[x]) p1 += k.pi[x];

  double s10 = 0.0, s01 = 0.0;
  long long edges = 0;
  std::vector<int> out_count(k.n, 0);
  std::vector<double> out_rate(k.n, 0.0);
  for (int x = 0; x < k.n; ++x) {
    const double pi_x2 = k.pi[x] * k.pi[x];
    for (std::size_t e = k.row_ptr[x]; e < k.row_ptr[x + 1]; ++e) {
      const int y = k.col[e];
      if (xi_[x] == xi_[y]) continue;
      (xi_[x] ? s10 : s01) += pi_x2 * k.rate[e];
      out_rate[x] += k.rate[e];
      ++out_count[x];
      ++edges;
    }
  }

  if (!initializing) {
    require(std::fabs(p1 - p1_) <= 1e-10, "ConvergenceFailure",
            "incremental density drifted past the audit tolerance");
    const double pair_tol = 1e-10 * std::max(1.0, k.nu_total);
    require(std::fabs(s10 - pair_sum10_) <= pair_tol &&
                std::fabs(s01 - pair_sum01_) <= pair_tol,
            "ConvergenceFailure",
            "incremental pair sums drifted past the audit tolerance");
    require(edges == discordant_edges_, "ConvergenceFailure",
            "discordant edge count lost sync");
  }

  p1_ = p1;
  pair_sum10_ = s10;
  pair_sum01_ = s01;
  discordant_edges_ = edges;
  discordant_out_ = std::move(out_count);
  if (ctx_->mode == EventMode::discordant_only) {
    for (int x = 0; x < k.n; ++x) discordant_rate_.set(x, out_rate[x]);
    discordant_rate_.rebuild();
  }
}

VoterState init_bernoulli(const SimContext& ctx, double u, Rng& rng) {
  require(u >= 0.0 && u <= 1.0, "BadParam", "Bernoulli density must lie in [0,1]");
  const int n = ctx.kernel->n;
  std::vector<std::uint8_t> xi(n);
  for (int i = 0; i < n; ++i) xi[i] = rng.u01() < u ? 1 : 0;
  return VoterState(ctx, std::move(xi));
}

Trajectory run(const SimContext& ctx, double u, double horizon, double gamma,
               const std::vector<double>& grid, Rng& rng) {
  require(std::isfinite(horizon) && horizon > 0.0, "BadParam", "horizon must be positive");
  require(std::isfinite(gamma) && gamma > 0.0, "BadParam", "gamma must be positive");
  for (std::size_t i = 0; i < grid.size(); ++i) {
    require(grid[i] >= 0.0 && grid[i] <= horizon, "BadParam",
            "grid times must lie in [0, horizon]");
    require(i == 0 || grid[i] > grid[i - 1], "BadParam", "grid must be strictly ascending");
  }

  VoterState state = init_bernoulli(ctx, u, rng);
  const double real_horizon = gamma * horizon;

  Trajectory traj;
  traj.grid = grid;
  traj.p1.reserve(grid.size());
  traj.p1p0.reserve(grid.size());
  traj.int_pairs.reserve(grid.size());

  auto note_absorption = [&]() {
    if (!state.absorbed() || traj.absorbed) return;
    traj.absorbed = true;
    traj.consensus = state.consensus_value();
    if (traj.consensus == 1) {
      traj.has_tau1 = true;
      traj.tau1 = state.clock() / gamma;
    }
  };
  auto capture = [&]() {
    traj.p1.push_back(state.p1());
    traj.p1p0.push_back(state.p1() * (1.0 - state.p1()));
    traj.int_pairs.push_back(state.int_pairs_raw());
  };

  note_absorption();
  std::size_t gi = 0;
  while (true) {
    double t_next = std::numeric_limits<double>::infinity();
    if (!state.absorbed()) t_next = state.clock() + state.draw_wait(rng);
    // The state is constant on [clock, t_next); grid times in that window see
    // the current (right-continuous) values, with the integrals advanced.
    while (gi < grid.size() && gamma * grid[gi] < t_next && gamma * grid[gi] <= real_horizon) {
      state.advance_to(gamma * grid[gi]);
      capture();
      ++gi;
    }
    if (t_next >= real_horizon) {
      state.advance_to(real_horizon);
      break;
    }
    state.advance_to(t_next);
    state.fire(rng);
    note_absorption();
  }
  while (gi < grid.size()) {  // grid points at exactly the horizon
    capture();
    ++gi;
  }

  traj.terminal_int_pairs = state.int_pairs_raw();
  traj.terminal_int_p1p0 = state.int_p1p0_raw() / gamma;
  traj.events = state.events();
  traj.flips = state.flips();
  return traj;
}

double mean_field_residual(const Trajectory& traj) {
  return traj.terminal_int_pairs - traj.terminal_int_p1p0;
}

namespace {

struct MeanVar {
  double mean = 0.0, var = 0.0, se = 0.0;
};

// Two-pass mean/variance in index order, so results never depend on how the
// replicas were scheduled.
template <typename Get>
MeanVar reduce(long long n, Get&& get) {
  MeanVar mv;
  for (long long i = 0; i < n; ++i) mv.mean += get(i);
  mv.mean /= static_cast<double>(n);
  if (n > 1) {
    for (long long i = 0; i < n; ++i) {
      double d = get(i) - mv.mean;
      mv.var += d * d;
    }
    mv.var /= static_cast<double>(n - 1);
    mv.se = std::sqrt(mv.var / static_cast<double>(n));
  }
  return mv;
}

}  // namespace

EnsembleSummary ensemble(const SimContext& ctx, double u, double gamma, double horizon,
                         const std::vector<double>& grid, long long replicas,
                         std::uint64_t master_seed, unsigned threads) {
  require(replicas >= 1, "BadParam", "need at least one replica");
  std::vector<Trajectory> results(static_cast<std::size_t>(replicas));
  parallel_for(static_cast<std::size_t>(replicas), threads, [&](std::size_t r) {
    Rng rng = Rng::for_replica(master_seed, r);
    results[r] = run(ctx, u, horizon, gamma, grid, rng);
    results[r].replica_seed = derive_stream_seed(master_seed, r);
  });

  EnsembleSummary out;
  out.grid = grid;
  out.replicas = replicas;
  const std::size_t g = grid.size();
  out.mean_p1.resize(g);
  out.var_p1.resize(g);
  out.se_p1.resize(g);
  out.mean_p1p0.resize(g);
  out.var_p1p0.resize(g);
  out.se_p1p0.resize(g);
  out.mean_int_pairs.resize(g);
  out.se_int_pairs.resize(g);
  for (std::size_t j = 0; j < g; ++j) {
    MeanVar a = reduce(replicas, [&](long long i) { return results[i].p1[j]; });
    out.mean_p1[j] = a.mean;
    out.var_p1[j] = a.var;
    out.se_p1[j] = a.se;
    MeanVar b = reduce(replicas, [&](long long i) { return results[i].p1p0[j]; });
    out.mean_p1p0[j] = b.mean;
    out.var_p1p0[j] = b.var;
    out.se_p1p0[j] = b.se;
    MeanVar c = reduce(replicas, [&](long long i) { return results[i].int_pairs[j]; });
    out.mean_int_pairs[j] = c.mean;
    out.se_int_pairs[j] = c.se;
  }
  for (long long i = 0; i < replicas; ++i) {
    const Trajectory& t = results[i];
    if (t.absorbed) (t.consensus == 1 ? out.absorbed_at_1 : out.absorbed_at_0) += 1;
    if (t.has_tau1) out.tau1_samples.push_back(t.tau1);
  }
  MeanVar res = reduce(replicas, [&](long long i) { return mean_field_residual(results[i]); });
  out.mean_residual = res.mean;
  out.se_residual = res.se;
  MeanVar ares =
      reduce(replicas, [&](long long i) { return std::fabs(mean_field_residual(results[i])); });
  out.mean_abs_residual = ares.mean;
  out.se_abs_residual = ares.se;
  return out;
}

}  // namespace vm
