#include "voter/acceptance.hpp"

#include <algorithm>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <functional>
#include <map>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "voter/analysis.hpp"
#include "voter/coalescent_sim.hpp"
#include "voter/errors.hpp"
#include "voter/exact_meeting.hpp"
#include "voter/experiments.hpp"
#include "voter/graph_zoo.hpp"
#include "voter/parallel.hpp"
#include "voter/report.hpp"
#include "voter/stats.hpp"
#include "voter/voter_sim.hpp"
#include "voter/wf_reference.hpp"

namespace vm {
namespace {

// ---------------------------------------------------------------------------
// Frozen reference values, produced by an independent sparse linear-algebra
// computation (scipy spsolve on the difference-walk generator, uniformized
// tails, mpmath for the closed form below).  Regenerating them from this
// code base would make the regressions circular, so they are pinned here.

struct FrozenMeeting {
  int L = 0;
  double t_meet = 0.0;
};

// Unit-step 2-d torus, rate 1/4 per neighbour: E[M] from uniform x uniform.
constexpr FrozenMeeting kTorus2d[] = {
    {15, 215.83696263735828},
    {20, 420.3831166572086},
    {25, 701.2739478988293},
    {30, 1062.0912040598753},
    {40, 2034.7225741979894},
};

// Unit-step 3-d torus, rate 1/6 per neighbour.
constexpr FrozenMeeting kTorus3d[] = {
    {6, 139.5566017316052},
    {8, 344.9942405994808},
    {10, 690.5992537883383},
};

// Continuum constant for the 3-d meeting time, t_meet / L^3 -> this value.
// The expected number of visits to the origin for the rate-1 unit-step walk
// on Z^3 has the closed form
//   sqrt(6)/(32 pi^3) * Gamma(1/24) Gamma(5/24) Gamma(7/24) Gamma(11/24)
//   = 1.5163860591519778...
// The meeting problem runs the *difference* of two rate-1 walkers, which
// jumps at rate 2; doubling the clock halves the time spent near the origin,
// so the meeting constant is half the single-walker value.  Richardson
// extrapolation of the exact L = 8, 10 values lands on 0.75773, confirming
// the halving (the unhalved constant is off by a factor of two).
constexpr double kGreen3dHalf = 0.7581930295759890;

// Budgets, fixed up front.
constexpr double kIdentityBudget = 1e-8;       // relative moment residuals
constexpr double kTailRelationBudget = 1e-6;   // UU-vs-integrated-VV residual
constexpr double kRouteAgreement = 1e-9;       // dense product vs difference walk
constexpr double kExactSlack = 1e-9;           // "holds exactly" comparisons
constexpr double kFormulaSlack = 1e-12;        // closed-form equalities
constexpr double kKsMeetingBudget = 0.05;      // criterion 5
constexpr double kKsKingmanBudget = 0.06;      // criteria 9, 10
constexpr double kZBudget = 3.0;               // moment z-scores
constexpr double kWfSlack = 0.15;              // asymptotic slack, criterion 6
constexpr double kResidualDropFactor = 0.5;    // criterion 8 largest vs smallest

std::string fmt(const char* f, ...) {
  char buf[512];
  va_list ap;
  va_start(ap, f);
  std::vsnprintf(buf, sizeof buf, f, ap);
  va_end(ap);
  return buf;
}

void fp_add(std::string& s, const std::string& tag, double v) {
  char buf[96];
  std::snprintf(buf, sizeof buf, "%s=%.17g;", tag.c_str(), v);
  s += buf;
}

void fp_add_count(std::string& s, const std::string& tag, long long v) {
  char buf[96];
  std::snprintf(buf, sizeof buf, "%s=%lld;", tag.c_str(), v);
  s += buf;
}

std::vector<double> step_grid(double lo, double hi, double step) {
  std::vector<double> g;
  for (int i = 0;; ++i) {
    double t = lo + step * i;
    if (t > hi + step * 0.5) break;
    g.push_back(std::min(t, hi));
  }
  return g;
}

struct Battery {
  AcceptanceOptions opts;
  unsigned threads = 1;
  std::vector<CriterionResult> results;

  std::map<std::string, Kernel> kernels;
  std::map<std::string, MeetingSolution> meetings;       // automatic route
  std::map<std::string, MeetingSolution> meetings_full;  // forced dense product

  explicit Battery(const AcceptanceOptions& o) : opts(o) {
    threads = opts.threads ? opts.threads : default_threads();
  }

  bool selected(int index) const {
    if (opts.only.empty()) return true;
    return std::find(opts.only.begin(), opts.only.end(), index) != opts.only.end();
  }

  std::uint64_t sub_seed(const std::string& tag) const {
    return derive_stream_seed(opts.master_seed, fnv1a(tag));
  }

  // --- kernel / meeting caches -------------------------------------------
  const Kernel& cached(const std::string& key, const std::function<Kernel()>& make) {
    auto it = kernels.find(key);
    if (it == kernels.end()) it = kernels.emplace(key, make()).first;
    return it->second;
  }
  const Kernel& moran_k(int n) {
    return cached("moran(" + std::to_string(n) + ")", [n] { return moran(n); });
  }
  const Kernel& torus(int L, int d) {
    return cached(fmt("torus_nn(%d,%d)", L, d), [=] { return torus_nn(L, d); });
  }
  const Kernel& torus_r(int n, int m, int d) {
    return cached(fmt("torus_range(%d,%d,%d)", n, m, d), [=] { return torus_range(n, m, d); });
  }
  const Kernel& cube(int nd) {
    return cached(fmt("hypercube(%d)", nd), [=] { return hypercube(nd); });
  }
  const Kernel& rrp(int n, int k, std::uint64_t seed) {
    return cached(fmt("random_regular_perm(%d,%d,%llu)", n, k, (unsigned long long)seed),
                  [=] { return random_regular_perm(n, k, seed); });
  }

  const MeetingSolution& meet(const std::string& key) {
    auto it = meetings.find(key);
    if (it == meetings.end()) it = meetings.emplace(key, meeting_moments(kernels.at(key))).first;
    return it->second;
  }
  const MeetingSolution& meet_full(const std::string& key) {
    auto it = meetings_full.find(key);
    if (it == meetings_full.end())
      it = meetings_full.emplace(key, meeting_moments_full(kernels.at(key))).first;
    return it->second;
  }

  // --- shared instance list for the identity checks -----------------------
  struct IdentityItem {
    std::string key;
    bool force_full = false;
  };
  std::vector<IdentityItem> identity_items_;

  const std::vector<IdentityItem>& identity_items() {
    if (!identity_items_.empty()) return identity_items_;
    auto add = [&](const std::string& key, bool full) { identity_items_.push_back({key, full}); };
    // dense product route (n <= 64)
    moran_k(2), add("moran(2)", true);
    moran_k(3), add("moran(3)", true);
    moran_k(8), add("moran(8)", true);
    moran_k(16), add("moran(16)", true);
    moran_k(64), add("moran(64)", true);
    torus(4, 1), add("torus_nn(4,1)", true);
    torus(8, 1), add("torus_nn(8,1)", true);
    torus(3, 2), add("torus_nn(3,2)", true);
    torus(4, 2), add("torus_nn(4,2)", true);
    torus_r(10, 2, 1), add("torus_range(10,2,1)", true);
    cube(2), add("hypercube(2)", true);
    cube(4), add("hypercube(4)", true);
    cube(6), add("hypercube(6)", true);
    rrp(24, 4, 7), add("random_regular_perm(24,4,7)", true);
    // difference-walk route (translation invariant, up to 30x30 / 10^3)
    torus(15, 2), add("torus_nn(15,2)", false);
    torus(20, 2), add("torus_nn(20,2)", false);
    torus(25, 2), add("torus_nn(25,2)", false);
    torus(30, 2), add("torus_nn(30,2)", false);
    torus(6, 3), add("torus_nn(6,3)", false);
    torus(8, 3), add("torus_nn(8,3)", false);
    torus(10, 3), add("torus_nn(10,3)", false);
    torus_r(20, 4, 2), add("torus_range(20,4,2)", false);
    moran_k(300), add("moran(300)", false);
    return identity_items_;
  }

  const MeetingSolution& item_solution(const IdentityItem& item) {
    return item.force_full ? meet_full(item.key) : meet(item.key);
  }

  // --- randomized payloads, cached per worker count ------------------------
  struct C5Data {
    KsResult ks;
    MeanSe scaled;
  };
  std::map<unsigned, C5Data> c5_cache;
  std::map<unsigned, DensityMomentCheck> c6_moran_cache, c6_torus_cache, c7_cube_cache;
  std::map<unsigned, std::vector<ResidualStat>> c8_moran_cache, c8_torus_cache;
  struct C9Data {
    KsResult d41, d43;
    MeanSe m41, m43;
  };
  std::map<unsigned, C9Data> c9_cache;
  struct C10Data {
    KsResult d;
    MeanSe m;
  };
  std::map<unsigned, C10Data> c10_cache;

  const C5Data& c5_data(unsigned thr) {
    auto it = c5_cache.find(thr);
    if (it != c5_cache.end()) return it->second;
    const Kernel& k = torus(25, 2);
    double gamma = meet("torus_nn(25,2)").t_meet;
    std::vector<double> s = meeting_samples(k, 5000, sub_seed("C5:samples"), thr);
    for (double& v : s) v /= gamma;
    C5Data d;
    d.scaled = mean_se(s);
    double pd = k.pi_diag;
    d.ks = ks_one_sample(std::move(s), [pd](double t) { return mixture_cdf(pd, t); }, 0.01);
    return c5_cache.emplace(thr, std::move(d)).first->second;
  }

  const DensityMomentCheck& density(std::map<unsigned, DensityMomentCheck>& cache, unsigned thr,
                                    const std::string& key, const std::vector<double>& grid,
                                    long long replicas, const std::string& seed_tag) {
    auto it = cache.find(thr);
    if (it != cache.end()) return it->second;
    const Kernel& k = kernels.at(key);
    SimContext ctx = SimContext::make(k);
    double gamma = meet(key).t_meet;
    DensityMomentCheck chk =
        density_moment_check(k, ctx, 0.5, gamma, grid, replicas, sub_seed(seed_tag), thr);
    return cache.emplace(thr, std::move(chk)).first->second;
  }
  const DensityMomentCheck& c6_moran(unsigned thr) {
    moran_k(200);
    return density(c6_moran_cache, thr, "moran(200)", {0.25, 0.5, 1.0, 2.0}, 2000,
                   "C6:moran(200)");
  }
  const DensityMomentCheck& c6_torus(unsigned thr) {
    torus(20, 2);
    return density(c6_torus_cache, thr, "torus_nn(20,2)", {0.25, 0.5, 1.0, 2.0}, 2000,
                   "C6:torus_nn(20,2)");
  }
  const DensityMomentCheck& c7_cube(unsigned thr) {
    cube(6);
    return density(c7_cube_cache, thr, "hypercube(6)", {0.5, 1.0}, 500, "C7:hypercube(6)");
  }

  const std::vector<ResidualStat>& c8_ladder(std::map<unsigned, std::vector<ResidualStat>>& cache,
                                             unsigned thr, const std::vector<std::string>& keys,
                                             const char* tag_prefix) {
    auto it = cache.find(thr);
    if (it != cache.end()) return it->second;
    std::vector<ResidualStat> out;
    for (const std::string& key : keys) {
      const Kernel& k = kernels.at(key);
      SimContext ctx = SimContext::make(k);
      double gamma = meet(key).t_meet;
      out.push_back(residual_stat(k, ctx, 0.5, gamma, 2.0, 500,
                                  sub_seed(std::string(tag_prefix) + key), thr));
    }
    return cache.emplace(thr, std::move(out)).first->second;
  }
  const std::vector<ResidualStat>& c8_moran(unsigned thr) {
    moran_k(30), moran_k(100), moran_k(300);
    return c8_ladder(c8_moran_cache, thr, {"moran(30)", "moran(100)", "moran(300)"}, "C8:");
  }
  const std::vector<ResidualStat>& c8_torus(unsigned thr) {
    torus(10, 2), torus(20, 2), torus(40, 2);
    return c8_ladder(c8_torus_cache, thr,
                     {"torus_nn(10,2)", "torus_nn(20,2)", "torus_nn(40,2)"}, "C8:");
  }

  const C9Data& c9_data(unsigned thr) {
    auto it = c9_cache.find(thr);
    if (it != c9_cache.end()) return it->second;
    const Kernel& k = torus(20, 2);
    double gamma = meet("torus_nn(20,2)").t_meet;
    std::vector<double> s41 = partial_coalescence_samples(k, 4, 1, 3000, sub_seed("C9:partial41"), thr);
    std::vector<double> s43 = partial_coalescence_samples(k, 4, 3, 3000, sub_seed("C9:partial43"), thr);
    for (double& v : s41) v /= gamma;
    for (double& v : s43) v /= gamma;
    C9Data d;
    d.m41 = mean_se(s41);
    d.m43 = mean_se(s43);
    std::vector<double> r41 = kingman_reference_samples(4, 1, 30000, sub_seed("C9:ref41"));
    std::vector<double> r43 = kingman_reference_samples(4, 3, 30000, sub_seed("C9:ref43"));
    d.d41 = ks_two_sample(std::move(s41), std::move(r41), 0.01);
    d.d43 = ks_two_sample(std::move(s43), std::move(r43), 0.01);
    return c9_cache.emplace(thr, std::move(d)).first->second;
  }

  const C10Data& c10_data(unsigned thr) {
    auto it = c10_cache.find(thr);
    if (it != c10_cache.end()) return it->second;
    const Kernel& k = moran_k(100);
    double gamma = meet("moran(100)").t_meet;
    std::vector<double> s = full_coalescence_samples(k, 1, 2000, sub_seed("C10:full"), thr);
    for (double& v : s) v /= gamma;
    C10Data d;
    d.m = mean_se(s);
    std::vector<double> ref =
        kingman_reference_samples(kKingmanInfinite, 1, 30000, sub_seed("C10:ref"));
    d.d = ks_two_sample(std::move(s), std::move(ref), 0.01);
    return c10_cache.emplace(thr, std::move(d)).first->second;
  }

  // --- fingerprints (shared between first run and the determinism rerun) ---
  std::string fp_c5(unsigned thr) {
    const C5Data& d = c5_data(thr);
    std::string s;
    fp_add(s, "c5.D", d.ks.d);
    fp_add(s, "c5.mean", d.scaled.mean);
    fp_add(s, "c5.se", d.scaled.se);
    return s;
  }
  static void fp_density(std::string& s, const std::string& tag, const DensityMomentCheck& c) {
    for (std::size_t i = 0; i < c.second_moment.size(); ++i) {
      fp_add(s, fmt("%s.p1p0[%zu]", tag.c_str(), i), c.second_moment[i].mean);
      fp_add(s, fmt("%s.se[%zu]", tag.c_str(), i), c.second_moment[i].se);
      fp_add(s, fmt("%s.z2[%zu]", tag.c_str(), i), c.second_moment[i].z);
      fp_add(s, fmt("%s.p1[%zu]", tag.c_str(), i), c.martingale[i].mean);
      fp_add(s, fmt("%s.zm[%zu]", tag.c_str(), i), c.martingale[i].z);
    }
    fp_add_count(s, tag + ".abs0", c.summary.absorbed_at_0);
    fp_add_count(s, tag + ".abs1", c.summary.absorbed_at_1);
  }
  std::string fp_c6(unsigned thr) {
    std::string s;
    fp_density(s, "c6.moran200", c6_moran(thr));
    fp_density(s, "c6.torus20", c6_torus(thr));
    return s;
  }
  std::string fp_c7(unsigned thr) {
    std::string s;
    fp_density(s, "c7.cube6", c7_cube(thr));
    return s;
  }
  std::string fp_c8(unsigned thr) {
    std::string s;
    const auto& a = c8_moran(thr);
    const auto& b = c8_torus(thr);
    for (std::size_t i = 0; i < a.size(); ++i) {
      fp_add(s, fmt("c8.moran[%zu].mean_abs", i), a[i].mean_abs);
      fp_add(s, fmt("c8.moran[%zu].se_abs", i), a[i].se_abs);
      fp_add(s, fmt("c8.moran[%zu].mean", i), a[i].mean);
    }
    for (std::size_t i = 0; i < b.size(); ++i) {
      fp_add(s, fmt("c8.torus[%zu].mean_abs", i), b[i].mean_abs);
      fp_add(s, fmt("c8.torus[%zu].se_abs", i), b[i].se_abs);
      fp_add(s, fmt("c8.torus[%zu].mean", i), b[i].mean);
    }
    return s;
  }
  std::string fp_c9(unsigned thr) {
    const C9Data& d = c9_data(thr);
    std::string s;
    fp_add(s, "c9.D41", d.d41.d);
    fp_add(s, "c9.D43", d.d43.d);
    fp_add(s, "c9.mean41", d.m41.mean);
    fp_add(s, "c9.mean43", d.m43.mean);
    fp_add(s, "c9.se41", d.m41.se);
    fp_add(s, "c9.se43", d.m43.se);
    return s;
  }
  std::string fp_c10(unsigned thr) {
    const C10Data& d = c10_data(thr);
    std::string s;
    fp_add(s, "c10.D", d.d.d);
    fp_add(s, "c10.mean", d.m.mean);
    fp_add(s, "c10.se", d.m.se);
    return s;
  }

  // --- criteria ------------------------------------------------------------
  void c1(CriterionResult& r) {
    std::vector<double> grid = step_grid(0.0, 5.0, 0.01);
    double worst_id = 0.0, worst_tail = 0.0;
    bool markov = true;
    int count = 0;
    for (const IdentityItem& item : identity_items()) {
      const Kernel& k = kernels.at(item.key);
      const MeetingSolution& sol = item_solution(item);
      IdentityRecord rec = identity_check(k, sol);
      worst_id = std::max({worst_id, std::fabs(rec.mvv_mean_residual),
                           std::fabs(rec.tmeet_residual)});
      TailRelationRecord tail = tail_relation_check(k, grid);
      worst_tail = std::max(worst_tail, tail.max_residual);
      markov = markov && tail_markov_bound_ok(k, grid);
      ++count;
    }
    // instances solvable by both routes must agree
    double worst_route = 0.0;
    for (const char* key : {"torus_nn(3,2)", "torus_nn(4,2)", "hypercube(6)"}) {
      double a = meet_full(key).t_meet;
      double b = meet(key).t_meet;
      worst_route = std::max(worst_route, std::fabs(a - b) / std::max(1.0, std::fabs(b)));
    }
    r.pass = worst_id <= kIdentityBudget && worst_tail <= kTailRelationBudget && markov &&
             worst_route <= kRouteAgreement;
    r.detail = fmt(
        "%d instances; worst moment residual %.2e (budget %.0e); worst tail-relation residual "
        "%.2e (budget %.0e); markov bound %s; route agreement %.2e",
        count, worst_id, kIdentityBudget, worst_tail, kTailRelationBudget,
        markov ? "ok" : "VIOLATED", worst_route);
  }

  void c2(CriterionResult& r) {
    double worst_margin = 1e300;   // t_meet - lower bound, scaled
    double worst_formula = 0.0;    // symmetric unit-rate cases vs (n-1)^2/(4n)
    bool all_ok = true;
    int count = 0, formula_count = 0;
    for (const IdentityItem& item : identity_items()) {
      const Kernel& k = kernels.at(item.key);
      const MeetingSolution& sol = item_solution(item);
      IdentityRecord rec = identity_check(k, sol);
      all_ok = all_ok && rec.lower_bound_ok;
      double margin = (sol.t_meet - rec.lower_bound) / std::max(1.0, sol.t_meet);
      worst_margin = std::min(worst_margin, margin);
      ++count;
      // symmetric kernels without loop mass: pi uniform and q(x) = 1
      bool unit_sym = k.reversible;
      for (int x = 0; x < k.n && unit_sym; ++x)
        unit_sym = std::fabs(k.pi[x] - 1.0 / k.n) <= 1e-12 &&
                   std::fabs(k.total_rate[x] - 1.0) <= 1e-12;
      if (unit_sym) {
        double closed = (k.n - 1.0) * (k.n - 1.0) / (4.0 * k.n);
        worst_formula = std::max(worst_formula,
                                 std::fabs(rec.lower_bound - closed) / closed);
        ++formula_count;
      }
    }
    r.pass = all_ok && worst_margin >= -kExactSlack && worst_formula <= kFormulaSlack;
    r.detail = fmt(
        "%d instances; min scaled margin %.2e; %d symmetric unit-rate instances match "
        "(n-1)^2/(4n) to %.2e",
        count, worst_margin, formula_count, worst_formula);
  }

  void c3(CriterionResult& r) {
    double worst = 0.0;
    for (int nd = 2; nd <= 10; ++nd) {
      double g = spectral_gap(cube(nd));
      worst = std::max(worst, std::fabs(g - 2.0 / nd));
    }
    r.pass = worst <= kExactSlack;
    r.detail = fmt("gap vs 2/n_dim for n_dim=2..10: worst |dev| %.2e (budget %.0e)", worst,
                   kExactSlack);
  }

  void c4(CriterionResult& r) {
    // closed form on 1-d finite-range tori
    double worst_formula = 0.0;
    for (auto [n, m] : {std::pair{10, 2}, {16, 3}, {20, 4}}) {
      BottleneckResult res = bottleneck_optimum(torus_r(n, m, 1), BottleneckStrategy::intervals_1d);
      double expect = (m + 1.0) / (2.0 * (n / 2));
      worst_formula = std::max(worst_formula, std::fabs(res.phi - expect));
    }
    // exhaustive scan agrees with the interval scan at small n
    double worst_agree = 0.0;
    for (auto [n, m] : {std::pair{10, 2}, {16, 3}, {10, 1}}) {
      const Kernel& k = torus_r(n, m, 1);
      double a = bottleneck_optimum(k, BottleneckStrategy::exhaustive).phi;
      double b = bottleneck_optimum(k, BottleneckStrategy::intervals_1d).phi;
      worst_agree = std::max(worst_agree, std::fabs(a - b));
    }
    // Cheeger bound across the reversible instances that fit the optimizers
    moran_k(12), moran_k(16), torus(10, 1), torus(4, 2), cube(4), rrp(20, 4, 7);
    torus_r(10, 2, 1), torus_r(16, 3, 1), torus_r(20, 4, 1);
    double worst_cheeger = 1e300;
    bool all_ok = true;
    int count = 0;
    for (const char* key :
         {"moran(12)", "moran(16)", "torus_nn(10,1)", "torus_nn(4,2)", "hypercube(4)",
          "random_regular_perm(20,4,7)", "torus_range(10,2,1)", "torus_range(16,3,1)",
          "torus_range(20,4,1)"}) {
      CheegerResult c = cheeger_check(kernels.at(key));
      all_ok = all_ok && c.bound_ok;
      worst_cheeger = std::min(worst_cheeger, c.gap - c.phi_star * c.phi_star / 2.0);
      ++count;
    }
    r.pass = worst_formula <= kFormulaSlack && worst_agree <= kFormulaSlack && all_ok;
    r.detail = fmt(
        "interval optimum matches (m+1)/(2 floor(n/2)) to %.2e; exhaustive agreement %.2e; "
        "cheeger bound holds on %d instances (min slack %.3g)",
        worst_formula, worst_agree, count, worst_cheeger);
  }

  void c5(CriterionResult& r) {
    const C5Data& d = c5_data(threads);
    double budget = std::max(kKsMeetingBudget, d.ks.threshold);
    r.pass = d.ks.d <= budget;
    r.fingerprint = fp_c5(threads);
    r.detail = fmt(
        "KS(M/t_meet, atom+exponential mixture) = %.4f on 5000 pairs (budget %.3f, 1%% "
        "threshold %.4f); scaled mean %.4f",
        d.ks.d, budget, d.ks.threshold, d.scaled.mean);
  }

  void c6(CriterionResult& r) {
    const DensityMomentCheck& dm = c6_moran(threads);
    const DensityMomentCheck& dt = c6_torus(threads);
    double zmax = std::max(dm.max_abs_z_second, dt.max_abs_z_second);
    // diffusion proximity at the larger instance: u(1-u)e^{-s} from the
    // moment solver, 3 SE plus 15% asymptotic slack
    double worst_rel = 0.0;
    bool wf_ok = true;
    for (const MomentCheckPoint& p : dt.second_moment) {
      double target = 0.5 - wf_moment(0.5, 2, p.s);
      double dev = std::fabs(p.mean - target);
      double budget = kZBudget * p.se + kWfSlack * target;
      wf_ok = wf_ok && dev <= budget;
      worst_rel = std::max(worst_rel, dev / target);
    }
    r.pass = zmax <= kZBudget && wf_ok;
    r.fingerprint = fp_c6(threads);
    r.detail = fmt(
        "max |z| of E[p1p0] vs exact dual tail: %.2f (moran(200)), %.2f (torus 20^2), budget "
        "%.1f; torus vs u(1-u)e^{-s}: worst rel dev %.3f (slack %.2f + 3 SE)",
        dm.max_abs_z_second, dt.max_abs_z_second, kZBudget, worst_rel, kWfSlack);
  }

  void c7(CriterionResult& r) {
    const DensityMomentCheck& dm = c6_moran(threads);
    const DensityMomentCheck& dt = c6_torus(threads);
    const DensityMomentCheck& dc = c7_cube(threads);
    double zmax = std::max({dm.max_abs_z_martingale, dt.max_abs_z_martingale,
                            dc.max_abs_z_martingale});
    r.pass = zmax <= kZBudget;
    r.fingerprint = fp_c7(threads);
    r.detail = fmt(
        "mean p1 vs 1/2 at every grid point: max |z| = %.2f across moran(200), torus 20^2, "
        "hypercube(6) (budget %.1f)",
        zmax, kZBudget);
  }

  void c8(CriterionResult& r) {
    const std::vector<ResidualStat>& a = c8_moran(threads);
    const std::vector<ResidualStat>& b = c8_torus(threads);
    auto ladder = [&](const std::vector<ResidualStat>& v, std::string& into, bool& trend_ok,
                      double& drop) {
      std::vector<double> means, ses;
      for (const ResidualStat& s : v) {
        means.push_back(s.mean_abs);
        ses.push_back(s.se_abs);
        into += fmt("%s%.4f±%.4f", into.empty() ? "" : " -> ", s.mean_abs, s.se_abs);
      }
      TrendVerdict t = trend_check(means, ses, TrendDirection::decreasing);
      trend_ok = t.pass;
      drop = means.back() / means.front();
    };
    std::string sa, sb;
    bool ta = false, tb = false;
    double da = 0.0, db = 0.0;
    ladder(a, sa, ta, da);
    ladder(b, sb, tb, db);
    r.pass = ta && tb && da <= kResidualDropFactor && db <= kResidualDropFactor;
    r.fingerprint = fp_c8(threads);
    r.detail = fmt(
        "E|R(2)|: moran {30,100,300}: %s (trend %s, drop %.2f %s); torus 2-d {10,20,40}: %s "
        "(trend %s, drop %.2f %s); required: each step down within 2 SE, final <= %.2f of first. "
        "Note: the 2-d torus family's residual scale decays like the mixing/meeting ratio, i.e. "
        "only logarithmically in n, so a 16x size increase yields a ~0.56 drop; the 0.50 "
        "requirement is not reachable on this ladder at any replica count",
        sa.c_str(), ta ? "ok" : "VIOLATED", da, da <= kResidualDropFactor ? "ok" : "VIOLATED",
        sb.c_str(), tb ? "ok" : "VIOLATED", db, db <= kResidualDropFactor ? "ok" : "VIOLATED",
        kResidualDropFactor);
  }

  void c9(CriterionResult& r) {
    const C9Data& d = c9_data(threads);
    double b41 = std::max(kKsKingmanBudget, d.d41.threshold);
    double b43 = std::max(kKsKingmanBudget, d.d43.threshold);
    r.pass = d.d41.d <= b41 && d.d43.d <= b43;
    r.fingerprint = fp_c9(threads);
    r.detail = fmt(
        "torus 20^2, 4 lineages: KS(C41/t_meet, block-counting refs) = %.4f, KS(C43/t_meet) = "
        "%.4f (budgets %.3f/%.3f); scaled means %.3f / %.4f",
        d.d41.d, d.d43.d, b41, b43, d.m41.mean, d.m43.mean);
  }

  void c10(CriterionResult& r) {
    const C10Data& d = c10_data(threads);
    double budget = std::max(kKsKingmanBudget, d.d.threshold);
    r.pass = d.d.d <= budget;
    r.fingerprint = fp_c10(threads);
    r.detail = fmt(
        "moran(100), all-site start: KS(C1/t_meet, entrance-law refs) = %.4f (budget %.3f); "
        "scaled mean %.3f vs 2 - 2/2000 = %.3f",
        d.d.d, budget, d.m.mean, 2.0 - 2.0 / 2000.0);
  }

  void c11(CriterionResult& r) {
    double worst_basic = 1e300, worst_rev = 1e300;
    int configs_total = 0;
    for (const char* key : {"torus_nn(3,2)", "moran(8)"}) {
      const Kernel& k = key[0] == 't' ? torus(3, 2) : moran_k(8);
      auto configs = default_bound_configs(k);
      configs_total += static_cast<int>(configs.size());
      for (auto [s, t] : {std::pair{0.5, 1.5}, {1.0, 3.0}}) {
        PairBoundRecord rec = pair_correlation_bound_check(k, s, t, configs);
        worst_basic = std::min(worst_basic, rec.min_margin_basic);
        if (k.reversible) worst_rev = std::min(worst_rev, rec.min_margin_reversible);
      }
    }
    r.pass = worst_basic >= -kExactSlack && worst_rev >= -kExactSlack;
    r.detail = fmt(
        "all configurations (%d) on torus 3x3 and moran(8), (s,t) in {(0.5,1.5),(1,3)}: min "
        "margin %.3e (mixing bound), %.3e (spectral bound); slack %.0e",
        configs_total, worst_basic, worst_rev, kExactSlack);
  }

  void c12(CriterionResult& r) {
    auto ratios = [&](const std::vector<std::string>& keys, std::vector<double>& mix,
                      std::vector<double>& gapm) {
      for (const std::string& key : keys) {
        const Kernel& k = kernels.at(key);
        ConditionReport rep = condition_report(k, meet(key).t_meet);
        mix.push_back(rep.ratio_mix);
        gapm.push_back(rep.gap_tmeet);
      }
    };
    moran_k(30), moran_k(100), moran_k(300);
    cube(6), cube(8), cube(10);
    std::vector<double> mix_moran, gap_moran, mix_cube, gap_cube;
    ratios({"moran(30)", "moran(100)", "moran(300)"}, mix_moran, gap_moran);
    ratios({"hypercube(6)", "hypercube(8)", "hypercube(10)"}, mix_cube, gap_cube);
    std::vector<double> zeros3(3, 0.0);
    bool a = trend_check(mix_moran, zeros3, TrendDirection::decreasing).pass;
    bool b = trend_check(mix_cube, zeros3, TrendDirection::decreasing).pass;
    bool c = trend_check(gap_cube, zeros3, TrendDirection::increasing).pass;
    r.pass = a && b && c;
    r.detail = fmt(
        "t_mix/t_meet moran: %.4f -> %.4f -> %.4f; hypercube: %.4f -> %.4f -> %.4f; g*t_meet "
        "hypercube: %.1f -> %.1f -> %.1f",
        mix_moran[0], mix_moran[1], mix_moran[2], mix_cube[0], mix_cube[1], mix_cube[2],
        gap_cube[0], gap_cube[1], gap_cube[2]);
  }

  void c13(CriterionResult& r) {
    // frozen regressions first (all exact solves, cached)
    double worst_frozen = 0.0;
    for (const FrozenMeeting& f : kTorus2d) {
      torus(f.L, 2);
      double tm = meet(fmt("torus_nn(%d,2)", f.L)).t_meet;
      worst_frozen = std::max(worst_frozen, std::fabs(tm - f.t_meet) / f.t_meet);
    }
    for (const FrozenMeeting& f : kTorus3d) {
      torus(f.L, 3);
      double tm = meet(fmt("torus_nn(%d,3)", f.L)).t_meet;
      worst_frozen = std::max(worst_frozen, std::fabs(tm - f.t_meet) / f.t_meet);
    }
    // 2-d: ratio to (1/2pi) L^2 log L^2 inside [0.7, 1.3], approaching 1
    std::vector<double> dev2d;
    bool in_band = true;
    std::string ratios;
    for (int L : {15, 20, 25, 30}) {
      double tm = meet(fmt("torus_nn(%d,2)", L)).t_meet;
      double ratio = tm / (L * L * std::log(double(L) * L) / (2.0 * M_PI));
      in_band = in_band && ratio >= 0.7 && ratio <= 1.3;
      dev2d.push_back(std::fabs(ratio - 1.0));
      ratios += fmt("%s%.4f", ratios.empty() ? "" : ", ", ratio);
    }
    std::vector<double> zeros4(4, 0.0), zeros3(3, 0.0);
    bool toward_1 = trend_check(dev2d, zeros4, TrendDirection::decreasing).pass;
    // 3-d: t_meet / L^3 within 25% of the continuum constant, closing in
    std::vector<double> dev3d;
    bool within_25 = true;
    std::string consts;
    for (const FrozenMeeting& f : kTorus3d) {
      double c = meet(fmt("torus_nn(%d,3)", f.L)).t_meet / (double(f.L) * f.L * f.L);
      double rel = std::fabs(c / kGreen3dHalf - 1.0);
      within_25 = within_25 && rel <= 0.25;
      dev3d.push_back(rel);
      consts += fmt("%s%.4f", consts.empty() ? "" : ", ", c);
    }
    bool closing = trend_check(dev3d, zeros3, TrendDirection::decreasing).pass;
    r.pass = worst_frozen <= 1e-6 && in_band && toward_1 && within_25 && closing;
    r.detail = fmt(
        "2-d ratios to (L^2 log L^2)/(2 pi): %s (band [0.7,1.3], approaching 1: %s); 3-d "
        "t_meet/L^3: %s vs %.6f (within 25%%, closing: %s); frozen-reference residual %.2e",
        ratios.c_str(), toward_1 ? "yes" : "NO", consts.c_str(), kGreen3dHalf,
        closing ? "yes" : "NO", worst_frozen);
  }

  void c14(CriterionResult& r) {
    unsigned alt = threads <= 1 ? 2u : 1u;
    struct Probe {
      const char* tag;
      std::function<std::string(unsigned)> fp;
    };
    std::vector<Probe> probes = {
        {"meeting-limit", [&](unsigned t) { return fp_c5(t); }},
        {"density-duality", [&](unsigned t) { return fp_c6(t); }},
        {"martingale", [&](unsigned t) { return fp_c7(t); }},
        {"mean-field-residual", [&](unsigned t) { return fp_c8(t); }},
        {"kingman-partial", [&](unsigned t) { return fp_c9(t); }},
        {"kingman-entrance", [&](unsigned t) { return fp_c10(t); }},
    };
    bool all_match = true;
    std::size_t bytes = 0;
    std::string mismatches;
    for (const Probe& p : probes) {
      std::string first = p.fp(threads);
      std::string rerun = p.fp(alt);
      bytes += first.size();
      bool ok = !first.empty() && first == rerun;
      all_match = all_match && ok;
      if (!ok) mismatches += fmt(" %s", p.tag);
    }
    r.pass = all_match;
    r.fingerprint = fmt("fnv=%llx", (unsigned long long)fnv1a(fp_c5(threads) + fp_c6(threads) +
                                                              fp_c7(threads) + fp_c8(threads) +
                                                              fp_c9(threads) + fp_c10(threads)));
    r.detail = fmt(
        "all randomized statistics reproduced byte-for-byte at %u vs %u workers (%zu fingerprint "
        "bytes)%s%s",
        threads, alt, bytes, all_match ? "" : "; MISMATCH:", mismatches.c_str());
  }

  void run(int index, const char* name, const std::function<void(CriterionResult&)>& body) {
    if (!selected(index)) return;
    CriterionResult r;
    r.index = index;
    r.name = name;
    try {
      body(r);
    } catch (const Error& e) {
      r.pass = false;
      r.detail += fmt("%serror %s: %s", r.detail.empty() ? "" : "; ", e.code().c_str(), e.what());
    } catch (const std::exception& e) {
      r.pass = false;
      r.detail += fmt("%serror: %s", r.detail.empty() ? "" : "; ", e.what());
    }
    results.push_back(std::move(r));
    if (opts.log) {
      const CriterionResult& q = results.back();
      std::string name_pad = q.name;
      if (name_pad.size() < 30) name_pad.resize(30, ' ');
      (*opts.log) << fmt("[%2d/14] %s %s | ", q.index, q.pass ? "PASS" : "FAIL",
                         name_pad.c_str())
                  << q.detail << std::endl;
    }
  }
};

}  // namespace

std::vector<CriterionResult> run_acceptance(const AcceptanceOptions& opts) {
  Battery b(opts);
  b.run(1, "meeting-moment-identities", [&](CriterionResult& r) { b.c1(r); });
  b.run(2, "meeting-time-lower-bound", [&](CriterionResult& r) { b.c2(r); });
  b.run(3, "hypercube-spectral-gap", [&](CriterionResult& r) { b.c3(r); });
  b.run(4, "bottleneck-and-cheeger", [&](CriterionResult& r) { b.c4(r); });
  b.run(5, "exponential-meeting-limit", [&](CriterionResult& r) { b.c5(r); });
  b.run(6, "pair-density-duality", [&](CriterionResult& r) { b.c6(r); });
  b.run(7, "density-martingale", [&](CriterionResult& r) { b.c7(r); });
  b.run(8, "mean-field-residual-vanishes", [&](CriterionResult& r) { b.c8(r); });
  b.run(9, "kingman-partial-coalescence", [&](CriterionResult& r) { b.c9(r); });
  b.run(10, "kingman-entrance-law", [&](CriterionResult& r) { b.c10(r); });
  b.run(11, "pair-decoupling-bounds", [&](CriterionResult& r) { b.c11(r); });
  b.run(12, "mixing-meeting-conditions", [&](CriterionResult& r) { b.c12(r); });
  b.run(13, "torus-meeting-scaling", [&](CriterionResult& r) { b.c13(r); });
  b.run(14, "thread-count-determinism", [&](CriterionResult& r) { b.c14(r); });
  return std::move(b.results);
}

bool all_passed(const std::vector<CriterionResult>& results) {
  if (results.empty()) return false;
  for (const CriterionResult& r : results)
    if (!r.pass) return false;
  return true;
}

}  // namespace vm
