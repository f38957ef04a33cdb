// Command-line front end: build kernels, analyze them, solve meeting
// problems exactly, run voter / coalescent simulations, query the diffusion
// reference, run the acceptance battery, or execute a config-driven
// experiment.  Exit codes: 0 = ok / all passed, 1 = a statistical check
// failed, 2 = usage or computation error.

#include <cmath>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "voter/acceptance.hpp"
#include "voter/analysis.hpp"
#include "voter/coalescent_sim.hpp"
#include "voter/errors.hpp"
#include "voter/exact_meeting.hpp"
#include "voter/experiments.hpp"
#include "voter/graph_zoo.hpp"
#include "voter/kernel.hpp"
#include "voter/parallel.hpp"
#include "voter/report.hpp"
#include "voter/stats.hpp"
#include "voter/voter_sim.hpp"
#include "voter/wf_reference.hpp"

namespace {

using nlohmann::json;

// Options shared by every subcommand that needs a kernel: either a saved
// kernel file or a family name plus parameters.
struct KernelCli {
  std::string input;
  std::string family;
  long long n = -1, d = -1, m = -1, k = -1;
  std::int64_t seed = -1;

  void attach(CLI::App* cmd) {
    cmd->add_option("--input", input, "kernel file produced by `graph -o`");
    cmd->add_option("--family", family, "moran | torus_nn | torus_range | hypercube | random_regular_perm");
    cmd->add_option("-n", n, "sites (moran, random_regular_perm) or side length (tori)");
    cmd->add_option("-d", d, "torus dimension / hypercube n_dim");
    cmd->add_option("-m", m, "torus_range radius");
    cmd->add_option("-k", k, "random_regular_perm degree (even)");
    cmd->add_option("--graph-seed", seed, "random_regular_perm permutation seed");
  }

  vm::ZooSpec spec() const {
    vm::ZooSpec s;
    s.family = family;
    if (n >= 0) s.params["n"] = n;
    if (d >= 0) s.params[family == "hypercube" ? "n_dim" : "d"] = d;
    if (m >= 0) s.params["m"] = m;
    if (k >= 0) s.params["k"] = k;
    if (seed >= 0) s.params["seed"] = seed;
    return s;
  }

  vm::Kernel make() const {
    if (!input.empty()) return vm::load_kernel(input);
    vm::require(!family.empty(), "ConfigError", "need --input or --family");
    return vm::make_zoo_kernel(spec());
  }

  std::string label() const {
    if (!input.empty()) return input;
    return vm::zoo_label(spec());
  }
};

std::vector<double> parse_grid(const std::string& csv) {
  std::vector<double> g;
  std::size_t pos = 0;
  while (pos < csv.size()) {
    std::size_t comma = csv.find(',', pos);
    if (comma == std::string::npos) comma = csv.size();
    g.push_back(std::stod(csv.substr(pos, comma - pos)));
    pos = comma + 1;
  }
  return g;
}

json scalar_json(const vm::Kernel& k) {
  return json{{"n", k.n},
              {"pi_diag", k.pi_diag},
              {"pi_max", k.pi_max},
              {"q_max", k.q_max},
              {"nu_total", k.nu_total},
              {"reversible", k.reversible},
              {"edges", k.edge_count()},
              {"group_verified", k.group.verified}};
}

int cmd_graph(const KernelCli& kc, const std::string& out) {
  vm::Kernel k = kc.make();
  if (!out.empty()) {
    vm::save_kernel(k, out);
    json side = scalar_json(k);
    side["label"] = kc.label();
    std::ofstream f(out + ".json");
    f << side.dump(2) << "\n";
    std::cout << "wrote " << out << " (" << k.n << " sites, " << k.edge_count()
              << " rate entries)\n";
  } else {
    vm::save_kernel(k, std::cout);
  }
  return 0;
}

int cmd_analyze(const KernelCli& kc, bool with_mixing, bool with_bottleneck) {
  vm::Kernel k = kc.make();
  json out = scalar_json(k);
  out["label"] = kc.label();
  auto guard = [&](const char* field, auto fn) {
    try {
      out[field] = fn();
    } catch (const vm::Error& e) {
      out[field] = nullptr;
      out[std::string(field) + "_skipped"] = e.code();
    }
  };
  if (k.reversible) guard("gap", [&] { return vm::spectral_gap(k); });
  if (with_mixing) {
    guard("t_mix", [&] { return vm::mixing_time(k); });
  }
  if (with_bottleneck && k.reversible) {
    guard("cheeger", [&]() -> json {
      vm::CheegerResult c = vm::cheeger_check(k);
      return json{{"gap", c.gap}, {"phi_star", c.phi_star}, {"bound_ok", c.bound_ok}};
    });
  }
  std::cout << out.dump(2) << "\n";
  return 0;
}

int cmd_exact(const KernelCli& kc, const std::string& tails, const std::string& route) {
  vm::Kernel k = kc.make();
  vm::MeetingSolution sol = route == "full"      ? vm::meeting_moments_full(k)
                            : route == "reduced" ? vm::meeting_moments_reduced(k)
                                                 : vm::meeting_moments(k);
  vm::IdentityRecord rec = vm::identity_check(k, sol);
  json out{{"label", kc.label()},
           {"route", sol.reduced ? "difference-walk" : "dense-product"},
           {"t_meet", sol.t_meet},
           {"mvv_mean", sol.mvv_mean},
           {"mvv_second", sol.mvv_second},
           {"mvv_mean_residual", rec.mvv_mean_residual},
           {"tmeet_residual", rec.tmeet_residual},
           {"lower_bound", rec.lower_bound},
           {"lower_bound_ok", rec.lower_bound_ok}};
  if (!tails.empty()) {
    std::vector<double> grid = parse_grid(tails);
    out["tail_grid"] = grid;
    out["tail_uu"] = vm::meeting_tail(k, vm::PairKind::UU, grid);
    out["tail_vv"] = vm::meeting_tail(k, vm::PairKind::VV, grid);
  }
  std::cout << out.dump(2) << "\n";
  return 0;
}

int cmd_sim_voter(const KernelCli& kc, double u, double horizon, const std::string& grid_csv,
                  long long replicas, double gamma_opt, std::uint64_t seed, unsigned threads) {
  vm::Kernel k = kc.make();
  vm::SimContext ctx = vm::SimContext::make(k);
  vm::GammaPolicy policy;
  if (gamma_opt > 0) {
    policy.use_tmeet = false;
    policy.explicit_value = gamma_opt;
  }
  vm::GammaResolved gamma = vm::resolve_gamma(k, policy, seed, threads);
  std::vector<double> grid =
      grid_csv.empty() ? std::vector<double>{0.25, 0.5, 1.0, 2.0} : parse_grid(grid_csv);
  vm::EnsembleSummary s = vm::ensemble(ctx, u, gamma.gamma, horizon, grid, replicas, seed, threads);
  json out{{"label", kc.label()},
           {"gamma", gamma.gamma},
           {"gamma_source", gamma.source},
           {"replicas", s.replicas},
           {"grid", s.grid},
           {"mean_p1", s.mean_p1},
           {"se_p1", s.se_p1},
           {"mean_p1p0", s.mean_p1p0},
           {"se_p1p0", s.se_p1p0},
           {"mean_int_pairs", s.mean_int_pairs},
           {"absorbed_at_0", s.absorbed_at_0},
           {"absorbed_at_1", s.absorbed_at_1},
           {"mean_residual", s.mean_residual},
           {"mean_abs_residual", s.mean_abs_residual},
           {"se_abs_residual", s.se_abs_residual},
           {"tau1_count", s.tau1_samples.size()}};
  std::cout << out.dump(2) << "\n";
  return 0;
}

int cmd_sim_coalescent(const KernelCli& kc, int lineages, int level, long long replicas,
                       std::uint64_t seed, unsigned threads, bool dump) {
  vm::Kernel k = kc.make();
  std::vector<double> s =
      lineages > 0 ? vm::partial_coalescence_samples(k, lineages, level, replicas, seed, threads)
                   : vm::full_coalescence_samples(k, level, replicas, seed, threads);
  vm::MeanSe m = vm::mean_se(s);
  json out{{"label", kc.label()},
           {"start", lineages > 0 ? json(lineages) : json("all-sites")},
           {"level", level},
           {"replicas", replicas},
           {"mean", m.mean},
           {"se", m.se}};
  if (dump) out["samples"] = s;
  std::cout << out.dump(2) << "\n";
  return 0;
}

int cmd_wf(const std::string& mode, double u, int korder, double t, double delta, double dt,
           long long replicas, std::uint64_t seed) {
  json out;
  if (mode == "moment") {
    out = json{{"u", u}, {"k", korder}, {"t", t}, {"moment", vm::wf_moment(u, korder, t)}};
  } else if (mode == "mixture") {
    out = json{{"delta", delta}, {"t", t}, {"cdf", vm::mixture_cdf(delta, t)}};
  } else if (mode == "simulate") {
    vm::Rng rng(seed);
    std::vector<double> finals;
    finals.reserve(replicas);
    for (long long i = 0; i < replicas; ++i)
      finals.push_back(vm::wf_simulate(u, t, dt, rng).final_value);
    vm::MeanSe m = vm::mean_se(finals);
    out = json{{"u", u},        {"t", t},       {"dt", dt},
               {"replicas", replicas}, {"mean", m.mean}, {"se", m.se}};
  } else {
    vm::fail("ConfigError", "wf mode must be moment, mixture, or simulate");
  }
  std::cout << out.dump(2) << "\n";
  return 0;
}

int cmd_verify(std::uint64_t seed, unsigned threads, const std::vector<int>& only) {
  vm::AcceptanceOptions opts;
  opts.master_seed = seed;
  opts.threads = threads;
  opts.only = only;
  opts.log = &std::cout;
  std::vector<vm::CriterionResult> results = vm::run_acceptance(opts);
  int passed = 0;
  for (const vm::CriterionResult& r : results) passed += r.pass ? 1 : 0;
  std::cout << "\n" << passed << "/" << results.size() << " criteria passed\n";
  return vm::all_passed(results) ? 0 : 1;
}

int cmd_report(const std::string& config_path, const std::string& out_dir) {
  vm::ExperimentConfig config = vm::ExperimentConfig::from_file(config_path);
  if (!out_dir.empty()) config.output_dir = out_dir;
  vm::Report rep = vm::run_experiment(config);
  rep.write(config.output_dir);
  int failed = 0;
  for (const vm::Verdict& v : rep.verdicts) failed += v.pass ? 0 : 1;
  std::cout << rep.verdicts.size() << " verdicts, " << failed << " failed; report under "
            << config.output_dir << "\n";
  return rep.all_pass ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"finite voter models, coalescing duals, and their exact analysis"};
  app.require_subcommand(1);

  // graph
  auto* graph = app.add_subcommand("graph", "build a kernel and write it to disk");
  KernelCli graph_kc;
  graph_kc.attach(graph);
  std::string graph_out;
  graph->add_option("-o,--output", graph_out, "kernel file (JSON sidecar written alongside)");

  // analyze
  auto* analyze = app.add_subcommand("analyze", "stationary scalars, gap, mixing, bottleneck");
  KernelCli analyze_kc;
  analyze_kc.attach(analyze);
  bool no_mixing = false, no_bottleneck = false;
  analyze->add_flag("--no-mixing", no_mixing, "skip the mixing-time bisection");
  analyze->add_flag("--no-bottleneck", no_bottleneck, "skip the bottleneck optimizer");

  // exact
  auto* exact = app.add_subcommand("exact", "meeting moments, identities, tails");
  KernelCli exact_kc;
  exact_kc.attach(exact);
  std::string tails, route = "auto";
  exact->add_option("--tails", tails, "comma-separated times for P(M > t)");
  exact->add_option("--route", route, "auto | full | reduced")
      ->check(CLI::IsMember({"auto", "full", "reduced"}));

  // simulate voter | coalescent
  auto* sim = app.add_subcommand("simulate", "Monte Carlo ensembles");
  sim->require_subcommand(1);
  auto* sv = sim->add_subcommand("voter", "opinion dynamics on the rescaled clock");
  KernelCli sv_kc;
  sv_kc.attach(sv);
  double sv_u = 0.5, sv_horizon = 2.0, sv_gamma = 0.0;
  long long sv_replicas = 500;
  std::string sv_grid;
  std::uint64_t sv_seed = 1;
  unsigned sv_threads = 0;
  sv->add_option("-u", sv_u, "initial Bernoulli density")->capture_default_str();
  sv->add_option("--horizon", sv_horizon, "end time, gamma-units")->capture_default_str();
  sv->add_option("--gamma", sv_gamma, "explicit time scale (default: exact t_meet)");
  sv->add_option("--grid", sv_grid, "comma-separated capture times, gamma-units");
  sv->add_option("--replicas", sv_replicas)->capture_default_str();
  sv->add_option("--seed", sv_seed)->capture_default_str();
  sv->add_option("--threads", sv_threads, "0 = VOTER_THREADS or hardware");

  auto* sc = sim->add_subcommand("coalescent", "coalescing-walk hitting times");
  KernelCli sc_kc;
  sc_kc.attach(sc);
  int sc_lineages = 0, sc_level = 1;
  long long sc_replicas = 1000;
  std::uint64_t sc_seed = 1;
  unsigned sc_threads = 0;
  bool sc_dump = false;
  sc->add_option("--lineages", sc_lineages, "pi-i.i.d. start count (0 = one per site)")
      ->capture_default_str();
  sc->add_option("--level", sc_level, "record first time at this many blocks")
      ->capture_default_str();
  sc->add_option("--replicas", sc_replicas)->capture_default_str();
  sc->add_option("--seed", sc_seed)->capture_default_str();
  sc->add_option("--threads", sc_threads);
  sc->add_flag("--dump", sc_dump, "include raw samples in the output");

  // wf
  auto* wf = app.add_subcommand("wf", "diffusion reference: moments, mixture cdf, paths");
  std::string wf_mode = "moment";
  double wf_u = 0.5, wf_t = 1.0, wf_delta = 0.0, wf_dt = 1e-3;
  int wf_k = 2;
  long long wf_replicas = 1000;
  std::uint64_t wf_seed = 1;
  wf->add_option("--mode", wf_mode, "moment | mixture | simulate")
      ->check(CLI::IsMember({"moment", "mixture", "simulate"}));
  wf->add_option("-u", wf_u)->capture_default_str();
  wf->add_option("-k", wf_k, "moment order")->capture_default_str();
  wf->add_option("-t", wf_t)->capture_default_str();
  wf->add_option("--delta", wf_delta, "atom at zero (mixture mode)");
  wf->add_option("--dt", wf_dt, "Euler step (simulate mode)")->capture_default_str();
  wf->add_option("--replicas", wf_replicas)->capture_default_str();
  wf->add_option("--seed", wf_seed)->capture_default_str();

  // verify
  auto* verify = app.add_subcommand("verify", "run the fourteen-criterion battery");
  std::uint64_t verify_seed = 20260819ull;
  unsigned verify_threads = 0;
  std::vector<int> verify_only;
  verify->add_option("--seed", verify_seed)->capture_default_str();
  verify->add_option("--threads", verify_threads);
  verify->add_option("--only", verify_only, "criterion numbers to run");

  // report
  auto* report = app.add_subcommand("report", "config-driven experiment run");
  std::string report_config, report_out;
  report->add_option("--config", report_config, "JSON config path")->required();
  report->add_option("--output", report_out, "override the config's output_dir");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*graph) return cmd_graph(graph_kc, graph_out);
    if (*analyze) return cmd_analyze(analyze_kc, !no_mixing, !no_bottleneck);
    if (*exact) return cmd_exact(exact_kc, tails, route);
    if (*sv) return cmd_sim_voter(sv_kc, sv_u, sv_horizon, sv_grid, sv_replicas, sv_gamma,
                                  sv_seed, sv_threads);
    if (*sc) return cmd_sim_coalescent(sc_kc, sc_lineages, sc_level, sc_replicas, sc_seed,
                                       sc_threads, sc_dump);
    if (*wf) return cmd_wf(wf_mode, wf_u, wf_k, wf_t, wf_delta, wf_dt, wf_replicas, wf_seed);
    if (*verify) return cmd_verify(verify_seed, verify_threads, verify_only);
    if (*report) return cmd_report(report_config, report_out);
  } catch (const vm::Error& e) {
    std::cerr << "error [" << e.code() << "] " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}
