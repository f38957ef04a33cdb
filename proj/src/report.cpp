#include "voter/report.hpp"

#include <cmath>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

#include "voter/errors.hpp"
#include "voter/parallel.hpp"
#include "voter/wf_reference.hpp"

namespace vm {

namespace {

using nlohmann::json;

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Pinned statistical budgets (they mirror the acceptance battery's):
constexpr double kMixtureKsBudget = 0.05;   // scaled-meeting vs mixture law
constexpr double kKingmanKsBudget = 0.06;   // coalescence vs Kingman references
constexpr double kZBudget = 3.0;            // moment checks, in SEs
constexpr double kMarginSlack = 1e-9;       // exact-bound margins
constexpr double kIdentityBudget = 1e-8;    // moment-identity relative residuals
constexpr double kTailRelationBudget = 1e-6;

const char* const kKnownTests[] = {"identities",    "cheeger",          "conditions",
                                   "meeting_exp",   "density_moment",   "mean_field_trend",
                                   "kingman",       "full_coalescence", "pair_bounds"};

bool known_test(const std::string& t) {
  for (const char* name : kKnownTests)
    if (t == name) return true;
  return false;
}

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string hex64(std::uint64_t v) {
  char buf[24];
  std::snprintf(buf, sizeof(buf), "0x%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::uint64_t verdict_seed(std::uint64_t master, const std::string& instance,
                           const std::string& test) {
  return derive_stream_seed(master, fnv1a(instance + "|" + test));
}

std::vector<double> uniform_grid(double lo, double hi, double step) {
  std::vector<double> g;
  long long count = static_cast<long long>(std::llround((hi - lo) / step));
  g.reserve(static_cast<std::size_t>(count) + 1);
  for (long long i = 0; i <= count; ++i) g.push_back(lo + step * static_cast<double>(i));
  return g;
}

}  // namespace

std::uint64_t fnv1a(const std::string& bytes) {
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

std::string toolchain_stamp() {
  std::ostringstream out;
#if defined(__VERSION__)
  out << "compiler " << __VERSION__;
#else
  out << "compiler unknown";
#endif
  out << ", std " << __cplusplus;
  return out.str();
}

TrendVerdict trend_check(const std::vector<double>& values, const std::vector<double>& ses,
                         TrendDirection direction) {
  require(values.size() == ses.size(), "BadParam", "values and SEs must align");
  require(values.size() >= 3, "TooFewPoints", "trend check needs at least 3 ladder points");
  TrendVerdict out;
  out.pass = true;
  std::ostringstream detail;
  for (std::size_t i = 0; i + 1 < values.size(); ++i) {
    double band = 2.0 * std::sqrt(ses[i] * ses[i] + ses[i + 1] * ses[i + 1]);
    bool ok = direction == TrendDirection::decreasing ? values[i + 1] < values[i] + band
                                                      : values[i + 1] > values[i] - band;
    if (!ok) out.pass = false;
    detail << (i ? "; " : "") << fmt17(values[i]) << " -> " << fmt17(values[i + 1])
           << " (band " << fmt17(band) << (ok ? ", ok)" : ", VIOLATED)");
  }
  out.detail = detail.str();
  return out;
}

ExperimentConfig ExperimentConfig::from_json(const json& j) {
  ExperimentConfig cfg;
  try {
    require(j.contains("specs") && j["specs"].is_array() && !j["specs"].empty(), "ConfigError",
            "config needs a nonempty 'specs' array");
    for (const auto& entry : j["specs"]) {
      std::string family = entry.at("family").get<std::string>();
      std::vector<std::size_t> group;
      auto push_instance = [&](const json& params) {
        ZooSpec spec;
        spec.family = family;
        for (auto it = params.begin(); it != params.end(); ++it)
          spec.params[it.key()] = it.value().get<long long>();
        group.push_back(cfg.instances.size());
        cfg.instances.push_back(std::move(spec));
      };
      if (entry.contains("ladder")) {
        for (const auto& params : entry.at("ladder")) push_instance(params);
      } else {
        push_instance(entry.value("params", json::object()));
      }
      cfg.ladders.push_back(std::move(group));
    }
    require(j.contains("tests") && j["tests"].is_array() && !j["tests"].empty(), "ConfigError",
            "config needs a nonempty 'tests' array");
    for (const auto& t : j["tests"]) {
      std::string name = t.get<std::string>();
      require(known_test(name), "ConfigError", "unknown test '" + name + "'");
      cfg.tests.push_back(name);
    }
    if (j.contains("gamma")) {
      std::string policy = j["gamma"].value("policy", std::string("tmeet"));
      if (policy == "tmeet") {
        cfg.gamma.use_tmeet = true;
      } else if (policy == "explicit") {
        cfg.gamma.use_tmeet = false;
        cfg.gamma.explicit_value = j["gamma"].at("value").get<double>();
      } else {
        fail("ConfigError", "gamma policy must be 'tmeet' or 'explicit'");
      }
    }
    cfg.replicas = j.value("replicas", static_cast<long long>(500));
    require(cfg.replicas >= 1, "ConfigError", "replicas must be >= 1");
    cfg.master_seed = j.value("master_seed", static_cast<std::uint64_t>(1));
    cfg.parallelism = j.value("parallelism", 0u);
    cfg.output_dir = j.value("output_dir", std::string("out"));
  } catch (const json::exception& e) {
    fail("ConfigError", std::string("config parse: ") + e.what());
  }
  return cfg;
}

ExperimentConfig ExperimentConfig::from_file(const std::string& path) {
  std::ifstream in(path);
  require(static_cast<bool>(in), "ConfigError", "cannot open config file " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    fail("ConfigError", std::string("config parse: ") + e.what());
  }
  return from_json(j);
}

json ExperimentConfig::to_json() const {
  json j;
  j["specs"] = json::array();
  for (const auto& group : ladders) {
    json entry;
    entry["family"] = instances[group.front()].family;
    json ladder = json::array();
    for (std::size_t idx : group) {
      json params = json::object();
      for (const auto& [key, value] : instances[idx].params) params[key] = value;
      ladder.push_back(params);
    }
    entry["ladder"] = ladder;
    j["specs"].push_back(entry);
  }
  j["tests"] = tests;
  if (gamma.use_tmeet) {
    j["gamma"] = {{"policy", "tmeet"}};
  } else {
    j["gamma"] = {{"policy", "explicit"}, {"value", gamma.explicit_value}};
  }
  j["replicas"] = replicas;
  j["master_seed"] = master_seed;
  j["parallelism"] = parallelism;
  j["output_dir"] = output_dir;
  return j;
}

namespace {

struct Runner {
  const ExperimentConfig& cfg;
  unsigned threads;
  std::uint64_t config_hash;
  std::vector<Kernel> kernels;
  std::vector<std::string> labels;
  std::vector<InstanceScalars> scalars;
  std::vector<Verdict> verdicts;

  // Gamma per instance, resolved lazily (it can be expensive).
  std::vector<GammaResolved> gamma_cache;
  std::vector<bool> gamma_ready;

  explicit Runner(const ExperimentConfig& c)
      : cfg(c), threads(c.parallelism ? c.parallelism : default_threads()) {
    config_hash = fnv1a(cfg.to_json().dump());
    for (const auto& spec : cfg.instances) {
      labels.push_back(zoo_label(spec));
      kernels.push_back(make_zoo_kernel(spec));
      const Kernel& k = kernels.back();
      InstanceScalars row;
      row.label = labels.back();
      row.n = k.n;
      row.pi_diag = k.pi_diag;
      row.pi_max = k.pi_max;
      row.q_max = k.q_max;
      row.nu_total = k.nu_total;
      row.reversible = k.reversible;
      row.gap = row.t_mix = row.t_meet = kNaN;
      row.ratio_mix = row.gap_tmeet = row.logterm = row.phi_star = kNaN;
      scalars.push_back(std::move(row));
    }
    gamma_cache.resize(kernels.size());
    gamma_ready.assign(kernels.size(), false);
  }

  const GammaResolved& gamma_for(std::size_t i) {
    if (!gamma_ready[i]) {
      gamma_cache[i] = resolve_gamma(
          kernels[i], cfg.gamma, verdict_seed(cfg.master_seed, labels[i], "gamma"), threads);
      gamma_ready[i] = true;
      scalars[i].t_meet = gamma_cache[i].gamma;
    }
    return gamma_cache[i];
  }

  void push(const std::string& instance, const std::string& test, const std::string& tag,
            bool pass, double statistic, double threshold, std::uint64_t seed,
            const std::string& detail) {
    Verdict v;
    v.instance = instance;
    v.test = test;
    v.tag = tag;
    v.pass = pass;
    v.statistic = statistic;
    v.threshold = threshold;
    v.seed = seed;
    v.input_hash = fnv1a(hex64(config_hash) + "|" + instance + "|" + test + "|" + tag + "|" +
                         std::to_string(seed));
    v.detail = detail;
    verdicts.push_back(std::move(v));
  }

  // Propagated module failures get the instance identity prepended.
  template <class Fn>
  void annotated(const std::string& label, Fn&& fn) {
    try {
      fn();
    } catch (const Error& e) {
      fail(e.code(), "instance " + label + ": " + e.what());
    }
  }

  std::string ladder_label(const std::vector<std::size_t>& group) const {
    return "ladder(" + labels[group.front()] + ".." + labels[group.back()] + ")";
  }

  void run_identities(std::size_t i);
  void run_cheeger(std::size_t i);
  void run_conditions_instance(std::size_t i);
  void run_conditions_trends(const std::vector<std::size_t>& group);
  void run_meeting_exp(std::size_t i);
  void run_density_moment(std::size_t i);
  void run_mean_field_trend(const std::vector<std::size_t>& group);
  void run_kingman(std::size_t i);
  void run_full_coalescence(std::size_t i);
  void run_pair_bounds(std::size_t i);

  void run_test(const std::string& test);
};

void Runner::run_identities(std::size_t i) {
  const Kernel& k = kernels[i];
  MeetingSolution sol = meeting_moments(k);
  scalars[i].t_meet = sol.t_meet;
  IdentityRecord rec = identity_check(k, sol);
  double worst = std::max(rec.mvv_mean_residual, rec.tmeet_residual);
  push(labels[i], "identities", "meeting-moment-identities", worst <= kIdentityBudget, worst,
       kIdentityBudget, 0,
       "first-moment residual " + fmt17(rec.mvv_mean_residual) + ", second-moment residual " +
           fmt17(rec.tmeet_residual));
  double lb_margin = (sol.t_meet - rec.lower_bound) / rec.lower_bound;
  push(labels[i], "identities", "meeting-lower-bound", rec.lower_bound_ok, lb_margin, 0.0, 0,
       "t_meet " + fmt17(sol.t_meet) + " vs bound " + fmt17(rec.lower_bound));

  std::vector<double> grid = uniform_grid(0.0, 5.0, 0.01);
  TailRelationRecord tails = tail_relation_check(k, grid);
  push(labels[i], "identities", "tail-integral-relation", tails.max_residual <= kTailRelationBudget,
       tails.max_residual, kTailRelationBudget, 0, "grid [0,5] step 0.01");
  bool markov = tail_markov_bound_ok(k, grid);
  push(labels[i], "identities", "tail-markov-bound", markov, markov ? 0.0 : 1.0, 0.0, 0, "");
}

void Runner::run_cheeger(std::size_t i) {
  const Kernel& k = kernels[i];
  require(k.reversible, "NotReversible",
          "cheeger test needs a reversible kernel (" + labels[i] + ")");
  CheegerResult res = cheeger_check(k);
  scalars[i].gap = res.gap;
  scalars[i].phi_star = res.phi_star;
  double margin = res.gap - 0.5 * res.phi_star * res.phi_star;
  push(labels[i], "cheeger", "cheeger-lower-bound", res.bound_ok, margin, -kMarginSlack, 0,
       "gap " + fmt17(res.gap) + ", phi* " + fmt17(res.phi_star));
}

void Runner::run_conditions_instance(std::size_t i) {
  const Kernel& k = kernels[i];
  const GammaResolved& g = gamma_for(i);
  ConditionReport rep = condition_report(k, g.gamma);
  scalars[i].gap = rep.gap;
  scalars[i].t_mix = rep.t_mix;
  scalars[i].t_meet = rep.t_meet;
  scalars[i].ratio_mix = rep.ratio_mix;
  scalars[i].gap_tmeet = rep.gap_tmeet;
  scalars[i].logterm = rep.logterm;
}

void Runner::run_conditions_trends(const std::vector<std::size_t>& group) {
  if (group.size() < 3) return;
  std::vector<double> ratio, gap_tmeet, zeros(group.size(), 0.0);
  bool all_reversible = true;
  for (std::size_t idx : group) {
    ratio.push_back(scalars[idx].ratio_mix);
    gap_tmeet.push_back(scalars[idx].gap_tmeet);
    all_reversible = all_reversible && scalars[idx].reversible;
  }
  TrendVerdict tv = trend_check(ratio, zeros, TrendDirection::decreasing);
  push(ladder_label(group), "conditions", "mixing-vs-meeting-vanishes", tv.pass,
       ratio.back() / ratio.front(), 1.0, 0, tv.detail);
  if (all_reversible) {
    TrendVerdict gv = trend_check(gap_tmeet, zeros, TrendDirection::increasing);
    push(ladder_label(group), "conditions", "gap-times-meeting-grows", gv.pass,
         gap_tmeet.back() / gap_tmeet.front(), 1.0, 0, gv.detail);
  }
}

void Runner::run_meeting_exp(std::size_t i) {
  const Kernel& k = kernels[i];
  const GammaResolved& g = gamma_for(i);
  std::uint64_t seed = verdict_seed(cfg.master_seed, labels[i], "meeting_exp");
  std::vector<double> samples = meeting_samples(k, cfg.replicas, seed, threads);
  for (double& v : samples) v /= g.gamma;
  double delta = k.pi_diag;
  KsResult ks =
      ks_one_sample(samples, [delta](double t) { return mixture_cdf(delta, t); }, 0.01);
  double budget = std::max(kMixtureKsBudget, ks.threshold);
  push(labels[i], "meeting_exp", "exponential-meeting-limit", ks.d <= budget, ks.d, budget, seed,
       "N " + std::to_string(samples.size()) + ", KS 1% threshold " + fmt17(ks.threshold) +
           ", atom " + fmt17(delta) + ", gamma " + fmt17(g.gamma) + " (" + g.source + ")");
}

void Runner::run_density_moment(std::size_t i) {
  const Kernel& k = kernels[i];
  const GammaResolved& g = gamma_for(i);
  std::uint64_t seed = verdict_seed(cfg.master_seed, labels[i], "density_moment");
  SimContext ctx = SimContext::make(k);
  std::vector<double> grid = {0.25, 0.5, 1.0, 2.0};
  DensityMomentCheck chk =
      density_moment_check(k, ctx, 0.5, g.gamma, grid, cfg.replicas, seed, threads);
  std::ostringstream d2;
  for (const auto& p : chk.second_moment)
    d2 << "s=" << p.s << " mean " << fmt17(p.mean) << " target " << fmt17(p.target) << " z "
       << fmt17(p.z) << "; ";
  push(labels[i], "density_moment", "pair-density-duality", chk.max_abs_z_second <= kZBudget,
       chk.max_abs_z_second, kZBudget, seed, d2.str());
  push(labels[i], "density_moment", "density-martingale", chk.max_abs_z_martingale <= kZBudget,
       chk.max_abs_z_martingale, kZBudget, seed,
       "u 0.5, replicas " + std::to_string(cfg.replicas));
}

void Runner::run_mean_field_trend(const std::vector<std::size_t>& group) {
  if (group.size() < 3) return;
  std::vector<double> values, ses;
  std::ostringstream detail;
  for (std::size_t idx : group) {
    const GammaResolved& g = gamma_for(idx);
    std::uint64_t seed = verdict_seed(cfg.master_seed, labels[idx], "mean_field_trend");
    SimContext ctx = SimContext::make(kernels[idx]);
    ResidualStat rs =
        residual_stat(kernels[idx], ctx, 0.5, g.gamma, 2.0, cfg.replicas, seed, threads);
    values.push_back(rs.mean_abs);
    ses.push_back(rs.se_abs);
    detail << labels[idx] << " E|R(2)| " << fmt17(rs.mean_abs) << " (se " << fmt17(rs.se_abs)
           << "); ";
  }
  TrendVerdict tv = trend_check(values, ses, TrendDirection::decreasing);
  push(ladder_label(group), "mean_field_trend", "mean-field-residual-vanishes", tv.pass,
       values.back() / values.front(), 1.0,
       verdict_seed(cfg.master_seed, ladder_label(group), "mean_field_trend"),
       detail.str() + tv.detail);
}

void Runner::run_kingman(std::size_t i) {
  const Kernel& k = kernels[i];
  const GammaResolved& g = gamma_for(i);
  std::uint64_t seed = verdict_seed(cfg.master_seed, labels[i], "kingman");
  for (int level : {1, 3}) {
    std::vector<double> samples =
        partial_coalescence_samples(k, 4, level, cfg.replicas, seed + level, threads);
    for (double& v : samples) v /= g.gamma;
    std::vector<double> ref = kingman_reference_samples(4, level, 30000, seed ^ 0x9e37ULL);
    KsResult ks = ks_two_sample(samples, ref, 0.01);
    double budget = std::max(kKingmanKsBudget, ks.threshold);
    push(labels[i], "kingman",
         level == 1 ? "kingman-partial-coalescence" : "kingman-first-merge",
         ks.d <= budget, ks.d, budget, seed + level,
         "levels 4->" + std::to_string(level) + ", N " + std::to_string(samples.size()));
  }
}

void Runner::run_full_coalescence(std::size_t i) {
  const Kernel& k = kernels[i];
  const GammaResolved& g = gamma_for(i);
  std::uint64_t seed = verdict_seed(cfg.master_seed, labels[i], "full_coalescence");
  std::vector<double> samples = full_coalescence_samples(k, 1, cfg.replicas, seed, threads);
  for (double& v : samples) v /= g.gamma;
  std::vector<double> ref =
      kingman_reference_samples(kKingmanInfinite, 1, 30000, seed ^ 0x51b7ULL);
  KsResult ks = ks_two_sample(samples, ref, 0.01);
  double budget = std::max(kKingmanKsBudget, ks.threshold);
  push(labels[i], "full_coalescence", "entrance-law-full-coalescence", ks.d <= budget, ks.d,
       budget, seed, "N " + std::to_string(samples.size()));
}

void Runner::run_pair_bounds(std::size_t i) {
  const Kernel& k = kernels[i];
  std::vector<std::vector<std::uint8_t>> configs = default_bound_configs(k);
  for (auto [s, t] : {std::pair<double, double>{0.5, 1.5}, std::pair<double, double>{1.0, 3.0}}) {
    PairBoundRecord rec = pair_correlation_bound_check(k, s, t, configs);
    double worst = rec.min_margin_basic;
    if (k.reversible) worst = std::min(worst, rec.min_margin_reversible);
    std::ostringstream detail;
    detail << "s " << s << ", t " << t << ", configs " << configs.size() << ", basic margin "
           << fmt17(rec.min_margin_basic);
    if (k.reversible) detail << ", reversible margin " << fmt17(rec.min_margin_reversible);
    push(labels[i], "pair_bounds", "pair-decoupling-bounds", worst >= -kMarginSlack, worst,
         -kMarginSlack, 0, detail.str());
  }
}

void Runner::run_test(const std::string& test) {
  bool per_ladder = test == "mean_field_trend";
  if (per_ladder) {
    for (const auto& group : cfg.ladders) {
      if (group.size() < 3) continue;
      annotated(ladder_label(group), [&] { run_mean_field_trend(group); });
    }
    return;
  }
  for (std::size_t i = 0; i < kernels.size(); ++i) {
    annotated(labels[i], [&] {
      if (test == "identities") run_identities(i);
      else if (test == "cheeger") run_cheeger(i);
      else if (test == "conditions") run_conditions_instance(i);
      else if (test == "meeting_exp") run_meeting_exp(i);
      else if (test == "density_moment") run_density_moment(i);
      else if (test == "kingman") run_kingman(i);
      else if (test == "full_coalescence") run_full_coalescence(i);
      else if (test == "pair_bounds") run_pair_bounds(i);
    });
  }
  if (test == "conditions")
    for (const auto& group : cfg.ladders)
      if (group.size() >= 3) annotated(ladder_label(group), [&] { run_conditions_trends(group); });
}

}  // namespace

Report run_experiment(const ExperimentConfig& config) {
  require(!config.instances.empty(), "ConfigError", "config has no instances");
  require(!config.tests.empty(), "ConfigError", "config has no tests");
  for (const auto& t : config.tests)
    require(known_test(t), "ConfigError", "unknown test '" + t + "'");

  Runner runner(config);
  for (const auto& test : config.tests) runner.run_test(test);

  Report report;
  report.config_echo = config.to_json();
  report.config_hash = runner.config_hash;
  report.toolchain = toolchain_stamp();
  report.instances = std::move(runner.scalars);
  report.verdicts = std::move(runner.verdicts);
  report.all_pass = true;
  for (const auto& v : report.verdicts) report.all_pass = report.all_pass && v.pass;
  return report;
}

nlohmann::json Report::to_json(bool with_timestamp) const {
  json j;
  j["config"] = config_echo;
  j["config_hash"] = hex64(config_hash);
  j["toolchain"] = toolchain;
  if (with_timestamp) {
    std::time_t now = std::time(nullptr);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
    j["generated_at"] = buf;
  }
  j["instances"] = json::array();
  for (const auto& s : instances) {
    json row;
    row["label"] = s.label;
    row["n"] = s.n;
    row["pi_diag"] = s.pi_diag;
    row["pi_max"] = s.pi_max;
    row["q_max"] = s.q_max;
    row["nu_total"] = s.nu_total;
    row["reversible"] = s.reversible;
    row["gap"] = s.gap;
    row["t_mix"] = s.t_mix;
    row["t_meet"] = s.t_meet;
    row["ratio_mix"] = s.ratio_mix;
    row["gap_tmeet"] = s.gap_tmeet;
    row["logterm"] = s.logterm;
    row["phi_star"] = s.phi_star;
    j["instances"].push_back(row);
  }
  j["verdicts"] = json::array();
  for (const auto& v : verdicts) {
    json row;
    row["instance"] = v.instance;
    row["test"] = v.test;
    row["tag"] = v.tag;
    row["pass"] = v.pass;
    row["statistic"] = v.statistic;
    row["threshold"] = v.threshold;
    row["seed"] = v.seed;
    row["input_hash"] = hex64(v.input_hash);
    row["detail"] = v.detail;
    j["verdicts"].push_back(row);
  }
  j["all_pass"] = all_pass;
  return j;
}

void Report::write(const std::string& dir, bool with_timestamp) const {
  namespace fs = std::filesystem;
  fs::create_directories(fs::path(dir) / "tables");

  {
    std::ofstream out(fs::path(dir) / "report.json");
    require(static_cast<bool>(out), "ConfigError", "cannot write report.json under " + dir);
    out << to_json(with_timestamp).dump(2) << '\n';
  }
  {
    std::ofstream out(fs::path(dir) / "tables" / "scalars.csv");
    out << "label,n,pi_diag,pi_max,q_max,nu_total,reversible,gap,t_mix,t_meet,ratio_mix,"
           "gap_tmeet,logterm,phi_star\n";
    for (const auto& s : instances)
      out << s.label << ',' << s.n << ',' << fmt17(s.pi_diag) << ',' << fmt17(s.pi_max) << ','
          << fmt17(s.q_max) << ',' << fmt17(s.nu_total) << ',' << (s.reversible ? 1 : 0) << ','
          << fmt17(s.gap) << ',' << fmt17(s.t_mix) << ',' << fmt17(s.t_meet) << ','
          << fmt17(s.ratio_mix) << ',' << fmt17(s.gap_tmeet) << ',' << fmt17(s.logterm) << ','
          << fmt17(s.phi_star) << '\n';
  }
  {
    std::ofstream out(fs::path(dir) / "tables" / "verdicts.csv");
    out << "instance,test,tag,pass,statistic,threshold,seed,input_hash,detail\n";
    for (const auto& v : verdicts) {
      std::string detail = v.detail;
      for (char& c : detail)
        if (c == ',' || c == '\n') c = ';';
      out << v.instance << ',' << v.test << ',' << v.tag << ',' << (v.pass ? 1 : 0) << ','
          << fmt17(v.statistic) << ',' << fmt17(v.threshold) << ',' << v.seed << ','
          << hex64(v.input_hash) << ',' << detail << '\n';
    }
  }
}

}  // namespace vm
