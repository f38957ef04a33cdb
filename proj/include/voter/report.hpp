#pragma once

// Configuration-driven experiment runner.  A config names kernel instances
// (single specs or size ladders), the tests to run on them, the time-scale
// policy, replica counts and seeds; the runner produces a Report: scalar
// tables per instance, one verdict per (instance-or-ladder, test) with the
// statistic, threshold, seed and input hash, all serialized to JSON + CSV.
// Reports are byte-identical across reruns of the same config (the optional
// timestamp field is excluded from that contract).

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "voter/analysis.hpp"
#include "voter/experiments.hpp"
#include "voter/graph_zoo.hpp"

namespace vm {

enum class TrendDirection { decreasing, increasing };

struct TrendVerdict {
  bool pass = false;
  std::string detail;
};

// Successive-step check along a size ladder: each value must sit strictly
// below (above) the previous plus (minus) 2 combined SEs.  A flat series
// with zero SE fails both directions.
TrendVerdict trend_check(const std::vector<double>& values, const std::vector<double>& ses,
                         TrendDirection direction);

struct ExperimentConfig {
  // Instances, already expanded; ladders[i] lists the instance indices that
  // came from one config entry (trend tests need >= 3 of them).
  std::vector<ZooSpec> instances;
  std::vector<std::vector<std::size_t>> ladders;

  std::vector<std::string> tests;
  GammaPolicy gamma;
  long long replicas = 500;
  std::uint64_t master_seed = 1;
  unsigned parallelism = 0;  // 0 = default_threads()
  std::string output_dir = "out";

  static ExperimentConfig from_json(const nlohmann::json& j);
  static ExperimentConfig from_file(const std::string& path);
  nlohmann::json to_json() const;  // canonical echo (hashed, embedded in reports)
};

// Per-instance scalar row; NaN marks quantities that were skipped (caps,
// non-reversibility) rather than computed.
struct InstanceScalars {
  std::string label;
  int n = 0;
  double pi_diag = 0.0, pi_max = 0.0, q_max = 0.0, nu_total = 0.0;
  bool reversible = false;
  double gap = 0.0, t_mix = 0.0, t_meet = 0.0;
  double ratio_mix = 0.0, gap_tmeet = 0.0, logterm = 0.0;
  double phi_star = 0.0;
};

struct Verdict {
  std::string instance;  // zoo label, or "ladder(<first>..<last>)"
  std::string test;
  std::string tag;  // semantic claim being checked
  bool pass = false;
  double statistic = 0.0;
  double threshold = 0.0;
  std::uint64_t seed = 0;
  std::uint64_t input_hash = 0;
  std::string detail;
};

struct Report {
  nlohmann::json config_echo;
  std::uint64_t config_hash = 0;
  std::string toolchain;
  std::vector<InstanceScalars> instances;
  std::vector<Verdict> verdicts;
  bool all_pass = false;

  nlohmann::json to_json(bool with_timestamp) const;
  // report.json + tables/scalars.csv + tables/verdicts.csv under dir.
  void write(const std::string& dir, bool with_timestamp = true) const;
};

Report run_experiment(const ExperimentConfig& config);

// FNV-1a 64-bit, used for config/verdict input hashes.
std::uint64_t fnv1a(const std::string& bytes);

std::string toolchain_stamp();

}  // namespace vm
