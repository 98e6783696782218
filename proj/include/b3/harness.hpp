#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "b3/analysis.hpp"
#include "b3/box_thirding.hpp"
#include "b3/instances.hpp"
#include "b3/policy.hpp"

namespace b3 {

struct AlgorithmSpec {
  std::string name;   // b3 | us | bsh | bucb | sh | ucbe
  std::string label;  // output key; defaults to name
  double r0 = 0.0;    // b3 / sh rate override (0 = schedule optimum)
  ScheduleKind r0_kind = ScheduleKind::geometric;  // sh schedule family
  double delta = 0.1;                              // bucb
  B3Variant variant = B3Variant::comprehensive;    // b3
  double exploration = 0.0;                        // ucbe (0 = T/N default)

  bool fixed_budget() const { return name == "sh" || name == "ucbe"; }
};

struct ExperimentConfig {
  enum class InstanceKind { alpha, dataset, explicit_means };
  InstanceKind instance_kind = InstanceKind::alpha;
  int num_arms = 0;
  double alpha = 1.0;
  std::string dataset_path;
  std::vector<double> means;

  NoiseModel noise = NoiseModel::gaussian(1.0);
  std::vector<AlgorithmSpec> algorithms;
  std::vector<std::int64_t> budgets;  // strictly increasing
  int trials = 1;
  std::uint64_t seed = 0;
  std::vector<double> eps;
  std::string output;  // path prefix for _raw.csv / _aggregate.csv / _decomposition.json

  static ExperimentConfig from_json_text(const std::string& text);
  static ExperimentConfig from_file(const std::string& path);
};

enum class TrialStatus { ok, stalled, skipped, invalid };
const char* to_string(TrialStatus s);

struct TrialResult {
  std::string algorithm;
  std::int64_t T = 0;
  int trial = 0;
  int arm = -1;  // recommended generator arm, 0-based; -1 if none
  double regret = 0.0;
  std::int64_t c0 = 0;
  double mu_star_c = 0.0;  // best true mean within the candidate set
  TrialStatus status = TrialStatus::ok;

  bool valid() const { return status == TrialStatus::ok || status == TrialStatus::stalled; }
};

struct Aggregate {
  std::string algorithm;
  std::int64_t T = 0;
  double mean_regret = 0.0;
  double q25 = 0.0;
  double q75 = 0.0;
  int n = 0;
};

struct DecompositionCell {
  std::string algorithm;
  std::int64_t T = 0;
  ErrorDecomposition decomposition;
  int trials = 0;
};

struct ExperimentResult {
  std::vector<TrialResult> results;          // sorted by (algorithm, T, trial)
  std::vector<Aggregate> aggregates;         // sorted by (algorithm, T)
  std::vector<DecompositionCell> decompositions;

  std::string raw_csv() const;
  std::string aggregate_csv() const;
  std::string decomposition_json() const;
};

// Policy construction: anytime policies ignore `budget`; fixed-budget
// policies plan against it and may throw InsufficientBudget.
std::unique_ptr<Policy> make_policy(const AlgorithmSpec& spec, int num_arms,
                                    std::int64_t budget, bool record_trace);

// Per-cell stream: mix(master_seed, label hash, T, trial).
std::uint64_t trial_seed(std::uint64_t master, const std::string& label,
                         std::int64_t T, int trial);

BanditInstance build_instance(const ExperimentConfig& config);

// One seeded trial of `spec` sampled at every grid budget. Anytime policies
// run once to the largest budget; fixed-budget policies are constructed per
// grid point by the caller (pass a single-element grid).
std::vector<TrialResult> run_trial(const BanditInstance& instance, const AlgorithmSpec& spec,
                                   const std::vector<std::int64_t>& budgets, int trial,
                                   std::uint64_t master_seed);

// The full roster x budget grid x trials matrix with trial-level parallelism.
// Results merge deterministically regardless of worker count.
ExperimentResult run_experiment(const ExperimentConfig& config, int num_threads = 0);

// run_experiment + output files (<output>_raw.csv, _aggregate.csv,
// _decomposition.json). Output paths are probed before any computation.
ExperimentResult run_experiment_to_files(const ExperimentConfig& config, int num_threads = 0);

// Mean and nearest-rank q25/q75.
Aggregate aggregate_cell(const std::string& algorithm, std::int64_t T,
                         std::vector<double> regrets);

}  // namespace b3
