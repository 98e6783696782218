// b3sim: simulation, analysis, and calculator subcommands for the bandit
// engine. Human-readable output goes to stdout; machine artifacts go only to
// the files named in the run config.

#include <algorithm>
#include <cstdio>
#include <memory>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "b3/analysis.hpp"
#include "b3/baselines.hpp"
#include "b3/box_thirding.hpp"
#include "b3/harness.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitConfig = 2;
constexpr int kExitRuntime = 3;

struct OneRunArgs {
  std::string alg = "b3";
  int num_arms = 0;
  std::int64_t budget = 0;
  std::uint64_t seed = 0;
  bool deterministic_order = false;
  double delta = 0.1;
  std::string r0_kind = "geometric";
  std::string variant = "data_poor";
};

// One seeded single-trial run over a deterministic-reward alpha instance;
// the backbone of the `candidate` and `trace` subcommands.
std::unique_ptr<b3::Policy> run_once(const OneRunArgs& args, b3::BanditInstance& instance_out) {
  b3::Rng instance_rng(b3::mix_seed(args.seed, 1));
  b3::BanditInstance instance =
      args.deterministic_order
          ? b3::make_alpha_instance_ordered(args.num_arms, 1.0, b3::NoiseModel::deterministic())
          : b3::make_alpha_instance(args.num_arms, 1.0, b3::NoiseModel::deterministic(),
                                    instance_rng);

  std::unique_ptr<b3::Policy> policy;
  if (args.alg == "b3") {
    b3::B3Policy::Options opt;
    opt.variant = args.variant == "comprehensive" ? b3::B3Variant::comprehensive
                                                  : b3::B3Variant::data_poor;
    opt.ordered_replenish = args.deterministic_order;
    policy = std::make_unique<b3::B3Policy>(args.num_arms, opt);
  } else if (args.alg == "us") {
    policy = std::make_unique<b3::UsPolicy>(args.num_arms);
  } else if (args.alg == "bsh") {
    policy = std::make_unique<b3::BshPolicy>(args.num_arms);
  } else if (args.alg == "bucb") {
    policy = std::make_unique<b3::BucbPolicy>(args.num_arms, args.delta);
  } else if (args.alg == "sh") {
    policy = std::make_unique<b3::ShPolicy>(
        args.num_arms, args.budget,
        b3::Schedule::geometric(b3::solve_rate(b3::ScheduleKind::geometric)));
  } else {
    throw b3::ConfigError("unknown --alg '" + args.alg + "' (b3 | us | bsh | bucb | sh)");
  }

  b3::Rng rng(b3::mix_seed(args.seed, 2));
  for (std::int64_t t = 0; t < args.budget; ++t)
    if (!policy->step(instance, rng)) break;
  instance_out = std::move(instance);
  return policy;
}

void add_one_run_flags(CLI::App* cmd, OneRunArgs& args) {
  cmd->add_option("--alg", args.alg, "algorithm: b3 | us | bsh | bucb | sh");
  cmd->add_option("--N", args.num_arms, "number of arms")->required();
  cmd->add_option("--T", args.budget, "budget (pulls)")->required();
  cmd->add_option("--seed", args.seed, "random seed")->default_val("1");
  cmd->add_flag("--deterministic-order", args.deterministic_order,
                "present arms in order 1..N (didactic traces)");
  cmd->add_option("--delta", args.delta, "bucb confidence parameter");
  cmd->add_option("--variant", args.variant, "b3 variant: data_poor | comprehensive");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"pull-granular bandit simulation engine"};
  app.require_subcommand(1);

  // run
  std::string config_path;
  int threads = 0;
  CLI::App* run = app.add_subcommand("run", "execute an experiment config");
  run->add_option("config", config_path, "JSON config path")->required();
  run->add_option("--threads", threads, "worker threads (0 = hardware)");

  // rate
  std::string rate_kind;
  CLI::App* rate = app.add_subcommand("rate", "print a schedule rate root");
  rate->add_option("kind", rate_kind, "geometric | linear_geometric")->required();

  // candidate
  OneRunArgs cand_args;
  CLI::App* cand = app.add_subcommand("candidate", "candidate set of one seeded trial");
  add_one_run_flags(cand, cand_args);

  // trace
  OneRunArgs trace_args;
  CLI::App* trace = app.add_subcommand("trace", "event log of one seeded trial");
  add_one_run_flags(trace, trace_args);

  // decompose
  std::string decompose_config;
  int decompose_threads = 0;
  CLI::App* dec = app.add_subcommand("decompose", "error decomposition for a config");
  dec->add_option("config", decompose_config, "JSON config path")->required();
  dec->add_option("--threads", decompose_threads, "worker threads (0 = hardware)");

  // means
  std::string dataset_path;
  CLI::App* means = app.add_subcommand("means", "per-arm means of a caption-count CSV");
  means->add_option("dataset", dataset_path, "CSV path")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*rate) {
      b3::ScheduleKind kind;
      if (rate_kind == "geometric") kind = b3::ScheduleKind::geometric;
      else if (rate_kind == "linear_geometric") kind = b3::ScheduleKind::linear_geometric;
      else throw b3::ConfigError("rate kind must be geometric | linear_geometric");
      std::printf("%.12f\n", b3::solve_rate(kind));
      return kExitOk;
    }

    if (*run) {
      const auto config = b3::ExperimentConfig::from_file(config_path);
      const auto result = b3::run_experiment_to_files(config, threads);
      std::printf("wrote %s_raw.csv, %s_aggregate.csv, %s_decomposition.json\n",
                  config.output.c_str(), config.output.c_str(), config.output.c_str());
      for (const auto& a : result.aggregates)
        std::printf("%s T=%lld mean_regret=%.6g q25=%.6g q75=%.6g n=%d\n", a.algorithm.c_str(),
                    static_cast<long long>(a.T), a.mean_regret, a.q25, a.q75, a.n);
      return kExitOk;
    }

    if (*cand) {
      b3::BanditInstance instance({0.0}, b3::NoiseModel::deterministic());
      auto policy = run_once(cand_args, instance);
      const auto report =
          b3::candidate_set(policy->trace(), policy->name(), cand_args.num_arms,
                            policy->total_pulls());
      std::printf("%s\n", report.to_json().c_str());
      return kExitOk;
    }

    if (*trace) {
      b3::BanditInstance instance({0.0}, b3::NoiseModel::deterministic());
      auto policy = run_once(trace_args, instance);
      std::fputs(b3::trace_to_string(policy->trace()).c_str(), stdout);
      return kExitOk;
    }

    if (*dec) {
      const auto config = b3::ExperimentConfig::from_file(decompose_config);
      if (config.eps.empty())
        throw b3::ConfigError("config field 'eps' must be nonempty for decompose");
      const auto result = b3::run_experiment(config, decompose_threads);
      std::printf("%s", result.decomposition_json().c_str());
      return kExitOk;
    }

    if (*means) {
      const auto rows = b3::read_caption_counts_csv(dataset_path);
      const auto mu = b3::caption_means_from_counts(rows);
      for (std::size_t i = 0; i < mu.size(); ++i)
        std::printf("%s,%.17g\n", rows[i].id.c_str(), mu[i]);
      const auto [lo, hi] = std::minmax_element(mu.begin(), mu.end());
      std::printf("# arms=%zu range=%.17g\n", mu.size(), *hi - *lo);
      return kExitOk;
    }
  } catch (const b3::ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kExitConfig;
  } catch (const b3::DataError& e) {
    std::fprintf(stderr, "data error: %s\n", e.what());
    return kExitConfig;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitRuntime;
  }
  return kExitUsage;
}
