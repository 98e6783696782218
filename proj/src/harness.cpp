#include "b3/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <thread>

#include <nlohmann/json.hpp>

#include "b3/baselines.hpp"

namespace b3 {

using nlohmann::json;

const char* to_string(TrialStatus s) {
  switch (s) {
    case TrialStatus::ok: return "ok";
    case TrialStatus::stalled: return "stalled";
    case TrialStatus::skipped: return "skipped";
    case TrialStatus::invalid: return "invalid";
  }
  return "?";
}

namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

ScheduleKind schedule_kind_from(const std::string& s) {
  if (s == "geometric") return ScheduleKind::geometric;
  if (s == "linear_geometric") return ScheduleKind::linear_geometric;
  throw ConfigError("unknown r0_kind '" + s + "' (geometric | linear_geometric)");
}

}  // namespace

ExperimentConfig ExperimentConfig::from_json_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }

  auto require = [&j](const char* key) -> const json& {
    if (!j.contains(key)) throw ConfigError(std::string("config missing field '") + key + "'");
    return j.at(key);
  };

  ExperimentConfig c;

  const json& inst = require("instance");
  const std::string kind = inst.value("kind", "");
  if (kind == "alpha") {
    c.instance_kind = InstanceKind::alpha;
    if (!inst.contains("N")) throw ConfigError("config field 'instance.N' is required for kind alpha");
    if (!inst.contains("alpha")) throw ConfigError("config field 'instance.alpha' is required for kind alpha");
    c.num_arms = inst.at("N").get<int>();
    c.alpha = inst.at("alpha").get<double>();
  } else if (kind == "dataset") {
    c.instance_kind = InstanceKind::dataset;
    if (!inst.contains("path")) throw ConfigError("config field 'instance.path' is required for kind dataset");
    c.dataset_path = inst.at("path").get<std::string>();
  } else if (kind == "explicit") {
    c.instance_kind = InstanceKind::explicit_means;
    if (!inst.contains("means")) throw ConfigError("config field 'instance.means' is required for kind explicit");
    c.means = inst.at("means").get<std::vector<double>>();
  } else {
    throw ConfigError("config field 'instance.kind' must be alpha | dataset | explicit");
  }

  const json& noise = require("noise");
  const std::string nk = noise.value("kind", "");
  if (nk == "gaussian") {
    if (!noise.contains("sigma")) throw ConfigError("config field 'noise.sigma' is required for gaussian");
    c.noise = NoiseModel::gaussian(noise.at("sigma").get<double>());
  } else if (nk == "bernoulli") {
    c.noise = NoiseModel::bernoulli();
  } else if (nk == "kumaraswamy") {
    c.noise = NoiseModel::kumaraswamy();
  } else if (nk == "deterministic") {
    c.noise = NoiseModel::deterministic();
  } else {
    throw ConfigError("config field 'noise.kind' must be gaussian | bernoulli | kumaraswamy | deterministic");
  }

  for (const json& a : require("algorithms")) {
    AlgorithmSpec spec;
    if (!a.contains("name")) throw ConfigError("config field 'algorithms[].name' is required");
    spec.name = a.at("name").get<std::string>();
    if (spec.name != "b3" && spec.name != "us" && spec.name != "bsh" && spec.name != "bucb" &&
        spec.name != "sh" && spec.name != "ucbe")
      throw ConfigError("unknown algorithm '" + spec.name + "'");
    spec.label = a.value("label", spec.name);
    spec.r0 = a.value("r0", 0.0);
    if (a.contains("r0_kind")) spec.r0_kind = schedule_kind_from(a.at("r0_kind").get<std::string>());
    spec.delta = a.value("delta", 0.1);
    if (a.contains("variant")) {
      const std::string v = a.at("variant").get<std::string>();
      if (v == "data_poor") spec.variant = B3Variant::data_poor;
      else if (v == "comprehensive") spec.variant = B3Variant::comprehensive;
      else throw ConfigError("config field 'algorithms[].variant' must be data_poor | comprehensive");
    }
    spec.exploration = a.value("exploration", 0.0);
    c.algorithms.push_back(std::move(spec));
  }
  if (c.algorithms.empty()) throw ConfigError("config field 'algorithms' must be nonempty");

  c.budgets = require("budgets").get<std::vector<std::int64_t>>();
  if (c.budgets.empty()) throw ConfigError("config field 'budgets' must be nonempty");
  for (std::size_t i = 1; i < c.budgets.size(); ++i)
    if (c.budgets[i] <= c.budgets[i - 1])
      throw ConfigError("config field 'budgets' must be strictly increasing");

  c.trials = require("trials").get<int>();
  if (c.trials < 1) throw ConfigError("config field 'trials' must be >= 1");
  c.seed = require("seed").get<std::uint64_t>();
  if (j.contains("eps")) c.eps = j.at("eps").get<std::vector<double>>();
  for (double e : c.eps)
    if (e <= 0.0) throw ConfigError("config field 'eps' entries must be > 0");
  c.output = j.value("output", "");
  return c;
}

ExperimentConfig ExperimentConfig::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return from_json_text(text);
}

std::uint64_t trial_seed(std::uint64_t master, const std::string& label,
                         std::int64_t T, int trial) {
  // FNV-1a over the label keeps the stream independent of roster order.
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char ch : label) {
    h ^= ch;
    h *= 1099511628211ULL;
  }
  return mix_seed(master, h, static_cast<std::uint64_t>(T), static_cast<std::uint64_t>(trial));
}

BanditInstance build_instance(const ExperimentConfig& config) {
  Rng rng(mix_seed(config.seed, 0x696e7374616e6365ULL));  // "instance"
  switch (config.instance_kind) {
    case ExperimentConfig::InstanceKind::alpha:
      return make_alpha_instance(config.num_arms, config.alpha, config.noise, rng);
    case ExperimentConfig::InstanceKind::dataset: {
      auto means = caption_means_from_counts(read_caption_counts_csv(config.dataset_path));
      std::vector<int> perm(means.size());
      for (std::size_t i = 0; i < perm.size(); ++i) perm[i] = static_cast<int>(i);
      rng.shuffle(perm);
      return BanditInstance(std::move(means), config.noise, std::move(perm));
    }
    case ExperimentConfig::InstanceKind::explicit_means: {
      std::vector<int> perm(config.means.size());
      for (std::size_t i = 0; i < perm.size(); ++i) perm[i] = static_cast<int>(i);
      rng.shuffle(perm);
      return BanditInstance(config.means, config.noise, std::move(perm));
    }
  }
  throw std::logic_error("build_instance: unreachable");
}

std::unique_ptr<Policy> make_policy(const AlgorithmSpec& spec, int num_arms,
                                    std::int64_t budget, bool record_trace) {
  if (spec.name == "b3") {
    B3Policy::Options opt;
    opt.variant = spec.variant;
    opt.r0 = spec.r0;
    opt.record_trace = record_trace;
    return std::make_unique<B3Policy>(num_arms, opt);
  }
  if (spec.name == "us") return std::make_unique<UsPolicy>(num_arms, record_trace);
  if (spec.name == "bsh") return std::make_unique<BshPolicy>(num_arms, record_trace);
  if (spec.name == "bucb") return std::make_unique<BucbPolicy>(num_arms, spec.delta, record_trace);
  if (spec.name == "sh") {
    const double rate = spec.r0 > 0.0 ? spec.r0 : solve_rate(spec.r0_kind);
    const Schedule sched = spec.r0_kind == ScheduleKind::geometric
                               ? Schedule::geometric(rate)
                               : Schedule::linear_geometric(rate);
    return std::make_unique<ShPolicy>(num_arms, budget, sched, record_trace);
  }
  if (spec.name == "ucbe")
    return std::make_unique<UcbEPolicy>(num_arms, budget, spec.exploration, record_trace);
  throw ConfigError("unknown algorithm '" + spec.name + "'");
}

namespace {

TrialResult snapshot(const BanditInstance& instance, const Policy& policy,
                     const AlgorithmSpec& spec, std::int64_t T, int trial,
                     TrialStatus status) {
  TrialResult r;
  r.algorithm = spec.label;
  r.T = T;
  r.trial = trial;
  r.status = status;
  if (status == TrialStatus::skipped || status == TrialStatus::invalid) return r;

  const int pos = policy.recommend();
  r.arm = instance.arm_at_position(pos);
  r.regret = instance.best_mean() - instance.mean_at_position(pos);

  const auto candidates = policy.candidate_arms();
  r.c0 = static_cast<std::int64_t>(candidates.size());
  double best = -std::numeric_limits<double>::infinity();
  for (int c : candidates) best = std::max(best, instance.mean_at_position(c));
  r.mu_star_c = candidates.empty() ? instance.min_mean() : best;
  return r;
}

}  // namespace

std::vector<TrialResult> run_trial(const BanditInstance& instance, const AlgorithmSpec& spec,
                                   const std::vector<std::int64_t>& budgets, int trial,
                                   std::uint64_t master_seed) {
  std::vector<TrialResult> out;
  if (spec.fixed_budget()) {
    for (std::int64_t T : budgets) {
      if (T < 1) {
        TrialResult r;
        r.algorithm = spec.label;
        r.T = T;
        r.trial = trial;
        r.status = TrialStatus::invalid;
        out.push_back(r);
        continue;
      }
      Rng rng(trial_seed(master_seed, spec.label, T, trial));
      std::unique_ptr<Policy> policy;
      try {
        policy = make_policy(spec, instance.num_arms(), T, /*record_trace=*/false);
      } catch (const InsufficientBudget&) {
        TrialResult r;
        r.algorithm = spec.label;
        r.T = T;
        r.trial = trial;
        r.status = TrialStatus::skipped;
        out.push_back(r);
        continue;
      }
      std::int64_t taken = 0;
      while (taken < T && policy->step(instance, rng)) ++taken;
      out.push_back(snapshot(instance, *policy, spec, T, trial,
                             taken > 0 ? TrialStatus::ok : TrialStatus::invalid));
    }
    return out;
  }

  // Anytime: one run per trial, sampled at each grid budget. The budget
  // field of the seed is pinned to zero so every grid point shares the run.
  Rng rng(trial_seed(master_seed, spec.label, 0, trial));
  auto policy = make_policy(spec, instance.num_arms(), 0, /*record_trace=*/false);
  std::int64_t t = 0;
  bool stalled = false;
  for (std::int64_t T : budgets) {
    if (T < 1) {
      TrialResult r;
      r.algorithm = spec.label;
      r.T = T;
      r.trial = trial;
      r.status = TrialStatus::invalid;
      out.push_back(r);
      continue;
    }
    while (t < T && !stalled) {
      if (policy->step(instance, rng))
        ++t;
      else
        stalled = true;
    }
    if (t == 0) {
      TrialResult r;
      r.algorithm = spec.label;
      r.T = T;
      r.trial = trial;
      r.status = TrialStatus::invalid;
      out.push_back(r);
      continue;
    }
    out.push_back(snapshot(instance, *policy, spec, T, trial,
                           stalled ? TrialStatus::stalled : TrialStatus::ok));
  }
  return out;
}

Aggregate aggregate_cell(const std::string& algorithm, std::int64_t T,
                         std::vector<double> regrets) {
  Aggregate a;
  a.algorithm = algorithm;
  a.T = T;
  a.n = static_cast<int>(regrets.size());
  if (regrets.empty()) return a;
  std::sort(regrets.begin(), regrets.end());
  double sum = 0.0;
  for (double r : regrets) sum += r;
  a.mean_regret = sum / static_cast<double>(regrets.size());
  auto nearest_rank = [&regrets](double p) {
    const std::size_t n = regrets.size();
    std::size_t rank = static_cast<std::size_t>(std::ceil(p * static_cast<double>(n)));
    if (rank < 1) rank = 1;
    if (rank > n) rank = n;
    return regrets[rank - 1];
  };
  a.q25 = nearest_rank(0.25);
  a.q75 = nearest_rank(0.75);
  return a;
}

ExperimentResult run_experiment(const ExperimentConfig& config, int num_threads) {
  const BanditInstance instance = build_instance(config);

  struct Job {
    std::size_t alg;
    int trial;
  };
  std::vector<Job> jobs;
  for (std::size_t a = 0; a < config.algorithms.size(); ++a)
    for (int trial = 0; trial < config.trials; ++trial) jobs.push_back({a, trial});

  // results[alg][trial] = one TrialResult per grid budget
  std::vector<std::vector<std::vector<TrialResult>>> cells(
      config.algorithms.size(),
      std::vector<std::vector<TrialResult>>(static_cast<std::size_t>(config.trials)));

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= jobs.size()) break;
      const Job job = jobs[i];
      cells[job.alg][static_cast<std::size_t>(job.trial)] = run_trial(
          instance, config.algorithms[job.alg], config.budgets, job.trial, config.seed);
    }
  };

  int threads = num_threads > 0 ? num_threads
                                : static_cast<int>(std::thread::hardware_concurrency());
  if (threads < 1) threads = 1;
  if (static_cast<std::size_t>(threads) > jobs.size()) threads = static_cast<int>(jobs.size());
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < threads; ++w) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }

  ExperimentResult result;
  for (std::size_t a = 0; a < config.algorithms.size(); ++a) {
    for (std::size_t bi = 0; bi < config.budgets.size(); ++bi) {
      const std::int64_t T = config.budgets[bi];
      std::vector<double> regrets;
      std::vector<TrialOutcome> outcomes;
      for (int trial = 0; trial < config.trials; ++trial) {
        const TrialResult& r = cells[a][static_cast<std::size_t>(trial)][bi];
        result.results.push_back(r);
        if (!r.valid()) continue;
        regrets.push_back(r.regret);
        outcomes.push_back(TrialOutcome{r.mu_star_c, instance.best_mean() - r.regret});
      }
      const std::string& label = config.algorithms[a].label;
      if (!regrets.empty()) {
        result.aggregates.push_back(aggregate_cell(label, T, regrets));
        for (double eps : config.eps) {
          DecompositionCell cell;
          cell.algorithm = label;
          cell.T = T;
          cell.trials = static_cast<int>(outcomes.size());
          cell.decomposition = decompose_error(outcomes, instance.best_mean(), eps);
          result.decompositions.push_back(std::move(cell));
        }
      } else {
        std::fprintf(stderr, "warning: cell (%s, T=%lld) has no valid trials; omitted\n",
                     label.c_str(), static_cast<long long>(T));
      }
    }
  }
  return result;
}

std::string ExperimentResult::raw_csv() const {
  std::string out = "algorithm,T,trial,arm,regret,c0,status\n";
  for (const auto& r : results) {
    out += r.algorithm;
    out += ',';
    out += std::to_string(r.T);
    out += ',';
    out += std::to_string(r.trial);
    out += ',';
    if (r.valid()) {
      out += std::to_string(r.arm + 1);
      out += ',';
      out += fmt(r.regret);
      out += ',';
      out += std::to_string(r.c0);
    } else {
      out += ",,";
    }
    out += ',';
    out += to_string(r.status);
    out += '\n';
  }
  return out;
}

std::string ExperimentResult::aggregate_csv() const {
  std::string out = "algorithm,T,mean_regret,q25,q75,n\n";
  for (const auto& a : aggregates) {
    out += a.algorithm;
    out += ',';
    out += std::to_string(a.T);
    out += ',';
    out += fmt(a.mean_regret);
    out += ',';
    out += fmt(a.q25);
    out += ',';
    out += fmt(a.q75);
    out += ',';
    out += std::to_string(a.n);
    out += '\n';
  }
  return out;
}

std::string ExperimentResult::decomposition_json() const {
  std::string out = "[";
  for (std::size_t i = 0; i < decompositions.size(); ++i) {
    const auto& c = decompositions[i];
    if (i) out += ',';
    out += "\n  {\"algorithm\":\"" + c.algorithm + "\",\"T\":" + std::to_string(c.T) +
           ",\"trials\":" + std::to_string(c.trials) + ",\"eps\":" + fmt(c.decomposition.eps) +
           ",\"non_inclusion_rate\":" + fmt(c.decomposition.non_inclusion_rate) +
           ",\"within_set_rate\":" + fmt(c.decomposition.within_set_rate) +
           ",\"total_rate\":" + fmt(c.decomposition.total_rate) + "}";
  }
  out += "\n]\n";
  return out;
}

ExperimentResult run_experiment_to_files(const ExperimentConfig& config, int num_threads) {
  if (config.output.empty()) throw ConfigError("config field 'output' is required to write files");
  const std::string raw_path = config.output + "_raw.csv";
  const std::string agg_path = config.output + "_aggregate.csv";
  const std::string dec_path = config.output + "_decomposition.json";
  // Probe writability before doing any work.
  for (const std::string& p : {raw_path, agg_path, dec_path}) {
    std::ofstream probe(p);
    if (!probe) throw std::runtime_error("cannot write output file: " + p);
  }

  ExperimentResult result = run_experiment(config, num_threads);

  std::ofstream(raw_path) << result.raw_csv();
  std::ofstream(agg_path) << result.aggregate_csv();
  std::ofstream(dec_path) << result.decomposition_json();
  return result;
}

}  // namespace b3
