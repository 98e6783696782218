#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "b3/instances.hpp"
#include "b3/trace.hpp"

namespace b3 {

struct NoRecommendation : std::runtime_error {
  NoRecommendation() : std::runtime_error("recommend() called before any pull") {}
};

struct InsufficientBudget : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct StepOutcome {
  int arm = -1;  // presentation position, 0-based
  double reward = 0.0;
};

// Behavioral contract shared by every algorithm: step() consumes exactly one
// pull (nullopt once the policy cannot place another), recommend() is pure and
// valid after the first pull. Arms are presentation positions throughout.
class Policy {
 public:
  virtual ~Policy() = default;

  virtual std::optional<StepOutcome> step(const BanditInstance& instance, Rng& rng) = 0;
  virtual int recommend() const = 0;
  virtual bool requires_budget() const = 0;

  virtual std::int64_t total_pulls() const = 0;
  virtual std::vector<std::int64_t> pulls_per_arm() const = 0;

  // Arms that could be returned as the best arm under some reward
  // distribution, given this run's introduction order.
  virtual std::vector<int> candidate_arms() const = 0;

  virtual const PolicyTrace& trace() const = 0;
  virtual std::string name() const = 0;
};

}  // namespace b3
