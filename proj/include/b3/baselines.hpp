#pragma once

#include <memory>

#include "b3/policy.hpp"
#include "b3/schedule.hpp"

namespace b3 {

// Uniform Sampling: arms pulled round-robin in a uniformly random order
// (re-randomized per trial), recommendation is the largest empirical mean
// among pulled arms.
class UsPolicy : public Policy {
 public:
  explicit UsPolicy(int num_arms, bool record_trace = true);

  std::optional<StepOutcome> step(const BanditInstance& instance, Rng& rng) override;
  int recommend() const override;
  bool requires_budget() const override { return false; }
  std::int64_t total_pulls() const override { return t_; }
  std::vector<std::int64_t> pulls_per_arm() const override { return pulls_; }
  std::vector<int> candidate_arms() const override;
  const PolicyTrace& trace() const override { return trace_; }
  std::string name() const override { return "us"; }

 private:
  int num_arms_;
  bool record_trace_;
  std::int64_t t_ = 0;
  std::vector<int> order_;  // filled lazily from the trial rng
  std::vector<std::int64_t> pulls_;
  std::vector<double> means_;
  PolicyTrace trace_;
};

// Sequential Halving with a tunable per-level schedule. Requires the budget
// up front: t0 = max{t : t * sum_l T_l/2^l <= T/N} must be at least 1.
// Round l pulls every survivor t0*T_l times and keeps the top half by that
// round's empirical means.
class ShPolicy : public Policy {
 public:
  ShPolicy(int num_arms, std::int64_t budget, Schedule schedule, bool record_trace = true);

  std::optional<StepOutcome> step(const BanditInstance& instance, Rng& rng) override;
  int recommend() const override;
  bool requires_budget() const override { return true; }
  std::int64_t total_pulls() const override { return t_; }
  std::vector<std::int64_t> pulls_per_arm() const override { return pulls_; }
  std::vector<int> candidate_arms() const override;
  const PolicyTrace& trace() const override { return trace_; }
  std::string name() const override { return "sh"; }

  std::int64_t t0() const { return t0_; }
  const std::vector<int>& survivors() const { return survivors_; }
  int round() const { return round_; }

 private:
  void finish_round();

  int num_arms_;
  std::int64_t budget_;
  Schedule schedule_;
  bool record_trace_;
  int last_round_;
  std::int64_t t0_ = 0;
  std::int64_t t_ = 0;
  bool done_ = false;

  std::vector<int> survivors_;
  int round_ = 0;
  std::size_t cursor_ = 0;           // survivor currently being pulled
  std::int64_t taken_this_arm_ = 0;  // pulls given to that survivor this round
  std::vector<std::int64_t> round_pulls_;
  std::vector<double> round_means_;

  std::vector<std::int64_t> pulls_;
  std::vector<double> means_;
  PolicyTrace trace_;
};

// Shared bracket machinery: bracket b opens once cumulative pulls reach
// (b-1)*2^(b-1) and holds 2^b distinct arms sampled uniformly (capped at N);
// incoming pulls rotate round-robin across open brackets. The final
// recommendation is the best bracket recommendation by within-bracket mean.
class BracketedPolicy : public Policy {
 public:
  std::optional<StepOutcome> step(const BanditInstance& instance, Rng& rng) override;
  int recommend() const override;
  bool requires_budget() const override { return false; }
  std::int64_t total_pulls() const override { return t_; }
  std::vector<std::int64_t> pulls_per_arm() const override { return pulls_; }
  std::vector<int> candidate_arms() const override;
  const PolicyTrace& trace() const override { return trace_; }

  int num_brackets() const { return static_cast<int>(brackets_.size()); }
  std::vector<int> bracket_members(int b) const;
  bool bracket_has_champion(int b) const;

 protected:
  struct Bracket {
    int index = 0;                     // b, 1-based
    std::vector<int> members;          // presentation positions
    std::vector<std::int64_t> pulls;   // lifetime within bracket
    std::vector<double> means;
    int champion = -1;                 // member slot, -1 until a run completes
    // inner-strategy state lives in the subclass
  };

  BracketedPolicy(int num_arms, bool record_trace);

  // Pick the member slot to pull next in bracket b.
  virtual std::size_t inner_select(Bracket& br) = 0;
  // Called after the pull is credited; may declare a champion.
  virtual void inner_update(Bracket& br, std::size_t slot, double reward) = 0;
  // Subclass hook for sizing per-member inner state.
  virtual void on_bracket_open(Bracket& br) = 0;

  void declare_champion(Bracket& br, int member_slot);

  int num_arms_;
  bool record_trace_;
  std::int64_t t_ = 0;
  std::vector<Bracket> brackets_;
  std::size_t rr_ = 0;  // round-robin cursor
  std::vector<std::int64_t> pulls_;
  PolicyTrace trace_;

 private:
  void maybe_open_brackets(Rng& rng);
};

// Bracketed Sequential Halving: within a bracket, SH restarts under the
// doubling strategy with run budgets 2^r * (b * 2^b). Runs whose budget is
// too small for a full halving pass degrade to a round-robin sweep; larger
// runs execute SH with per-round fresh means and spend any slack on the
// final survivor so each run consumes its nominal budget exactly.
class BshPolicy : public BracketedPolicy {
 public:
  explicit BshPolicy(int num_arms, bool record_trace = true);
  std::string name() const override { return "bsh"; }

 protected:
  std::size_t inner_select(Bracket& br) override;
  void inner_update(Bracket& br, std::size_t slot, double reward) override;
  void on_bracket_open(Bracket& br) override;

 private:
  struct RunState {
    std::int64_t budget = 0;
    std::int64_t spent = 0;
    int run_index = 0;
    std::int64_t t0 = 0;  // 0 = degenerate round-robin run
    // proper SH runs:
    std::vector<int> survivors;  // member slots
    int round = 0;
    int last_round = 0;
    std::size_t cursor = 0;
    std::int64_t taken = 0;
    std::vector<std::int64_t> round_pulls;
    std::vector<double> round_means;
    std::size_t rr = 0;  // degenerate-run cursor
  };
  void start_run(Bracket& br, RunState& rs, int run_index);
  void finish_inner_round(Bracket& br, RunState& rs);

  std::vector<RunState> runs_;  // parallel to brackets_
};

// Bracketed UCB: same bracket construction; inside a bracket the next pull
// goes to the arm maximizing mean + sqrt(2 ln(1/delta) / pulls), with
// unpulled arms first.
class BucbPolicy : public BracketedPolicy {
 public:
  BucbPolicy(int num_arms, double delta = 0.1, bool record_trace = true);
  std::string name() const override { return "bucb"; }

  double radius(std::int64_t n) const;

 protected:
  std::size_t inner_select(Bracket& br) override;
  void inner_update(Bracket& br, std::size_t slot, double reward) override;
  void on_bracket_open(Bracket& br) override;

 private:
  double delta_;
  double two_log_inv_delta_;
};

// UCB-E with a fixed exploration constant; optional fixed-budget baseline.
// The index is mean + sqrt(a / pulls) with a = exploration (default T/N).
class UcbEPolicy : public Policy {
 public:
  UcbEPolicy(int num_arms, std::int64_t budget, double exploration = 0.0,
             bool record_trace = true);

  std::optional<StepOutcome> step(const BanditInstance& instance, Rng& rng) override;
  int recommend() const override;
  bool requires_budget() const override { return true; }
  std::int64_t total_pulls() const override { return t_; }
  std::vector<std::int64_t> pulls_per_arm() const override { return pulls_; }
  std::vector<int> candidate_arms() const override;
  const PolicyTrace& trace() const override { return trace_; }
  std::string name() const override { return "ucbe"; }

 private:
  int num_arms_;
  std::int64_t budget_;
  double a_;
  bool record_trace_;
  std::int64_t t_ = 0;
  std::vector<std::int64_t> pulls_;
  std::vector<double> means_;
  PolicyTrace trace_;
};

}  // namespace b3
