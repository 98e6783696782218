#pragma once

#include <deque>
#include <optional>

#include "b3/policy.hpp"
#include "b3/schedule.hpp"

namespace b3 {

enum class B3Variant { data_poor, comprehensive };

struct ArmRecord {
  std::int64_t pulls = 0;
  double mean = 0.0;
  int discard_level = -1;  // level the arm was discarded at; -1 if live
};

// Box Thirding. Arms are organized into boxes keyed by (level, deferment);
// whenever a box holds three arms and both up-neighbors have room, the box is
// arranged: the best arm is lifted one level up with ceil(r0^(l+1)) fresh
// pulls, the median is shifted sideways with no pulls, the worst is discarded.
// A step is one pull; structural decisions are free and run eagerly between
// pulls following the top-down sweep order, then base replenishment. The
// comprehensive variant raises the base level once every arm has been
// examined, re-admitting arms that were discarded with base-level evidence.
class B3Policy : public Policy {
 public:
  struct Options {
    B3Variant variant = B3Variant::comprehensive;
    double r0 = 0.0;  // <= 0 selects the geometric optimum
    // Didactic mode: introduce arms in presentation order instead of drawing
    // uniformly from the unexamined pool.
    bool ordered_replenish = false;
    bool record_trace = true;
  };

  explicit B3Policy(int num_arms, Options opt = Options{});

  std::optional<StepOutcome> step(const BanditInstance& instance, Rng& rng) override;
  int recommend() const override;
  bool requires_budget() const override { return false; }
  std::int64_t total_pulls() const override { return t_; }
  std::vector<std::int64_t> pulls_per_arm() const override;
  std::vector<int> candidate_arms() const override;
  const PolicyTrace& trace() const override { return trace_; }
  std::string name() const override { return "b3"; }

  // Ternary selection on Box(l, j); exposed for direct testing. Throws
  // std::logic_error if the box is not full or an up-neighbor is.
  void arrange_box(int level, int deferment);

  bool stalled() const { return stalled_; }
  double r0() const { return r0_; }
  int base_level() const { return base_level_; }
  int max_level() const;  // max l with Box(l,0) nonempty; -1 if none
  std::vector<int> box(int level, int deferment) const;
  std::vector<int> discarded() const;
  int num_examined() const { return examined_; }
  const ArmRecord& record(int arm) const { return records_[static_cast<std::size_t>(arm)]; }
  std::int64_t lift_cost(int level) const;

  // Partition and pull-accounting invariants; throws std::logic_error on
  // violation. Test hook, O(N).
  void check_invariants() const;

 private:
  struct ActiveLift {
    int arm;
    int level;
    std::int64_t remaining;
  };
  struct QueuedLift {
    int arm;
    int level;
  };
  struct Cursor {
    int level;
    int deferment;
  };

  bool advance(Rng& rng);  // establishes an active lift; false = stalled
  void begin_sweep();
  bool sweep_fire();  // run cursor until an arrange fires; false = sweep done
  enum class PostAction { pull_ready, retry, stalled };
  PostAction post_sweep(Rng& rng);
  void activate_lift(int arm, int level);
  void update_base_level();
  bool can_arrange(int level, int deferment) const;

  std::vector<int>& box_ref(int level, int deferment);
  const std::vector<int>* box_ptr(int level, int deferment) const;
  int max_deferment(int level) const;
  void emit(EventKind kind, int arm, int p1 = 0, int p2 = 0, double reward = 0.0);

  int num_arms_;
  Options opt_;
  double r0_;
  std::int64_t t_ = 0;
  int base_level_ = 0;
  int examined_ = 0;
  bool stalled_ = false;

  std::vector<ArmRecord> records_;
  std::vector<std::vector<std::vector<int>>> boxes_;  // [level][deferment] -> arms
  std::vector<int> pool_;                             // unexamined, ascending order
  std::vector<bool> in_discard_;
  std::optional<ActiveLift> active_;
  std::deque<QueuedLift> queue_;  // base-level relocations awaiting pulls
  std::optional<Cursor> cursor_;

  std::vector<bool> in_candidate_;  // ever a member of a full base box
  mutable std::vector<std::int64_t> lift_cost_cache_;

  PolicyTrace trace_;
};

}  // namespace b3
