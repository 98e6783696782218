#include "b3/box_thirding.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>

namespace b3 {

B3Policy::B3Policy(int num_arms, Options opt)
    : num_arms_(num_arms),
      opt_(opt),
      r0_(opt.r0 > 0.0 ? opt.r0 : solve_rate(ScheduleKind::geometric)),
      records_(static_cast<std::size_t>(num_arms)),
      pool_(static_cast<std::size_t>(num_arms)),
      in_discard_(static_cast<std::size_t>(num_arms), false),
      in_candidate_(static_cast<std::size_t>(num_arms), false) {
  if (num_arms < 1) throw std::invalid_argument("B3Policy: need at least one arm");
  if (r0_ <= 1.0 || r0_ > 2.0) throw ConfigError("B3Policy: r0 must lie in (1,2]");
  std::iota(pool_.begin(), pool_.end(), 0);
}

std::int64_t B3Policy::lift_cost(int level) const {
  while (static_cast<int>(lift_cost_cache_.size()) <= level)
    lift_cost_cache_.push_back(
        sched_ceil(std::pow(r0_, static_cast<double>(lift_cost_cache_.size()))));
  return lift_cost_cache_[static_cast<std::size_t>(level)];
}

std::vector<int>& B3Policy::box_ref(int level, int deferment) {
  if (static_cast<int>(boxes_.size()) <= level)
    boxes_.resize(static_cast<std::size_t>(level) + 1);
  auto& lvl = boxes_[static_cast<std::size_t>(level)];
  if (static_cast<int>(lvl.size()) <= deferment)
    lvl.resize(static_cast<std::size_t>(deferment) + 1);
  return lvl[static_cast<std::size_t>(deferment)];
}

const std::vector<int>* B3Policy::box_ptr(int level, int deferment) const {
  if (level < 0 || level >= static_cast<int>(boxes_.size())) return nullptr;
  const auto& lvl = boxes_[static_cast<std::size_t>(level)];
  if (deferment < 0 || deferment >= static_cast<int>(lvl.size())) return nullptr;
  return &lvl[static_cast<std::size_t>(deferment)];
}

std::vector<int> B3Policy::box(int level, int deferment) const {
  const auto* b = box_ptr(level, deferment);
  return b ? *b : std::vector<int>{};
}

int B3Policy::max_level() const {
  for (int l = static_cast<int>(boxes_.size()) - 1; l >= 0; --l) {
    const auto* b = box_ptr(l, 0);
    if (b && !b->empty()) return l;
  }
  return -1;
}

int B3Policy::max_deferment(int level) const {
  if (level < 0 || level >= static_cast<int>(boxes_.size())) return 0;
  const auto& lvl = boxes_[static_cast<std::size_t>(level)];
  for (int j = static_cast<int>(lvl.size()) - 1; j >= 0; --j)
    if (!lvl[static_cast<std::size_t>(j)].empty()) return j;
  return 0;
}

std::vector<int> B3Policy::discarded() const {
  std::vector<int> d;
  for (int a = 0; a < num_arms_; ++a)
    if (in_discard_[static_cast<std::size_t>(a)]) d.push_back(a);
  return d;
}

void B3Policy::emit(EventKind kind, int arm, int p1, int p2, double reward) {
  if (!opt_.record_trace) return;
  trace_.push_back(TraceEvent{t_, arm, reward, kind, p1, p2});
}

bool B3Policy::can_arrange(int level, int deferment) const {
  const auto* b = box_ptr(level, deferment);
  if (!b || b->size() != 3) return false;
  const auto* up = box_ptr(level + 1, 0);
  if (up && up->size() >= 3) return false;
  const auto* side = box_ptr(level, deferment + 1);
  if (side && side->size() >= 3) return false;
  return true;
}

void B3Policy::arrange_box(int level, int deferment) {
  if (!can_arrange(level, deferment))
    throw std::logic_error("arrange_box: precondition violated at Box(" +
                           std::to_string(level) + "," + std::to_string(deferment) + ")");
  auto& b = box_ref(level, deferment);
  std::array<int, 3> arms{b[0], b[1], b[2]};
  // Rank by empirical mean; equal means resolve to the lower presentation
  // index taking the higher role.
  std::sort(arms.begin(), arms.end(), [this](int x, int y) {
    const auto& rx = records_[static_cast<std::size_t>(x)];
    const auto& ry = records_[static_cast<std::size_t>(y)];
    if (rx.mean != ry.mean) return rx.mean > ry.mean;
    return x < y;
  });
  const int best = arms[0], median = arms[1], worst = arms[2];
  b.clear();

  box_ref(level, deferment + 1).push_back(median);
  emit(EventKind::shift, median, level, deferment + 1);

  records_[static_cast<std::size_t>(worst)].discard_level = level;
  in_discard_[static_cast<std::size_t>(worst)] = true;
  emit(EventKind::discard, worst, level);

  activate_lift(best, level + 1);
}

void B3Policy::activate_lift(int arm, int level) {
  auto& dest = box_ref(level, 0);
  dest.push_back(arm);
  if (level == base_level_ && dest.size() == 3)
    for (int a : dest) in_candidate_[static_cast<std::size_t>(a)] = true;
  active_ = ActiveLift{arm, level, lift_cost(level)};
  emit(EventKind::lift_start, arm, level);
}

void B3Policy::begin_sweep() {
  const int top = max_level();
  if (top < base_level_) {
    cursor_.reset();
    return;
  }
  cursor_ = Cursor{top, max_deferment(top)};
}

bool B3Policy::sweep_fire() {
  while (cursor_) {
    const Cursor cur = *cursor_;
    if (cur.deferment > 0)
      cursor_ = Cursor{cur.level, cur.deferment - 1};
    else if (cur.level - 1 >= base_level_)
      cursor_ = Cursor{cur.level - 1, max_deferment(cur.level - 1)};
    else
      cursor_.reset();
    if (can_arrange(cur.level, cur.deferment)) {
      arrange_box(cur.level, cur.deferment);
      return true;
    }
  }
  return false;
}

B3Policy::PostAction B3Policy::post_sweep(Rng& rng) {
  if (!queue_.empty()) {
    const QueuedLift q = queue_.front();
    const auto* dest = box_ptr(q.level, 0);
    if (dest && dest->size() >= 3) return PostAction::retry;  // unblock via sweep
    queue_.pop_front();
    activate_lift(q.arm, q.level);
    return PostAction::pull_ready;
  }

  const auto* base = box_ptr(base_level_, 0);
  const bool base_full = base && base->size() >= 3;
  if (!base_full && !pool_.empty()) {
    int arm;
    if (opt_.ordered_replenish) {
      arm = pool_.front();
      pool_.erase(pool_.begin());
    } else {
      const std::size_t i = static_cast<std::size_t>(rng.below(pool_.size()));
      arm = pool_[i];
      pool_[i] = pool_.back();
      pool_.pop_back();
    }
    ++examined_;
    emit(EventKind::replenish, arm);
    activate_lift(arm, base_level_);
    return PostAction::pull_ready;
  }

  if (opt_.variant == B3Variant::comprehensive && examined_ == num_arms_) {
    if (base_full) return PostAction::retry;
    update_base_level();
    return PostAction::retry;
  }

  return PostAction::stalled;
}

void B3Policy::update_base_level() {
  const int old_base = base_level_;
  base_level_ = old_base + 1;
  emit(EventKind::base_level, -1, base_level_);

  if (old_base < static_cast<int>(boxes_.size())) {
    for (auto& b : boxes_[static_cast<std::size_t>(old_base)]) {
      for (int arm : b) queue_.push_back(QueuedLift{arm, base_level_});
      b.clear();
    }
  }

  // Arms discarded with base-level evidence rejoin the unexamined pool.
  bool readmitted = false;
  for (int a = 0; a < num_arms_; ++a) {
    auto& rec = records_[static_cast<std::size_t>(a)];
    if (in_discard_[static_cast<std::size_t>(a)] && rec.discard_level == old_base) {
      in_discard_[static_cast<std::size_t>(a)] = false;
      rec.discard_level = -1;
      pool_.push_back(a);
      --examined_;
      readmitted = true;
    }
  }
  if (readmitted && opt_.ordered_replenish) std::sort(pool_.begin(), pool_.end());
}

bool B3Policy::advance(Rng& rng) {
  if (active_) return true;
  for (int guard = 0; guard < 100000; ++guard) {
    if (!cursor_) begin_sweep();
    if (sweep_fire()) return true;
    switch (post_sweep(rng)) {
      case PostAction::pull_ready:
        return true;
      case PostAction::retry:
        break;
      case PostAction::stalled:
        return false;
    }
  }
  throw std::logic_error("B3Policy::advance: no progress");
}

std::optional<StepOutcome> B3Policy::step(const BanditInstance& instance, Rng& rng) {
  if (stalled_) return std::nullopt;
  if (!advance(rng)) {
    stalled_ = true;
    return std::nullopt;
  }
  ActiveLift& lift = *active_;
  const double reward = instance.sample_reward(lift.arm, rng);
  auto& rec = records_[static_cast<std::size_t>(lift.arm)];
  rec.mean += (reward - rec.mean) / static_cast<double>(++rec.pulls);
  ++t_;
  emit(EventKind::pull, lift.arm, 0, 0, reward);
  const StepOutcome out{lift.arm, reward};
  if (--lift.remaining == 0) {
    emit(EventKind::lift_done, lift.arm, lift.level);
    active_.reset();
  }
  return out;
}

int B3Policy::recommend() const {
  if (t_ == 0) throw NoRecommendation{};
  const int top = max_level();
  if (top < 0) throw std::logic_error("B3Policy::recommend: no occupied box");
  const auto* b = box_ptr(top, 0);
  int best = -1;
  double best_mean = 0.0;
  for (int arm : *b) {
    const double m = records_[static_cast<std::size_t>(arm)].mean;
    if (best < 0 || m > best_mean || (m == best_mean && arm < best)) {
      best = arm;
      best_mean = m;
    }
  }
  return best;
}

std::vector<std::int64_t> B3Policy::pulls_per_arm() const {
  std::vector<std::int64_t> out(static_cast<std::size_t>(num_arms_));
  for (int a = 0; a < num_arms_; ++a) out[static_cast<std::size_t>(a)] = records_[static_cast<std::size_t>(a)].pulls;
  return out;
}

std::vector<int> B3Policy::candidate_arms() const {
  std::vector<bool> in(in_candidate_);
  const int top = max_level();
  if (top >= 0)
    for (int arm : *box_ptr(top, 0)) in[static_cast<std::size_t>(arm)] = true;
  std::vector<int> out;
  for (int a = 0; a < num_arms_; ++a)
    if (in[static_cast<std::size_t>(a)]) out.push_back(a);
  return out;
}

void B3Policy::check_invariants() const {
  // 0 = unexamined pool, 1 = box, 2 = discard, 3 = queued
  std::vector<int> where(static_cast<std::size_t>(num_arms_), -1);
  auto place = [&](int arm, int tag) {
    if (arm < 0 || arm >= num_arms_) throw std::logic_error("invariant: arm out of range");
    if (where[static_cast<std::size_t>(arm)] != -1)
      throw std::logic_error("invariant: arm " + std::to_string(arm) + " in two places");
    where[static_cast<std::size_t>(arm)] = tag;
  };
  for (int a : pool_) place(a, 0);
  for (const auto& lvl : boxes_)
    for (const auto& b : lvl) {
      if (b.size() > 3) throw std::logic_error("invariant: box holds more than 3 arms");
      for (int a : b) place(a, 1);
    }
  for (int a = 0; a < num_arms_; ++a)
    if (in_discard_[static_cast<std::size_t>(a)]) place(a, 2);
  for (const auto& q : queue_) place(q.arm, 3);
  for (int a = 0; a < num_arms_; ++a)
    if (where[static_cast<std::size_t>(a)] == -1)
      throw std::logic_error("invariant: arm " + std::to_string(a) + " unaccounted for");

  std::int64_t total = 0;
  for (const auto& r : records_) total += r.pulls;
  if (total != t_) throw std::logic_error("invariant: pull accounting mismatch");

  if (active_) {
    if (where[static_cast<std::size_t>(active_->arm)] != 1)
      throw std::logic_error("invariant: active lift arm not in a box");
    if (active_->remaining < 0 || active_->remaining > lift_cost(active_->level))
      throw std::logic_error("invariant: active lift pull debt out of range");
  }
}

}  // namespace b3
