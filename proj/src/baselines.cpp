#include "b3/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace b3 {

namespace {

// argmax by mean, ties to the lowest arm index; skip entries with pred false.
template <typename Pred>
int best_by_mean(const std::vector<double>& means, const std::vector<int>& arms, Pred pred) {
  int best = -1;
  double best_mean = 0.0;
  for (int arm : arms) {
    if (!pred(arm)) continue;
    const double m = means[static_cast<std::size_t>(arm)];
    if (best < 0 || m > best_mean || (m == best_mean && arm < best)) {
      best = arm;
      best_mean = m;
    }
  }
  return best;
}

}  // namespace

// ----------------------------------------------------------------- UsPolicy

UsPolicy::UsPolicy(int num_arms, bool record_trace)
    : num_arms_(num_arms),
      record_trace_(record_trace),
      pulls_(static_cast<std::size_t>(num_arms), 0),
      means_(static_cast<std::size_t>(num_arms), 0.0) {
  if (num_arms < 1) throw std::invalid_argument("UsPolicy: need at least one arm");
}

std::optional<StepOutcome> UsPolicy::step(const BanditInstance& instance, Rng& rng) {
  if (order_.empty()) {
    order_.resize(static_cast<std::size_t>(num_arms_));
    std::iota(order_.begin(), order_.end(), 0);
    rng.shuffle(order_);
  }
  const int arm = order_[static_cast<std::size_t>(t_ % num_arms_)];
  const double reward = instance.sample_reward(arm, rng);
  auto& n = pulls_[static_cast<std::size_t>(arm)];
  means_[static_cast<std::size_t>(arm)] += (reward - means_[static_cast<std::size_t>(arm)]) / static_cast<double>(++n);
  ++t_;
  if (record_trace_) trace_.push_back(TraceEvent{t_, arm, reward, EventKind::pull, 0, 0});
  return StepOutcome{arm, reward};
}

int UsPolicy::recommend() const {
  if (t_ == 0) throw NoRecommendation{};
  int best = -1;
  double best_mean = 0.0;
  for (int a = 0; a < num_arms_; ++a) {
    if (pulls_[static_cast<std::size_t>(a)] == 0) continue;
    const double m = means_[static_cast<std::size_t>(a)];
    if (best < 0 || m > best_mean) {
      best = a;
      best_mean = m;
    }
  }
  return best;
}

std::vector<int> UsPolicy::candidate_arms() const {
  std::vector<int> out;
  for (int a = 0; a < num_arms_; ++a)
    if (pulls_[static_cast<std::size_t>(a)] > 0) out.push_back(a);
  return out;
}

// ----------------------------------------------------------------- ShPolicy

ShPolicy::ShPolicy(int num_arms, std::int64_t budget, Schedule schedule, bool record_trace)
    : num_arms_(num_arms),
      budget_(budget),
      schedule_(std::move(schedule)),
      record_trace_(record_trace),
      pulls_(static_cast<std::size_t>(num_arms), 0),
      means_(static_cast<std::size_t>(num_arms), 0.0) {
  if (num_arms < 1) throw std::invalid_argument("ShPolicy: need at least one arm");
  last_round_ = static_cast<int>(std::floor(std::log2(static_cast<double>(num_arms))));

  // t0 = max{t : t * N * sum_l T_l/2^l <= T}, evaluated exactly via the
  // common denominator 2^L.
  __int128 weighted = 0;
  for (int l = 0; l <= last_round_; ++l)
    weighted += static_cast<__int128>(schedule_budget(l, schedule_)) << (last_round_ - l);
  const __int128 cap = static_cast<__int128>(budget) << last_round_;
  const __int128 denom = static_cast<__int128>(num_arms) * weighted;
  t0_ = static_cast<std::int64_t>(cap / denom);
  if (t0_ < 1)
    throw InsufficientBudget("sh: budget " + std::to_string(budget) +
                             " gives t0 < 1 for N = " + std::to_string(num_arms));

  survivors_.resize(static_cast<std::size_t>(num_arms));
  std::iota(survivors_.begin(), survivors_.end(), 0);
  round_pulls_.assign(survivors_.size(), 0);
  round_means_.assign(survivors_.size(), 0.0);
}

void ShPolicy::finish_round() {
  // Keep the top ceil(m/2) by this round's means, ties to the lower index.
  std::vector<std::size_t> idx(survivors_.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [this](std::size_t x, std::size_t y) {
    if (round_means_[x] != round_means_[y]) return round_means_[x] > round_means_[y];
    return survivors_[x] < survivors_[y];
  });
  const std::size_t keep = (survivors_.size() + 1) / 2;
  std::vector<int> next;
  next.reserve(keep);
  for (std::size_t k = 0; k < keep; ++k) next.push_back(survivors_[idx[k]]);
  std::sort(next.begin(), next.end());
  survivors_ = std::move(next);
  if (record_trace_) trace_.push_back(TraceEvent{t_, -1, 0.0, EventKind::halve, round_, 0});

  ++round_;
  cursor_ = 0;
  taken_this_arm_ = 0;
  round_pulls_.assign(survivors_.size(), 0);
  round_means_.assign(survivors_.size(), 0.0);
  if (round_ > last_round_) done_ = true;
}

std::optional<StepOutcome> ShPolicy::step(const BanditInstance& instance, Rng& rng) {
  if (done_ || t_ >= budget_) return std::nullopt;
  const std::int64_t quota = t0_ * schedule_budget(round_, schedule_);
  const int arm = survivors_[cursor_];
  const double reward = instance.sample_reward(arm, rng);

  auto& n = pulls_[static_cast<std::size_t>(arm)];
  means_[static_cast<std::size_t>(arm)] += (reward - means_[static_cast<std::size_t>(arm)]) / static_cast<double>(++n);
  auto& rn = round_pulls_[cursor_];
  round_means_[cursor_] += (reward - round_means_[cursor_]) / static_cast<double>(++rn);
  ++t_;
  ++taken_this_arm_;
  if (record_trace_) trace_.push_back(TraceEvent{t_, arm, reward, EventKind::pull, 0, 0});

  if (taken_this_arm_ >= quota) {
    taken_this_arm_ = 0;
    if (++cursor_ >= survivors_.size()) finish_round();
  }
  return StepOutcome{arm, reward};
}

int ShPolicy::recommend() const {
  if (t_ == 0) throw NoRecommendation{};
  const int best = best_by_mean(means_, survivors_, [this](int a) {
    return pulls_[static_cast<std::size_t>(a)] > 0;
  });
  if (best >= 0) return best;
  // No survivor pulled yet this run; fall back to any pulled arm.
  std::vector<int> all(static_cast<std::size_t>(num_arms_));
  std::iota(all.begin(), all.end(), 0);
  return best_by_mean(means_, all, [this](int a) { return pulls_[static_cast<std::size_t>(a)] > 0; });
}

std::vector<int> ShPolicy::candidate_arms() const {
  std::vector<int> out;
  for (int a = 0; a < num_arms_; ++a)
    if (pulls_[static_cast<std::size_t>(a)] > 0) out.push_back(a);
  return out;
}

// --------------------------------------------------------- BracketedPolicy

BracketedPolicy::BracketedPolicy(int num_arms, bool record_trace)
    : num_arms_(num_arms),
      record_trace_(record_trace),
      pulls_(static_cast<std::size_t>(num_arms), 0) {
  if (num_arms < 1) throw std::invalid_argument("BracketedPolicy: need at least one arm");
}

void BracketedPolicy::maybe_open_brackets(Rng& rng) {
  for (;;) {
    const int b = static_cast<int>(brackets_.size()) + 1;
    // Bracket b opens once cumulative pulls reach (b-1) * 2^(b-1).
    const std::int64_t open_at = static_cast<std::int64_t>(b - 1) << (b - 1);
    if (t_ < open_at) break;

    Bracket br;
    br.index = b;
    const std::int64_t want = std::int64_t{1} << b;
    const int size = static_cast<int>(std::min<std::int64_t>(want, num_arms_));
    // Sample `size` distinct positions via a partial Fisher-Yates.
    std::vector<int> scratch(static_cast<std::size_t>(num_arms_));
    std::iota(scratch.begin(), scratch.end(), 0);
    br.members.reserve(static_cast<std::size_t>(size));
    for (int k = 0; k < size; ++k) {
      const std::size_t i = static_cast<std::size_t>(k) +
                            static_cast<std::size_t>(rng.below(static_cast<std::uint64_t>(num_arms_ - k)));
      std::swap(scratch[static_cast<std::size_t>(k)], scratch[i]);
      br.members.push_back(scratch[static_cast<std::size_t>(k)]);
    }
    br.pulls.assign(br.members.size(), 0);
    br.means.assign(br.members.size(), 0.0);
    if (record_trace_)
      for (int arm : br.members)
        trace_.push_back(TraceEvent{t_, arm, 0.0, EventKind::bracket_open, b, 0});
    brackets_.push_back(std::move(br));
    on_bracket_open(brackets_.back());
  }
}

std::optional<StepOutcome> BracketedPolicy::step(const BanditInstance& instance, Rng& rng) {
  maybe_open_brackets(rng);
  Bracket& br = brackets_[rr_ % brackets_.size()];
  ++rr_;
  const std::size_t slot = inner_select(br);
  const int arm = br.members[slot];
  const double reward = instance.sample_reward(arm, rng);

  auto& n = br.pulls[slot];
  br.means[slot] += (reward - br.means[slot]) / static_cast<double>(++n);
  ++pulls_[static_cast<std::size_t>(arm)];
  ++t_;
  if (record_trace_) trace_.push_back(TraceEvent{t_, arm, reward, EventKind::pull, 0, 0});
  inner_update(br, slot, reward);
  return StepOutcome{arm, reward};
}

void BracketedPolicy::declare_champion(Bracket& br, int member_slot) {
  br.champion = member_slot;
  if (record_trace_)
    trace_.push_back(TraceEvent{t_, br.members[static_cast<std::size_t>(member_slot)], 0.0,
                                EventKind::champion, br.index, 0});
}

int BracketedPolicy::recommend() const {
  if (t_ == 0) throw NoRecommendation{};
  int best = -1;
  double best_mean = 0.0;
  for (const Bracket& br : brackets_) {
    // Champion if one exists, otherwise the best pulled member so far.
    int slot = br.champion;
    if (slot < 0 || br.pulls[static_cast<std::size_t>(slot)] == 0) {
      slot = -1;
      double m_best = 0.0;
      for (std::size_t s = 0; s < br.members.size(); ++s) {
        if (br.pulls[s] == 0) continue;
        if (slot < 0 || br.means[s] > m_best ||
            (br.means[s] == m_best && br.members[s] < br.members[static_cast<std::size_t>(slot)])) {
          slot = static_cast<int>(s);
          m_best = br.means[s];
        }
      }
    }
    if (slot < 0) continue;
    const double m = br.means[static_cast<std::size_t>(slot)];
    const int arm = br.members[static_cast<std::size_t>(slot)];
    if (best < 0 || m > best_mean || (m == best_mean && arm < best)) {
      best = arm;
      best_mean = m;
    }
  }
  return best;
}

std::vector<int> BracketedPolicy::candidate_arms() const {
  std::vector<bool> in(static_cast<std::size_t>(num_arms_), false);
  for (const Bracket& br : brackets_)
    if (br.champion >= 0)
      for (int arm : br.members) in[static_cast<std::size_t>(arm)] = true;
  std::vector<int> out;
  for (int a = 0; a < num_arms_; ++a)
    if (in[static_cast<std::size_t>(a)]) out.push_back(a);
  return out;
}

std::vector<int> BracketedPolicy::bracket_members(int b) const {
  return brackets_.at(static_cast<std::size_t>(b - 1)).members;
}

bool BracketedPolicy::bracket_has_champion(int b) const {
  return brackets_.at(static_cast<std::size_t>(b - 1)).champion >= 0;
}

// ---------------------------------------------------------------- BshPolicy

BshPolicy::BshPolicy(int num_arms, bool record_trace)
    : BracketedPolicy(num_arms, record_trace) {}

void BshPolicy::on_bracket_open(Bracket& br) {
  runs_.emplace_back();
  start_run(br, runs_.back(), 0);
}

void BshPolicy::start_run(Bracket& br, RunState& rs, int run_index) {
  const int b = br.index;
  const std::int64_t m = static_cast<std::int64_t>(br.members.size());
  rs.run_index = run_index;
  rs.budget = (std::int64_t{1} << run_index) * static_cast<std::int64_t>(b) * (std::int64_t{1} << b);
  rs.spent = 0;
  rs.last_round = static_cast<int>(std::floor(std::log2(static_cast<double>(m))));
  // Inner schedule T_l = 2^l, so sum_l T_l/2^l = last_round + 1.
  rs.t0 = rs.budget / (m * (rs.last_round + 1));
  rs.round = 0;
  rs.cursor = 0;
  rs.taken = 0;
  rs.rr = 0;
  rs.survivors.resize(br.members.size());
  std::iota(rs.survivors.begin(), rs.survivors.end(), 0);
  rs.round_pulls.assign(rs.survivors.size(), 0);
  rs.round_means.assign(rs.survivors.size(), 0.0);
}

void BshPolicy::finish_inner_round(Bracket& br, RunState& rs) {
  std::vector<std::size_t> idx(rs.survivors.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](std::size_t x, std::size_t y) {
    if (rs.round_means[x] != rs.round_means[y]) return rs.round_means[x] > rs.round_means[y];
    return br.members[static_cast<std::size_t>(rs.survivors[x])] <
           br.members[static_cast<std::size_t>(rs.survivors[y])];
  });
  const std::size_t keep = (rs.survivors.size() + 1) / 2;
  std::vector<int> next;
  next.reserve(keep);
  for (std::size_t k = 0; k < keep; ++k) next.push_back(rs.survivors[idx[k]]);
  std::sort(next.begin(), next.end());
  rs.survivors = std::move(next);
  if (record_trace_) trace_.push_back(TraceEvent{t_, -1, 0.0, EventKind::halve, rs.round, br.index});

  ++rs.round;
  rs.cursor = 0;
  rs.taken = 0;
  rs.round_pulls.assign(rs.survivors.size(), 0);
  rs.round_means.assign(rs.survivors.size(), 0.0);
}

std::size_t BshPolicy::inner_select(Bracket& br) {
  RunState& rs = runs_[static_cast<std::size_t>(br.index - 1)];
  if (rs.t0 < 1) {
    // Degenerate run: plain round-robin over the members.
    return rs.rr % br.members.size();
  }
  if (rs.round > rs.last_round) {
    // Halving finished; spend the slack on the champion-designate.
    return static_cast<std::size_t>(rs.survivors.front());
  }
  return static_cast<std::size_t>(rs.survivors[rs.cursor]);
}

void BshPolicy::inner_update(Bracket& br, std::size_t slot, double reward) {
  (void)slot;
  RunState& rs = runs_[static_cast<std::size_t>(br.index - 1)];
  ++rs.spent;
  if (rs.t0 >= 1 && rs.round <= rs.last_round) {
    auto& rn = rs.round_pulls[rs.cursor];
    rs.round_means[rs.cursor] += (reward - rs.round_means[rs.cursor]) / static_cast<double>(++rn);
    ++rs.taken;
    const std::int64_t quota = rs.t0 * (std::int64_t{1} << rs.round);
    if (rs.taken >= quota) {
      rs.taken = 0;
      if (++rs.cursor >= rs.survivors.size()) finish_inner_round(br, rs);
    }
  } else {
    ++rs.rr;
  }
  if (rs.spent >= rs.budget) {
    // Run complete: the survivor (or best round-robin mean) is the champion.
    int champ_slot;
    if (rs.t0 >= 1) {
      champ_slot = rs.survivors.front();
    } else {
      champ_slot = 0;
      for (std::size_t s = 1; s < br.members.size(); ++s) {
        if (br.pulls[s] == 0) continue;
        const auto c = static_cast<std::size_t>(champ_slot);
        if (br.pulls[c] == 0 || br.means[s] > br.means[c] ||
            (br.means[s] == br.means[c] && br.members[s] < br.members[c]))
          champ_slot = static_cast<int>(s);
      }
    }
    declare_champion(br, champ_slot);
    start_run(br, rs, rs.run_index + 1);
  }
}

// --------------------------------------------------------------- BucbPolicy

BucbPolicy::BucbPolicy(int num_arms, double delta, bool record_trace)
    : BracketedPolicy(num_arms, record_trace), delta_(delta) {
  if (!(delta > 0.0 && delta < 1.0)) throw ConfigError("bucb: delta must lie in (0,1)");
  two_log_inv_delta_ = 2.0 * std::log(1.0 / delta_);
}

double BucbPolicy::radius(std::int64_t n) const {
  return std::sqrt(two_log_inv_delta_ / static_cast<double>(n));
}

void BucbPolicy::on_bracket_open(Bracket&) {}

void BucbPolicy::inner_update(Bracket&, std::size_t, double) {}

std::size_t BucbPolicy::inner_select(Bracket& br) {
  std::size_t best = 0;
  double best_index = -std::numeric_limits<double>::infinity();
  bool best_unpulled = false;
  for (std::size_t s = 0; s < br.members.size(); ++s) {
    if (br.pulls[s] == 0) {
      // Infinite index; the lowest arm index among unpulled wins.
      if (!best_unpulled || br.members[s] < br.members[best]) {
        best = s;
        best_unpulled = true;
      }
      continue;
    }
    if (best_unpulled) continue;
    const double index = br.means[s] + radius(br.pulls[s]);
    if (index > best_index) {
      best_index = index;
      best = s;
    }
  }
  return best;
}

// --------------------------------------------------------------- UcbEPolicy

UcbEPolicy::UcbEPolicy(int num_arms, std::int64_t budget, double exploration,
                       bool record_trace)
    : num_arms_(num_arms),
      budget_(budget),
      record_trace_(record_trace),
      pulls_(static_cast<std::size_t>(num_arms), 0),
      means_(static_cast<std::size_t>(num_arms), 0.0) {
  if (num_arms < 1) throw std::invalid_argument("UcbEPolicy: need at least one arm");
  if (budget < 1) throw InsufficientBudget("ucbe: budget must be >= 1");
  a_ = exploration > 0.0 ? exploration
                         : static_cast<double>(budget) / static_cast<double>(num_arms);
}

std::optional<StepOutcome> UcbEPolicy::step(const BanditInstance& instance, Rng& rng) {
  if (t_ >= budget_) return std::nullopt;
  int arm = -1;
  double best_index = -std::numeric_limits<double>::infinity();
  for (int a = 0; a < num_arms_; ++a) {
    const auto n = pulls_[static_cast<std::size_t>(a)];
    if (n == 0) {
      arm = a;
      break;
    }
    const double index = means_[static_cast<std::size_t>(a)] + std::sqrt(a_ / static_cast<double>(n));
    if (index > best_index) {
      best_index = index;
      arm = a;
    }
  }
  const double reward = instance.sample_reward(arm, rng);
  auto& n = pulls_[static_cast<std::size_t>(arm)];
  means_[static_cast<std::size_t>(arm)] += (reward - means_[static_cast<std::size_t>(arm)]) / static_cast<double>(++n);
  ++t_;
  if (record_trace_) trace_.push_back(TraceEvent{t_, arm, reward, EventKind::pull, 0, 0});
  return StepOutcome{arm, reward};
}

int UcbEPolicy::recommend() const {
  if (t_ == 0) throw NoRecommendation{};
  int best = -1;
  double best_mean = 0.0;
  for (int a = 0; a < num_arms_; ++a) {
    if (pulls_[static_cast<std::size_t>(a)] == 0) continue;
    const double m = means_[static_cast<std::size_t>(a)];
    if (best < 0 || m > best_mean) {
      best = a;
      best_mean = m;
    }
  }
  return best;
}

std::vector<int> UcbEPolicy::candidate_arms() const {
  std::vector<int> out;
  for (int a = 0; a < num_arms_; ++a)
    if (pulls_[static_cast<std::size_t>(a)] > 0) out.push_back(a);
  return out;
}

}  // namespace b3
