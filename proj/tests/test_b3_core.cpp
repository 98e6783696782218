#include <algorithm>
#include <cmath>
#include <set>

#include <doctest.h>

#include "b3/box_thirding.hpp"
#include "b3/instances.hpp"
#include "b3/schedule.hpp"

using namespace b3;

namespace {

B3Policy::Options didactic(B3Variant variant = B3Variant::data_poor) {
  B3Policy::Options opt;
  opt.variant = variant;
  opt.ordered_replenish = true;
  return opt;
}

// Steps the policy exactly `budget` pulls (or until stalled); returns pulls taken.
std::int64_t run_steps(B3Policy& policy, const BanditInstance& inst, Rng& rng,
                       std::int64_t budget) {
  std::int64_t taken = 0;
  while (taken < budget && policy.step(inst, rng)) ++taken;
  return taken;
}

}  // namespace

TEST_CASE("worked five-arm trace at T=6") {
  const auto inst = make_alpha_instance_ordered(5, 1.0, NoiseModel::deterministic());
  B3Policy policy(5, didactic());
  Rng rng(1);
  REQUIRE(run_steps(policy, inst, rng, 6) == 6);

  CHECK(policy.box(1, 0) == std::vector<int>{0});  // best of the first three, lifted
  CHECK(policy.box(0, 1) == std::vector<int>{1});  // median, deferred
  CHECK(policy.discarded() == std::vector<int>{2});
  CHECK(policy.box(0, 0) == std::vector<int>{3});  // fourth arm introduced at t=6
  CHECK(policy.record(4).pulls == 0);              // fifth arm untouched

  CHECK(policy.record(0).pulls == 3);  // one base pull + two lift pulls
  CHECK(policy.record(1).pulls == 1);
  CHECK(policy.record(2).pulls == 1);
  CHECK(policy.record(3).pulls == 1);

  CHECK(policy.recommend() == 0);
  CHECK(policy.candidate_arms() == std::vector<int>{0, 1, 2});
  policy.check_invariants();
}

TEST_CASE("budget ending mid-lift keeps the partial mean") {
  const auto inst = make_alpha_instance_ordered(5, 1.0, NoiseModel::deterministic());
  B3Policy policy(5, didactic());
  Rng rng(1);
  REQUIRE(run_steps(policy, inst, rng, 4) == 4);

  // The lifted arm has taken 1 of its 2 scheduled pulls and already sits in
  // Box(1,0); its mean covers exactly the pulls taken.
  CHECK(policy.box(1, 0) == std::vector<int>{0});
  CHECK(policy.record(0).pulls == 2);
  CHECK(policy.record(0).mean == doctest::Approx(1.0));
  CHECK(policy.recommend() == 0);
  CHECK(policy.total_pulls() == 4);
  policy.check_invariants();
}

TEST_CASE("single pull recommends the single pulled arm") {
  const auto inst = make_alpha_instance_ordered(3, 1.0, NoiseModel::deterministic());
  B3Policy policy(3, didactic());
  Rng rng(1);
  CHECK_THROWS_AS(policy.recommend(), NoRecommendation);
  REQUIRE(run_steps(policy, inst, rng, 1) == 1);
  CHECK(policy.recommend() == 0);
  CHECK(policy.candidate_arms() == std::vector<int>{0});
}

TEST_CASE("arrange_box assigns roles by mean with index tie-break") {
  SUBCASE("distinct means") {
    const auto inst = BanditInstance({0.9, 0.5, 0.1}, NoiseModel::deterministic());
    B3Policy policy(3, didactic());
    Rng rng(1);
    run_steps(policy, inst, rng, 3);
    // Box(0,0) is full; the sweep arranges it on the next step.
    run_steps(policy, inst, rng, 1);
    CHECK(policy.box(1, 0) == std::vector<int>{0});
    CHECK(policy.box(0, 1) == std::vector<int>{1});
    CHECK(policy.discarded() == std::vector<int>{2});
    CHECK(policy.record(2).discard_level == 0);
  }
  SUBCASE("all means equal: lowest index wins the higher role") {
    const auto inst = BanditInstance({0.5, 0.5, 0.5}, NoiseModel::deterministic());
    B3Policy policy(3, didactic());
    Rng rng(1);
    run_steps(policy, inst, rng, 4);
    CHECK(policy.box(1, 0) == std::vector<int>{0});
    CHECK(policy.box(0, 1) == std::vector<int>{1});
    CHECK(policy.discarded() == std::vector<int>{2});
  }
}

TEST_CASE("arrange_box rejects precondition violations") {
  B3Policy policy(3, didactic());
  CHECK_THROWS_AS(policy.arrange_box(0, 0), std::logic_error);
}

TEST_CASE("lift cost follows the ceiling schedule") {
  B3Policy policy(3, didactic());
  CHECK(policy.r0() == doctest::Approx(1.728).epsilon(1e-3));
  CHECK(policy.lift_cost(0) == 1);
  CHECK(policy.lift_cost(1) == 2);
  CHECK(policy.lift_cost(4) == 9);  // ceil(1.728^4) = ceil(8.92)
}

TEST_CASE("completed lifts cost exactly ceil(r0^l) pulls (from trace)") {
  Rng irng(77);
  const auto inst = make_alpha_instance(30, 1.0, NoiseModel::gaussian(0.5), irng);
  B3Policy policy(30, B3Policy::Options{});
  Rng rng(78);
  run_steps(policy, inst, rng, 140);

  const auto& trace = policy.trace();
  for (std::size_t i = 0; i < trace.size(); ++i) {
    if (trace[i].kind != EventKind::lift_start) continue;
    std::int64_t pulls = 0;
    bool completed = false;
    for (std::size_t k = i + 1; k < trace.size(); ++k) {
      if (trace[k].arm != trace[i].arm) continue;
      if (trace[k].kind == EventKind::pull) ++pulls;
      if (trace[k].kind == EventKind::lift_done) {
        completed = true;
        break;
      }
    }
    if (completed) CHECK(pulls == policy.lift_cost(trace[i].p1));
  }
}

TEST_CASE("anytime validity and pull accounting at every step") {
  Rng irng(5);
  const auto inst = make_alpha_instance(50, 1.0, NoiseModel::gaussian(0.5), irng);
  B3Policy policy(50, B3Policy::Options{});
  Rng rng(6);
  for (std::int64_t t = 1; t <= 500; ++t) {
    REQUIRE(policy.step(inst, rng).has_value());
    CHECK(policy.total_pulls() == t);
    CHECK_NOTHROW(policy.recommend());
    std::int64_t sum = 0;
    for (auto p : policy.pulls_per_arm()) sum += p;
    CHECK(sum == t);
    if (t % 97 == 0) policy.check_invariants();
  }
  policy.check_invariants();
}

TEST_CASE("zero-noise runs never misidentify within the candidate set") {
  for (std::uint64_t seed : {11ULL, 12ULL, 13ULL}) {
    Rng irng(seed);
    const auto inst = make_alpha_instance(40, 1.0, NoiseModel::deterministic(), irng);
    B3Policy policy(40, B3Policy::Options{});
    Rng rng(seed + 100);
    run_steps(policy, inst, rng, 150);

    const auto candidates = policy.candidate_arms();
    REQUIRE(!candidates.empty());
    double best = -1.0;
    for (int c : candidates) best = std::max(best, inst.mean_at_position(c));
    CHECK(inst.mean_at_position(policy.recommend()) == best);
  }
}

TEST_CASE("data-poor runs stall once every arm is consumed") {
  const auto inst = make_alpha_instance_ordered(5, 1.0, NoiseModel::deterministic());
  B3Policy policy(5, didactic(B3Variant::data_poor));
  Rng rng(1);
  const std::int64_t taken = run_steps(policy, inst, rng, 100);
  CHECK(taken == 7);  // 5 base pulls + 2 lift pulls, then nothing arrangeable
  CHECK(policy.stalled());
  CHECK(!policy.step(inst, rng).has_value());
  CHECK_NOTHROW(policy.recommend());
  policy.check_invariants();
}

TEST_CASE("realized flow matches the recursion and the level cap") {
  for (int n0 : {27, 81, 243}) {
    const auto inst = make_alpha_instance_ordered(n0, 1.0, NoiseModel::deterministic());
    B3Policy policy(n0, didactic(B3Variant::data_poor));
    Rng rng(1);
    run_steps(policy, inst, rng, 1'000'000);
    REQUIRE(policy.stalled());

    const auto flow = flow_recursion(n0, 20);
    std::vector<std::set<int>> lifted(21);
    for (const auto& e : policy.trace())
      if (e.kind == EventKind::lift_start)
        lifted[static_cast<std::size_t>(e.p1)].insert(e.arm);
    for (std::size_t l = 0; l < lifted.size(); ++l) {
      const std::int64_t expect = l < flow.size() ? flow[l] : 0;
      CHECK(static_cast<std::int64_t>(lifted[l].size()) == expect);
    }

    const double L = static_cast<double>(policy.max_level());
    CHECK(L >= std::log2(static_cast<double>(n0)) - std::log2(12.0));
    CHECK(L <= std::log2(static_cast<double>(n0 + 1)) - 1.0);
  }
}

TEST_CASE("comprehensive variant recycles the base level on N=3") {
  const auto inst = BanditInstance({0.9, 0.5, 0.1}, NoiseModel::deterministic());
  B3Policy policy(3, didactic(B3Variant::comprehensive));
  Rng rng(1);

  // t1-3 introduce all arms; t4-5 lift the winner; t6 starts the base-level
  // update: the shifted arm is re-lifted and the discard is re-admitted.
  run_steps(policy, inst, rng, 6);
  CHECK(policy.base_level() == 1);
  CHECK(policy.discarded().empty());       // arm 2 returned to the pool
  CHECK(policy.record(2).discard_level == -1);
  CHECK(policy.num_examined() == 2);
  policy.check_invariants();

  // The run keeps climbing instead of stalling.
  const std::int64_t more = run_steps(policy, inst, rng, 200);
  CHECK(more == 200);
  CHECK(!policy.stalled());
  CHECK(policy.base_level() > 1);
  CHECK(inst.mean_at_position(policy.recommend()) == 0.9);
  policy.check_invariants();
}

TEST_CASE("comprehensive variant with no discards only lifts") {
  const auto inst = BanditInstance({0.7}, NoiseModel::deterministic());
  B3Policy policy(1, didactic(B3Variant::comprehensive));
  Rng rng(1);
  const std::int64_t taken = run_steps(policy, inst, rng, 50);
  CHECK(taken == 50);  // never stalls, keeps re-lifting the lone arm
  CHECK(policy.num_examined() == 1);
  CHECK(policy.base_level() > 0);
  CHECK(policy.record(0).pulls == 50);
  policy.check_invariants();
}

TEST_CASE("comprehensive base level is nondecreasing and partition always holds") {
  Rng irng(21);
  const auto inst = make_alpha_instance(6, 0.5, NoiseModel::gaussian(0.2), irng);
  B3Policy policy(6, B3Policy::Options{});
  Rng rng(22);
  int last_base = 0;
  for (int t = 0; t < 400; ++t) {
    REQUIRE(policy.step(inst, rng).has_value());
    CHECK(policy.base_level() >= last_base);
    last_base = policy.base_level();
    policy.check_invariants();
  }
  CHECK(last_base > 0);
}

TEST_CASE("deterministic full processing recommends the true best") {
  const auto inst = make_alpha_instance_ordered(9, 1.0, NoiseModel::deterministic());
  B3Policy policy(9, didactic(B3Variant::data_poor));
  Rng rng(1);
  run_steps(policy, inst, rng, 1000);
  REQUIRE(policy.stalled());
  CHECK(policy.recommend() == 0);
}

TEST_CASE("trace serialization round-trips") {
  const auto inst = make_alpha_instance_ordered(5, 1.0, NoiseModel::deterministic());
  B3Policy policy(5, didactic());
  Rng rng(1);
  run_steps(policy, inst, rng, 6);

  const std::string text = trace_to_string(policy.trace());
  const PolicyTrace parsed = trace_from_string(text);
  REQUIRE(parsed.size() == policy.trace().size());
  for (std::size_t i = 0; i < parsed.size(); ++i) {
    CHECK(parsed[i].t == policy.trace()[i].t);
    CHECK(parsed[i].arm == policy.trace()[i].arm);
    CHECK(parsed[i].kind == policy.trace()[i].kind);
    CHECK(parsed[i].p1 == policy.trace()[i].p1);
    CHECK(parsed[i].p2 == policy.trace()[i].p2);
    CHECK(parsed[i].reward == policy.trace()[i].reward);
  }
}
