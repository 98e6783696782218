#include <cmath>

#include <doctest.h>

#include "b3/schedule.hpp"

using namespace b3;

TEST_CASE("solve_rate finds the geometric optimum near 1.728") {
  const double r = solve_rate(ScheduleKind::geometric);
  CHECK(r == doctest::Approx(1.728).epsilon(1e-3));
  CHECK(std::fabs(r + std::pow(r, 1.5) - 4.0) < 1e-12);
}

TEST_CASE("solve_rate finds the linear-geometric optimum near 1.434") {
  const double r = solve_rate(ScheduleKind::linear_geometric);
  CHECK(r == doctest::Approx(1.434).epsilon(1e-3));
  CHECK(std::fabs(r - 2.0 * std::pow(r, 1.5) + 2.0) < 1e-12);
}

TEST_CASE("schedule_budget geometric") {
  const Schedule s = Schedule::geometric(solve_rate(ScheduleKind::geometric));
  CHECK(schedule_budget(0, s) == 1);
  CHECK(schedule_budget(1, s) == 2);
  CHECK(schedule_budget(4, s) == 9);  // ceil(1.728^4) = ceil(8.92)
}

TEST_CASE("schedule_budget linear_geometric") {
  const Schedule s = Schedule::linear_geometric(solve_rate(ScheduleKind::linear_geometric));
  CHECK(schedule_budget(0, s) == 1);
  CHECK(schedule_budget(2, s) == 7);  // ceil(3 * 1.434^2) = ceil(6.17)
}

TEST_CASE("schedule_budget custom table and out-of-range error") {
  const Schedule s = Schedule::custom({1, 2, 4});
  CHECK(schedule_budget(2, s) == 4);
  CHECK_THROWS_AS(schedule_budget(3, s), std::invalid_argument);
  CHECK_THROWS_AS(schedule_budget(-1, s), std::invalid_argument);
}

TEST_CASE("sched_ceil snaps near-integers") {
  CHECK(sched_ceil(8.9163) == 9);
  CHECK(sched_ceil(9.0000000004) == 9);
  CHECK(sched_ceil(8.9999999996) == 9);
  CHECK(sched_ceil(2.0) == 2);
}

TEST_CASE("flow_recursion on small counts") {
  CHECK(flow_recursion(9, 1)[1] == 4);    // floor(9/3) + floor(9/9)
  CHECK(flow_recursion(27, 1)[1] == 13);  // 9 + 3 + 1
  CHECK(flow_recursion(2, 1)[1] == 0);    // no full box forms
  CHECK(flow_recursion(1, 3) == std::vector<std::int64_t>{1, 0, 0, 0});
}

TEST_CASE("flow_recursion halving bounds") {
  // n_l <= (n0+1)/2^l - 1 and n_l >= n0/2^l - 7 - 2 log3(n_l), while n_l >= 1.
  for (std::int64_t n0 : {9LL, 27LL, 81LL, 243LL, 6561LL}) {
    const auto flow = flow_recursion(n0, 20);
    for (std::size_t l = 1; l < flow.size(); ++l) {
      if (flow[l] < 1) break;
      const double nl = static_cast<double>(flow[l]);
      const double pow2 = std::pow(2.0, static_cast<double>(l));
      CHECK(nl <= static_cast<double>(n0 + 1) / pow2 - 1.0);
      CHECK(nl >= static_cast<double>(n0) / pow2 - 7.0 -
                      2.0 * std::log(nl) / std::log(3.0));
    }
  }
}
