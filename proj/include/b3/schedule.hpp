#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace b3 {

enum class ScheduleKind { geometric, linear_geometric, custom };

// Per-level budget schedule T_l. The geometric family uses T_l = ceil(r0^l),
// the linear-geometric family T_l = ceil((l+1) * r0^l).
struct Schedule {
  ScheduleKind kind = ScheduleKind::geometric;
  double r0 = 0.0;                  // rate in (1, 2]; ignored for custom
  std::vector<std::int64_t> table;  // custom only

  static Schedule geometric(double rate);
  static Schedule linear_geometric(double rate);
  static Schedule custom(std::vector<std::int64_t> t);
};

// Root of the schedule-rate optimality condition on (1, 2), found by
// bisection to |f(r)| < 1e-12. geometric: r + r^1.5 - 4; linear_geometric:
// r - 2 r^1.5 + 2.
double solve_rate(ScheduleKind kind);

// Ceiling with a snap-to-integer guard: r0 is irrational so exact integer
// powers cannot occur, but floating error can straddle one.
std::int64_t sched_ceil(double x);

// T_l for level l under the given schedule.
std::int64_t schedule_budget(std::int64_t level, const Schedule& schedule);

// Arm-count flow across levels: n_{l+1} = sum_{i>=1} floor(n_l / 3^i),
// terminating at 0 once n_l < 3. Returns n_0 .. n_levels.
std::vector<std::int64_t> flow_recursion(std::int64_t n0, int levels);

}  // namespace b3
