#include "b3/schedule.hpp"

#include <cmath>

namespace b3 {

Schedule Schedule::geometric(double rate) {
  Schedule s;
  s.kind = ScheduleKind::geometric;
  s.r0 = rate;
  return s;
}

Schedule Schedule::linear_geometric(double rate) {
  Schedule s;
  s.kind = ScheduleKind::linear_geometric;
  s.r0 = rate;
  return s;
}

Schedule Schedule::custom(std::vector<std::int64_t> t) {
  Schedule s;
  s.kind = ScheduleKind::custom;
  s.table = std::move(t);
  return s;
}

double solve_rate(ScheduleKind kind) {
  if (kind == ScheduleKind::custom)
    throw std::invalid_argument("solve_rate: custom schedules have no rate equation");
  auto f = [kind](double r) {
    return kind == ScheduleKind::geometric ? r + std::pow(r, 1.5) - 4.0
                                           : r - 2.0 * std::pow(r, 1.5) + 2.0;
  };
  // f is monotone on (1,2) for both kinds; the sign flips between endpoints.
  double lo = 1.0, hi = 2.0;
  double flo = f(lo);
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double fm = f(mid);
    if (std::fabs(fm) < 1e-12) return mid;
    if ((fm < 0.0) == (flo < 0.0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

std::int64_t sched_ceil(double x) {
  const double nearest = std::round(x);
  if (std::fabs(x - nearest) <= 1e-9) return static_cast<std::int64_t>(nearest);
  return static_cast<std::int64_t>(std::ceil(x));
}

std::int64_t schedule_budget(std::int64_t level, const Schedule& schedule) {
  if (level < 0) throw std::invalid_argument("schedule_budget: negative level");
  switch (schedule.kind) {
    case ScheduleKind::geometric:
      return sched_ceil(std::pow(schedule.r0, static_cast<double>(level)));
    case ScheduleKind::linear_geometric:
      return sched_ceil(static_cast<double>(level + 1) *
                        std::pow(schedule.r0, static_cast<double>(level)));
    case ScheduleKind::custom:
      if (static_cast<std::size_t>(level) >= schedule.table.size())
        throw std::invalid_argument("schedule_budget: level " + std::to_string(level) +
                                    " past custom table end");
      return schedule.table[static_cast<std::size_t>(level)];
  }
  throw std::logic_error("schedule_budget: unreachable");
}

std::vector<std::int64_t> flow_recursion(std::int64_t n0, int levels) {
  if (n0 < 1) throw std::invalid_argument("flow_recursion: n0 must be >= 1");
  std::vector<std::int64_t> flow;
  flow.reserve(static_cast<std::size_t>(levels) + 1);
  flow.push_back(n0);
  for (int l = 0; l < levels; ++l) {
    const std::int64_t n = flow.back();
    std::int64_t next = 0;
    for (std::int64_t p = 3; p <= n; p *= 3) next += n / p;
    flow.push_back(next);
  }
  return flow;
}

}  // namespace b3
