#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace b3 {

// Line-oriented event log shared by all policies. Core events:
//   pull, lift_start(l), lift_done, shift(l,j), discard(l), replenish
// Policy-specific events are namespaced:
//   bracket_open(b), halve(round), champion(b), base_level(l)
enum class EventKind {
  pull,
  lift_start,
  lift_done,
  shift,
  discard,
  replenish,
  bracket_open,
  halve,
  champion,
  base_level,
};

struct TraceEvent {
  std::int64_t t = 0;   // pulls completed when the event was recorded
  int arm = -1;         // presentation position, 0-based; -1 if not arm-specific
  double reward = 0.0;  // meaningful for pull only
  EventKind kind = EventKind::pull;
  int p1 = 0;  // level / bracket / round
  int p2 = 0;  // deferment (shift only)
};

using PolicyTrace = std::vector<TraceEvent>;

// Serialization: `t,arm,reward,event` with 1-based arm indices and an empty
// reward field for structural events.
std::string trace_event_to_line(const TraceEvent& e);
TraceEvent trace_event_from_line(const std::string& line);
std::string trace_to_string(const PolicyTrace& trace);
PolicyTrace trace_from_string(const std::string& text);

}  // namespace b3
