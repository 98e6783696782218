#include "b3/trace.hpp"

#include <cstdio>
#include <sstream>
#include <stdexcept>

namespace b3 {

namespace {

std::string event_text(const TraceEvent& e) {
  char buf[48];
  switch (e.kind) {
    case EventKind::pull:
      return "pull";
    case EventKind::lift_start:
      std::snprintf(buf, sizeof buf, "lift_start(%d)", e.p1);
      return buf;
    case EventKind::lift_done:
      return "lift_done";
    case EventKind::shift:
      std::snprintf(buf, sizeof buf, "shift(%d,%d)", e.p1, e.p2);
      return buf;
    case EventKind::discard:
      std::snprintf(buf, sizeof buf, "discard(%d)", e.p1);
      return buf;
    case EventKind::replenish:
      return "replenish";
    case EventKind::bracket_open:
      std::snprintf(buf, sizeof buf, "bracket_open(%d)", e.p1);
      return buf;
    case EventKind::halve:
      std::snprintf(buf, sizeof buf, "halve(%d)", e.p1);
      return buf;
    case EventKind::champion:
      std::snprintf(buf, sizeof buf, "champion(%d)", e.p1);
      return buf;
    case EventKind::base_level:
      std::snprintf(buf, sizeof buf, "base_level(%d)", e.p1);
      return buf;
  }
  throw std::logic_error("event_text: unreachable");
}

}  // namespace

std::string trace_event_to_line(const TraceEvent& e) {
  std::ostringstream out;
  out << e.t << ',';
  if (e.arm >= 0) out << (e.arm + 1);
  out << ',';
  if (e.kind == EventKind::pull) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", e.reward);
    out << buf;
  }
  out << ',' << event_text(e);
  return out.str();
}

TraceEvent trace_event_from_line(const std::string& line) {
  std::stringstream ss(line);
  std::string t_s, arm_s, reward_s, event_s;
  if (!std::getline(ss, t_s, ',') || !std::getline(ss, arm_s, ',') ||
      !std::getline(ss, reward_s, ',') || !std::getline(ss, event_s))
    throw std::invalid_argument("trace line must have 4 fields: " + line);

  TraceEvent e;
  e.t = std::stoll(t_s);
  e.arm = arm_s.empty() ? -1 : std::stoi(arm_s) - 1;
  if (!reward_s.empty()) e.reward = std::stod(reward_s);

  auto parse_args = [&event_s](std::size_t paren, int& a, int* b) {
    std::string inner = event_s.substr(paren + 1, event_s.size() - paren - 2);
    std::stringstream args(inner);
    std::string f;
    std::getline(args, f, ',');
    a = std::stoi(f);
    if (b && std::getline(args, f, ',')) *b = std::stoi(f);
  };

  const std::size_t paren = event_s.find('(');
  const std::string name = event_s.substr(0, paren);
  if (name == "pull") e.kind = EventKind::pull;
  else if (name == "lift_start") e.kind = EventKind::lift_start;
  else if (name == "lift_done") e.kind = EventKind::lift_done;
  else if (name == "shift") e.kind = EventKind::shift;
  else if (name == "discard") e.kind = EventKind::discard;
  else if (name == "replenish") e.kind = EventKind::replenish;
  else if (name == "bracket_open") e.kind = EventKind::bracket_open;
  else if (name == "halve") e.kind = EventKind::halve;
  else if (name == "champion") e.kind = EventKind::champion;
  else if (name == "base_level") e.kind = EventKind::base_level;
  else throw std::invalid_argument("unknown trace event: " + event_s);

  if (paren != std::string::npos) parse_args(paren, e.p1, &e.p2);
  return e;
}

std::string trace_to_string(const PolicyTrace& trace) {
  std::string out;
  for (const auto& e : trace) {
    out += trace_event_to_line(e);
    out += '\n';
  }
  return out;
}

PolicyTrace trace_from_string(const std::string& text) {
  PolicyTrace trace;
  std::stringstream ss(text);
  std::string line;
  while (std::getline(ss, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    trace.push_back(trace_event_from_line(line));
  }
  return trace;
}

}  // namespace b3
