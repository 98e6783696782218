#include "b3/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <set>
#include <stdexcept>

namespace b3 {

// Measured once on deterministic reference runs (N = 5000, T in {300, 1000,
// 3000, 10000}) and pinned; see tests/acceptance.cpp.
const double kB3CandidateRateLow = 0.20;
const double kB3CandidateRateHigh = 0.30;

namespace {

// Truncate to exactly T pulls. Events that settle the T-th pull (lift_done,
// champion, halve) are kept; events that begin new work are not.
PolicyTrace truncate_trace(const PolicyTrace& trace, std::int64_t T) {
  PolicyTrace out;
  std::int64_t pulls = 0;
  std::size_t i = 0;
  for (; i < trace.size() && pulls < T; ++i) {
    if (trace[i].kind == EventKind::pull) ++pulls;
    out.push_back(trace[i]);
  }
  if (pulls < T)
    throw std::invalid_argument("candidate_set: trace has only " + std::to_string(pulls) +
                                " pulls, need " + std::to_string(T));
  for (; i < trace.size(); ++i) {
    const EventKind k = trace[i].kind;
    if (k == EventKind::lift_done || k == EventKind::champion || k == EventKind::halve)
      out.push_back(trace[i]);
    else
      break;
  }
  return out;
}

std::vector<int> b3_candidates_from_trace(const PolicyTrace& trace, int num_arms) {
  std::map<std::pair<int, int>, std::vector<int>> boxes;
  std::vector<std::pair<int, int>> where(static_cast<std::size_t>(num_arms), {-1, -1});
  std::vector<bool> candidate(static_cast<std::size_t>(num_arms), false);
  int base_level = 0;

  auto detach = [&](int arm) {
    auto& w = where[static_cast<std::size_t>(arm)];
    if (w.first < 0) return;
    auto& b = boxes[w];
    b.erase(std::remove(b.begin(), b.end(), arm), b.end());
    w = {-1, -1};
  };
  auto attach = [&](int arm, int l, int j) {
    detach(arm);
    boxes[{l, j}].push_back(arm);
    where[static_cast<std::size_t>(arm)] = {l, j};
    if (l == base_level && j == 0 && boxes[{l, j}].size() == 3)
      for (int a : boxes[{l, j}]) candidate[static_cast<std::size_t>(a)] = true;
  };

  for (const auto& e : trace) {
    switch (e.kind) {
      case EventKind::lift_start:
        attach(e.arm, e.p1, 0);
        break;
      case EventKind::shift:
        attach(e.arm, e.p1, e.p2);
        break;
      case EventKind::discard:
        detach(e.arm);
        break;
      case EventKind::base_level:
        base_level = e.p1;
        break;
      default:
        break;
    }
  }

  // Everything in the current top box is returnable as well.
  int top = -1;
  for (const auto& [key, arms] : boxes)
    if (key.second == 0 && !arms.empty()) top = std::max(top, key.first);
  if (top >= 0)
    for (int a : boxes[{top, 0}]) candidate[static_cast<std::size_t>(a)] = true;

  std::vector<int> out;
  for (int a = 0; a < num_arms; ++a)
    if (candidate[static_cast<std::size_t>(a)]) out.push_back(a);
  return out;
}

}  // namespace

CandidateReport candidate_set(const PolicyTrace& trace, const std::string& algorithm,
                              int num_arms, std::int64_t T) {
  const PolicyTrace cut = truncate_trace(trace, T);
  CandidateReport report;
  report.algorithm = algorithm;
  report.T = T;
  report.method = "trace";

  if (algorithm == "b3") {
    report.candidates = b3_candidates_from_trace(cut, num_arms);
  } else if (algorithm == "us") {
    std::vector<bool> pulled(static_cast<std::size_t>(num_arms), false);
    for (const auto& e : cut)
      if (e.kind == EventKind::pull) pulled[static_cast<std::size_t>(e.arm)] = true;
    for (int a = 0; a < num_arms; ++a)
      if (pulled[static_cast<std::size_t>(a)]) report.candidates.push_back(a);
  } else if (algorithm == "bsh") {
    std::map<int, std::vector<int>> members;
    std::set<int> has_champion;
    for (const auto& e : cut) {
      if (e.kind == EventKind::bracket_open) members[e.p1].push_back(e.arm);
      if (e.kind == EventKind::champion) has_champion.insert(e.p1);
    }
    std::set<int> uni;
    for (int b : has_champion)
      for (int a : members[b]) uni.insert(a);
    report.candidates.assign(uni.begin(), uni.end());
  } else {
    throw std::invalid_argument("candidate_set: unsupported algorithm '" + algorithm + "'");
  }

  report.c0 = static_cast<std::int64_t>(report.candidates.size());
  return report;
}

C0Bounds c0_bounds(const std::string& algorithm, std::int64_t T) {
  if (T < 2) throw std::invalid_argument("c0_bounds: T must be >= 2");
  const double t = static_cast<double>(T);
  C0Bounds b;
  if (algorithm == "us") {
    b.lower = b.upper = t;
    b.exact = true;
    b.note = "c0 = T while T <= N";
  } else if (algorithm == "bsh") {
    const double l2 = std::log2(t);
    b.lower = 4.0 * t / (std::log2(4.0 * t) * std::log2(4.0 * t));
    const double d = l2 - std::log2(l2);
    b.upper = 2.0 * t / (d * d) - 1.0;
    b.note = "bracket arithmetic bounds";
  } else if (algorithm == "b3") {
    b.lower = kB3CandidateRateLow * t;
    b.upper = kB3CandidateRateHigh * t;
    b.note = "frozen empirical linear band";
  } else {
    throw std::invalid_argument("c0_bounds: unsupported algorithm '" + algorithm + "'");
  }
  return b;
}

double non_inclusion_exact(int num_arms, int n_eps, int c0) {
  if (num_arms < 1) throw std::invalid_argument("non_inclusion_exact: N must be >= 1");
  if (n_eps < 0 || n_eps > num_arms)
    throw std::invalid_argument("non_inclusion_exact: n_eps out of range");
  if (c0 < 0 || c0 > num_arms)
    throw std::invalid_argument("non_inclusion_exact: c0 out of range");
  if (c0 + n_eps > num_arms) return 0.0;
  auto log_choose = [](int n, int k) {
    return std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
  };
  return std::exp(log_choose(num_arms - n_eps, c0) - log_choose(num_arms, c0));
}

bool is_data_poor(int num_arms, int n_eps, int c0) {
  if (num_arms < 1) throw std::invalid_argument("is_data_poor: N must be >= 1");
  if (n_eps < 0 || n_eps > num_arms) throw std::invalid_argument("is_data_poor: n_eps out of range");
  if (c0 < 0 || c0 > num_arms) throw std::invalid_argument("is_data_poor: c0 out of range");
  if (n_eps == 0) return c0 < num_arms;
  return c0 <= num_arms - n_eps;
}

ErrorDecomposition decompose_error(const std::vector<TrialOutcome>& outcomes,
                                   double best_mean, double eps) {
  if (eps <= 0.0) throw std::invalid_argument("decompose_error: eps must be > 0");
  if (outcomes.empty()) throw std::invalid_argument("decompose_error: no outcomes");
  ErrorDecomposition d;
  d.eps = eps;
  const double half = eps / 2.0;
  std::int64_t non_inc = 0, within = 0, total = 0;
  for (const auto& o : outcomes) {
    if (best_mean - o.mu_star_candidates > half) ++non_inc;
    if (o.mu_star_candidates - o.mu_recommended > half) ++within;
    if (best_mean - o.mu_recommended > eps) ++total;
  }
  const double n = static_cast<double>(outcomes.size());
  d.non_inclusion_rate = static_cast<double>(non_inc) / n;
  d.within_set_rate = static_cast<double>(within) / n;
  d.total_rate = static_cast<double>(total) / n;
  return d;
}

namespace {
std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}
}  // namespace

std::string CandidateReport::to_json() const {
  std::string s = "{\"algorithm\":\"" + algorithm + "\",\"T\":" + std::to_string(T) +
                  ",\"c0\":" + std::to_string(c0) + ",\"method\":\"" + method +
                  "\",\"candidates\":[";
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    if (i) s += ',';
    s += std::to_string(candidates[i] + 1);
  }
  s += "]}";
  return s;
}

std::string ErrorDecomposition::to_json() const {
  return "{\"eps\":" + fmt_double(eps) +
         ",\"non_inclusion_rate\":" + fmt_double(non_inclusion_rate) +
         ",\"within_set_rate\":" + fmt_double(within_set_rate) +
         ",\"total_rate\":" + fmt_double(total_rate) + "}";
}

}  // namespace b3
