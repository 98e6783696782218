#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "b3/instances.hpp"
#include "b3/trace.hpp"

namespace b3 {

struct CandidateReport {
  std::string algorithm;
  std::int64_t T = 0;
  std::vector<int> candidates;  // presentation positions, ascending
  std::int64_t c0 = 0;
  std::string method;  // "trace" or "closed_form_bound"

  std::string to_json() const;
};

// Reconstructs the candidate set from an event log. b3: arms that were ever
// members of a full base box, plus the occupants of the current top box.
// us: every pulled arm. bsh: the union of memberships of brackets that have
// produced a champion. The trace is truncated to exactly T pulls.
CandidateReport candidate_set(const PolicyTrace& trace, const std::string& algorithm,
                              int num_arms, std::int64_t T);

struct C0Bounds {
  double lower = 0.0;
  double upper = 0.0;
  bool exact = false;
  std::string note;
};

// Closed-form candidate-set size bounds per algorithm at budget T.
// us: exactly T in the data-poor regime. bsh: [4T/(log2 4T)^2,
// 2T/(log2 T - log2 log2 T)^2 - 1]. b3: the frozen empirical linear band
// measured on deterministic reference runs.
C0Bounds c0_bounds(const std::string& algorithm, std::int64_t T);

// Frozen linear-band constants for B3's c0/T (see c0_bounds).
extern const double kB3CandidateRateLow;
extern const double kB3CandidateRateHigh;

// Probability that no eps-best arm enters a uniformly screened candidate set:
// 0 when c0 + n_eps > N, else C(N - n_eps, c0) / C(N, c0) in log space.
double non_inclusion_exact(int num_arms, int n_eps, int c0);

// Data-poor condition: c0 <= N - n_eps; at n_eps = 0 the convention is c0 < N.
bool is_data_poor(int num_arms, int n_eps, int c0);

struct TrialOutcome {
  double mu_star_candidates = 0.0;  // best true mean within the candidate set
  double mu_recommended = 0.0;      // true mean of the recommended arm
};

struct ErrorDecomposition {
  double eps = 0.0;
  double non_inclusion_rate = 0.0;  // mu_1 - mu*(C) > eps/2
  double within_set_rate = 0.0;     // mu*(C) - mu_rec > eps/2
  double total_rate = 0.0;          // mu_1 - mu_rec > eps

  std::string to_json() const;
};

ErrorDecomposition decompose_error(const std::vector<TrialOutcome>& outcomes,
                                   double best_mean, double eps);

}  // namespace b3
