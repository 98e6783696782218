#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "b3/rng.hpp"

namespace b3 {

enum class NoiseKind { gaussian, bernoulli, kumaraswamy, deterministic };

struct NoiseModel {
  NoiseKind kind = NoiseKind::gaussian;
  double sigma = 1.0;  // gaussian only

  static NoiseModel gaussian(double s) { return {NoiseKind::gaussian, s}; }
  static NoiseModel bernoulli() { return {NoiseKind::bernoulli, 0.0}; }
  static NoiseModel kumaraswamy() { return {NoiseKind::kumaraswamy, 0.0}; }
  static NoiseModel deterministic() { return {NoiseKind::deterministic, 0.0}; }
};

struct DataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A fixed bandit problem: true means in generator order plus the permutation
// that defines the presentation order shown to algorithms. Immutable after
// construction and safely shared across concurrent trials.
class BanditInstance {
 public:
  // means[i] is the true mean of generator arm i (0-based internally).
  // presentation[p] = generator arm shown at position p.
  BanditInstance(std::vector<double> means, NoiseModel noise,
                 std::vector<int> presentation);

  // Identity presentation.
  BanditInstance(std::vector<double> means, NoiseModel noise);

  int num_arms() const { return static_cast<int>(means_.size()); }
  const std::vector<double>& means() const { return means_; }
  const std::vector<int>& presentation() const { return presentation_; }

  int arm_at_position(int pos) const { return presentation_[static_cast<std::size_t>(pos)]; }
  double mean_at_position(int pos) const {
    return means_[static_cast<std::size_t>(presentation_[static_cast<std::size_t>(pos)])];
  }

  double best_mean() const { return best_mean_; }
  double min_mean() const { return min_mean_; }
  double best_gap() const { return best_gap_; }
  const NoiseModel& noise() const { return noise_; }

  // One reward for the arm at presentation position pos (0-based).
  double sample_reward(int pos, Rng& rng) const;

 private:
  void validate() const;

  std::vector<double> means_;
  NoiseModel noise_;
  std::vector<int> presentation_;
  double best_mean_ = 0.0;
  double min_mean_ = 0.0;
  double best_gap_ = 0.0;
};

// Synthetic gap family: means[i] = mu1 - ((i-1)/N)^alpha for i = 1..N.
// The presentation order is drawn uniformly from rng. For bernoulli and
// kumaraswamy noise the top mean 1.0 is clamped to 1 - 1e-9 so the models
// stay valid.
BanditInstance make_alpha_instance(int num_arms, double alpha, NoiseModel noise,
                                   Rng& rng, double mu1 = 1.0);

// Same means, identity presentation (didactic traces).
BanditInstance make_alpha_instance_ordered(int num_arms, double alpha,
                                           NoiseModel noise, double mu1 = 1.0);

struct CaptionCountRow {
  std::string id;
  std::int64_t not_funny = 0;
  std::int64_t somewhat_funny = 0;
  std::int64_t funny = 0;
};

// mean = (somewhat_funny + funny) / total, order preserved.
std::vector<double> caption_means_from_counts(const std::vector<CaptionCountRow>& rows);

// CSV with header `id,not_funny,somewhat_funny,funny`.
std::vector<CaptionCountRow> read_caption_counts_csv(const std::string& path);

// Number of eps-best arms: count of means with mu_max - mu < eps (strict).
// At eps = 0 this degenerates to the count of exact maximizers.
int n_eps(const std::vector<double>& means, double eps);

}  // namespace b3
