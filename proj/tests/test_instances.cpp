#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>

#include <doctest.h>

#include "b3/instances.hpp"

using namespace b3;

TEST_CASE("alpha instance means reproduce the gap family exactly") {
  const auto inst = make_alpha_instance_ordered(4, 1.0, NoiseModel::deterministic());
  CHECK(inst.means() == std::vector<double>{1.0, 0.75, 0.5, 0.25});

  // Gaps ((i-1)/N)^alpha are nondecreasing and exact to machine precision.
  const auto big = make_alpha_instance_ordered(137, 0.7, NoiseModel::deterministic());
  double prev_gap = 0.0;
  for (int i = 0; i < big.num_arms(); ++i) {
    const double gap = 1.0 - big.means()[static_cast<std::size_t>(i)];
    CHECK(gap == std::pow(static_cast<double>(i) / 137.0, 0.7));
    CHECK(gap >= prev_gap);
    prev_gap = gap;
  }
}

TEST_CASE("alpha instance argument errors") {
  Rng rng(7);
  CHECK_THROWS_AS(make_alpha_instance(0, 1.0, NoiseModel::deterministic(), rng),
                  std::invalid_argument);
  CHECK_THROWS_AS(make_alpha_instance(4, 0.0, NoiseModel::deterministic(), rng),
                  std::invalid_argument);
  CHECK_NOTHROW(make_alpha_instance(1, 2.0, NoiseModel::deterministic(), rng));
}

TEST_CASE("alpha instance with N=1 is a single unit-mean arm") {
  const auto inst = make_alpha_instance_ordered(1, 3.5, NoiseModel::deterministic());
  CHECK(inst.means() == std::vector<double>{1.0});
}

TEST_CASE("n_eps counts strict-gap arms, maximizers at eps=0") {
  const std::vector<double> means{1.0, 0.75, 0.5, 0.25};
  CHECK(n_eps(means, 0.3) == 2);  // gaps 0 and 0.25
  CHECK(n_eps(means, 0.0) == 1);  // the best arm itself
  CHECK(n_eps({0.4, 0.4, 0.4}, 0.1) == 3);
  CHECK(n_eps({0.4, 0.4, 0.4}, 0.0) == 3);
}

TEST_CASE("alpha instance eps-best count matches the argmax rule") {
  // N=4, alpha=1, eps=0.3: arms with ((i-1)/N)^alpha < eps.
  const auto inst = make_alpha_instance_ordered(4, 1.0, NoiseModel::deterministic());
  CHECK(n_eps(inst.means(), 0.3) == 2);
}

TEST_CASE("caption means from counts") {
  std::vector<CaptionCountRow> rows{{"a", 1, 1, 2}, {"b", 4, 0, 0}};
  const auto means = caption_means_from_counts(rows);
  CHECK(means[0] == doctest::Approx(0.75));
  CHECK(means[1] == 0.0);

  rows.push_back({"bad", 0, 0, 0});
  CHECK_THROWS_WITH_AS(caption_means_from_counts(rows),
                       doctest::Contains("'bad'"), DataError);
  rows.back() = {"neg", -1, 1, 1};
  CHECK_THROWS_AS(caption_means_from_counts(rows), DataError);
}

TEST_CASE("caption CSV ingestion reports the mean range") {
  const char* path = "caption_test.csv";
  {
    std::ofstream out(path);
    out << "id,not_funny,somewhat_funny,funny\n"
        << "c1,1,1,2\n"
        << "c2,4,0,0\n"
        << "c3,1,3,0\n";
  }
  const auto rows = read_caption_counts_csv(path);
  REQUIRE(rows.size() == 3);
  const auto means = caption_means_from_counts(rows);
  const auto [lo, hi] = std::minmax_element(means.begin(), means.end());
  CHECK(*hi - *lo == doctest::Approx(0.75));
  std::remove(path);
}

TEST_CASE("deterministic rewards are exact") {
  const BanditInstance inst({0.42}, NoiseModel::deterministic());
  Rng rng(3);
  for (int i = 0; i < 5; ++i) CHECK(inst.sample_reward(0, rng) == 0.42);
  CHECK_THROWS_AS(inst.sample_reward(1, rng), std::invalid_argument);
}

TEST_CASE("empirical means concentrate for every noise model") {
  // 5 sigma / sqrt(n) envelope at n = 1e6.
  const int n = 1'000'000;
  struct Case {
    NoiseModel model;
    double mu;
    double sigma;
  };
  const Case cases[] = {
      {NoiseModel::gaussian(0.5), 0.37, 0.5},
      {NoiseModel::bernoulli(), 0.37, std::sqrt(0.37 * 0.63)},
      {NoiseModel::kumaraswamy(), 0.37, std::sqrt(0.37 * 0.63 * 0.63 / 1.63)},
      {NoiseModel::deterministic(), 0.37, 0.0},
  };
  int idx = 0;
  for (const auto& c : cases) {
    const BanditInstance inst({c.mu}, c.model);
    Rng rng(100 + idx++);
    double mean = 0.0;
    for (int i = 1; i <= n; ++i) mean += (inst.sample_reward(0, rng) - mean) / i;
    CHECK(std::fabs(mean - c.mu) < 5.0 * c.sigma / std::sqrt(static_cast<double>(n)) + 1e-15);
  }
}

TEST_CASE("kumaraswamy sampler matches its closed-form moments") {
  const int n = 1'000'000;
  for (double mu : {0.1, 0.3, 0.5, 0.9}) {
    const BanditInstance inst({mu}, NoiseModel::kumaraswamy());
    Rng rng(static_cast<std::uint64_t>(mu * 1000));
    double m1 = 0.0, m2 = 0.0, m4 = 0.0;
    for (int i = 1; i <= n; ++i) {
      const double x = inst.sample_reward(0, rng);
      m1 += (x - m1) / i;
      m2 += (x * x - m2) / i;
      m4 += (x * x * x * x - m4) / i;
    }
    const double var_true = mu * (1.0 - mu) * (1.0 - mu) / (2.0 - mu);
    const double var_emp = m2 - m1 * m1;
    const double se_mean = std::sqrt(var_true / n);
    const double se_var = std::sqrt(std::max(m4 - var_emp * var_emp, 0.0) / n);
    CHECK(std::fabs(m1 - mu) < 3.0 * se_mean);
    CHECK(std::fabs(var_emp - var_true) < 3.0 * se_var);
  }

  // mu = 0.5 gives shape a = 1: the sample is the uniform itself.
  const BanditInstance inst({0.5}, NoiseModel::kumaraswamy());
  Rng rng(5);
  Rng ref(5);
  for (int i = 0; i < 10; ++i) CHECK(inst.sample_reward(0, rng) == ref.uniform_pos());
}

TEST_CASE("noise model validity") {
  CHECK_THROWS_AS(BanditInstance({1.0, 0.5}, NoiseModel::bernoulli()), std::invalid_argument);
  CHECK_THROWS_AS(BanditInstance({0.5, 0.0}, NoiseModel::kumaraswamy()), std::invalid_argument);
  CHECK_THROWS_AS(BanditInstance({0.5}, NoiseModel::gaussian(-1.0)), std::invalid_argument);
  // The alpha family clamps its unit top mean for unit-interval models.
  Rng rng(11);
  CHECK_NOTHROW(make_alpha_instance(5, 1.0, NoiseModel::bernoulli(), rng));
}

TEST_CASE("presentation order is uniform over permutations") {
  const int draws = 10'000;
  Rng rng(2024);
  std::map<std::vector<int>, int> counts;
  for (int d = 0; d < draws; ++d) {
    const auto inst = make_alpha_instance(5, 1.0, NoiseModel::deterministic(), rng);
    ++counts[inst.presentation()];
  }
  CHECK(counts.size() == 120);
  const double p = 1.0 / 120.0;
  const double se = std::sqrt(p * (1.0 - p) / draws);
  for (const auto& [perm, count] : counts) {
    const double freq = static_cast<double>(count) / draws;
    CHECK(std::fabs(freq - p) < 5.0 * se);
  }
}

TEST_CASE("instance permutation maps positions to generator arms") {
  const BanditInstance inst({0.9, 0.5, 0.1}, NoiseModel::deterministic(), {2, 0, 1});
  CHECK(inst.mean_at_position(0) == 0.1);
  CHECK(inst.mean_at_position(1) == 0.9);
  CHECK(inst.arm_at_position(2) == 1);
  CHECK(inst.best_mean() == 0.9);
  CHECK(inst.best_gap() == doctest::Approx(0.4));
  CHECK_THROWS_AS(BanditInstance({0.1, 0.2}, NoiseModel::deterministic(), {0, 0}),
                  std::invalid_argument);
}
