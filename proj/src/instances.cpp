#include "b3/instances.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>

namespace b3 {

BanditInstance::BanditInstance(std::vector<double> means, NoiseModel noise,
                               std::vector<int> presentation)
    : means_(std::move(means)), noise_(noise), presentation_(std::move(presentation)) {
  validate();
  best_mean_ = *std::max_element(means_.begin(), means_.end());
  min_mean_ = *std::min_element(means_.begin(), means_.end());
  double second = -std::numeric_limits<double>::infinity();
  bool best_seen = false;
  for (double m : means_) {
    if (!best_seen && m == best_mean_) {
      best_seen = true;
      continue;
    }
    second = std::max(second, m);
  }
  best_gap_ = means_.size() > 1 ? best_mean_ - second : 0.0;
}

namespace {
std::vector<int> identity_perm(std::size_t n) {
  std::vector<int> p(n);
  std::iota(p.begin(), p.end(), 0);
  return p;
}
}  // namespace

BanditInstance::BanditInstance(std::vector<double> means, NoiseModel noise)
    : BanditInstance(std::vector<double>(means), noise, identity_perm(means.size())) {}

void BanditInstance::validate() const {
  if (means_.empty()) throw std::invalid_argument("BanditInstance: no arms");
  if (presentation_.size() != means_.size())
    throw std::invalid_argument("BanditInstance: presentation size mismatch");
  std::vector<bool> seen(means_.size(), false);
  for (int a : presentation_) {
    if (a < 0 || a >= num_arms() || seen[static_cast<std::size_t>(a)])
      throw std::invalid_argument("BanditInstance: presentation is not a permutation");
    seen[static_cast<std::size_t>(a)] = true;
  }
  if (noise_.kind == NoiseKind::gaussian && noise_.sigma < 0.0)
    throw std::invalid_argument("BanditInstance: negative sigma");
  if (noise_.kind == NoiseKind::bernoulli || noise_.kind == NoiseKind::kumaraswamy) {
    for (double m : means_)
      if (!(m > 0.0 && m < 1.0))
        throw std::invalid_argument("BanditInstance: means must lie in (0,1) for this noise model");
  }
}

double BanditInstance::sample_reward(int pos, Rng& rng) const {
  if (pos < 0 || pos >= num_arms())
    throw std::invalid_argument("sample_reward: arm out of range");
  const double mu = mean_at_position(pos);
  switch (noise_.kind) {
    case NoiseKind::deterministic:
      return mu;
    case NoiseKind::gaussian:
      return noise_.sigma == 0.0 ? mu : mu + noise_.sigma * rng.normal();
    case NoiseKind::bernoulli:
      return rng.uniform() < mu ? 1.0 : 0.0;
    case NoiseKind::kumaraswamy:
      // Inverse CDF of Kumaraswamy(a, 1) with a = mu/(1-mu): U^(1/a).
      return std::pow(rng.uniform_pos(), (1.0 - mu) / mu);
  }
  throw std::logic_error("sample_reward: unreachable");
}

namespace {

std::vector<double> alpha_means(int num_arms, double alpha, NoiseKind kind, double mu1) {
  if (num_arms < 1) throw std::invalid_argument("make_alpha_instance: N must be >= 1");
  if (!(alpha > 0.0)) throw std::invalid_argument("make_alpha_instance: alpha must be > 0");
  const bool unit_interval = kind == NoiseKind::bernoulli || kind == NoiseKind::kumaraswamy;
  std::vector<double> means(static_cast<std::size_t>(num_arms));
  for (int i = 0; i < num_arms; ++i) {
    double m = mu1 - std::pow(static_cast<double>(i) / num_arms, alpha);
    if (unit_interval && m >= 1.0) m = 1.0 - 1e-9;
    means[static_cast<std::size_t>(i)] = m;
  }
  return means;
}

}  // namespace

BanditInstance make_alpha_instance(int num_arms, double alpha, NoiseModel noise,
                                   Rng& rng, double mu1) {
  std::vector<int> perm(static_cast<std::size_t>(num_arms));
  std::iota(perm.begin(), perm.end(), 0);
  rng.shuffle(perm);
  return BanditInstance(alpha_means(num_arms, alpha, noise.kind, mu1), noise, std::move(perm));
}

BanditInstance make_alpha_instance_ordered(int num_arms, double alpha,
                                           NoiseModel noise, double mu1) {
  return BanditInstance(alpha_means(num_arms, alpha, noise.kind, mu1), noise);
}

std::vector<double> caption_means_from_counts(const std::vector<CaptionCountRow>& rows) {
  std::vector<double> means;
  means.reserve(rows.size());
  for (const auto& r : rows) {
    if (r.not_funny < 0 || r.somewhat_funny < 0 || r.funny < 0)
      throw DataError("caption row '" + r.id + "' has a negative count");
    const std::int64_t total = r.not_funny + r.somewhat_funny + r.funny;
    if (total == 0) throw DataError("caption row '" + r.id + "' has zero total count");
    means.push_back(static_cast<double>(r.somewhat_funny + r.funny) /
                    static_cast<double>(total));
  }
  return means;
}

std::vector<CaptionCountRow> read_caption_counts_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open caption CSV: " + path);
  std::string line;
  if (!std::getline(in, line)) throw DataError("empty caption CSV: " + path);
  // Tolerate a UTF-8 BOM and trailing \r.
  if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "id,not_funny,somewhat_funny,funny")
    throw DataError("caption CSV header must be 'id,not_funny,somewhat_funny,funny'");

  std::vector<CaptionCountRow> rows;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::stringstream ss(line);
    CaptionCountRow row;
    std::string field;
    if (!std::getline(ss, row.id, ',')) throw DataError("caption CSV: bad row at line " + std::to_string(lineno));
    std::int64_t* targets[3] = {&row.not_funny, &row.somewhat_funny, &row.funny};
    for (auto* t : targets) {
      if (!std::getline(ss, field, ','))
        throw DataError("caption CSV: missing count in row '" + row.id + "'");
      try {
        *t = std::stoll(field);
      } catch (const std::exception&) {
        throw DataError("caption CSV: non-numeric count in row '" + row.id + "'");
      }
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

int n_eps(const std::vector<double>& means, double eps) {
  if (means.empty()) return 0;
  if (eps < 0.0) throw std::invalid_argument("n_eps: eps must be >= 0");
  const double best = *std::max_element(means.begin(), means.end());
  int count = 0;
  if (eps == 0.0) {
    for (double m : means)
      if (m == best) ++count;
    return count;
  }
  for (double m : means)
    if (best - m < eps) ++count;
  return count;
}

}  // namespace b3
