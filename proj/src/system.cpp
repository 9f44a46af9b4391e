#include "secdf/system.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "secdf/error.hpp"

namespace secdf {

NormalizedRows normalize(const std::vector<RowVector>& raw,
                         const std::vector<bool>& observation_free) {
  if (!observation_free.empty() && observation_free.size() != raw.size())
    throw Error(ErrorCode::DimensionMismatch, "observation_free flags do not match the rows");
  NormalizedRows out;
  for (std::size_t i = 0; i < raw.size(); ++i) {
    const bool free_flag = !observation_free.empty() && observation_free[i];
    const double norm = raw[i].norm();
    if (free_flag) {
      out.rows.push_back(RowVector::Zero(raw[i].size()));
      out.scale.push_back(1.0);
      continue;
    }
    if (norm == 0.0)
      throw Error(ErrorCode::ZeroRow, "sensor " + std::to_string(i + 1) +
                                          " has a zero observation row but is not observation-free");
    out.rows.push_back(raw[i] / norm);
    out.scale.push_back(norm);
  }
  return out;
}

LtiSystem make_system(const Matrix& A, const std::vector<RowVector>& raw_C, double b_w,
                      double b_v, double eta0, const std::vector<bool>& observation_free) {
  if (A.rows() != A.cols()) throw Error(ErrorCode::DimensionMismatch, "A must be square");
  if (raw_C.empty()) throw Error(ErrorCode::InvalidArgument, "at least one sensor is required");
  for (const auto& row : raw_C)
    if (row.size() != A.rows())
      throw Error(ErrorCode::DimensionMismatch, "observation row width differs from the state");
  if (!(b_w >= 0.0) || !(b_v >= 0.0) || !std::isfinite(b_w) || !std::isfinite(b_v))
    throw Error(ErrorCode::InvalidArgument, "noise bounds must be finite and nonnegative");
  if (!(eta0 > 0.0) || !std::isfinite(eta0))
    throw Error(ErrorCode::InvalidArgument, "eta0 must be finite and positive");
  NormalizedRows nr = normalize(raw_C, observation_free);
  LtiSystem sys;
  sys.A = A;
  sys.C = std::move(nr.rows);
  sys.b_w = b_w;
  sys.eta0 = eta0;
  double worst = 0.0;
  for (double scale : nr.scale) {
    sys.noise_bound.push_back(b_v / scale);
    worst = std::max(worst, b_v / scale);
  }
  sys.b_v = worst;
  sys.norm_A = spectral_norm(A);
  return sys;
}

void validate(const LtiSystem& sys) {
  if (sys.A.rows() != sys.A.cols() || sys.A.rows() == 0)
    throw Error(ErrorCode::DimensionMismatch, "A must be square and nonempty");
  if (sys.C.empty() || sys.noise_bound.size() != sys.C.size())
    throw Error(ErrorCode::DimensionMismatch, "per-sensor data sizes disagree");
  for (int i = 0; i < sys.sensors(); ++i) {
    if (sys.C[i].size() != sys.A.rows())
      throw Error(ErrorCode::DimensionMismatch, "observation row width differs from the state");
    const double norm = sys.C[i].norm();
    if (norm != 0.0 && std::abs(norm - 1.0) > kTolNorm)
      throw Error(ErrorCode::InvalidArgument, "observation row is not unit norm");
    if (sys.noise_bound[i] > sys.b_v + kTolNorm)
      throw Error(ErrorCode::InvalidArgument, "per-sensor noise bound exceeds b_v");
  }
  if (!(sys.b_w >= 0.0) || !(sys.b_v >= 0.0) || !(sys.eta0 > 0.0))
    throw Error(ErrorCode::InvalidArgument, "bounds must be nonnegative and eta0 positive");
}

PlantTrace simulate_plant(const LtiSystem& sys, const Vector& x0, int T, Rng& rng) {
  if (T < 1) throw Error(ErrorCode::InvalidArgument, "horizon must be at least 1");
  if (x0.size() != sys.A.rows()) throw Error(ErrorCode::DimensionMismatch, "x0 has the wrong size");
  const int n = sys.state_dim();
  const int N = sys.sensors();
  const double w_half = sys.b_w / std::sqrt(static_cast<double>(n));
  PlantTrace tr;
  tr.states.reserve(T + 1);
  tr.states.push_back(x0);
  tr.observations.assign(T + 1, {});
  tr.observation_noise.assign(T + 1, {});
  tr.process_noise.reserve(T);
  for (int t = 1; t <= T; ++t) {
    Vector w(n);
    for (int k = 0; k < n; ++k) w(k) = rng.uniform(-w_half, w_half);
    tr.states.push_back(sys.A * tr.states.back() + w);
    tr.process_noise.push_back(std::move(w));
    auto& y = tr.observations[t];
    auto& v = tr.observation_noise[t];
    y.resize(N);
    v.resize(N);
    for (int i = 0; i < N; ++i) {
      v[i] = rng.uniform(-sys.noise_bound[i], sys.noise_bound[i]);
      y[i] = sys.C[i].dot(tr.states[t]) + v[i];
    }
  }
  return tr;
}

PlantTrace simulate_plant(const LtiSystem& sys, const Vector& x0, int T, std::uint64_t seed) {
  Rng rng(seed);
  return simulate_plant(sys, x0, T, rng);
}

std::string to_string(AttackKind kind) {
  switch (kind) {
    case AttackKind::ReplayScale: return "replay-scale";
    case AttackKind::Stealth: return "stealth";
    case AttackKind::Bias: return "bias";
    case AttackKind::UniformRandom: return "uniform-random";
  }
  return "unknown";
}

AttackKind attack_kind_from_string(const std::string& name) {
  if (name == "replay-scale") return AttackKind::ReplayScale;
  if (name == "stealth") return AttackKind::Stealth;
  if (name == "bias") return AttackKind::Bias;
  if (name == "uniform-random") return AttackKind::UniformRandom;
  throw Error(ErrorCode::UnknownScenario, "unknown attack strategy '" + name + "'");
}

double attacked_observation(const AttackStrategy& strategy, int t, double clean,
                            std::optional<double> predicted, Rng& rng) {
  double a = 0.0;
  switch (strategy.kind) {
    case AttackKind::Stealth:
      if (!predicted)
        throw Error(ErrorCode::MissingFeedback, "stealth attack needs the sensor's prior estimate");
      // the injected signal cancels the attack-free innovation exactly
      return *predicted;
    case AttackKind::ReplayScale: a = strategy.kappa * clean; break;
    case AttackKind::Bias: a = strategy.bias; break;
    case AttackKind::UniformRandom: a = rng.uniform(-strategy.range, strategy.range); break;
  }
  if (t <= strategy.transient_steps) a += strategy.transient;
  return clean + a;
}

AttackScenario::AttackScenario(int budget, std::vector<ScheduleSegment> schedule,
                               AttackStrategy strategy)
    : budget_(budget), schedule_(std::move(schedule)), strategy_(strategy) {
  if (budget_ < 0) throw Error(ErrorCode::InvalidArgument, "attack budget must be nonnegative");
  std::sort(schedule_.begin(), schedule_.end(),
            [](const ScheduleSegment& a, const ScheduleSegment& b) { return a.first < b.first; });
  for (std::size_t k = 0; k < schedule_.size(); ++k) {
    auto& seg = schedule_[k];
    if (seg.first < 1 || seg.last < seg.first)
      throw Error(ErrorCode::InvalidArgument, "schedule segment has an empty or invalid range");
    if (k > 0 && seg.first <= schedule_[k - 1].last)
      throw Error(ErrorCode::InvalidArgument, "schedule segments overlap");
    std::sort(seg.sensors.begin(), seg.sensors.end());
    seg.sensors.erase(std::unique(seg.sensors.begin(), seg.sensors.end()), seg.sensors.end());
    if (static_cast<int>(seg.sensors.size()) > budget_)
      throw Error(ErrorCode::InvalidArgument,
                  "attacked set of size " + std::to_string(seg.sensors.size()) +
                      " exceeds the budget " + std::to_string(budget_));
    for (int i : seg.sensors)
      if (i < 0) throw Error(ErrorCode::InvalidArgument, "negative sensor index in schedule");
  }
}

AttackScenario AttackScenario::attack_free() { return AttackScenario(0, {}, {}); }

AttackScenario AttackScenario::fixed(int budget, std::vector<int> sensors, AttackStrategy strategy) {
  if (sensors.empty()) return AttackScenario(budget, {}, strategy);
  return AttackScenario(budget, {ScheduleSegment{1, INT_MAX, std::move(sensors)}}, strategy);
}

const std::vector<int>& AttackScenario::attacked_at(int t) const {
  static const std::vector<int> kNone;
  for (const auto& seg : schedule_)
    if (t >= seg.first && t <= seg.last) return seg.sensors;
  return kNone;
}

bool AttackScenario::is_attacked(int t, int i) const {
  const auto& set = attacked_at(t);
  return std::binary_search(set.begin(), set.end(), i);
}

std::vector<int> AttackScenario::ever_attacked() const {
  std::set<int> all;
  for (const auto& seg : schedule_) all.insert(seg.sensors.begin(), seg.sensors.end());
  return {all.begin(), all.end()};
}

int AttackScenario::max_attacked() const {
  std::size_t best = 0;
  for (const auto& seg : schedule_) best = std::max(best, seg.sensors.size());
  return static_cast<int>(best);
}

bool AttackScenario::time_invariant() const {
  if (schedule_.empty()) return true;
  if (schedule_.front().first != 1 || schedule_.back().last != INT_MAX) return false;
  for (std::size_t k = 1; k < schedule_.size(); ++k) {
    if (schedule_[k].first != schedule_[k - 1].last + 1) return false;
    if (schedule_[k].sensors != schedule_[0].sensors) return false;
  }
  return true;
}

void AttackScenario::validate(int n_sensors) const {
  for (const auto& seg : schedule_)
    for (int i : seg.sensors)
      if (i >= n_sensors)
        throw Error(ErrorCode::InvalidArgument,
                    "attacked sensor " + std::to_string(i + 1) + " is not in the network");
  if (budget_ >= n_sensors)
    throw Error(ErrorCode::InvalidArgument, "attack budget must be below the sensor count");
}

AttackScenario AttackScenario::with_budget(int budget) const {
  return AttackScenario(budget, schedule_, strategy_);
}

std::vector<std::vector<double>> apply_attack(const LtiSystem& sys, const PlantTrace& trace,
                                              const AttackScenario& scenario,
                                              const EstimateFeedback* feedback, Rng& rng) {
  scenario.validate(sys.sensors());
  const bool stealth = scenario.strategy().kind == AttackKind::Stealth;
  if (stealth && feedback == nullptr)
    throw Error(ErrorCode::MissingFeedback, "stealth attack needs per-sensor prior estimates");
  std::vector<std::vector<double>> y = trace.observations;
  for (int t = 1; t <= trace.horizon(); ++t) {
    for (int i : scenario.attacked_at(t)) {
      std::optional<double> predicted;
      if (stealth) {
        if (static_cast<int>(feedback->size()) <= t ||
            static_cast<int>((*feedback)[t].size()) <= i)
          throw Error(ErrorCode::MissingFeedback, "feedback does not cover the attacked step");
        predicted = sys.C[i].dot(sys.A * (*feedback)[t][i]);
      }
      y[t][i] = attacked_observation(scenario.strategy(), t, trace.observations[t][i], predicted, rng);
    }
  }
  return y;
}

namespace {

std::vector<int> zero_based(std::initializer_list<int> one_based) {
  std::vector<int> out;
  for (int i : one_based) out.push_back(i - 1);
  return out;
}

}  // namespace

AttackScenario fig1_static_scenario(AttackStrategy strategy) {
  return AttackScenario::fixed(6, zero_based({3, 12, 13, 15, 23, 28}), strategy);
}

AttackScenario fig4_switching_scenario(AttackStrategy strategy) {
  std::vector<ScheduleSegment> schedule = {
      {1, 50, zero_based({3, 12, 13, 15, 23, 28})},
      {51, 100, zero_based({1, 3, 10, 15, 19, 29})},
      {101, 150, zero_based({3, 6, 15, 21, 25, 26})},
      {151, 200, zero_based({3, 5, 9, 15, 20, 25})},
  };
  return AttackScenario(6, std::move(schedule), strategy);
}

AttackScenario random_k_scenario(int n_sensors, int k, AttackStrategy strategy, Rng& rng) {
  if (k < 0 || k >= n_sensors)
    throw Error(ErrorCode::InvalidArgument, "random-k needs 0 <= k < N");
  std::vector<int> pool(n_sensors);
  for (int i = 0; i < n_sensors; ++i) pool[i] = i;
  // partial Fisher-Yates
  for (int j = 0; j < k; ++j) {
    const int pick = j + static_cast<int>(rng.below(static_cast<std::uint64_t>(n_sensors - j)));
    std::swap(pool[j], pool[pick]);
  }
  pool.resize(k);
  return AttackScenario::fixed(k, std::move(pool), strategy);
}

AttackScenario named_scenario(const std::string& name, int n_sensors, int k,
                              AttackStrategy strategy, Rng& rng) {
  if (name == "fig1-static" || name == "fig4-switching") {
    if (n_sensors != 30)
      throw Error(ErrorCode::InvalidArgument, "scenario '" + name + "' is defined on 30 sensors");
    return name == "fig1-static" ? fig1_static_scenario(strategy) : fig4_switching_scenario(strategy);
  }
  if (name == "random-k") return random_k_scenario(n_sensors, k, strategy, rng);
  if (name == "attack-free") return AttackScenario::attack_free();
  throw Error(ErrorCode::UnknownScenario, "unknown scenario '" + name + "'");
}

}  // namespace secdf
