#include "secdf/filter.hpp"

#include <cmath>
#include <iostream>

#include "secdf/error.hpp"

namespace secdf {

FilterParams make_filter_params(const SensorGraph& g, double beta, int L,
                                std::optional<double> alpha_override) {
  FilterParams p;
  p.beta = beta;
  p.L = L;
  if (alpha_override) {
    p.alpha = *alpha_override;
    p.alpha_overridden = true;
    const double graph_alpha = spectral_params(g).alpha;
    if (std::abs(graph_alpha - p.alpha) > 1e-12)
      std::cerr << "warning: consensus step " << p.alpha << " differs from the graph optimum "
                << graph_alpha << "\n";
  } else {
    p.alpha = spectral_params(g).alpha;
  }
  validate(p);
  return p;
}

void validate(const FilterParams& p) {
  if (!(p.beta > 0.0)) throw Error(ErrorCode::InvalidArgument, "beta must be positive");
  if (p.L < 0) throw Error(ErrorCode::InvalidArgument, "L must be nonnegative");
  if (!(p.alpha > 0.0)) throw Error(ErrorCode::InvalidArgument, "alpha must be positive");
}

FilterBank FilterBank::initial(int n_sensors, const Vector& xhat0) {
  FilterBank b;
  b.estimates.assign(n_sensors, xhat0);
  b.gains.assign(n_sensors, 1.0);
  b.innovations.assign(n_sensors, 0.0);
  return b;
}

double saturation_gain(double innovation, double beta) {
  if (!(beta > 0.0)) throw Error(ErrorCode::InvalidArgument, "beta must be positive");
  const double mag = std::abs(innovation);
  return mag <= beta ? 1.0 : beta / mag;
}

double predicted_observation(const LtiSystem& sys, int i, const Vector& prior) {
  return sys.C[i].dot(sys.A * prior);
}

std::vector<Vector> observation_update(FilterBank& bank, const LtiSystem& sys,
                                       const std::vector<double>& y, double beta, GainRule rule) {
  const int N = bank.sensors();
  if (N != sys.sensors() || static_cast<int>(y.size()) != N)
    throw Error(ErrorCode::DimensionMismatch, "sensor counts of bank, system and y differ");
  std::vector<Vector> out(N);
  bank.gains.resize(N);
  bank.innovations.resize(N);
  for (int i = 0; i < N; ++i) {
    if (bank.estimates[i].size() != sys.A.rows())
      throw Error(ErrorCode::DimensionMismatch, "estimate dimension differs from the state");
    Vector pred = sys.A * bank.estimates[i];
    const double innov = y[i] - sys.C[i].dot(pred);
    const double k = rule == GainRule::Unity ? 1.0 : saturation_gain(innov, beta);
    bank.innovations[i] = innov;
    bank.gains[i] = k;
    out[i] = pred + (k * innov) * sys.C[i].transpose();
  }
  return out;
}

std::vector<Vector> consensus_round(const std::vector<Vector>& estimates, const SensorGraph& g,
                                    double alpha) {
  if (static_cast<int>(estimates.size()) != g.size())
    throw Error(ErrorCode::DimensionMismatch, "estimate count differs from the graph size");
  std::vector<Vector> next = estimates;
  for (auto [a, b] : g.edges()) {
    const Vector diff = estimates[a] - estimates[b];
    next[a] -= alpha * diff;
    next[b] += alpha * diff;
  }
  return next;
}

FilterBank filter_step(const FilterBank& bank, const LtiSystem& sys, const SensorGraph& g,
                       const FilterParams& params, const std::vector<double>& y, GainRule rule) {
  FilterBank next = bank;
  std::vector<Vector> est = observation_update(next, sys, y, params.beta, rule);
  for (int l = 0; l < params.L; ++l) est = consensus_round(est, g, params.alpha);
  next.estimates = std::move(est);
  next.time = bank.time + 1;
  return next;
}

Vector average(const std::vector<Vector>& estimates) {
  Vector sum = Vector::Zero(estimates.front().size());
  for (const auto& e : estimates) sum += e;
  return sum / static_cast<double>(estimates.size());
}

double disagreement_norm(const std::vector<Vector>& estimates) {
  const Vector mean = average(estimates);
  double sq = 0.0;
  for (const auto& e : estimates) sq += (e - mean).squaredNorm();
  return std::sqrt(sq);
}

}  // namespace secdf
