#include "secdf/detector.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "secdf/error.hpp"

namespace secdf {

DetectorBank DetectorBank::initial(int n_sensors, double eta0) {
  DetectorBank b;
  b.detected.assign(n_sensors, std::vector<char>(n_sensors, 0));
  b.bar_rho.assign(n_sensors, eta0);
  b.thresholds.assign(n_sensors, std::numeric_limits<double>::infinity());
  return b;
}

int DetectorBank::count(int i) const {
  return static_cast<int>(std::count(detected[i].begin(), detected[i].end(), 1));
}

std::vector<int> DetectorBank::counts() const {
  std::vector<int> out;
  for (int i = 0; i < sensors(); ++i) out.push_back(count(i));
  return out;
}

std::vector<int> DetectorBank::detected_union() const {
  std::vector<int> out;
  for (int j = 0; j < sensors(); ++j)
    for (int i = 0; i < sensors(); ++i)
      if (detected[i][j]) {
        out.push_back(j);
        break;
      }
  return out;
}

double detector1_threshold(const BoundSequence& seq, int t0, int t) {
  const bool anchor_zero = t0 == 0 && seq.in_gamma(1);
  if (!anchor_zero && !seq.in_gamma(t0))
    throw Error(ErrorCode::NotInGamma, "t0 = " + std::to_string(t0) + " is not a non-increase instant");
  const auto& p = seq.params;
  return p.norm_A * realtime_bound_unchecked(seq, t0, t) + p.b_w + p.b_v;
}

double detector1_applied_threshold(const BoundSequence& seq, int t0, int t) {
  return detector1_threshold(seq, t0, t - 1);
}

double bar_rho_next(const BoundParams& params, double bar_rho, int detected_count, int t) {
  const double q_bar =
      std::max(0.0, params.q0() - detected_count * params.beta / static_cast<double>(params.N));
  return params.F(bar_rho, params.p(t)) * bar_rho + q_bar;
}

double detector2_threshold_value(const BoundParams& params, double bar_rho, int t) {
  return params.norm_A * (bar_rho + params.p(t)) + params.b_w + params.b_v;
}

double detector2_threshold(const DetectorBank& bank, int i, int t, const BoundParams& params) {
  if (bank.time != t)
    throw Error(ErrorCode::InvalidArgument, "detector bank is at index " + std::to_string(bank.time) +
                                                ", not " + std::to_string(t));
  return detector2_threshold_value(params, bank.bar_rho[i], t);
}

std::vector<double> detector2_threshold_series(const BoundParams& params,
                                               const std::vector<int>& d_series, int T) {
  std::vector<double> out;
  double r = params.eta0;
  for (int t = 0; t <= T; ++t) {
    out.push_back(detector2_threshold_value(params, r, t));
    const int d = t < static_cast<int>(d_series.size()) ? d_series[t] : d_series.back();
    r = bar_rho_next(params, r, d, t);
  }
  return out;
}

Alg2Step algorithm2_step(const FilterBank& fbank, const DetectorBank& dbank, const LtiSystem& sys,
                         const SensorGraph& g, const FilterParams& fparams,
                         const BoundParams& bparams, const std::vector<double>& y) {
  const int N = sys.sensors();
  if (fbank.sensors() != N || dbank.sensors() != N || static_cast<int>(y.size()) != N ||
      g.size() != N)
    throw Error(ErrorCode::DimensionMismatch, "sensor counts differ");
  if (dbank.time != fbank.time)
    throw Error(ErrorCode::InvalidArgument, "filter and detector banks are out of step");
  if (dbank.time == 0 && !dbank.detected_union().empty())
    throw Error(ErrorCode::InvalidArgument, "detections must start empty");

  const int prev = fbank.time;
  Alg2Step out{fbank, dbank, std::vector<Alg2Branch>(N)};
  const std::vector<int> d_prev = dbank.counts();
  std::vector<Vector> est(N);
  for (int i = 0; i < N; ++i) {
    Vector pred = sys.A * fbank.estimates[i];
    const double innov = y[i] - sys.C[i].dot(pred);
    const double threshold = detector2_threshold_value(bparams, dbank.bar_rho[i], prev);
    out.filter.innovations[i] = innov;
    out.detector.thresholds[i] = threshold;
    double k;
    if (dbank.self_detected(i)) {
      out.branches[i] = Alg2Branch::Isolated;
      k = 0.0;
    } else if (d_prev[i] == bparams.s) {
      out.branches[i] = Alg2Branch::FullTrust;
      k = 1.0;
    } else if (std::abs(innov) > threshold) {
      out.branches[i] = Alg2Branch::Detected;
      out.detector.detected[i][i] = 1;
      k = 0.0;
    } else {
      out.branches[i] = Alg2Branch::Saturated;
      k = saturation_gain(innov, fparams.beta);
    }
    out.filter.gains[i] = k;
    est[i] = k == 0.0 ? pred : Vector(pred + (k * innov) * sys.C[i].transpose());
  }

  for (int l = 0; l < fparams.L; ++l) {
    est = consensus_round(est, g, fparams.alpha);
    auto snapshot = out.detector.detected;
    for (int i = 0; i < N; ++i)
      for (int j : g.neighbors(i))
        for (int k = 0; k < N; ++k)
          if (snapshot[j][k]) out.detector.detected[i][k] = 1;
  }

  const auto all = out.detector.detected_union();
  if (static_cast<int>(all.size()) > bparams.s)
    throw Error(ErrorCode::BudgetExceeded, std::to_string(all.size()) +
                                               " sensors detected, more than the budget " +
                                               std::to_string(bparams.s));

  for (int i = 0; i < N; ++i)
    out.detector.bar_rho[i] = bar_rho_next(bparams, dbank.bar_rho[i], d_prev[i], prev);
  out.filter.estimates = std::move(est);
  out.filter.time = prev + 1;
  out.detector.time = prev + 1;
  return out;
}

WBound w_bound(const BoundSequence& seq, int d_at_T, int T, int extra_horizon) {
  const auto& p = seq.params;
  if (d_at_T < 0 || d_at_T > p.s)
    throw Error(ErrorCode::InvalidArgument, "detected count must lie in [0, s]");
  if (T < 0 || T > seq.horizon())
    throw Error(ErrorCode::InvalidArgument, "T beyond the computed bound sequence");
  const LimsupBound base = bound_limsup(seq);
  WBound w;
  w.d = d_at_T;
  w.T = T;
  w.horizon = T + extra_horizon;
  const double shift = d_at_T * p.beta / static_cast<double>(p.N);
  w.bar_rho.push_back(seq.rho[T]);
  double F_star = std::numeric_limits<double>::infinity();
  for (int t = T; t < T + extra_horizon; ++t) {
    const double r = w.bar_rho.back();
    const double next = p.F(r) * r + seq.q0 - shift;
    if (next <= r) F_star = std::min(F_star, p.F(next));
    w.bar_rho.push_back(next);
  }
  if (d_at_T == 0) {
    w.value = base.value;
    w.F_star = std::isfinite(F_star) ? F_star : 0.0;
    return w;
  }
  if (!std::isfinite(F_star))
    throw Error(ErrorCode::GammaBarEmpty,
                "shifted bound never decreases up to horizon " + std::to_string(w.horizon));
  if (F_star >= 1.0)
    throw Error(ErrorCode::GammaBarEmpty, "F_* >= 1 over the non-increase set");
  w.F_star = F_star;
  w.value = base.value - shift / (1.0 - F_star);
  return w;
}

Certificate certificate_from_matrix(const Eigen::Matrix2d& G) {
  Certificate c;
  c.G = G;
  c.spectral_radius = spectral_radius(G);
  c.schur_stable = c.spectral_radius < 1.0 - kTolSchur;
  return c;
}

Certificate convergence_certificate(const LtiSystem& sys, const SensorGraph& g,
                                    const FilterParams& params, const std::vector<int>& attacked,
                                    const std::vector<double>& gains_for_Ac) {
  const int N = sys.sensors();
  const auto n = sys.A.rows();
  if (g.size() != N) throw Error(ErrorCode::DimensionMismatch, "graph and system sensor counts differ");
  std::vector<char> is_attacked(N, 0);
  for (int i : attacked) {
    if (i < 0 || i >= N) throw Error(ErrorCode::InvalidArgument, "attacked index out of range");
    is_attacked[i] = 1;
  }
  const int s = static_cast<int>(std::count(is_attacked.begin(), is_attacked.end(), 1));
  std::vector<int> free_sensors;
  for (int i = 0; i < N; ++i)
    if (!is_attacked[i]) free_sensors.push_back(i);
  if (!gains_for_Ac.empty() && gains_for_Ac.size() != free_sensors.size())
    throw Error(ErrorCode::DimensionMismatch, "one gain per attack-free sensor is required");

  const double inv_n = 1.0 / static_cast<double>(N);
  Matrix sum = Matrix::Zero(n, n);
  // m_tilde is a block row, so its squared spectral norm is lambda_max of sum B_j B_j^T
  Matrix block_gram = Matrix::Zero(n, n);
  for (std::size_t k = 0; k < free_sensors.size(); ++k) {
    const int j = free_sensors[k];
    const double gain = gains_for_Ac.empty() ? 1.0 : gains_for_Ac[k];
    const Matrix ctc = sys.C[j].transpose() * sys.C[j];
    sum += ctc;
    const Matrix block = inv_n * gain * ctc * sys.A;
    block_gram += block * block.transpose();
  }
  const Matrix M_tilde = (Matrix::Identity(n, n) - inv_n * sum) * sys.A;
  const double gl = std::pow(spectral_params(g).gamma, params.L);
  const double normA = sys.norm_A;

  Eigen::Matrix2d G;
  G(0, 0) = 2.0 * normA * gl;
  G(0, 1) = normA * gl * std::sqrt(static_cast<double>(N - s));
  G(1, 0) = std::sqrt(std::max(0.0, max_eigenvalue(block_gram)));
  G(1, 1) = spectral_norm(M_tilde);
  Certificate c = certificate_from_matrix(G);
  c.m_tilde_norm = G(1, 0);
  c.M_tilde_norm = G(1, 1);
  return c;
}

}  // namespace secdf
