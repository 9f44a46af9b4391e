#pragma once

#include <cstdint>
#include <vector>

#include "secdf/analysis.hpp"
#include "secdf/filter.hpp"

namespace secdf {

struct DetectorBank {
  // detected[i][j] != 0 when sensor i believes sensor j is attacked
  std::vector<std::vector<char>> detected;
  std::vector<double> bar_rho;     // per-sensor adaptive bound at index `time`
  std::vector<double> thresholds;  // thresholds applied in the last step
  int t0_anchor = 1;
  int time = 0;

  static DetectorBank initial(int n_sensors, double eta0);
  int sensors() const { return static_cast<int>(detected.size()); }
  int count(int i) const;
  std::vector<int> counts() const;
  bool self_detected(int i) const { return detected[i][i] != 0; }
  std::vector<int> detected_union() const;
};

// phi(t) = ||A|| [R(F(rho_t0), t) + p(t)] + b_w + b_v. Accepts t >= t0, and the
// t0 = 0 anchor when 1 is a non-increase instant.
double detector1_threshold(const BoundSequence& seq, int t0, int t);

// The innovation observed at step t depends on the error at t - 1, so the
// detectors compare it with the threshold formula evaluated at t - 1.
double detector1_applied_threshold(const BoundSequence& seq, int t0, int t);

// Advances one sensor's adaptive bound from index t to t + 1 given d_i(t).
double bar_rho_next(const BoundParams& params, double bar_rho, int detected_count, int t);
double detector2_threshold_value(const BoundParams& params, double bar_rho, int t);
// Requires bank.time == t.
double detector2_threshold(const DetectorBank& bank, int i, int t, const BoundParams& params);
// Thresholds for indices 0..T of a sensor whose count follows d_series[t].
std::vector<double> detector2_threshold_series(const BoundParams& params,
                                               const std::vector<int>& d_series, int T);

enum class Alg2Branch : std::uint8_t { Isolated, FullTrust, Detected, Saturated };

struct Alg2Step {
  FilterBank filter;
  DetectorBank detector;
  std::vector<Alg2Branch> branches;
};

Alg2Step algorithm2_step(const FilterBank& fbank, const DetectorBank& dbank, const LtiSystem& sys,
                         const SensorGraph& g, const FilterParams& fparams,
                         const BoundParams& bparams, const std::vector<double>& y);

struct WBound {
  double value = 0.0;
  double F_star = 0.0;
  int d = 0;
  int T = 0;
  int horizon = 0;
  std::vector<double> bar_rho;  // from index T onward
};

WBound w_bound(const BoundSequence& seq, int d_at_T, int T, int extra_horizon = 2000);

struct Certificate {
  Eigen::Matrix2d G = Eigen::Matrix2d::Zero();
  bool schur_stable = false;
  double spectral_radius = 0.0;
  double m_tilde_norm = 0.0;
  double M_tilde_norm = 0.0;
};

Certificate certificate_from_matrix(const Eigen::Matrix2d& G);

// gains_for_Ac defaults to 1 for every attack-free sensor.
Certificate convergence_certificate(const LtiSystem& sys, const SensorGraph& g,
                                    const FilterParams& params, const std::vector<int>& attacked,
                                    const std::vector<double>& gains_for_Ac = {});

}  // namespace secdf
