#pragma once

#include <optional>
#include <vector>

#include "secdf/graph.hpp"
#include "secdf/system.hpp"

namespace secdf {

struct FilterParams {
  double beta = 1.0;
  int L = 1;  // 0 is accepted for ablation runs
  double alpha = 0.0;
  bool alpha_overridden = false;
};

// alpha from the graph spectrum unless explicitly overridden.
FilterParams make_filter_params(const SensorGraph& g, double beta, int L,
                                std::optional<double> alpha_override = std::nullopt);
void validate(const FilterParams& p);

struct FilterBank {
  std::vector<Vector> estimates;
  std::vector<double> gains;
  std::vector<double> innovations;
  int time = 0;

  static FilterBank initial(int n_sensors, const Vector& xhat0);
  int sensors() const { return static_cast<int>(estimates.size()); }
};

enum class GainRule { Saturation, Unity };

double saturation_gain(double innovation, double beta);

// C_i A xhat, the sensor's one-step observation prediction.
double predicted_observation(const LtiSystem& sys, int i, const Vector& prior);

// Fills bank.gains / bank.innovations and returns the intermediate estimates.
std::vector<Vector> observation_update(FilterBank& bank, const LtiSystem& sys,
                                       const std::vector<double>& y, double beta,
                                       GainRule rule = GainRule::Saturation);

std::vector<Vector> consensus_round(const std::vector<Vector>& estimates, const SensorGraph& g,
                                    double alpha);

FilterBank filter_step(const FilterBank& bank, const LtiSystem& sys, const SensorGraph& g,
                       const FilterParams& params, const std::vector<double>& y,
                       GainRule rule = GainRule::Saturation);

Vector average(const std::vector<Vector>& estimates);
// sqrt of the summed squared deviations from the average estimate
double disagreement_norm(const std::vector<Vector>& estimates);

}  // namespace secdf
