#pragma once

#include <climits>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "secdf/linalg.hpp"
#include "secdf/rng.hpp"

namespace secdf {

struct LtiSystem {
  Matrix A;
  // Unit-norm observation rows; observation-free sensors keep a zero row.
  std::vector<RowVector> C;
  // Per-sensor observation-noise bound after the row was normalized.
  std::vector<double> noise_bound;
  double b_w = 0.0;
  double b_v = 0.0;
  double eta0 = 1.0;
  double norm_A = 0.0;

  int state_dim() const { return static_cast<int>(A.rows()); }
  int sensors() const { return static_cast<int>(C.size()); }
  bool observation_free(int i) const { return C[i].squaredNorm() == 0.0; }
};

struct NormalizedRows {
  std::vector<RowVector> rows;
  std::vector<double> scale;  // original norms, 1 for observation-free rows
};

NormalizedRows normalize(const std::vector<RowVector>& raw,
                         const std::vector<bool>& observation_free = {});

LtiSystem make_system(const Matrix& A, const std::vector<RowVector>& raw_C, double b_w,
                      double b_v, double eta0, const std::vector<bool>& observation_free = {});

// Throws on a malformed system (dimensions, non-unit rows, bad bounds).
void validate(const LtiSystem& sys);

struct PlantTrace {
  std::vector<Vector> states;                           // x(0..T)
  std::vector<std::vector<double>> observations;        // [t][i]; t = 0 is empty
  std::vector<Vector> process_noise;                    // w(0..T-1)
  std::vector<std::vector<double>> observation_noise;   // [t][i]; t = 0 is empty
  int horizon() const { return static_cast<int>(states.size()) - 1; }
};

PlantTrace simulate_plant(const LtiSystem& sys, const Vector& x0, int T, Rng& rng);
PlantTrace simulate_plant(const LtiSystem& sys, const Vector& x0, int T, std::uint64_t seed);

enum class AttackKind { ReplayScale, Stealth, Bias, UniformRandom };

struct AttackStrategy {
  AttackKind kind = AttackKind::ReplayScale;
  double kappa = 2.0;
  double bias = 0.0;
  double range = 0.0;
  // Extra offset added for t <= transient_steps (not used by stealth).
  double transient = 0.0;
  int transient_steps = 0;
};

std::string to_string(AttackKind kind);
AttackKind attack_kind_from_string(const std::string& name);

// Observation reported by an attacked sensor. `predicted` is C_i A xhat_i(t-1),
// required by the stealth rule.
double attacked_observation(const AttackStrategy& strategy, int t, double clean,
                            std::optional<double> predicted, Rng& rng);

struct ScheduleSegment {
  int first = 1;
  int last = INT_MAX;
  std::vector<int> sensors;  // 0-based, sorted
};

class AttackScenario {
 public:
  AttackScenario() = default;
  AttackScenario(int budget, std::vector<ScheduleSegment> schedule, AttackStrategy strategy);

  static AttackScenario attack_free();
  static AttackScenario fixed(int budget, std::vector<int> sensors, AttackStrategy strategy);

  int budget() const { return budget_; }
  const AttackStrategy& strategy() const { return strategy_; }
  const std::vector<ScheduleSegment>& schedule() const { return schedule_; }
  const std::vector<int>& attacked_at(int t) const;
  bool is_attacked(int t, int i) const;
  std::vector<int> ever_attacked() const;
  int max_attacked() const;
  // Same attacked set at every t >= 1.
  bool time_invariant() const;
  void validate(int n_sensors) const;
  AttackScenario with_budget(int budget) const;

 private:
  int budget_ = 0;
  std::vector<ScheduleSegment> schedule_;
  AttackStrategy strategy_;
};

// Per-sensor prior estimates xhat_i(t-1), indexed [t][i] for t = 1..T.
using EstimateFeedback = std::vector<std::vector<Vector>>;

std::vector<std::vector<double>> apply_attack(const LtiSystem& sys, const PlantTrace& trace,
                                              const AttackScenario& scenario,
                                              const EstimateFeedback* feedback, Rng& rng);

AttackScenario fig1_static_scenario(AttackStrategy strategy = {});
AttackScenario fig4_switching_scenario(AttackStrategy strategy = {});
AttackScenario random_k_scenario(int n_sensors, int k, AttackStrategy strategy, Rng& rng);
// "fig1-static", "fig4-switching", "random-k" (k used only by the latter).
AttackScenario named_scenario(const std::string& name, int n_sensors, int k,
                              AttackStrategy strategy, Rng& rng);

}  // namespace secdf
