#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "secdf/graph.hpp"
#include "secdf/system.hpp"

namespace secdf {

struct EnumerationOptions {
  std::uint64_t cap = 2'000'000;
  // closed forms for scalar systems; tests switch this off to brute force
  bool allow_fast_path = true;
};

// binomial(n, k), saturating at UINT64_MAX
std::uint64_t binomial(int n, int k);

// Calls visit(removed) for every sorted k-subset of {0..n-1}.
void for_each_subset(int n, int k, const EnumerationOptions& opts,
                     const std::function<void(const std::vector<int>&)>& visit);

// Worst-case residual observability over all (N - s)-subsets of rows.
double lambda0(const std::vector<RowVector>& C, int s, const EnumerationOptions& opts = {});

struct BoundParams {
  double beta = 0.0;
  int L = 1;
  double eta0 = 1.0;
  double lambda0 = 0.0;
  double norm_A = 1.0;
  double b_w = 0.0;
  double b_v = 0.0;
  int s = 0;
  int N = 1;
  double gamma = 0.0;

  double consensus_factor() const;  // gamma^L
  double p0() const;
  double q0() const;
  // k* and F evaluated with an explicit disagreement level (p0 or p(t))
  double k_star(double rho, double disagreement) const;
  double k_star(double rho) const { return k_star(rho, p0()); }
  double F(double rho, double disagreement) const;
  double F(double rho) const { return F(rho, p0()); }
  double p(int t) const;
  // throws DivergentGeometry when norm_A * gamma^L >= 1
  void validate() const;
};

BoundParams make_bound_params(const LtiSystem& sys, const SensorGraph& g, double beta, int L,
                              int s, const EnumerationOptions& opts = {});

double p_of_t(const BoundParams& params, int t);

struct BoundSequence {
  BoundParams params;
  std::vector<double> rho;      // rho_0..rho_T
  std::vector<int> gamma_set;   // ascending
  double q0 = 0.0;
  double p0 = 0.0;

  int horizon() const { return static_cast<int>(rho.size()) - 1; }
  bool in_gamma(int t) const;
};

BoundSequence rho_sequence(const BoundParams& params, int T);

struct Condition9 {
  double slack = 0.0;
  bool holds = false;
};
Condition9 check_condition9(const BoundParams& params);

// x^k rho + q0 (1 - x^k) / (1 - x), with the x = 1 limit rho + q0 k
double geometric_envelope(double x, double rho_t0, double q0, int steps);

// Real-time bound without checking that t0 is a non-increase instant.
double realtime_bound_unchecked(const BoundSequence& seq, int t0, int t);
double bound_realtime(const BoundSequence& seq, int t0, int t);
double bound_uniform(const BoundSequence& seq, int t0);

struct LimsupBound {
  double value = 0.0;
  int argmin_t0 = 0;
  int horizon = 0;
  bool settled = false;
};
LimsupBound bound_limsup(const BoundSequence& seq);

struct Lemma1Result {
  std::vector<double> x;
  std::vector<int> gamma_set;
  bool bounds_emitted = false;
  double inf_gamma = 0.0;
  bool claim1 = true;  // sup over t >= t0 never exceeds x_{t0}
  bool claim2 = true;  // geometric envelope from every t0
  bool claim3 = true;  // tail below the infimum over the non-increase set
  int violations = 0;
};

// Iterates x_{t+1} = F(x_t) x_t + q0 and checks the three claims against the
// computed sequence. F must be nondecreasing with values in [0, F_upper].
Lemma1Result lemma1_iterate(const std::function<double(double)>& F, double q0, double x0, int T,
                            double F_upper = 1.0, double tol = 1e-12);

double varpi(const Matrix& A, const std::vector<RowVector>& C, int s,
             const EnumerationOptions& opts = {});

struct UnsaturatedBound {
  bool condition10 = false;
  double varpi = 0.0;
  double threshold = 0.0;  // (beta - b_w - b_v) / ||A||
  std::optional<double> limsup;
  bool varpi_below_F = false;
  bool tail_claim = false;
};
UnsaturatedBound bound_unsaturated(const BoundSequence& seq, int t0, double varpi_value);
// R(varpi, t) + p(t); only meaningful when the unsaturation condition holds.
double unsaturated_realtime(const BoundSequence& seq, int t0, double varpi_value, int t);

struct ResiliencePoint {
  int s = 0;
  double lambda0 = 0.0;
  double q_bar = 0.0;
  double F_eta0 = 0.0;
  double f = 0.0;
  bool condition9 = false;
};
struct ResilienceCurve {
  std::vector<ResiliencePoint> points;
  // checked over points where the contraction condition holds
  bool monotone = true;
};
ResilienceCurve resilience_curve(const LtiSystem& sys, const SensorGraph& g, double beta, int L,
                                 const std::vector<int>& s_range,
                                 const EnumerationOptions& opts = {});

bool sparse_observable(const Matrix& A, const std::vector<RowVector>& C, int s,
                       const EnumerationOptions& opts = {});
bool one_step_sparse_observable(const std::vector<RowVector>& C, int s,
                                const EnumerationOptions& opts = {});

struct SparseObservabilityReport {
  int s = 0;
  double lambda0 = 0.0;
  bool s_sparse = false;
  bool one_step_s = false;
  std::optional<bool> one_step_2s;  // absent when 2s >= N
  bool implication_holds = true;    // lambda0 > s implies one-step 2s
};
SparseObservabilityReport sparse_observability_report(const Matrix& A,
                                                      const std::vector<RowVector>& C, int s,
                                                      const EnumerationOptions& opts = {});

struct FeasibilityWitness {
  double beta = 0.0;
  double eta0 = 0.0;
  int L = 1;
};

struct FeasibilityReport {
  double lambda0 = 0.0;
  bool condition_lambda0_gt_s = false;
  double epsilon = 0.0;
  bool norm_in_window = false;
  std::optional<FeasibilityWitness> found_params;
  bool condition9_holds = false;
  double slack = 0.0;
  int eta0_doublings = 0;
  std::string reason;
};

struct SearchOptions {
  int max_doublings = 60;
  int max_extra_L = 5000;
  EnumerationOptions enumeration = {};
};

FeasibilityReport search_feasible_params(const LtiSystem& sys, const SensorGraph& g, int s,
                                         const SearchOptions& opts = {});

enum class BetaObjective { Thm1, Thm3 };

struct BetaCandidate {
  double beta = 0.0;
  bool feasible = false;
  double objective = 0.0;
  std::string reason;
};

struct BetaSearchResult {
  std::optional<double> best_beta;
  double best_objective = 0.0;
  std::vector<BetaCandidate> candidates;
};

// base supplies every parameter except beta; varpi_value is used by Thm3.
BetaSearchResult beta_grid_search(const BoundParams& base, BetaObjective objective,
                                  const std::vector<double>& grid, double varpi_value = 0.0,
                                  int horizon = 2000);

}  // namespace secdf
