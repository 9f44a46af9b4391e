#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "secdf/detector.hpp"

namespace secdf {

enum class Algorithm { Alg1, Alg2, Sgcf, Trimmed };

std::string to_string(Algorithm a);
Algorithm algorithm_from_string(const std::string& name);

struct InitialEstimate {
  enum class Mode { Ball, Box, Fixed };
  Mode mode = Mode::Ball;
  double radius = 0.0;  // ball mode; 0 means eta0
  Vector low, high;     // box mode
  Vector value;         // fixed mode
};

struct ScenarioSpec {
  std::string name = "attack-free";  // or fig1-static, fig4-switching, random-k, custom
  int k = 0;
  std::optional<int> budget;
  std::vector<ScheduleSegment> schedule;
  AttackStrategy strategy;
};

struct ExperimentConfig {
  LtiSystem system;
  Vector x0;
  InitialEstimate initial;
  SensorGraph graph = complete_graph(1);
  ScenarioSpec scenario;
  double beta = 5.0;
  int L = 4;
  std::optional<double> alpha_override;
  Algorithm algorithm = Algorithm::Alg1;
  int runs = 100;
  int horizon = 200;
  std::uint64_t seed = 1;
  int workers = 1;
  int detector_t0 = 1;
  bool check_invariants = true;
  bool keep_runs = false;
  std::string output_dir;
  bool traces = false;
  nlohmann::json source;  // the document this config was parsed from, if any
};

ExperimentConfig parse_config(const nlohmann::json& j);
ExperimentConfig load_config(const std::filesystem::path& path);
void validate(const ExperimentConfig& cfg);

// Reference setup: A = 1.02, 30 scalar sensors on the 30-node benchmark
// graph, fixed attacked set {3,12,13,15,23,28}, beta = 5, L = 4.
ExperimentConfig reference_config();
// Same plant with sensors 1 and 25 observation-free, used for the detection study.
ExperimentConfig reference_detection_config();

AttackScenario scenario_for_run(const ExperimentConfig& cfg, Rng& rng);

struct StepDetail {
  std::vector<double> gains;
  std::vector<double> innovations;
  std::vector<double> thresholds;
  std::vector<char> self_detected;
  std::vector<int> counts;
};

struct RunRecord {
  std::vector<std::vector<double>> errors;  // [t][i], t = 0..T
  std::vector<std::vector<int>> attacked;   // [t], t = 0..T
  std::vector<Vector> states;               // only with traces
  std::vector<std::vector<double>> observations;
  std::vector<StepDetail> detail;           // Algorithm 2 only, t = 1..T at index t
  std::vector<int> detected_final;          // union of detected sets at T
  int all_detected_at = -1;                 // first t with the union equal to the attacked set
};

struct MetricsTable {
  int sensors = 0;
  int horizon = 0;
  std::vector<double> eta;
  std::vector<double> eta_A;
  std::vector<double> eta_Ac;
  std::vector<std::vector<double>> eta_i;  // [t][i]
};

struct ExperimentResult {
  MetricsTable metrics;
  std::vector<RunRecord> runs;  // kept when cfg.keep_runs, traces or Algorithm 2 detail is needed
  nlohmann::json report;
};

RunRecord simulate_run(const ExperimentConfig& cfg, int run, bool keep_detail);
MetricsTable aggregate(const std::vector<RunRecord>& runs, int sensors, int horizon);
ExperimentResult run_experiment(const ExperimentConfig& cfg);

MetricsTable baseline_sgcf(ExperimentConfig cfg);
MetricsTable baseline_trimmed(ExperimentConfig cfg);

// Coarse LFRE surrogate: mean of self and neighbors after dropping one
// maximum and one minimum; nodes with at most two neighbors hold.
std::vector<Vector> trimmed_round(const std::vector<Vector>& estimates, const SensorGraph& g);

void write_metrics_csv(const MetricsTable& m, std::ostream& os);
void write_traces_csv(const std::vector<RunRecord>& runs, std::ostream& os);
void write_detect_csv(const std::vector<RunRecord>& runs, std::ostream& os);

struct ConvergenceReport {
  Certificate certificate;
  double final_max_error = 0.0;
  double decay_rate = 0.0;
  int horizon = 0;
  bool converged = false;
};

// Noise-free Algorithm 2 run: throws CertificateFalse when the certificate
// built from the attacked set is not Schur stable.
ConvergenceReport noise_free_convergence_test(ExperimentConfig cfg, double tol = 1e-6);

nlohmann::json analyze(const ExperimentConfig& cfg);

struct ReproduceOptions {
  int runs = 100;
  std::uint64_t seed = 1;
  int workers = 1;
};

// Writes one CSV per curve plus manifest.json into out; returns the manifest.
nlohmann::json reproduce(const std::string& figure, const std::filesystem::path& out,
                         const ReproduceOptions& opts = {});

}  // namespace secdf
