#include <algorithm>
#include <fstream>
#include <initializer_list>
#include <set>

#include "secdf/error.hpp"
#include "secdf/harness.hpp"

namespace secdf {

using nlohmann::json;

std::string to_string(Algorithm a) {
  switch (a) {
    case Algorithm::Alg1: return "alg1";
    case Algorithm::Alg2: return "alg2";
    case Algorithm::Sgcf: return "sgcf";
    case Algorithm::Trimmed: return "trimmed";
  }
  return "unknown";
}

Algorithm algorithm_from_string(const std::string& name) {
  if (name == "alg1") return Algorithm::Alg1;
  if (name == "alg2") return Algorithm::Alg2;
  if (name == "sgcf") return Algorithm::Sgcf;
  if (name == "trimmed") return Algorithm::Trimmed;
  throw Error(ErrorCode::ConfigError, "unknown algorithm '" + name + "'");
}

namespace {

void expect_keys(const json& obj, std::initializer_list<const char*> allowed, const std::string& where) {
  if (!obj.is_object()) throw Error(ErrorCode::ConfigError, where + " must be an object");
  std::set<std::string> ok(allowed.begin(), allowed.end());
  for (auto it = obj.begin(); it != obj.end(); ++it)
    if (!ok.count(it.key()))
      throw Error(ErrorCode::ConfigError, "unknown key '" + it.key() + "' in " + where);
}

Matrix matrix_from(const json& j, const std::string& where) {
  if (j.is_number()) return Matrix::Constant(1, 1, j.get<double>());
  if (!j.is_array() || j.empty()) throw Error(ErrorCode::ConfigError, where + " must be a number or matrix");
  const auto rows = static_cast<Eigen::Index>(j.size());
  const auto cols = static_cast<Eigen::Index>(j[0].is_array() ? j[0].size() : 1);
  Matrix m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    const json& row = j[r];
    if (row.is_number()) {
      if (cols != 1) throw Error(ErrorCode::ConfigError, where + " rows have different widths");
      m(r, 0) = row.get<double>();
      continue;
    }
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols)
      throw Error(ErrorCode::ConfigError, where + " rows have different widths");
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = row[c].get<double>();
  }
  return m;
}

Vector vector_from(const json& j, Eigen::Index n, const std::string& where) {
  if (j.is_number()) return Vector::Constant(n, j.get<double>());
  if (!j.is_array() || static_cast<Eigen::Index>(j.size()) != n)
    throw Error(ErrorCode::ConfigError, where + " must be a number or a vector of length " + std::to_string(n));
  Vector v(n);
  for (Eigen::Index k = 0; k < n; ++k) v(k) = j[k].get<double>();
  return v;
}

RowVector row_from(const json& j, Eigen::Index n, const std::string& where) {
  return vector_from(j, n, where).transpose();
}

AttackStrategy parse_strategy(const json& j) {
  expect_keys(j, {"kind", "kappa", "bias", "range", "transient", "transient_steps"}, "scenario.strategy");
  AttackStrategy s;
  if (j.contains("kind")) s.kind = attack_kind_from_string(j.at("kind").get<std::string>());
  s.kappa = j.value("kappa", s.kappa);
  s.bias = j.value("bias", s.bias);
  s.range = j.value("range", s.range);
  s.transient = j.value("transient", s.transient);
  s.transient_steps = j.value("transient_steps", s.transient_steps);
  return s;
}

ScenarioSpec parse_scenario(const json& j) {
  expect_keys(j, {"name", "k", "s", "schedule", "strategy"}, "scenario");
  ScenarioSpec spec;
  spec.name = j.value("name", std::string(j.contains("schedule") ? "custom" : "attack-free"));
  spec.k = j.value("k", 0);
  if (j.contains("s")) spec.budget = j.at("s").get<int>();
  if (j.contains("strategy")) spec.strategy = parse_strategy(j.at("strategy"));
  if (j.contains("schedule")) {
    if (spec.name != "custom")
      throw Error(ErrorCode::ConfigError, "an explicit schedule requires scenario name 'custom'");
    for (const auto& seg : j.at("schedule")) {
      expect_keys(seg, {"from", "to", "sensors"}, "scenario.schedule entry");
      ScheduleSegment s;
      s.first = seg.value("from", 1);
      s.last = seg.value("to", INT_MAX);
      for (int i : seg.at("sensors").get<std::vector<int>>()) s.sensors.push_back(i - 1);
      spec.schedule.push_back(std::move(s));
    }
  } else if (spec.name == "custom") {
    throw Error(ErrorCode::ConfigError, "scenario 'custom' needs a schedule");
  }
  static const std::set<std::string> known = {"attack-free", "fig1-static", "fig4-switching",
                                              "random-k", "custom"};
  if (!known.count(spec.name)) throw Error(ErrorCode::UnknownScenario, "unknown scenario '" + spec.name + "'");
  return spec;
}

InitialEstimate parse_initial(const json& j, Eigen::Index n) {
  expect_keys(j, {"mode", "radius", "low", "high", "value"}, "system.initial_estimate");
  InitialEstimate init;
  const std::string mode = j.value("mode", std::string("ball"));
  if (mode == "ball") {
    init.mode = InitialEstimate::Mode::Ball;
    init.radius = j.value("radius", 0.0);
  } else if (mode == "box") {
    init.mode = InitialEstimate::Mode::Box;
    if (!j.contains("low") || !j.contains("high"))
      throw Error(ErrorCode::ConfigError, "box initial estimate needs low and high");
    init.low = vector_from(j.at("low"), n, "initial_estimate.low");
    init.high = vector_from(j.at("high"), n, "initial_estimate.high");
  } else if (mode == "fixed") {
    init.mode = InitialEstimate::Mode::Fixed;
    if (!j.contains("value")) throw Error(ErrorCode::ConfigError, "fixed initial estimate needs value");
    init.value = vector_from(j.at("value"), n, "initial_estimate.value");
  } else {
    throw Error(ErrorCode::ConfigError, "unknown initial_estimate mode '" + mode + "'");
  }
  return init;
}

void parse_system(const json& j, ExperimentConfig& cfg) {
  expect_keys(j, {"A", "C", "sensors", "C_row", "observation_free", "b_w", "b_v", "eta0", "x0",
                  "initial_estimate"},
              "system");
  if (!j.contains("A")) throw Error(ErrorCode::ConfigError, "system.A is required");
  const Matrix A = matrix_from(j.at("A"), "system.A");
  const auto n = A.rows();
  std::vector<RowVector> rows;
  if (j.contains("C")) {
    if (j.contains("sensors") || j.contains("C_row"))
      throw Error(ErrorCode::ConfigError, "give either system.C or system.sensors with C_row");
    for (const auto& r : j.at("C")) rows.push_back(row_from(r, n, "system.C row"));
  } else {
    if (!j.contains("sensors")) throw Error(ErrorCode::ConfigError, "system.C or system.sensors is required");
    const int N = j.at("sensors").get<int>();
    if (N < 1) throw Error(ErrorCode::ConfigError, "system.sensors must be positive");
    const RowVector row = j.contains("C_row") ? row_from(j.at("C_row"), n, "system.C_row")
                                              : RowVector::Ones(n);
    rows.assign(N, row);
  }
  std::vector<bool> free_flags(rows.size(), false);
  if (j.contains("observation_free")) {
    for (int i : j.at("observation_free").get<std::vector<int>>()) {
      if (i < 1 || i > static_cast<int>(rows.size()))
        throw Error(ErrorCode::ConfigError, "observation_free index out of range");
      free_flags[i - 1] = true;
    }
  }
  cfg.system = make_system(A, rows, j.value("b_w", 0.0), j.value("b_v", 0.0), j.value("eta0", 1.0),
                           free_flags);
  cfg.x0 = j.contains("x0") ? vector_from(j.at("x0"), n, "system.x0") : Vector::Zero(n);
  if (j.contains("initial_estimate")) cfg.initial = parse_initial(j.at("initial_estimate"), n);
}

}  // namespace

ExperimentConfig parse_config(const json& j) {
  try {
    expect_keys(j, {"system", "graph", "scenario", "filter", "algorithm", "runs", "horizon", "seed",
                    "workers", "detector", "check_invariants", "output"},
                "config");
    ExperimentConfig cfg;
    cfg.source = j;
    if (!j.contains("system") || !j.contains("graph"))
      throw Error(ErrorCode::ConfigError, "config needs system and graph");
    parse_system(j.at("system"), cfg);
    const json& gj = j.at("graph");
    if (gj.is_string())
      cfg.graph = named_graph(gj.get<std::string>(), cfg.system.sensors());
    else if (gj.contains("named") && !gj.contains("n"))
      cfg.graph = named_graph(gj.at("named").get<std::string>(), cfg.system.sensors());
    else
      cfg.graph = graph_from_json(gj);
    if (j.contains("scenario")) cfg.scenario = parse_scenario(j.at("scenario"));
    if (j.contains("filter")) {
      const json& f = j.at("filter");
      expect_keys(f, {"beta", "L", "alpha_override"}, "filter");
      cfg.beta = f.value("beta", cfg.beta);
      cfg.L = f.value("L", cfg.L);
      if (f.contains("alpha_override") && !f.at("alpha_override").is_null())
        cfg.alpha_override = f.at("alpha_override").get<double>();
    }
    if (j.contains("algorithm")) cfg.algorithm = algorithm_from_string(j.at("algorithm").get<std::string>());
    cfg.runs = j.value("runs", cfg.runs);
    cfg.horizon = j.value("horizon", cfg.horizon);
    cfg.seed = j.value("seed", cfg.seed);
    cfg.workers = j.value("workers", cfg.workers);
    cfg.check_invariants = j.value("check_invariants", cfg.check_invariants);
    if (j.contains("detector")) {
      expect_keys(j.at("detector"), {"t0"}, "detector");
      cfg.detector_t0 = j.at("detector").value("t0", cfg.detector_t0);
    }
    if (j.contains("output")) {
      const json& o = j.at("output");
      expect_keys(o, {"dir", "traces"}, "output");
      cfg.output_dir = o.value("dir", std::string());
      cfg.traces = o.value("traces", false);
    }
    validate(cfg);
    return cfg;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ConfigError, e.what());
  }
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::ConfigError, "cannot open " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ConfigError, path.string() + ": " + e.what());
  }
  return parse_config(j);
}

void validate(const ExperimentConfig& cfg) {
  validate(cfg.system);
  if (cfg.graph.size() != cfg.system.sensors())
    throw Error(ErrorCode::ConfigError, "graph has " + std::to_string(cfg.graph.size()) +
                                            " sensors, system has " + std::to_string(cfg.system.sensors()));
  if (cfg.runs < 1) throw Error(ErrorCode::ConfigError, "runs must be at least 1");
  if (cfg.horizon < 1) throw Error(ErrorCode::ConfigError, "horizon must be at least 1");
  if (cfg.workers < 1) throw Error(ErrorCode::ConfigError, "workers must be at least 1");
  if (!(cfg.beta > 0.0)) throw Error(ErrorCode::ConfigError, "beta must be positive");
  if (cfg.L < 0) throw Error(ErrorCode::ConfigError, "L must be nonnegative");
  if (cfg.x0.size() != cfg.system.A.rows()) throw Error(ErrorCode::ConfigError, "x0 has the wrong size");
  if (cfg.detector_t0 < 0) throw Error(ErrorCode::ConfigError, "detector t0 must be nonnegative");
  if (cfg.algorithm == Algorithm::Trimmed && cfg.system.state_dim() != 1)
    throw Error(ErrorCode::NotScalar, "the trimmed baseline is defined for scalar systems only");
  const int N = cfg.system.sensors();
  const auto& sc = cfg.scenario;
  if (sc.name == "random-k" && (sc.k < 0 || sc.k >= N))
    throw Error(ErrorCode::ConfigError, "random-k needs 0 <= k < N");
  if ((sc.name == "fig1-static" || sc.name == "fig4-switching") && N != 30)
    throw Error(ErrorCode::ConfigError, "scenario '" + sc.name + "' needs 30 sensors");
  if (sc.budget && (*sc.budget < 0 || *sc.budget >= N))
    throw Error(ErrorCode::ConfigError, "attack budget must lie in [0, N)");
  for (const auto& seg : sc.schedule)
    for (int i : seg.sensors)
      if (i < 0 || i >= N) throw Error(ErrorCode::ConfigError, "scheduled sensor out of range");
  if (cfg.initial.mode == InitialEstimate::Mode::Box &&
      (cfg.initial.low.size() != cfg.x0.size() || (cfg.initial.high - cfg.initial.low).minCoeff() < 0.0))
    throw Error(ErrorCode::ConfigError, "box initial estimate needs low <= high");
}

ExperimentConfig reference_config() {
  ExperimentConfig cfg;
  const int N = 30;
  cfg.system = make_system(Matrix::Constant(1, 1, 1.02), std::vector<RowVector>(N, RowVector::Ones(1)),
                           0.01, 0.01, 50.0);
  cfg.x0 = Vector::Constant(1, 25.0);
  cfg.initial.mode = InitialEstimate::Mode::Box;
  cfg.initial.low = Vector::Constant(1, -25.0);
  cfg.initial.high = Vector::Constant(1, 25.0);
  cfg.graph = fig1_graph();
  cfg.scenario.name = "fig1-static";
  cfg.beta = 5.0;
  cfg.L = 4;
  cfg.runs = 100;
  cfg.horizon = 200;
  cfg.seed = 1;
  return cfg;
}

ExperimentConfig reference_detection_config() {
  ExperimentConfig cfg = reference_config();
  std::vector<bool> free_flags(30, false);
  free_flags[0] = true;
  free_flags[24] = true;
  cfg.system = make_system(Matrix::Constant(1, 1, 1.02), std::vector<RowVector>(30, RowVector::Ones(1)),
                           0.01, 0.01, 50.0, free_flags);
  cfg.L = 5;
  return cfg;
}

}  // namespace secdf
