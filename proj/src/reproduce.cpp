#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>

#include "secdf/error.hpp"
#include "secdf/harness.hpp"

namespace secdf {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

constexpr int kSchemaVersion = 1;

json metrics_columns(int sensors) {
  json cols = {"t", "eta", "eta_A", "eta_Ac"};
  for (int i = 1; i <= sensors; ++i) cols.push_back("eta_i_" + std::to_string(i));
  return cols;
}

void write_file(const fs::path& path, const MetricsTable& m) {
  std::ofstream os(path);
  if (!os) throw Error(ErrorCode::InvalidArgument, "cannot write " + path.string());
  write_metrics_csv(m, os);
}

ExperimentConfig base(const ReproduceOptions& opts, bool detection) {
  ExperimentConfig cfg = detection ? reference_detection_config() : reference_config();
  cfg.runs = opts.runs;
  cfg.seed = opts.seed;
  cfg.workers = opts.workers;
  return cfg;
}

struct Bundle {
  fs::path dir;
  json curves = json::array();

  void add(const std::string& file, const json& params, const MetricsTable& m) {
    write_file(dir / file, m);
    json c = params;
    c["file"] = file;
    c["eta_T"] = m.eta.back();
    curves.push_back(c);
  }
};

// Panels (a), (b), (c) of the parameter study on one attack scenario.
void parameter_study(Bundle& b, const ReproduceOptions& opts, const std::string& scenario) {
  ExperimentConfig cfg = base(opts, false);
  cfg.scenario.name = scenario;
  cfg.check_invariants = false;

  cfg.beta = 3.0;
  cfg.L = 1;
  b.add("a_beta3_L1.csv", {{"panel", "a"}, {"beta", 3.0}, {"L", 1}}, run_experiment(cfg).metrics);

  for (int L = 0; L <= 5; ++L) {
    cfg.beta = 3.0;
    cfg.L = L;
    b.add("b_L" + std::to_string(L) + ".csv", {{"panel", "b"}, {"beta", 3.0}, {"L", L}},
          run_experiment(cfg).metrics);
  }
  const double betas[] = {0.1, 5.0, 2000.0};
  const char* names[] = {"0.1", "5", "2000"};
  for (int k = 0; k < 3; ++k) {
    cfg.beta = betas[k];
    cfg.L = 4;
    b.add(std::string("c_beta") + names[k] + ".csv", {{"panel", "c"}, {"beta", betas[k]}, {"L", 4}},
          run_experiment(cfg).metrics);
  }
}

void comparison(Bundle& b, const ReproduceOptions& opts) {
  ExperimentConfig cfg = base(opts, true);
  cfg.beta = 5.0;
  cfg.L = 5;
  cfg.check_invariants = false;
  for (Algorithm a : {Algorithm::Alg1, Algorithm::Alg2, Algorithm::Sgcf, Algorithm::Trimmed}) {
    cfg.algorithm = a;
    b.add(to_string(a) + ".csv", {{"algorithm", to_string(a)}, {"beta", 5.0}, {"L", 5}},
          run_experiment(cfg).metrics);
  }
}

json detection_timeline(Bundle& b, const ReproduceOptions& opts) {
  ExperimentConfig cfg = base(opts, true);
  cfg.beta = 5.0;
  cfg.L = 5;
  cfg.algorithm = Algorithm::Alg2;
  cfg.keep_runs = true;
  cfg.check_invariants = false;
  const ExperimentResult res = run_experiment(cfg);
  b.add("alg2_metrics.csv", {{"algorithm", "alg2"}, {"beta", 5.0}, {"L", 5}}, res.metrics);

  const int T = cfg.horizon;
  const int N = cfg.system.sensors();
  std::ofstream os(b.dir / "detection.csv");
  os << "t,mean_detected_union,mean_d,fraction_all_detected\n";
  int min_final = N;
  for (int t = 1; t <= T; ++t) {
    double uni = 0.0, mean_d = 0.0, all = 0.0;
    for (const auto& r : res.runs) {
      const auto& counts = r.detail[t].counts;
      double sum = 0.0;
      for (int c : counts) sum += c;
      mean_d += sum / N;
      if (r.all_detected_at > 0 && r.all_detected_at <= t) all += 1.0;
      if (t == T) {
        uni += static_cast<double>(r.detected_final.size());
        for (int c : counts) min_final = std::min(min_final, c);
      }
    }
    const double R = static_cast<double>(res.runs.size());
    os << t << ',' << (t == T ? uni / R : std::nan("")) << ',' << mean_d / R << ',' << all / R << "\n";
  }
  json w;
  const BoundParams bp = make_bound_params(cfg.system, cfg.graph, cfg.beta, cfg.L, 6);
  const BoundSequence seq = rho_sequence(bp, T);
  w["d_at_T"] = min_final;
  try {
    const WBound wb = w_bound(seq, min_final, T);
    w["value"] = wb.value;
    w["F_star"] = wb.F_star;
  } catch (const Error& e) {
    w["value"] = nullptr;
    w["reason"] = e.what();
  }
  b.curves.push_back({{"file", "detection.csv"},
                      {"columns", {"t", "mean_detected_union", "mean_d", "fraction_all_detected"}}});
  return w;
}

void resilience(Bundle& b, const ReproduceOptions& opts) {
  ExperimentConfig cfg = base(opts, false);
  cfg.beta = 5.0;
  cfg.L = 4;
  cfg.check_invariants = false;
  for (int k = 0; k <= 16; ++k) {
    cfg.scenario.name = k == 0 ? "attack-free" : "random-k";
    cfg.scenario.k = k;
    b.add("attacked_" + std::to_string(k) + ".csv", {{"attacked", k}, {"beta", 5.0}, {"L", 4}},
          run_experiment(cfg).metrics);
  }
}

}  // namespace

json reproduce(const std::string& figure, const fs::path& out, const ReproduceOptions& opts) {
  static const std::set<std::string> known = {"fig3", "fig5", "fig6", "fig7", "resilience"};
  if (!known.count(figure)) throw Error(ErrorCode::UnknownFigure, "unknown figure '" + figure + "'");
  fs::create_directories(out);
  Bundle b{out};
  json manifest;
  manifest["schema_version"] = kSchemaVersion;
  manifest["figure"] = figure;
  manifest["runs"] = opts.runs;
  manifest["seed"] = opts.seed;
  manifest["horizon"] = 200;
  if (figure == "fig3") {
    parameter_study(b, opts, "fig4-switching");
    manifest["scenario"] = "fig4-switching";
    manifest["axes"] = {{"a", "t"}, {"b", "L in 0..5"}, {"c", "beta in {0.1, 5, 2000}"}};
  } else if (figure == "fig5") {
    parameter_study(b, opts, "fig1-static");
    manifest["scenario"] = "fig1-static";
    manifest["axes"] = {{"a", "t"}, {"b", "L in 0..5"}, {"c", "beta in {0.1, 5, 2000}"}};
  } else if (figure == "fig6") {
    comparison(b, opts);
    manifest["scenario"] = "fig1-static";
    manifest["axes"] = {{"curve", "algorithm"}};
  } else if (figure == "fig7") {
    manifest["W_T"] = detection_timeline(b, opts);
    manifest["scenario"] = "fig1-static";
    manifest["axes"] = {{"x", "t"}};
  } else {
    resilience(b, opts);
    manifest["scenario"] = "random-k";
    manifest["axes"] = {{"curve", "number of attacked sensors in 0..16"}};
  }
  manifest["metrics_columns"] = metrics_columns(30);
  manifest["curves"] = b.curves;
  std::ofstream(out / "manifest.json") << manifest.dump(2) << "\n";
  return manifest;
}

}  // namespace secdf
