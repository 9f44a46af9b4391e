#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "secdf/error.hpp"
#include "secdf/harness.hpp"

namespace fs = std::filesystem;
using namespace secdf;

namespace {

struct Overrides {
  std::optional<std::uint64_t> seed;
  std::optional<int> runs;
  std::optional<int> workers;
  std::string out;
  bool traces = false;
};

ExperimentConfig load(const std::string& path, const Overrides& o) {
  ExperimentConfig cfg = load_config(path);
  if (o.seed) cfg.seed = *o.seed;
  if (o.runs) cfg.runs = *o.runs;
  if (o.workers) cfg.workers = *o.workers;
  if (o.traces) cfg.traces = true;
  if (!o.out.empty()) cfg.output_dir = o.out;
  if (cfg.output_dir.empty()) cfg.output_dir = ".";
  validate(cfg);
  return cfg;
}

std::ofstream open(const fs::path& p) {
  std::ofstream os(p);
  if (!os) throw Error(ErrorCode::ConfigError, "cannot write " + p.string());
  return os;
}

void write_outputs(const ExperimentConfig& cfg, const ExperimentResult& res, bool detect) {
  const fs::path dir = cfg.output_dir;
  fs::create_directories(dir);
  {
    auto os = open(dir / "metrics.csv");
    write_metrics_csv(res.metrics, os);
  }
  if (cfg.traces) {
    auto os = open(dir / "traces.csv");
    write_traces_csv(res.runs, os);
  }
  if (detect) {
    auto os = open(dir / "detect.csv");
    write_detect_csv(res.runs, os);
  }
  auto os = open(dir / "report.json");
  os << res.report.dump(2) << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Distributed secure state estimation simulator"};
  app.require_subcommand(1);
  Overrides o;
  std::string config_path;
  std::string figure;

  auto common = [&](CLI::App* sub) {
    sub->add_option("--seed", o.seed, "Base seed");
    sub->add_option("--runs", o.runs, "Monte Carlo runs")->check(CLI::PositiveNumber);
    sub->add_option("--workers", o.workers, "Concurrent runs")->check(CLI::PositiveNumber);
    sub->add_option("--out", o.out, "Output directory");
  };

  auto* analyze_cmd = app.add_subcommand("analyze", "Bound and feasibility report");
  analyze_cmd->add_option("config", config_path)->required();
  analyze_cmd->add_option("--out", o.out, "Write report.json here as well");

  auto* simulate_cmd = app.add_subcommand("simulate", "Monte Carlo simulation");
  simulate_cmd->add_option("config", config_path)->required();
  simulate_cmd->add_flag("--traces", o.traces, "Write traces.csv");
  common(simulate_cmd);

  auto* detect_cmd = app.add_subcommand("detect", "Simulation with the detecting filter");
  detect_cmd->add_option("config", config_path)->required();
  detect_cmd->add_flag("--traces", o.traces, "Write traces.csv");
  common(detect_cmd);

  auto* repro_cmd = app.add_subcommand("reproduce", "Regenerate a figure's sweep data");
  repro_cmd->add_option("figure", figure, "fig3, fig5, fig6, fig7 or resilience")->required();
  common(repro_cmd);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }

  try {
    if (*analyze_cmd) {
      ExperimentConfig cfg = load_config(config_path);
      const auto rep = analyze(cfg);
      std::cout << rep.dump(2) << "\n";
      if (!o.out.empty()) {
        fs::create_directories(o.out);
        auto os = open(fs::path(o.out) / "report.json");
        os << rep.dump(2) << "\n";
      }
    } else if (*simulate_cmd || *detect_cmd) {
      const bool detect = static_cast<bool>(*detect_cmd);
      ExperimentConfig cfg = load(config_path, o);
      if (detect) {
        cfg.algorithm = Algorithm::Alg2;
        cfg.keep_runs = true;
      }
      const ExperimentResult res = run_experiment(cfg);
      write_outputs(cfg, res, detect);
      std::cout << res.report.at("final").dump() << "\n";
    } else if (*repro_cmd) {
      ReproduceOptions ro;
      if (o.runs) ro.runs = *o.runs;
      if (o.seed) ro.seed = *o.seed;
      if (o.workers) ro.workers = *o.workers;
      const fs::path out = o.out.empty() ? fs::path(figure) : fs::path(o.out);
      const auto manifest = reproduce(figure, out, ro);
      std::cout << "wrote " << manifest.at("curves").size() << " curves to " << out.string() << "\n";
    }
  } catch (const Error& e) {
    std::cerr << e.what() << "\n";
    return e.code() == ErrorCode::InvariantViolation ? 2 : 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
