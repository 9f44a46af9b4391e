#include "secdf/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <limits>
#include <ostream>
#include <thread>

#include "secdf/error.hpp"

namespace secdf {

using nlohmann::json;

namespace {

int scenario_budget(const ExperimentConfig& cfg) {
  const auto& sc = cfg.scenario;
  if (sc.budget) return *sc.budget;
  if (sc.name == "fig1-static" || sc.name == "fig4-switching") return 6;
  if (sc.name == "random-k") return sc.k;
  if (sc.name == "custom") {
    std::size_t m = 0;
    for (const auto& seg : sc.schedule) m = std::max(m, seg.sensors.size());
    return static_cast<int>(m);
  }
  return 0;
}

Vector draw_initial(const ExperimentConfig& cfg, Rng& rng) {
  const auto n = cfg.x0.size();
  const auto& init = cfg.initial;
  switch (init.mode) {
    case InitialEstimate::Mode::Fixed: return init.value;
    case InitialEstimate::Mode::Box: {
      Vector v(n);
      for (Eigen::Index k = 0; k < n; ++k) v(k) = rng.uniform(init.low(k), init.high(k));
      return v;
    }
    case InitialEstimate::Mode::Ball: break;
  }
  const double r = init.radius > 0.0 ? init.radius : cfg.system.eta0;
  if (n == 1) return cfg.x0 + Vector::Constant(1, rng.uniform(-r, r));
  Vector dir(n);
  do {
    for (Eigen::Index k = 0; k < n; ++k) dir(k) = rng.normal();
  } while (dir.norm() == 0.0);
  const double radius = r * std::pow(rng.uniform01(), 1.0 / static_cast<double>(n));
  return cfg.x0 + radius * dir.normalized();
}

struct CheckCounts {
  long long disagreement = 0;
  long long error_bound = 0;
  long long realtime = 0;
  long long unsaturated = 0;
  long long no_false_positive = 0;
};

struct Context {
  const ExperimentConfig* cfg = nullptr;
  FilterParams fp;
  int budget = 0;
  std::optional<BoundParams> bounds;
  std::optional<BoundSequence> seq;
  bool disagreement_check = false;
  bool error_bound_check = false;
  bool realtime_check = false;
  bool unsaturated_check = false;
  bool detection_check = false;
  double varpi = 0.0;
  std::string bounds_note;
};

Context build_context(const ExperimentConfig& cfg) {
  Context ctx;
  ctx.cfg = &cfg;
  ctx.fp = make_filter_params(cfg.graph, cfg.beta, cfg.L, cfg.alpha_override);
  ctx.budget = scenario_budget(cfg);
  try {
    ctx.bounds = make_bound_params(cfg.system, cfg.graph, cfg.beta, cfg.L, ctx.budget);
    ctx.seq = rho_sequence(*ctx.bounds, cfg.horizon);
  } catch (const Error& e) {
    if (cfg.algorithm == Algorithm::Alg2) throw;
    ctx.bounds_note = e.what();
  }
  if (!cfg.check_invariants || !ctx.bounds) return ctx;
  const bool premise = !ctx.fp.alpha_overridden;
  if (cfg.algorithm == Algorithm::Alg1 && premise) {
    ctx.disagreement_check = true;
    ctx.error_bound_check = true;
    const bool c9 = check_condition9(*ctx.bounds).holds && ctx.seq->in_gamma(1);
    ctx.realtime_check = c9;
    if (c9) {
      try {
        ctx.varpi = varpi(cfg.system.A, cfg.system.C, ctx.budget);
        ctx.unsaturated_check = bound_unsaturated(*ctx.seq, 1, ctx.varpi).condition10;
      } catch (const Error&) {
        ctx.unsaturated_check = false;
      }
    }
  }
  if (cfg.algorithm == Algorithm::Alg2 && premise) {
    // the budget must cover the scenario for the bound chain, checked per run
    ctx.detection_check = true;
  }
  return ctx;
}

[[noreturn]] void violation(int run, int t, int sensor, const std::string& what, double value,
                            double bound) {
  char buf[256];
  std::snprintf(buf, sizeof buf, "run %d, t %d, sensor %d: %s (%.17g > %.17g)", run, t, sensor + 1,
                what.c_str(), value, bound);
  throw Error(ErrorCode::InvariantViolation, buf);
}

bool exceeds(double value, double bound) { return value > bound + 1e-9 * (1.0 + std::abs(bound)); }

struct RunOutput {
  RunRecord record;
  CheckCounts checks;
};

RunOutput simulate(const Context& ctx, int run, bool keep_detail) {
  const ExperimentConfig& cfg = *ctx.cfg;
  const LtiSystem& sys = cfg.system;
  const int N = sys.sensors();
  const int T = cfg.horizon;
  Rng rng = Rng::for_run(cfg.seed, static_cast<std::uint64_t>(run));
  const AttackScenario scenario = scenario_for_run(cfg, rng);
  scenario.validate(N);
  const Vector xhat0 = draw_initial(cfg, rng);
  const PlantTrace trace = simulate_plant(sys, cfg.x0, T, rng);

  RunOutput out;
  RunRecord& rec = out.record;
  rec.errors.assign(T + 1, std::vector<double>(N));
  rec.attacked.assign(T + 1, {});
  if (cfg.traces) {
    rec.states = trace.states;
    rec.observations.assign(T + 1, {});
  }
  if (keep_detail && cfg.algorithm == Algorithm::Alg2) rec.detail.assign(T + 1, {});

  FilterBank fb = FilterBank::initial(N, xhat0);
  DetectorBank db = DetectorBank::initial(N, sys.eta0);
  db.t0_anchor = cfg.detector_t0;
  for (int i = 0; i < N; ++i) rec.errors[0][i] = (xhat0 - cfg.x0).norm();

  const bool init_ok = (xhat0 - cfg.x0).norm() <= sys.eta0;
  const bool error_check = ctx.error_bound_check && init_ok;
  const bool realtime_check = ctx.realtime_check && init_ok;
  bool full_budget = true;
  for (int t = 1; t <= T; ++t)
    if (static_cast<int>(scenario.attacked_at(t).size()) != ctx.budget) full_budget = false;
  const bool unsat_check = ctx.unsaturated_check && init_ok && full_budget;
  const std::vector<int> ever = scenario.ever_attacked();
  const bool detection_check = ctx.detection_check && init_ok && scenario.time_invariant() &&
                               scenario.max_attacked() <= ctx.budget;
  const bool stealth = scenario.strategy().kind == AttackKind::Stealth;

  for (int t = 1; t <= T; ++t) {
    const auto& att = scenario.attacked_at(t);
    rec.attacked[t] = att;
    std::vector<double> y = trace.observations[t];
    for (int i : att) {
      std::optional<double> pred;
      if (stealth) pred = predicted_observation(sys, i, fb.estimates[i]);
      y[i] = attacked_observation(scenario.strategy(), t, y[i], pred, rng);
    }
    if (cfg.traces) rec.observations[t] = y;

    switch (cfg.algorithm) {
      case Algorithm::Alg1: fb = filter_step(fb, sys, cfg.graph, ctx.fp, y); break;
      case Algorithm::Sgcf: fb = filter_step(fb, sys, cfg.graph, ctx.fp, y, GainRule::Unity); break;
      case Algorithm::Trimmed: {
        FilterBank next = fb;
        std::vector<Vector> est = observation_update(next, sys, y, ctx.fp.beta, GainRule::Unity);
        for (int l = 0; l < ctx.fp.L; ++l) est = trimmed_round(est, cfg.graph);
        next.estimates = std::move(est);
        next.time = fb.time + 1;
        fb = std::move(next);
        break;
      }
      case Algorithm::Alg2: {
        Alg2Step step = algorithm2_step(fb, db, sys, cfg.graph, ctx.fp, *ctx.bounds, y);
        fb = std::move(step.filter);
        db = std::move(step.detector);
        break;
      }
    }

    for (int i = 0; i < N; ++i) rec.errors[t][i] = (fb.estimates[i] - trace.states[t]).norm();

    if (ctx.disagreement_check) {
      const double dis = disagreement_norm(fb.estimates);
      const double p = ctx.bounds->p(t);
      if (exceeds(dis, p)) violation(run, t, -1, "consensus disagreement above p(t)", dis, p);
      ++out.checks.disagreement;
    }
    if (error_check) {
      const double bound = ctx.seq->rho[t] + ctx.bounds->p(t);
      for (int i = 0; i < N; ++i)
        if (exceeds(rec.errors[t][i], bound)) violation(run, t, i, "error above rho_t + p(t)", rec.errors[t][i], bound);
      ++out.checks.error_bound;
    }
    if (realtime_check) {
      const double bound = bound_realtime(*ctx.seq, 1, t);
      for (int i = 0; i < N; ++i)
        if (exceeds(rec.errors[t][i], bound)) violation(run, t, i, "error above the real-time bound", rec.errors[t][i], bound);
      ++out.checks.realtime;
    }
    if (unsat_check && t > 1) {
      const double bound = unsaturated_realtime(*ctx.seq, 1, ctx.varpi, t);
      for (int i = 0; i < N; ++i) {
        if (exceeds(rec.errors[t][i], bound))
          violation(run, t, i, "error above the unsaturated bound", rec.errors[t][i], bound);
        if (!scenario.is_attacked(t, i) && fb.gains[i] != 1.0)
          violation(run, t, i, "attack-free sensor saturated", 1.0 - fb.gains[i], 0.0);
      }
      ++out.checks.unsaturated;
    }

    if (cfg.algorithm == Algorithm::Alg2) {
      const std::vector<int> found = db.detected_union();
      if (detection_check) {
        for (int j : found)
          if (!std::binary_search(ever.begin(), ever.end(), j))
            violation(run, t, j, "attack-free sensor detected", 1.0, 0.0);
        ++out.checks.no_false_positive;
      }
      if (rec.all_detected_at < 0 && !ever.empty() && found == ever) rec.all_detected_at = t;
      if (t == T) rec.detected_final = found;
      if (!rec.detail.empty()) {
        StepDetail d;
        d.gains = fb.gains;
        d.innovations = fb.innovations;
        d.thresholds = db.thresholds;
        d.counts = db.counts();
        for (int i = 0; i < N; ++i) d.self_detected.push_back(db.self_detected(i));
        rec.detail[t] = std::move(d);
      }
    }
  }
  return out;
}

json config_summary(const ExperimentConfig& cfg, const Context& ctx) {
  json j;
  j["algorithm"] = to_string(cfg.algorithm);
  j["runs"] = cfg.runs;
  j["horizon"] = cfg.horizon;
  j["seed"] = cfg.seed;
  j["beta"] = cfg.beta;
  j["L"] = cfg.L;
  j["alpha"] = ctx.fp.alpha;
  j["sensors"] = cfg.system.sensors();
  j["state_dim"] = cfg.system.state_dim();
  j["scenario"] = cfg.scenario.name;
  j["budget"] = ctx.budget;
  j["strategy"] = to_string(cfg.scenario.strategy.kind);
  return j;
}

}  // namespace

AttackScenario scenario_for_run(const ExperimentConfig& cfg, Rng& rng) {
  const auto& sc = cfg.scenario;
  const int N = cfg.system.sensors();
  AttackScenario out;
  if (sc.name == "custom")
    out = AttackScenario(scenario_budget(cfg), sc.schedule, sc.strategy);
  else
    out = named_scenario(sc.name, N, sc.k, sc.strategy, rng);
  if (sc.budget) out = out.with_budget(*sc.budget);
  return out;
}

RunRecord simulate_run(const ExperimentConfig& cfg, int run, bool keep_detail) {
  validate(cfg);
  const Context ctx = build_context(cfg);
  return simulate(ctx, run, keep_detail).record;
}

MetricsTable aggregate(const std::vector<RunRecord>& runs, int sensors, int horizon) {
  MetricsTable m;
  m.sensors = sensors;
  m.horizon = horizon;
  m.eta.assign(horizon + 1, 0.0);
  m.eta_A.assign(horizon + 1, 0.0);
  m.eta_Ac.assign(horizon + 1, 0.0);
  m.eta_i.assign(horizon + 1, std::vector<double>(sensors, 0.0));
  for (const auto& r : runs) {
    for (int t = 0; t <= horizon; ++t) {
      const auto& e = r.errors[t];
      const auto& att = r.attacked[t];
      double all = 0.0, in_a = 0.0, in_ac = 0.0;
      std::size_t k = 0;
      for (int i = 0; i < sensors; ++i) {
        const bool attacked = k < att.size() && att[k] == i;
        if (attacked) ++k;
        all = std::max(all, e[i]);
        if (attacked)
          in_a = std::max(in_a, e[i]);
        else
          in_ac = std::max(in_ac, e[i]);
        m.eta_i[t][i] += e[i];
      }
      m.eta[t] += all;
      m.eta_A[t] += in_a;
      m.eta_Ac[t] += in_ac;
    }
  }
  const double inv = 1.0 / static_cast<double>(runs.size());
  for (int t = 0; t <= horizon; ++t) {
    m.eta[t] *= inv;
    m.eta_A[t] *= inv;
    m.eta_Ac[t] *= inv;
    for (auto& v : m.eta_i[t]) v *= inv;
  }
  return m;
}

ExperimentResult run_experiment(const ExperimentConfig& cfg) {
  validate(cfg);
  const Context ctx = build_context(cfg);
  const bool keep_detail = cfg.keep_runs;
  std::vector<RunOutput> outputs(cfg.runs);
  std::vector<std::exception_ptr> failures(cfg.runs);
  std::atomic<int> next{0};
  auto worker = [&] {
    for (int r = next++; r < cfg.runs; r = next++) {
      try {
        outputs[r] = simulate(ctx, r, keep_detail);
      } catch (...) {
        failures[r] = std::current_exception();
      }
    }
  };
  const int nthreads = std::min(cfg.workers, cfg.runs);
  if (nthreads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int k = 0; k < nthreads; ++k) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  // report the failure of the lowest run index so the outcome is reproducible
  for (auto& f : failures)
    if (f) std::rethrow_exception(f);

  ExperimentResult res;
  std::vector<RunRecord> records;
  records.reserve(cfg.runs);
  CheckCounts total;
  for (auto& o : outputs) {
    total.disagreement += o.checks.disagreement;
    total.error_bound += o.checks.error_bound;
    total.realtime += o.checks.realtime;
    total.unsaturated += o.checks.unsaturated;
    total.no_false_positive += o.checks.no_false_positive;
    records.push_back(std::move(o.record));
  }
  res.metrics = aggregate(records, cfg.system.sensors(), cfg.horizon);

  json rep;
  rep["config"] = config_summary(cfg, ctx);
  const int T = cfg.horizon;
  rep["final"] = {{"eta", res.metrics.eta[T]}, {"eta_A", res.metrics.eta_A[T]}, {"eta_Ac", res.metrics.eta_Ac[T]}};
  rep["checks"] = {{"disagreement_steps", total.disagreement},
                   {"error_bound_steps", total.error_bound},
                   {"realtime_bound_steps", total.realtime},
                   {"unsaturated_bound_steps", total.unsaturated},
                   {"no_false_positive_steps", total.no_false_positive}};
  if (ctx.bounds) {
    const Condition9 c9 = check_condition9(*ctx.bounds);
    rep["bounds"] = {{"lambda0", ctx.bounds->lambda0},
                     {"p0", ctx.bounds->p0()},
                     {"q0", ctx.bounds->q0()},
                     {"gamma", ctx.bounds->gamma},
                     {"condition9_slack", c9.slack},
                     {"condition9", c9.holds},
                     {"one_in_gamma", ctx.seq->in_gamma(1)}};
  } else {
    rep["bounds"] = {{"unavailable", ctx.bounds_note}};
  }
  if (cfg.algorithm == Algorithm::Alg2) {
    int all = 0;
    double mean_time = 0.0;
    for (const auto& r : records) {
      if (r.all_detected_at > 0) {
        ++all;
        mean_time += r.all_detected_at;
      }
    }
    rep["detection"] = {{"runs_all_detected", all},
                        {"fraction_all_detected", static_cast<double>(all) / cfg.runs},
                        {"mean_detection_time", all > 0 ? mean_time / all : -1.0}};
  }
  res.report = std::move(rep);
  if (cfg.keep_runs || cfg.traces) res.runs = std::move(records);
  return res;
}

MetricsTable baseline_sgcf(ExperimentConfig cfg) {
  cfg.algorithm = Algorithm::Sgcf;
  return run_experiment(cfg).metrics;
}

MetricsTable baseline_trimmed(ExperimentConfig cfg) {
  cfg.algorithm = Algorithm::Trimmed;
  return run_experiment(cfg).metrics;
}

std::vector<Vector> trimmed_round(const std::vector<Vector>& estimates, const SensorGraph& g) {
  if (static_cast<int>(estimates.size()) != g.size())
    throw Error(ErrorCode::DimensionMismatch, "estimate count differs from the graph size");
  if (estimates.front().size() != 1)
    throw Error(ErrorCode::NotScalar, "the trimmed rule is defined for scalar estimates");
  std::vector<Vector> next = estimates;
  std::vector<double> vals;
  for (int i = 0; i < g.size(); ++i) {
    const auto& nb = g.neighbors(i);
    if (nb.size() <= 2) continue;
    vals.clear();
    vals.push_back(estimates[i](0));
    for (int j : nb) vals.push_back(estimates[j](0));
    std::sort(vals.begin(), vals.end());
    double sum = 0.0;
    for (std::size_t k = 1; k + 1 < vals.size(); ++k) sum += vals[k];
    next[i](0) = sum / static_cast<double>(vals.size() - 2);
  }
  return next;
}

namespace {

void put(std::ostream& os, double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  os << buf;
}

}  // namespace

void write_metrics_csv(const MetricsTable& m, std::ostream& os) {
  os << "t,eta,eta_A,eta_Ac";
  for (int i = 1; i <= m.sensors; ++i) os << ",eta_i_" << i;
  os << "\n";
  for (int t = 0; t <= m.horizon; ++t) {
    os << t << ',';
    put(os, m.eta[t]);
    os << ',';
    put(os, m.eta_A[t]);
    os << ',';
    put(os, m.eta_Ac[t]);
    for (double v : m.eta_i[t]) {
      os << ',';
      put(os, v);
    }
    os << "\n";
  }
}

void write_traces_csv(const std::vector<RunRecord>& runs, std::ostream& os) {
  if (runs.empty() || runs.front().states.empty()) return;
  const auto n = runs.front().states.front().size();
  const std::size_t N = runs.front().errors.front().size();
  os << "run,t";
  for (Eigen::Index k = 1; k <= n; ++k) os << ",x_" << k;
  for (std::size_t i = 1; i <= N; ++i) os << ",y_" << i;
  os << "\n";
  for (std::size_t r = 0; r < runs.size(); ++r) {
    const auto& rec = runs[r];
    for (std::size_t t = 0; t < rec.states.size(); ++t) {
      os << r << ',' << t;
      for (Eigen::Index k = 0; k < n; ++k) {
        os << ',';
        put(os, rec.states[t](k));
      }
      for (std::size_t i = 0; i < N; ++i) {
        os << ',';
        if (t > 0) put(os, rec.observations[t][i]);
      }
      os << "\n";
    }
  }
}

void write_detect_csv(const std::vector<RunRecord>& runs, std::ostream& os) {
  os << "run,t,sensor,error_norm,gain,innovation,threshold,detected_flag,d_i\n";
  for (std::size_t r = 0; r < runs.size(); ++r) {
    const auto& rec = runs[r];
    for (std::size_t t = 1; t < rec.detail.size(); ++t) {
      const auto& d = rec.detail[t];
      for (std::size_t i = 0; i < d.gains.size(); ++i) {
        os << r << ',' << t << ',' << i + 1 << ',';
        put(os, rec.errors[t][i]);
        os << ',';
        put(os, d.gains[i]);
        os << ',';
        put(os, d.innovations[i]);
        os << ',';
        put(os, d.thresholds[i]);
        os << ',' << static_cast<int>(d.self_detected[i]) << ',' << d.counts[i] << "\n";
      }
    }
  }
}

ConvergenceReport noise_free_convergence_test(ExperimentConfig cfg, double tol) {
  if (cfg.system.b_w != 0.0 || cfg.system.b_v != 0.0)
    throw Error(ErrorCode::InvalidArgument, "the convergence test needs b_w = b_v = 0");
  cfg.algorithm = Algorithm::Alg2;
  validate(cfg);
  Rng probe = Rng::for_run(cfg.seed, 0);
  const AttackScenario sc = scenario_for_run(cfg, probe);
  if (!sc.time_invariant())
    throw Error(ErrorCode::InvalidArgument, "the convergence test needs a fixed attacked set");
  const FilterParams fp = make_filter_params(cfg.graph, cfg.beta, cfg.L, cfg.alpha_override);
  ConvergenceReport rep;
  rep.certificate = convergence_certificate(cfg.system, cfg.graph, fp, sc.ever_attacked());
  rep.horizon = cfg.horizon;
  if (!rep.certificate.schur_stable)
    throw Error(ErrorCode::CertificateFalse,
                "spectral radius " + std::to_string(rep.certificate.spectral_radius) + " is not below 1");
  cfg.keep_runs = true;
  const ExperimentResult res = run_experiment(cfg);
  const int T = cfg.horizon;
  for (const auto& r : res.runs)
    for (double e : r.errors[T]) rep.final_max_error = std::max(rep.final_max_error, e);
  // least-squares slope of log eta(t) over the steps above the round-off floor
  const double floor = 1e-10 * std::max(res.metrics.eta[0], 1e-300);
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int count = 0;
  for (int t = 1; t <= T; ++t) {
    const double v = res.metrics.eta[t];
    if (!(v > floor) || !std::isfinite(v)) continue;
    sx += t;
    sy += std::log(v);
    sxx += static_cast<double>(t) * t;
    sxy += t * std::log(v);
    ++count;
  }
  rep.decay_rate = std::nan("");
  if (count >= 2) {
    const double slope = (count * sxy - sx * sy) / (count * sxx - sx * sx);
    rep.decay_rate = std::exp(slope);
  }
  rep.converged = rep.final_max_error < tol;
  return rep;
}

nlohmann::json analyze(const ExperimentConfig& cfg) {
  validate(cfg);
  const LtiSystem& sys = cfg.system;
  const int s = scenario_budget(cfg);
  json rep;
  rep["sensors"] = sys.sensors();
  rep["state_dim"] = sys.state_dim();
  rep["s"] = s;
  rep["norm_A"] = sys.norm_A;
  const SpectralParams sp = spectral_params(cfg.graph);
  rep["graph"] = {{"lambda2", sp.lambda2}, {"lambda_max", sp.lambda_max}, {"alpha", sp.alpha},
                  {"gamma", sp.gamma}, {"min_consensus_steps", min_consensus_steps(sp.gamma, sys.norm_A)}};
  rep["lambda0"] = lambda0(sys.C, s);

  try {
    const FeasibilityReport f = search_feasible_params(sys, cfg.graph, s);
    rep["feasible"] = f.found_params.has_value();
    rep["feasibility"] = {{"lambda0_gt_s", f.condition_lambda0_gt_s}, {"epsilon", f.epsilon},
                          {"norm_in_window", f.norm_in_window}, {"reason", f.reason}};
    if (f.found_params)
      rep["witness"] = {{"beta", f.found_params->beta}, {"eta0", f.found_params->eta0},
                        {"L", f.found_params->L}, {"condition9_slack", f.slack}};
    else
      rep["witness"] = nullptr;
  } catch (const Error& e) {
    rep["feasible"] = false;
    rep["feasibility"] = {{"reason", e.what()}};
    rep["witness"] = nullptr;
  }

  json bounds;
  try {
    const BoundParams bp = make_bound_params(sys, cfg.graph, cfg.beta, cfg.L, s);
    const BoundSequence seq = rho_sequence(bp, cfg.horizon);
    const Condition9 c9 = check_condition9(bp);
    json thm1 = {{"p0", seq.p0}, {"q0", seq.q0}, {"condition9_slack", c9.slack},
                 {"condition9", c9.holds}, {"gamma_nonempty", !seq.gamma_set.empty()},
                 {"rho_final", seq.rho.back()}, {"horizon", seq.horizon()}};
    if (!seq.gamma_set.empty()) {
      const LimsupBound lb = bound_limsup(seq);
      const int t0 = seq.gamma_set.front();
      thm1["t0"] = t0;
      thm1["uniform"] = bound_uniform(seq, t0);
      thm1["limsup"] = lb.value;
      thm1["settled"] = lb.settled;
    }
    bounds["thm1"] = thm1;
    json thm3;
    try {
      const double w = varpi(sys.A, sys.C, s);
      thm3["varpi"] = w;
      if (seq.in_gamma(1)) {
        const UnsaturatedBound ub = bound_unsaturated(seq, 1, w);
        thm3["condition10"] = ub.condition10;
        thm3["limsup"] = ub.limsup ? json(*ub.limsup) : json(nullptr);
      } else {
        thm3["condition10"] = false;
        thm3["limsup"] = nullptr;
      }
    } catch (const Error& e) {
      thm3["error"] = e.what();
    }
    bounds["thm3"] = thm3;
  } catch (const Error& e) {
    bounds["error"] = e.what();
  }
  rep["bounds"] = bounds;

  json obs;
  try {
    const auto r = sparse_observability_report(sys.A, sys.C, s);
    obs = {{"s", s}, {"s_sparse_observable", r.s_sparse}, {"one_step_s", r.one_step_s},
           {"one_step_2s", r.one_step_2s ? json(*r.one_step_2s) : json(nullptr)},
           {"lambda0_gt_s_implies_one_step_2s", r.implication_holds}};
  } catch (const Error& e) {
    obs = {{"error", e.what()}};
  }
  rep["sparse_observability"] = obs;

  json curve = json::array();
  try {
    std::vector<int> range;
    for (int k = 0; k < sys.sensors(); ++k) range.push_back(k);
    const ResilienceCurve rc = resilience_curve(sys, cfg.graph, cfg.beta, cfg.L, range);
    for (const auto& p : rc.points)
      curve.push_back({{"s", p.s}, {"lambda0", p.lambda0}, {"F_eta0", p.F_eta0},
                       {"f", std::isfinite(p.f) ? json(p.f) : json(nullptr)}, {"condition9", p.condition9}});
  } catch (const Error& e) {
    curve = {{"error", e.what()}};
  }
  rep["resilience_curve"] = curve;
  return rep;
}

}  // namespace secdf
