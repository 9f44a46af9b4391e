#include <gtest/gtest.h>

#include <cmath>

#include "secdf/detector.hpp"
#include "secdf/error.hpp"
#include "secdf/harness.hpp"

using namespace secdf;

namespace {

struct Rig {
  LtiSystem sys;
  SensorGraph g = complete_graph(1);
  FilterParams fp;
  BoundParams bp;
};

Rig reference_setup(int L, int s = 6, bool detection = false) {
  const ExperimentConfig cfg = detection ? reference_detection_config() : reference_config();
  Rig out{cfg.system, cfg.graph, make_filter_params(cfg.graph, 5.0, L),
            make_bound_params(cfg.system, cfg.graph, 5.0, L, s)};
  return out;
}

std::vector<double> clean_observations(double x) { return std::vector<double>(30, x); }

}  // namespace

TEST(Detector1, NoiseFreeMemorylessCase) {
  const LtiSystem sys = make_system(Matrix::Constant(1, 1, 1.1), std::vector<RowVector>(6, RowVector::Ones(1)),
                                    0.0, 0.0, 1.0);
  const BoundParams p = make_bound_params(sys, ring_graph(6), 10.0, 30, 0);
  const BoundSequence seq = rho_sequence(p, 10);
  ASSERT_EQ(p.F(seq.rho[1]), 0.0);
  ASSERT_TRUE(seq.in_gamma(1));
  EXPECT_NEAR(detector1_threshold(seq, 1, 2), 1.1 * p.q0() + 1.1 * p.p(2), 1e-15);
  EXPECT_EQ(detector1_applied_threshold(seq, 1, 3), detector1_threshold(seq, 1, 2));
  EXPECT_THROW(detector1_threshold(rho_sequence(reference_setup(4).bp, 10), 1, 3), Error);
}

TEST(Detector2, FirstThresholdAndRecursion) {
  const Rig s = reference_setup(5, 6, true);
  EXPECT_NEAR(detector2_threshold_value(s.bp, 50.0, 0), 1.02 * 50.0 + 0.02, 1e-12);
  DetectorBank bank = DetectorBank::initial(30, 50.0);
  EXPECT_NEAR(detector2_threshold(bank, 4, 0, s.bp), 51.02, 1e-12);
  EXPECT_THROW(detector2_threshold(bank, 4, 1, s.bp), Error);
  const double next = bar_rho_next(s.bp, 50.0, 2, 0);
  const double qbar = std::max(0.0, s.bp.q0() - 2 * 5.0 / 30.0);
  EXPECT_NEAR(next, s.bp.F(50.0, s.bp.p(0)) * 50.0 + qbar, 1e-12);
}

TEST(Detector2, ClampedQBarBranch) {
  BoundParams p = reference_setup(60).bp;
  const double d = std::ceil(p.q0() * p.N / p.beta);
  ASSERT_LE(d, p.N);
  const int di = static_cast<int>(d);
  EXPECT_NEAR(bar_rho_next(p, 10.0, di, 5), p.F(10.0, p.p(5)) * 10.0, 1e-12);
}

TEST(Detector2, DominatedByDetector1AndDecreasingInCount) {
  const BoundParams p = reference_setup(60).bp;
  const BoundSequence seq = rho_sequence(p, 300);
  ASSERT_TRUE(seq.in_gamma(1));
  const auto zero = detector2_threshold_series(p, {0}, 300);
  for (int t = 1; t <= 300; ++t) EXPECT_LE(zero[t], detector1_threshold(seq, 0, t) * (1 + 1e-12));
  for (int d = 1; d <= 6; ++d) {
    const auto other = detector2_threshold_series(p, {0, 0, d}, 300);
    for (int t = 0; t <= 2; ++t) EXPECT_EQ(other[t], zero[t]);
    for (int t = 3; t <= 300; ++t) EXPECT_LT(other[t], zero[t]);
    if (d > 1) {
      const auto fewer = detector2_threshold_series(p, {0, 0, d - 1}, 300);
      for (int t = 3; t <= 300; ++t) EXPECT_LT(other[t], fewer[t]);
    }
  }
}

TEST(Algorithm2, LargeAttackIsDetectedAndGossiped) {
  const ExperimentConfig cfg = reference_config();
  const int L = diameter(cfg.graph);
  const Rig s{cfg.system, cfg.graph, make_filter_params(cfg.graph, 5.0, L),
                make_bound_params(cfg.system, cfg.graph, 5.0, L, 6)};
  const FilterBank fb = FilterBank::initial(30, Vector::Constant(1, 25.0));
  const DetectorBank db = DetectorBank::initial(30, 50.0);
  auto y = clean_observations(25.5);
  y[2] += 10.0 * detector2_threshold_value(s.bp, 50.0, 0);
  const Alg2Step step = algorithm2_step(fb, db, s.sys, s.g, s.fp, s.bp, y);
  EXPECT_EQ(step.branches[2], Alg2Branch::Detected);
  EXPECT_EQ(step.filter.gains[2], 0.0);
  EXPECT_TRUE(step.detector.self_detected(2));
  for (int i = 0; i < 30; ++i) {
    EXPECT_EQ(step.detector.count(i), 1) << i;
    EXPECT_EQ(step.detector.detected[i][2], 1);
  }
  EXPECT_EQ(step.detector.detected_union(), std::vector<int>{2});
  EXPECT_EQ(step.detector.time, 1);

  // next step: sensor 3 isolates itself regardless of its observation
  const Alg2Step again = algorithm2_step(step.filter, step.detector, s.sys, s.g, s.fp, s.bp, clean_observations(25.5));
  EXPECT_EQ(again.branches[2], Alg2Branch::Isolated);
  EXPECT_EQ(again.branches[0], Alg2Branch::Saturated);
}

TEST(Algorithm2, FullTrustOnceBudgetIsFound) {
  const Rig s = reference_setup(5);
  FilterBank fb = FilterBank::initial(30, Vector::Constant(1, 25.0));
  DetectorBank db = DetectorBank::initial(30, 50.0);
  fb.time = db.time = 3;
  for (int i = 0; i < 30; ++i)
    for (int j : {2, 11, 12, 14, 22, 27}) db.detected[i][j] = 1;
  auto y = clean_observations(25.5 + 4.0);
  const Alg2Step step = algorithm2_step(fb, db, s.sys, s.g, s.fp, s.bp, y);
  EXPECT_EQ(step.branches[0], Alg2Branch::FullTrust);
  EXPECT_EQ(step.filter.gains[0], 1.0);
  EXPECT_EQ(step.branches[2], Alg2Branch::Isolated);
}

TEST(Algorithm2, Rejections) {
  const Rig s = reference_setup(5, 1);
  FilterBank fb = FilterBank::initial(30, Vector::Constant(1, 25.0));
  DetectorBank db = DetectorBank::initial(30, 50.0);
  auto y = clean_observations(25.5);
  y[0] += 1e4;
  y[1] += 1e4;
  try {
    algorithm2_step(fb, db, s.sys, s.g, s.fp, s.bp, y);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::BudgetExceeded);
  }
  db.detected[0][0] = 1;
  EXPECT_THROW(algorithm2_step(fb, db, s.sys, s.g, s.fp, s.bp, clean_observations(25.5)), Error);
}

TEST(Algorithm2, StealthAttackStaysUndetectedAndBounded) {
  ExperimentConfig cfg = reference_config();
  cfg.algorithm = Algorithm::Alg2;
  cfg.L = 60;
  cfg.runs = 10;
  cfg.keep_runs = true;
  cfg.scenario.strategy.kind = AttackKind::Stealth;
  const ExperimentResult res = run_experiment(cfg);
  const BoundSequence seq = rho_sequence(make_bound_params(cfg.system, cfg.graph, 5.0, 60, 6), 200);
  for (const auto& r : res.runs) {
    EXPECT_TRUE(r.detected_final.empty());
    for (int t = 1; t <= 200; ++t)
      for (double e : r.errors[t]) EXPECT_LE(e, bound_realtime(seq, 1, t));
  }
}

TEST(Algorithm2, AttackFreeRunsHaveNoDetections) {
  ExperimentConfig cfg = reference_config();
  cfg.algorithm = Algorithm::Alg2;
  cfg.L = 60;
  cfg.runs = 5;
  cfg.keep_runs = true;
  cfg.scenario.name = "attack-free";
  cfg.scenario.budget = 6;
  const ExperimentResult res = run_experiment(cfg);
  const BoundSequence seq = rho_sequence(make_bound_params(cfg.system, cfg.graph, 5.0, 60, 6), 200);
  for (const auto& r : res.runs)
    for (int t = 1; t <= 200; ++t)
      for (int i = 0; i < 30; ++i) {
        EXPECT_EQ(r.detail[t].counts[i], 0);
        // every attack-free innovation lies below the first detector's threshold
        EXPECT_LE(std::abs(r.detail[t].innovations[i]), detector1_applied_threshold(seq, 0, t));
      }
}

TEST(WBound, ClosedFormRelations) {
  const Rig s = reference_setup(60, 6, true);
  const BoundSequence seq = rho_sequence(s.bp, 200);
  const WBound w0 = w_bound(seq, 0, 200);
  EXPECT_EQ(w0.value, bound_limsup(seq).value);
  double last = w0.value;
  for (int d = 1; d <= 6; ++d) {
    const WBound w = w_bound(seq, d, 200);
    EXPECT_LE(w.value, last);
    last = w.value;
  }
  const WBound w6 = w_bound(seq, 6, 200);
  EXPECT_NEAR(w0.value - w6.value, 6 * 5.0 / (30.0 * (1.0 - w6.F_star)), 1e-12);
  EXPECT_NEAR(w6.value, 2.797936153448592, 1e-9);
  EXPECT_LT(w6.value, bound_limsup(seq).value);
  EXPECT_THROW(w_bound(seq, 7, 200), Error);
  EXPECT_THROW(w_bound(rho_sequence(reference_setup(5, 6, true).bp, 200), 6, 200), Error);
}

TEST(Certificate, Examples) {
  const Certificate zero = certificate_from_matrix(Eigen::Matrix2d::Zero());
  EXPECT_TRUE(zero.schur_stable);
  EXPECT_EQ(zero.spectral_radius, 0.0);

  const LtiSystem fast = make_system(Matrix::Constant(1, 1, 3.0), std::vector<RowVector>(10, RowVector::Ones(1)),
                                     0.0, 0.0, 1.0);
  const Certificate big = convergence_certificate(fast, complete_graph(10), make_filter_params(complete_graph(10), 1.0, 40), {});
  EXPECT_NEAR(big.G(0, 0), 0.0, 1e-12);
  EXPECT_NEAR(big.G(0, 1), 0.0, 1e-12);
  EXPECT_NEAR(big.M_tilde_norm, 0.0, 1e-12);
  EXPECT_TRUE(big.schur_stable);

  const Rig s = reference_setup(5);
  const Certificate c = convergence_certificate(s.sys, s.g, s.fp, {2, 11, 12, 14, 22, 27});
  const double g5 = std::pow(spectral_params(s.g).gamma, 5);
  EXPECT_NEAR(c.G(0, 0), 2 * 1.02 * g5, 1e-12);
  EXPECT_NEAR(c.G(0, 1), 1.02 * g5 * std::sqrt(24.0), 1e-12);
  EXPECT_NEAR(c.m_tilde_norm, 1.02 * std::sqrt(24.0) / 30.0, 1e-12);
  EXPECT_NEAR(c.M_tilde_norm, 1.02 * 6.0 / 30.0, 1e-12);
  EXPECT_FALSE(c.schur_stable);
}

TEST(Certificate, AgreesWithNoiseFreeSimulation) {
  ExperimentConfig cfg = reference_detection_config();
  std::vector<RowVector> rows(30, RowVector::Ones(1));
  std::vector<bool> blind(30, false);
  rows[0] = rows[24] = RowVector::Zero(1);
  blind[0] = blind[24] = true;
  cfg.system = make_system(cfg.system.A, rows, 0.0, 0.0, 50.0, blind);
  cfg.L = 30;
  cfg.runs = 5;
  cfg.horizon = 400;
  cfg.scenario.strategy.transient = 1e3;
  cfg.scenario.strategy.transient_steps = 3;
  const ConvergenceReport rep = noise_free_convergence_test(cfg);
  EXPECT_TRUE(rep.certificate.schur_stable);
  EXPECT_TRUE(rep.converged);
  EXPECT_LT(rep.decay_rate, 1.0);
  cfg.L = 1;
  try {
    noise_free_convergence_test(cfg);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::CertificateFalse);
  }
}
