#include "secdf/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "secdf/error.hpp"

namespace secdf {

std::uint64_t binomial(int n, int k) {
  if (k < 0 || k > n) return 0;
  k = std::min(k, n - k);
  __extension__ typedef unsigned __int128 wide;
  wide acc = 1;
  for (int i = 1; i <= k; ++i) {
    acc = acc * static_cast<unsigned>(n - k + i) / static_cast<unsigned>(i);
    if (acc > UINT64_MAX) return UINT64_MAX;
  }
  return static_cast<std::uint64_t>(acc);
}

void for_each_subset(int n, int k, const EnumerationOptions& opts,
                     const std::function<void(const std::vector<int>&)>& visit) {
  if (k < 0 || k > n) throw Error(ErrorCode::InvalidArgument, "subset size out of range");
  const std::uint64_t count = binomial(n, k);
  if (count > opts.cap)
    throw Error(ErrorCode::CombinatorialBlowup,
                "binomial(" + std::to_string(n) + ", " + std::to_string(k) + ") = " +
                    (count == UINT64_MAX ? std::string(">= 2^64") : std::to_string(count)) +
                    " subsets exceed the enumeration cap " + std::to_string(opts.cap) +
                    "; scalar systems use the closed form, otherwise raise the cap");
  std::vector<int> idx(k);
  std::iota(idx.begin(), idx.end(), 0);
  while (true) {
    visit(idx);
    int pos = k - 1;
    while (pos >= 0 && idx[pos] == n - k + pos) --pos;
    if (pos < 0) break;
    ++idx[pos];
    for (int j = pos + 1; j < k; ++j) idx[j] = idx[j - 1] + 1;
  }
}

namespace {

void check_budget(int N, int s) {
  if (s < 0 || s >= N) throw Error(ErrorCode::InvalidArgument, "need 0 <= s < N");
}

Matrix gram(const std::vector<RowVector>& C) {
  const auto n = C.front().size();
  Matrix g = Matrix::Zero(n, n);
  for (const auto& row : C) g += row.transpose() * row;
  return g;
}

// Sorted squared entries of a scalar observation list.
std::vector<double> sorted_squares(const std::vector<RowVector>& C) {
  std::vector<double> sq;
  for (const auto& row : C) sq.push_back(row(0) * row(0));
  std::sort(sq.begin(), sq.end());
  return sq;
}

double relative_tol(double tol, double v) { return tol * std::max(1.0, std::abs(v)); }

}  // namespace

double lambda0(const std::vector<RowVector>& C, int s, const EnumerationOptions& opts) {
  const int N = static_cast<int>(C.size());
  if (N == 0) throw Error(ErrorCode::InvalidArgument, "no observation rows");
  check_budget(N, s);
  if (opts.allow_fast_path && C.front().size() == 1) {
    // the worst subset drops the s largest contributions
    auto sq = sorted_squares(C);
    double sum = 0.0;
    for (int i = 0; i < N - s; ++i) sum += sq[i];
    return sum;
  }
  const Matrix total = gram(C);
  double best = std::numeric_limits<double>::infinity();
  for_each_subset(N, s, opts, [&](const std::vector<int>& removed) {
    Matrix m = total;
    for (int i : removed) m -= C[i].transpose() * C[i];
    best = std::min(best, min_eigenvalue(m));
  });
  return std::max(best, 0.0);
}

double BoundParams::consensus_factor() const { return std::pow(gamma, L); }

void BoundParams::validate() const {
  if (N < 1 || s < 0 || s >= N) throw Error(ErrorCode::InvalidArgument, "need 0 <= s < N");
  if (!(beta >= 0.0) || !(eta0 > 0.0) || !(b_w >= 0.0) || !(b_v >= 0.0))
    throw Error(ErrorCode::InvalidArgument, "bound parameters out of range");
  if (gamma < 0.0 || gamma >= 1.0) throw Error(ErrorCode::InvalidArgument, "gamma must be in [0, 1)");
  if (norm_A * consensus_factor() >= 1.0)
    throw Error(ErrorCode::DivergentGeometry,
                "||A|| gamma^L = " + std::to_string(norm_A * consensus_factor()) + " >= 1");
}

double BoundParams::p0() const {
  const double gl = consensus_factor();
  return std::sqrt(static_cast<double>(N)) * beta * gl / (1.0 - norm_A * gl);
}

double BoundParams::q0() const {
  const double n = static_cast<double>(N);
  return ((n - s) / n) * (b_w + b_v + norm_A * p0()) + b_w + s * beta / n;
}

double BoundParams::k_star(double rho, double disagreement) const {
  const double denom = norm_A * (disagreement + rho) + b_w + b_v;
  if (!(denom > 0.0)) return beta > 0.0 ? 1.0 : 0.0;
  return std::min(1.0, beta / denom);
}

double BoundParams::F(double rho, double disagreement) const {
  return norm_A * (1.0 - k_star(rho, disagreement) * lambda0 / static_cast<double>(N));
}

double BoundParams::p(int t) const {
  if (t <= 0) return 0.0;
  const double gl = consensus_factor();
  const double r = norm_A * gl;
  return std::sqrt(static_cast<double>(N)) * beta * gl * (1.0 - std::pow(r, t)) / (1.0 - r);
}

BoundParams make_bound_params(const LtiSystem& sys, const SensorGraph& g, double beta, int L,
                              int s, const EnumerationOptions& opts) {
  if (g.size() != sys.sensors())
    throw Error(ErrorCode::DimensionMismatch, "graph and system sensor counts differ");
  BoundParams p;
  p.beta = beta;
  p.L = L;
  p.eta0 = sys.eta0;
  p.lambda0 = lambda0(sys.C, s, opts);
  p.norm_A = sys.norm_A;
  p.b_w = sys.b_w;
  p.b_v = sys.b_v;
  p.s = s;
  p.N = sys.sensors();
  p.gamma = spectral_params(g).gamma;
  p.validate();
  return p;
}

double p_of_t(const BoundParams& params, int t) {
  params.validate();
  return params.p(t);
}

bool BoundSequence::in_gamma(int t) const {
  return std::binary_search(gamma_set.begin(), gamma_set.end(), t);
}

BoundSequence rho_sequence(const BoundParams& params, int T) {
  params.validate();
  if (T < 0) throw Error(ErrorCode::InvalidArgument, "negative horizon");
  BoundSequence seq;
  seq.params = params;
  seq.q0 = params.q0();
  seq.p0 = params.p0();
  seq.rho.reserve(T + 1);
  seq.rho.push_back(params.eta0);
  for (int t = 0; t < T; ++t) {
    const double r = seq.rho.back();
    seq.rho.push_back(params.F(r) * r + seq.q0);
    if (seq.rho[t + 1] <= seq.rho[t]) seq.gamma_set.push_back(t + 1);
  }
  return seq;
}

Condition9 check_condition9(const BoundParams& params) {
  params.validate();
  Condition9 c;
  c.slack = params.eta0 * (1.0 - params.F(params.eta0)) - params.q0();
  c.holds = c.slack >= 0.0;
  return c;
}

double geometric_envelope(double x, double rho_t0, double q0, int steps) {
  if (steps <= 0) return rho_t0;
  if (x == 1.0) return rho_t0 + q0 * steps;
  const double xk = std::pow(x, steps);
  return xk * rho_t0 + q0 * (1.0 - xk) / (1.0 - x);
}

double realtime_bound_unchecked(const BoundSequence& seq, int t0, int t) {
  if (t0 < 0 || t0 > seq.horizon())
    throw Error(ErrorCode::InvalidArgument, "anchor outside the computed horizon");
  if (t < t0) throw Error(ErrorCode::InvalidArgument, "bound needs t >= t0");
  const double r = seq.rho[t0];
  return geometric_envelope(seq.params.F(r), r, seq.q0, t - t0) + seq.params.p(t);
}

double bound_realtime(const BoundSequence& seq, int t0, int t) {
  if (!seq.in_gamma(t0))
    throw Error(ErrorCode::NotInGamma, "t0 = " + std::to_string(t0) + " is not a non-increase instant");
  return realtime_bound_unchecked(seq, t0, t);
}

double bound_uniform(const BoundSequence& seq, int t0) {
  if (!seq.in_gamma(t0))
    throw Error(ErrorCode::NotInGamma, "t0 = " + std::to_string(t0) + " is not a non-increase instant");
  return seq.rho[t0] + seq.p0;
}

LimsupBound bound_limsup(const BoundSequence& seq) {
  if (seq.gamma_set.empty())
    throw Error(ErrorCode::NotInGamma,
                "no non-increase instant within horizon " + std::to_string(seq.horizon()));
  LimsupBound out;
  out.horizon = seq.horizon();
  out.argmin_t0 = seq.gamma_set.front();
  for (int t : seq.gamma_set)
    if (seq.rho[t] < seq.rho[out.argmin_t0]) out.argmin_t0 = t;
  out.value = seq.rho[out.argmin_t0] + seq.p0;
  const int T = seq.horizon();
  out.settled = T >= 1 && std::abs(seq.rho[T] - seq.rho[T - 1]) <= 1e-12;
  return out;
}

Lemma1Result lemma1_iterate(const std::function<double(double)>& F, double q0, double x0, int T,
                            double F_upper, double tol) {
  if (!(q0 >= 0.0) || !(x0 >= 0.0)) throw Error(ErrorCode::InvalidArgument, "need q0, x0 >= 0");
  Lemma1Result res;
  res.x.reserve(T + 1);
  res.x.push_back(x0);
  for (int t = 0; t < T; ++t) {
    const double xt = res.x.back();
    res.x.push_back(F(xt) * xt + q0);
    if (res.x[t + 1] <= res.x[t]) res.gamma_set.push_back(t + 1);
  }

  // sampled monotonicity and range check, including the iterates themselves
  std::vector<double> probes = res.x;
  const double top = 1.5 * *std::max_element(res.x.begin(), res.x.end()) + 1.0;
  constexpr int kGrid = 1000;
  for (int k = 0; k <= kGrid; ++k) probes.push_back(top * k / kGrid);
  std::sort(probes.begin(), probes.end());
  double prev = -std::numeric_limits<double>::infinity();
  for (double p : probes) {
    const double v = F(p);
    if (v < 0.0 || v > F_upper)
      throw Error(ErrorCode::NonMonotone, "F leaves [0, " + std::to_string(F_upper) + "] at " + std::to_string(p));
    if (v < prev - 1e-12 * (1.0 + std::abs(prev))) throw Error(ErrorCode::NonMonotone, "F decreases near " + std::to_string(p));
    prev = v;
  }

  res.bounds_emitted = !res.gamma_set.empty();
  if (!res.bounds_emitted) return res;
  res.inf_gamma = std::numeric_limits<double>::infinity();
  for (int t0 : res.gamma_set) res.inf_gamma = std::min(res.inf_gamma, res.x[t0]);

  for (int t0 : res.gamma_set) {
    const double base = res.x[t0];
    const double f0 = F(base);
    for (int t = t0; t <= T; ++t) {
      if (res.x[t] > base + relative_tol(tol, base)) {
        res.claim1 = false;
        ++res.violations;
      }
      if (q0 > 0.0) {
        const double env = geometric_envelope(f0, base, q0, t - t0);
        if (res.x[t] > env + relative_tol(tol, env)) {
          res.claim2 = false;
          ++res.violations;
        }
      }
    }
  }
  if (res.x[T] > res.inf_gamma + relative_tol(tol, res.inf_gamma)) {
    res.claim3 = false;
    ++res.violations;
  }
  return res;
}

double varpi(const Matrix& A, const std::vector<RowVector>& C, int s,
             const EnumerationOptions& opts) {
  const int N = static_cast<int>(C.size());
  if (N == 0) throw Error(ErrorCode::InvalidArgument, "no observation rows");
  check_budget(N, s);
  const double n = static_cast<double>(N);
  if (opts.allow_fast_path && A.rows() == 1) {
    // |1 - S/N| is convex in the subset sum S, so the extremes decide
    auto sq = sorted_squares(C);
    double lo = 0.0, hi = 0.0;
    for (int i = 0; i < N - s; ++i) lo += sq[i];
    for (int i = s; i < N; ++i) hi += sq[i];
    return std::abs(A(0, 0)) * std::max(std::abs(1.0 - lo / n), std::abs(1.0 - hi / n));
  }
  const Matrix total = gram(C);
  const Matrix I = Matrix::Identity(A.rows(), A.cols());
  double best = 0.0;
  for_each_subset(N, s, opts, [&](const std::vector<int>& removed) {
    Matrix m = total;
    for (int i : removed) m -= C[i].transpose() * C[i];
    best = std::max(best, spectral_norm((I - m / n) * A));
  });
  return best;
}

UnsaturatedBound bound_unsaturated(const BoundSequence& seq, int t0, double varpi_value) {
  if (!seq.in_gamma(t0))
    throw Error(ErrorCode::NotInGamma, "t0 = " + std::to_string(t0) + " is not a non-increase instant");
  const auto& p = seq.params;
  UnsaturatedBound out;
  out.varpi = varpi_value;
  out.threshold = (p.beta - p.b_w - p.b_v) / p.norm_A;
  out.condition10 = seq.rho[t0] + seq.p0 < out.threshold;
  if (!out.condition10) return out;
  out.varpi_below_F = varpi_value <= p.F(seq.rho[t0]) + kTolEig;
  if (varpi_value >= 1.0) return out;
  const double tail = seq.q0 / (1.0 - varpi_value);
  out.limsup = tail + seq.p0;
  double inf_gamma = std::numeric_limits<double>::infinity();
  for (int t : seq.gamma_set) inf_gamma = std::min(inf_gamma, seq.rho[t]);
  out.tail_claim = tail <= inf_gamma + relative_tol(1e-9, inf_gamma);
  return out;
}

double unsaturated_realtime(const BoundSequence& seq, int t0, double varpi_value, int t) {
  if (t < t0) throw Error(ErrorCode::InvalidArgument, "bound needs t >= t0");
  return geometric_envelope(varpi_value, seq.rho.at(t0), seq.q0, t - t0) + seq.params.p(t);
}

ResilienceCurve resilience_curve(const LtiSystem& sys, const SensorGraph& g, double beta, int L,
                                 const std::vector<int>& s_range,
                                 const EnumerationOptions& opts) {
  ResilienceCurve curve;
  const double gamma = spectral_params(g).gamma;
  for (int s : s_range) {
    BoundParams p;
    p.beta = beta;
    p.L = L;
    p.eta0 = sys.eta0;
    p.lambda0 = lambda0(sys.C, s, opts);
    p.norm_A = sys.norm_A;
    p.b_w = sys.b_w;
    p.b_v = sys.b_v;
    p.s = s;
    p.N = sys.sensors();
    p.gamma = gamma;
    p.validate();
    ResiliencePoint pt;
    pt.s = s;
    pt.lambda0 = p.lambda0;
    pt.q_bar = p.norm_A < 1.0 ? p.b_w + std::max(p.beta, p.b_w + p.b_v + p.norm_A * p.p0())
                              : p.q0();
    pt.F_eta0 = p.F(p.eta0);
    pt.f = pt.F_eta0 < 1.0 ? pt.q_bar / (1.0 - pt.F_eta0) + p.p0()
                           : std::numeric_limits<double>::infinity();
    pt.condition9 = check_condition9(p).holds;
    curve.points.push_back(pt);
  }
  std::sort(curve.points.begin(), curve.points.end(),
            [](const ResiliencePoint& a, const ResiliencePoint& b) { return a.s < b.s; });
  const ResiliencePoint* last = nullptr;
  for (const auto& pt : curve.points) {
    if (!pt.condition9) continue;
    if (last && pt.f < last->f - relative_tol(1e-12, last->f)) curve.monotone = false;
    last = &pt;
  }
  return curve;
}

namespace {

// Removal-set enumeration shared by the two observability checks.
bool every_removal(int N, int s, const EnumerationOptions& opts,
                   const std::function<bool(const std::vector<int>& kept)>& ok) {
  bool all = true;
  std::vector<int> kept;
  for_each_subset(N, s, opts, [&](const std::vector<int>& removed) {
    if (!all) return;
    kept.clear();
    std::size_t r = 0;
    for (int i = 0; i < N; ++i) {
      if (r < removed.size() && removed[r] == i) {
        ++r;
        continue;
      }
      kept.push_back(i);
    }
    if (!ok(kept)) all = false;
  });
  return all;
}

}  // namespace

bool sparse_observable(const Matrix& A, const std::vector<RowVector>& C, int s,
                       const EnumerationOptions& opts) {
  const int N = static_cast<int>(C.size());
  check_budget(N, s);
  const auto n = A.rows();
  if (opts.allow_fast_path && n == 1) {
    int nonzero = 0;
    for (const auto& row : C) nonzero += row(0) != 0.0;
    return nonzero > s;
  }
  return every_removal(N, s, opts, [&](const std::vector<int>& kept) {
    Matrix obs(static_cast<Eigen::Index>(kept.size()) * n, n);
    Matrix power = Matrix::Identity(n, n);
    for (Eigen::Index k = 0; k < n; ++k) {
      for (std::size_t r = 0; r < kept.size(); ++r)
        obs.row(k * static_cast<Eigen::Index>(kept.size()) + static_cast<Eigen::Index>(r)) =
            C[kept[r]] * power;
      power = power * A;
    }
    return numerical_rank(obs) == n;
  });
}

bool one_step_sparse_observable(const std::vector<RowVector>& C, int s,
                                const EnumerationOptions& opts) {
  const int N = static_cast<int>(C.size());
  check_budget(N, s);
  if (opts.allow_fast_path && C.front().size() == 1) {
    int nonzero = 0;
    for (const auto& row : C) nonzero += row(0) != 0.0;
    return nonzero > s;
  }
  const Matrix total = gram(C);
  return every_removal(N, s, opts, [&](const std::vector<int>& kept) {
    Matrix m = Matrix::Zero(total.rows(), total.cols());
    for (int i : kept) m += C[i].transpose() * C[i];
    return min_eigenvalue(m) > kTolEig;
  });
}

SparseObservabilityReport sparse_observability_report(const Matrix& A,
                                                      const std::vector<RowVector>& C, int s,
                                                      const EnumerationOptions& opts) {
  SparseObservabilityReport r;
  const int N = static_cast<int>(C.size());
  r.s = s;
  r.lambda0 = lambda0(C, s, opts);
  r.s_sparse = sparse_observable(A, C, s, opts);
  r.one_step_s = one_step_sparse_observable(C, s, opts);
  if (2 * s < N) r.one_step_2s = one_step_sparse_observable(C, 2 * s, opts);
  if (r.lambda0 > s + kTolEig) r.implication_holds = r.one_step_2s.value_or(false);
  return r;
}

namespace {

// sqrt(N) gamma^L / (1 - ||A|| gamma^L), so that p0 = beta times this factor
double disagreement_factor(int N, double gamma, int L, double norm_A) {
  const double gl = std::pow(gamma, L);
  return std::sqrt(static_cast<double>(N)) * gl / (1.0 - norm_A * gl);
}

}  // namespace

FeasibilityReport search_feasible_params(const LtiSystem& sys, const SensorGraph& g, int s,
                                         const SearchOptions& opts) {
  FeasibilityReport rep;
  const int N = sys.sensors();
  check_budget(N, s);
  rep.lambda0 = lambda0(sys.C, s, opts.enumeration);
  rep.condition_lambda0_gt_s = rep.lambda0 > s + kTolEig;
  if (!rep.condition_lambda0_gt_s) {
    rep.reason = "lambda0 > s violated: lambda0 = " + std::to_string(rep.lambda0) + ", s = " +
                 std::to_string(s) + "; no parameters can satisfy the contraction condition";
    return rep;
  }
  const double n = static_cast<double>(N);
  const double lam = rep.lambda0;
  rep.epsilon = s > 0 ? (lam - s) / (4.0 * (n - lam)) : lam / (2.0 * (2.0 * n - lam));
  const double normA = sys.norm_A;
  rep.norm_in_window = normA < 1.0 + rep.epsilon;
  if (!rep.norm_in_window) {
    rep.reason = "||A|| = " + std::to_string(normA) + " lies outside [1, 1 + epsilon), epsilon = " +
                 std::to_string(rep.epsilon);
    return rep;
  }
  const double gamma = spectral_params(g).gamma;
  const int L_min = min_consensus_steps(gamma, normA);
  const double eps = rep.epsilon;
  const double b = sys.b_w + sys.b_v;
  const double base = std::max(sys.eta0, 1.0);

  BoundParams p;
  p.lambda0 = lam;
  p.norm_A = normA;
  p.b_w = sys.b_w;
  p.b_v = sys.b_v;
  p.s = s;
  p.N = N;
  p.gamma = gamma;

  for (int k = 0; k < opts.max_doublings; ++k) {
    const double eta0 = base * std::ldexp(1.0, k);
    rep.eta0_doublings = k;
    p.eta0 = eta0;
    for (int L = L_min; L <= L_min + opts.max_extra_L; ++L) {
      const double c = disagreement_factor(N, gamma, L, normA);
      std::vector<double> candidates;
      if (s > 0) {
        const double denom = 1.0 - (1.0 + eps) * c;
        if (denom > 0.0) {
          const double lo = ((1.0 + eps) * eta0 + b) / denom;
          const double hi = (1.0 + eps + (lam - s) / (4.0 * s)) * eta0;
          if (lo <= hi) candidates = {lo, 0.5 * (lo + hi), hi};
        }
      } else {
        const double denom = 2.0 - (1.0 + eps) * c;
        if (denom > 0.0) candidates.push_back(((1.0 + eps) * eta0 + b) / denom);
        if (1.0 - normA * c > 0.0) candidates.push_back((normA * eta0 + b) / (1.0 - normA * c));
      }
      for (double beta : candidates) {
        p.beta = beta;
        p.L = L;
        if (normA * p.consensus_factor() >= 1.0) continue;
        const Condition9 c9 = check_condition9(p);
        if (c9.holds) {
          rep.found_params = FeasibilityWitness{beta, eta0, L};
          rep.condition9_holds = true;
          rep.slack = c9.slack;
          rep.reason = "witness found";
          return rep;
        }
      }
      // further rounds cannot shrink the disagreement factor any more
      if (c < 1e-300 || gamma == 0.0) break;
    }
  }
  throw Error(ErrorCode::SearchExhausted,
              "no witness after " + std::to_string(opts.max_doublings) + " doublings of eta0");
}

BetaSearchResult beta_grid_search(const BoundParams& base, BetaObjective objective,
                                  const std::vector<double>& grid, double varpi_value,
                                  int horizon) {
  BetaSearchResult res;
  for (double beta : grid) {
    BetaCandidate cand;
    cand.beta = beta;
    BoundParams p = base;
    p.beta = beta;
    if (!(beta > 0.0)) {
      cand.reason = "beta must be positive";
      res.candidates.push_back(cand);
      continue;
    }
    try {
      p.validate();
    } catch (const Error& e) {
      cand.reason = e.what();
      res.candidates.push_back(cand);
      continue;
    }
    const Condition9 c9 = check_condition9(p);
    if (!c9.holds) {
      cand.reason = "the contraction condition fails, slack " + std::to_string(c9.slack);
      res.candidates.push_back(cand);
      continue;
    }
    const double f_eta0 = p.F(p.eta0);
    if (objective == BetaObjective::Thm1) {
      cand.feasible = f_eta0 < 1.0;
      cand.objective = p.q0() / (1.0 - f_eta0) + p.p0();
      if (!cand.feasible) cand.reason = "F(eta0) >= 1";
    } else {
      const BoundSequence seq = rho_sequence(p, std::max(1, horizon));
      const UnsaturatedBound ub = bound_unsaturated(seq, 1, varpi_value);
      cand.feasible = ub.condition10 && ub.limsup.has_value();
      if (cand.feasible)
        cand.objective = *ub.limsup;
      else
        cand.reason = ub.condition10 ? "varpi >= 1" : "the unsaturation condition fails";
    }
    if (cand.feasible && (!res.best_beta || cand.objective < res.best_objective)) {
      res.best_beta = beta;
      res.best_objective = cand.objective;
    }
    res.candidates.push_back(cand);
  }
  return res;
}

}  // namespace secdf
