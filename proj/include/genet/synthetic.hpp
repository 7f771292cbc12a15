#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <iomanip>
#include <limits>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "genet/config.hpp"
#include "genet/error.hpp"
#include "genet/graph.hpp"
#include "genet/model_selection.hpp"
#include "genet/numerics.hpp"
#include "genet/penalty.hpp"
#include "genet/solvers.hpp"
#include "genet/theory.hpp"

namespace genet {

// ---------------------------------------------------------------------------
// Signals
// ---------------------------------------------------------------------------

enum class SignalFamily { piecewise_constant, smooth_ramp, mixed, barbell_levels };

inline const char* to_string(SignalFamily family) {
  switch (family) {
    case SignalFamily::piecewise_constant: return "piecewise_constant";
    case SignalFamily::smooth_ramp: return "smooth_ramp";
    case SignalFamily::mixed: return "mixed";
    case SignalFamily::barbell_levels: return "barbell_levels";
  }
  return "unknown";
}

inline SignalFamily parse_signal_family(const std::string& name) {
  if (name == "piecewise_constant" || name == "piecewise") return SignalFamily::piecewise_constant;
  if (name == "smooth_ramp" || name == "ramp") return SignalFamily::smooth_ramp;
  if (name == "mixed") return SignalFamily::mixed;
  if (name == "barbell_levels" || name == "barbell") return SignalFamily::barbell_levels;
  throw ValidationError("unknown signal family '" + name + "'");
}

/// Parametric graph-aligned signal.
///
/// Chain graphs:
///   piecewise_constant  n_jumps equal upward jumps of target_tv / n_jumps at
///                       edges floor((i+1) m / (n_jumps+1)).
///   smooth_ramp         ramp_edges consecutive edges from ramp_start, each
///                       rising by target_tv / ramp_edges (0 means all edges).
///   mixed               n_jumps upward steps in the leading flat region, then a
///                       descending ramp over ramp_edges edges, then a flat tail
///                       of floor((m - ramp_edges) / 4) edges. The ramp carries
///                       ramp_fraction of target_tv.
/// 2D grids (axis 0 = rows):
///   piecewise_constant  centered a x b island with 2(a + b) = n_jumps boundary
///                       edges, a = floor(n_jumps / 4); must not touch the border.
///   smooth_ramp         rows 0..ramp_edges rise linearly (0 means every row);
///                       only vertical edges carry variation.
///   mixed               descending ramp over the top ramp_edges row steps plus
///                       an island in the flat region below.
/// Barbell graphs:
///   barbell_levels      clique A at level_a, clique B at level_b, the path
///                       interpolating linearly; target_tv is ignored.
struct SignalSpec {
  SignalFamily family = SignalFamily::mixed;
  double target_tv = 15.0;
  Index n_jumps = 2;
  Index ramp_edges = 40;
  Index ramp_start = 0;
  double ramp_fraction = 0.5;
  double base_level = 1.0;
  double level_a = 20.0;
  double level_b = 5.0;
};

struct SignalStats {
  Index tv_l0 = 0;
  double tv_l1 = 0.0;
  double tv_linf = 0.0;
  std::vector<std::pair<double, double>> lq_sum;  // (q, sum_j |(Gamma beta)_j|^q)
  Index sparsity = 0;
};

/// Norms of Gamma beta with entries of magnitude <= 1e-12 treated as zero.
inline SignalStats signal_stats(const Graph& g, const Eigen::Ref<const Vector>& beta,
                                const std::vector<double>& q_list = {}) {
  detail::require(beta.size() == g.num_vertices(), "signal_stats: beta has wrong length");
  constexpr double kZero = 1e-12;
  SignalStats s;
  const Vector d = incidence_matrix(g) * beta;
  for (Index j = 0; j < d.size(); ++j) {
    const double a = std::abs(d(j));
    if (a <= kZero) continue;
    ++s.tv_l0;
    s.tv_l1 += a;
    s.tv_linf = std::max(s.tv_linf, a);
  }
  for (double q : q_list) {
    detail::require(q > 0.0 && q <= 1.0, "signal_stats: q must lie in (0, 1]");
    double sum = 0.0;
    for (Index j = 0; j < d.size(); ++j)
      if (std::abs(d(j)) > kZero) sum += std::pow(std::abs(d(j)), q);
    s.lq_sum.emplace_back(q, sum);
  }
  for (Index i = 0; i < beta.size(); ++i)
    if (std::abs(beta(i)) > kZero) ++s.sparsity;
  return s;
}

namespace detail {

inline Vector chain_signal(Index p, const SignalSpec& spec) {
  const Index m = p - 1;
  Vector beta = Vector::Constant(p, spec.base_level);
  // increments[e] = beta_{e+1} - beta_e
  std::vector<double> increments(static_cast<std::size_t>(std::max<Index>(m, 0)), 0.0);
  switch (spec.family) {
    case SignalFamily::piecewise_constant: {
      const Index j = spec.n_jumps;
      require(j >= 1 && j <= m, "signal: n_jumps must be between 1 and the number of edges");
      for (Index i = 0; i < j; ++i) increments[(i + 1) * m / (j + 1)] = spec.target_tv / static_cast<double>(j);
      break;
    }
    case SignalFamily::smooth_ramp: {
      require(spec.ramp_start >= 0 && spec.ramp_start < m, "signal: ramp_start out of range");
      const Index r = spec.ramp_edges == 0 ? m - spec.ramp_start : spec.ramp_edges;
      require(r >= 1 && spec.ramp_start + r <= m, "signal: ramp does not fit on the chain");
      for (Index e = spec.ramp_start; e < spec.ramp_start + r; ++e)
        increments[e] = spec.target_tv / static_cast<double>(r);
      break;
    }
    case SignalFamily::mixed: {
      const Index r = spec.ramp_edges;
      const Index j = spec.n_jumps;
      require(r >= 1 && r < m, "signal: ramp_edges must be in [1, m)");
      require(j >= 1, "signal: mixed signals need at least one jump");
      require(spec.ramp_fraction > 0.0 && spec.ramp_fraction < 1.0, "signal: ramp_fraction must be in (0, 1)");
      const Index pad = (m - r) / 4;
      const Index s = m - r - pad;
      require(j <= s, "signal: not enough edges before the ramp for the requested jumps");
      const double step = (1.0 - spec.ramp_fraction) * spec.target_tv / static_cast<double>(j);
      const double slope = spec.ramp_fraction * spec.target_tv / static_cast<double>(r);
      for (Index i = 0; i < j; ++i) increments[(i + 1) * s / (j + 1)] = step;
      for (Index e = s; e < s + r; ++e) increments[e] = -slope;
      break;
    }
    case SignalFamily::barbell_levels:
      throw ValidationError("signal: barbell_levels requires a barbell graph");
  }
  for (Index e = 0; e < m; ++e) beta(e + 1) = beta(e) + increments[e];
  return beta;
}

/// Adds `height` on a centered island with 2(a + b) boundary edges inside
/// rows [row_lo, row_hi) of a d0 x d1 grid.
inline void add_island(Vector& beta, Index d0, Index d1, Index row_lo, Index row_hi, Index jumps, double height) {
  require(jumps >= 4 && jumps % 2 == 0, "signal: grid island needs an even n_jumps >= 4");
  const Index a = jumps / 4;
  const Index b = jumps / 2 - a;
  require(a >= 1 && a <= row_hi - row_lo - 2 && b <= d1 - 2,
          "signal: island with the requested boundary does not fit inside the grid region");
  const Index r0 = row_lo + (row_hi - row_lo - a) / 2;
  const Index c0 = (d1 - b) / 2;
  for (Index i = r0; i < r0 + a; ++i)
    for (Index j = c0; j < c0 + b; ++j) beta(i * d1 + j) += height;
}

inline Vector grid_signal(const std::vector<Index>& shape, const SignalSpec& spec) {
  require(shape.size() == 2, "signal: grid signals require a 2D grid");
  const Index d0 = shape[0];
  const Index d1 = shape[1];
  Vector beta = Vector::Constant(d0 * d1, spec.base_level);
  auto ramp_rows = [&](Index rows, double tv, double direction) {
    require(rows >= 1 && rows <= d0 - 1, "signal: ramp rows out of range");
    const double h = tv / static_cast<double>(rows * d1);
    for (Index i = 0; i < d0; ++i) {
      const double level = direction * h * static_cast<double>(std::min(i, rows));
      for (Index j = 0; j < d1; ++j) beta(i * d1 + j) += level;
    }
  };
  switch (spec.family) {
    case SignalFamily::piecewise_constant:
      add_island(beta, d0, d1, 0, d0, spec.n_jumps, spec.target_tv / static_cast<double>(spec.n_jumps));
      break;
    case SignalFamily::smooth_ramp:
      ramp_rows(spec.ramp_edges == 0 ? d0 - 1 : spec.ramp_edges, spec.target_tv, 1.0);
      break;
    case SignalFamily::mixed: {
      require(spec.ramp_fraction > 0.0 && spec.ramp_fraction < 1.0, "signal: ramp_fraction must be in (0, 1)");
      const Index rows = spec.ramp_edges;
      ramp_rows(rows, spec.ramp_fraction * spec.target_tv, -1.0);
      add_island(beta, d0, d1, rows + 1, d0, spec.n_jumps,
                 (1.0 - spec.ramp_fraction) * spec.target_tv / static_cast<double>(spec.n_jumps));
      break;
    }
    case SignalFamily::barbell_levels:
      throw ValidationError("signal: barbell_levels requires a barbell graph");
  }
  return beta;
}

inline Vector barbell_signal(const Graph& g, const SignalSpec& spec) {
  require(g.kind() == GraphKind::barbell && g.shape().size() == 2, "signal: barbell_levels requires a barbell graph");
  const Index k = g.shape()[0];
  const Index len = g.shape()[1];
  const Index p = g.num_vertices();
  Vector beta(p);
  for (Index v = 0; v < k; ++v) beta(v) = spec.level_a;
  for (Index v = p - k; v < p; ++v) beta(v) = spec.level_b;
  for (Index t = 1; t < len; ++t)
    beta(k - 1 + t) = spec.level_a + (spec.level_b - spec.level_a) * static_cast<double>(t) / static_cast<double>(len);
  return beta;
}

}  // namespace detail

/// True signal on `g`; chain, 2D grid and barbell graphs are supported.
inline Vector make_signal(const Graph& g, const SignalSpec& spec) {
  detail::require(std::isfinite(spec.target_tv) && spec.target_tv >= 0.0, "signal: target_tv must be >= 0");
  if (spec.family == SignalFamily::barbell_levels) return detail::barbell_signal(g, spec);
  if (g.kind() == GraphKind::chain) return detail::chain_signal(g.num_vertices(), spec);
  if (g.kind() == GraphKind::grid && g.shape().size() == 1) return detail::chain_signal(g.num_vertices(), spec);
  if (g.kind() == GraphKind::grid) return detail::grid_signal(g.shape(), spec);
  throw ValidationError(std::string("signal: family '") + to_string(spec.family) +
                        "' is not defined on " + to_string(g.kind()) + " graphs");
}

// ---------------------------------------------------------------------------
// Data generation and metrics
// ---------------------------------------------------------------------------

struct Metrics {
  double estimation_error = 0.0;
  double prediction_error = 0.0;
};

struct ExperimentRun {
  Matrix x_train, x_val, x_test;
  Vector y_train, y_val, y_test;
  Vector beta_star;
  double sigma = 0.0;
  std::uint64_t seed = 0;
  std::map<std::string, Metrics> metrics;
};

/// Draws train, validation and test sets (in that order, each X before its
/// noise) from y = X beta* + N(0, sigma^2) with rows of X i.i.d. N(0, Sigma).
inline ExperimentRun simulate(const CovarianceMatrix& sigma_x, const Eigen::Ref<const Vector>& beta_star,
                              double sigma, Index n_train, Index n_val, Index n_test, std::uint64_t seed) {
  detail::require(std::isfinite(sigma) && sigma >= 0.0, "simulate: sigma must be >= 0");
  detail::require(sigma_x.dim() == beta_star.size(), "simulate: covariance and beta* dimensions differ");
  detail::require(n_train >= 1 && n_test >= 1 && n_val >= 0, "simulate: sample sizes must be positive");
  ExperimentRun run;
  run.beta_star = beta_star;
  run.sigma = sigma;
  run.seed = seed;
  SeededRng rng(seed);
  const GaussianSampler sampler(sigma_x);
  auto draw = [&](Index n, Matrix& x, Vector& y) {
    if (n == 0) {
      x = Matrix(0, beta_star.size());
      y = Vector(0);
      return;
    }
    x = sampler.sample(n, rng);
    y = x * beta_star;
    for (Index i = 0; i < n; ++i) y(i) += sigma * rng.normal();
  };
  draw(n_train, run.x_train, run.y_train);
  draw(n_val, run.x_val, run.y_val);
  draw(n_test, run.x_test, run.y_test);
  return run;
}

/// ||beta_hat - beta*||_2 and (1/n_test) ||X_test (beta_hat - beta*)||^2.
inline Metrics evaluate(const Eigen::Ref<const Vector>& beta_hat, const ExperimentRun& run) {
  detail::require(beta_hat.size() == run.beta_star.size(), "evaluate: beta has wrong length");
  const Vector diff = beta_hat - run.beta_star;
  Metrics m;
  m.estimation_error = diff.norm();
  m.prediction_error = (run.x_test * diff).squaredNorm() / static_cast<double>(run.x_test.rows());
  return m;
}

// ---------------------------------------------------------------------------
// Experiments
// ---------------------------------------------------------------------------

struct ExperimentDefinition {
  std::string graph = "chain:110";
  CovarianceKind covariance = CovarianceKind::toeplitz;
  double covariance_param = 0.5;
  SignalSpec signal;
  Index n_train = 70;
  Index n_val = 0;  // 0: k-fold CV on the training set
  Index n_test = 200;
  double sigma = 1.0;
  std::uint64_t seed = 1;
  Index replicates = 50;
  std::vector<Preset> estimators{Preset::ols, Preset::lasso, Preset::elastic_net,
                                 Preset::fused_lasso, Preset::smooth_lasso, Preset::gen};
  Index cv_folds = 5;
  std::map<std::string, std::vector<double>> grids;  // missing grids take default_grid()
  SolverOptions solver;
  LossConvention loss = LossConvention::half_sumsq;
  Index jobs = 1;

  void validate() const {
    detail::require(n_train >= 1 && n_test >= 1 && n_val >= 0, "experiment: sample sizes must be positive");
    detail::require(replicates >= 1, "experiment: replicates must be positive");
    detail::require(sigma >= 0.0, "experiment: sigma must be >= 0");
    detail::require(!estimators.empty(), "experiment: no estimators listed");
    detail::require(jobs >= 1, "experiment: jobs must be positive");
    if (n_val == 0) detail::require(cv_folds >= 2 && cv_folds <= n_train, "experiment: cv_folds must be in [2, n_train]");
  }
};

inline std::vector<std::string> experiment_keys() {
  return {"graph", "covariance", "covariance_param", "signal", "signal_tv", "signal_jumps",
          "signal_ramp_edges", "signal_ramp_start", "signal_ramp_fraction", "signal_base",
          "signal_level_a", "signal_level_b", "n_train", "n_val", "n_test", "sigma", "seed",
          "replicates", "estimators", "cv_folds", "solver", "tol", "max_iter", "loss", "jobs",
          "grid_lambda1", "grid_lambda2", "grid_lambdaL", "grid_lambdaE"};
}

inline CovarianceKind parse_covariance_kind(const std::string& name) {
  if (name == "identity") return CovarianceKind::identity;
  if (name == "toeplitz") return CovarianceKind::toeplitz;
  if (name == "laplacian_inverse") return CovarianceKind::laplacian_inverse;
  throw ValidationError("unknown covariance kind '" + name + "'");
}

inline ExperimentDefinition parse_experiment(const KeyValueConfig& cfg) {
  const auto known_list = experiment_keys();
  const std::set<std::string> known(known_list.begin(), known_list.end());
  const auto unknown = cfg.unknown_keys(known);
  detail::require(unknown.empty(), unknown.empty() ? "" : "experiment: unknown key '" + unknown.front() + "'");
  ExperimentDefinition def;
  def.graph = cfg.get("graph", def.graph);
  if (cfg.has("covariance")) def.covariance = parse_covariance_kind(cfg.get("covariance"));
  def.covariance_param = cfg.get_double("covariance_param", def.covariance_param);
  if (cfg.has("signal")) def.signal.family = parse_signal_family(cfg.get("signal"));
  def.signal.target_tv = cfg.get_double("signal_tv", def.signal.target_tv);
  def.signal.n_jumps = cfg.get_int("signal_jumps", def.signal.n_jumps);
  def.signal.ramp_edges = cfg.get_int("signal_ramp_edges", def.signal.ramp_edges);
  def.signal.ramp_start = cfg.get_int("signal_ramp_start", def.signal.ramp_start);
  def.signal.ramp_fraction = cfg.get_double("signal_ramp_fraction", def.signal.ramp_fraction);
  def.signal.base_level = cfg.get_double("signal_base", def.signal.base_level);
  def.signal.level_a = cfg.get_double("signal_level_a", def.signal.level_a);
  def.signal.level_b = cfg.get_double("signal_level_b", def.signal.level_b);
  def.n_train = cfg.get_int("n_train", def.n_train);
  def.n_val = cfg.get_int("n_val", def.n_val);
  def.n_test = cfg.get_int("n_test", def.n_test);
  def.sigma = cfg.get_double("sigma", def.sigma);
  def.seed = static_cast<std::uint64_t>(cfg.get_int("seed", static_cast<long long>(def.seed)));
  def.replicates = cfg.get_int("replicates", def.replicates);
  if (cfg.has("estimators")) {
    def.estimators.clear();
    for (const auto& name : KeyValueConfig::split_list(cfg.get("estimators")))
      def.estimators.push_back(parse_preset(name));
  }
  def.cv_folds = cfg.get_int("cv_folds", def.cv_folds);
  if (cfg.has("solver")) def.solver.solver = parse_solver_kind(cfg.get("solver"));
  else def.solver.solver = SolverKind::automatic;
  if (cfg.has("tol")) def.solver.tol = cfg.get_double("tol", 1e-4);
  def.solver.max_iter = cfg.get_int("max_iter", 0);
  if (cfg.has("loss")) def.loss = parse_loss_convention(cfg.get("loss"));
  def.jobs = cfg.get_int("jobs", def.jobs);
  for (const auto& name : hyperparameter_names())
    if (cfg.has("grid_" + name)) def.grids[name] = parse_grid(cfg.get("grid_" + name));
  def.validate();
  return def;
}

/// One (replicate, estimator) outcome.
struct ReplicateRecord {
  Index replicate = 0;
  std::uint64_t seed = 0;
  Preset estimator = Preset::ols;
  bool ok = false;
  std::string failure;
  Metrics metrics;
  Hyperparams params;
};

struct EstimatorSummary {
  Preset estimator = Preset::ols;
  Index n_ok = 0;
  Index n_failed = 0;
  double est_median = 0.0, est_q25 = 0.0, est_q75 = 0.0;
  double pred_median = 0.0, pred_q25 = 0.0, pred_q75 = 0.0;
};

struct ExperimentResult {
  Vector beta_star;
  SignalStats signal;
  std::vector<ReplicateRecord> records;  // replicate-major, estimators in definition order
  std::vector<EstimatorSummary> summary;
};

/// Linear interpolation between order statistics at position q (n - 1).
inline double quantile(std::vector<double> values, double q) {
  detail::require(!values.empty(), "quantile: no values");
  detail::require(q >= 0.0 && q <= 1.0, "quantile: q must be in [0, 1]");
  std::sort(values.begin(), values.end());
  const double pos = q * static_cast<double>(values.size() - 1);
  const std::size_t lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  return values[lo] + (pos - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

inline CovarianceMatrix experiment_covariance(const ExperimentDefinition& def, const Graph& g) {
  switch (def.covariance) {
    case CovarianceKind::identity: return identity_covariance(g.num_vertices());
    case CovarianceKind::toeplitz: return toeplitz_covariance(g.num_vertices(), def.covariance_param);
    case CovarianceKind::laplacian_inverse: return laplacian_inverse_covariance(g, def.covariance_param);
    case CovarianceKind::custom: break;
  }
  throw ValidationError("experiment: custom covariance is not supported in definitions");
}

/// Fits one estimator on a replicate, tuning by k-fold CV on the training
/// set or by the validation set when the run has one.
inline FitResult tune_and_fit(const ExperimentDefinition& def, const Graph& g, const ExperimentRun& run,
                              Preset preset, Hyperparams* chosen = nullptr) {
  if (preset == Preset::ols) {
    const PenaltySpec spec = make_estimator(Preset::ols, &g, {}, def.loss);
    if (chosen) *chosen = {};
    return fit(run.x_train, run.y_train, spec, def.solver);
  }
  CVPlan plan;
  plan.k = def.cv_folds;
  plan.seed = run.seed;
  plan.preset = preset;
  plan.loss = def.loss;
  for (const auto& name : preset_hyperparameters(preset)) {
    auto it = def.grids.find(name);
    plan.grids[name] = it != def.grids.end() ? it->second : default_grid();
  }
  const CVResult cv = run.x_val.rows() > 0
                          ? grid_search_holdout(run.x_train, run.y_train, run.x_val, run.y_val, &g, plan, def.solver)
                          : grid_search_cv(run.x_train, run.y_train, &g, plan, def.solver);
  if (!cv.any_valid) throw ConvergenceError("no grid point converged on every fold");
  if (chosen) *chosen = cv.best_params;
  return cv.refit;
}

/// Runs every replicate (seed_i = seed + i) and estimator. Failures are
/// recorded per (replicate, estimator) and excluded from the summary.
inline ExperimentResult run_experiment(const ExperimentDefinition& def,
                                       const std::function<void(const ReplicateRecord&)>& on_record = {}) {
  def.validate();
  const Graph g = looks_like_graph_preset(def.graph) ? parse_graph_preset(def.graph) : read_edge_list(def.graph);
  const CovarianceMatrix sigma_x = experiment_covariance(def, g);
  ExperimentResult result;
  result.beta_star = make_signal(g, def.signal);
  result.signal = signal_stats(g, result.beta_star);

  const std::size_t n_est = def.estimators.size();
  result.records.resize(static_cast<std::size_t>(def.replicates) * n_est);
  auto run_replicate = [&](Index r) {
    const std::uint64_t seed = def.seed + static_cast<std::uint64_t>(r);
    const ExperimentRun run = simulate(sigma_x, result.beta_star, def.sigma, def.n_train, def.n_val, def.n_test, seed);
    for (std::size_t e = 0; e < n_est; ++e) {
      ReplicateRecord& rec = result.records[static_cast<std::size_t>(r) * n_est + e];
      rec.replicate = r;
      rec.seed = seed;
      rec.estimator = def.estimators[e];
      try {
        const FitResult f = tune_and_fit(def, g, run, rec.estimator, &rec.params);
        rec.metrics = evaluate(f.beta_hat, run);
        rec.ok = std::isfinite(rec.metrics.estimation_error) && std::isfinite(rec.metrics.prediction_error);
        if (!rec.ok) rec.failure = "non-finite metrics";
      } catch (const Error& err) {
        rec.ok = false;
        rec.failure = err.what();
      }
    }
  };
  const Index workers = std::min<Index>(def.jobs, def.replicates);
  if (workers <= 1) {
    for (Index r = 0; r < def.replicates; ++r) {
      run_replicate(r);
      if (on_record)
        for (std::size_t e = 0; e < n_est; ++e) on_record(result.records[static_cast<std::size_t>(r) * n_est + e]);
    }
  } else {
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(static_cast<std::size_t>(workers));
    for (Index w = 0; w < workers; ++w)
      pool.emplace_back([&, w] {
        try {
          for (Index r = w; r < def.replicates; r += workers) run_replicate(r);
        } catch (...) {
          errors[static_cast<std::size_t>(w)] = std::current_exception();
        }
      });
    for (auto& t : pool) t.join();
    for (auto& e : errors)
      if (e) std::rethrow_exception(e);
    if (on_record)
      for (const auto& rec : result.records) on_record(rec);
  }

  for (std::size_t e = 0; e < n_est; ++e) {
    EstimatorSummary s;
    s.estimator = def.estimators[e];
    std::vector<double> est, pred;
    for (Index r = 0; r < def.replicates; ++r) {
      const ReplicateRecord& rec = result.records[static_cast<std::size_t>(r) * n_est + e];
      if (!rec.ok) {
        ++s.n_failed;
        continue;
      }
      ++s.n_ok;
      est.push_back(rec.metrics.estimation_error);
      pred.push_back(rec.metrics.prediction_error);
    }
    if (!est.empty()) {
      s.est_median = quantile(est, 0.5);
      s.est_q25 = quantile(est, 0.25);
      s.est_q75 = quantile(est, 0.75);
      s.pred_median = quantile(pred, 0.5);
      s.pred_q25 = quantile(pred, 0.25);
      s.pred_q75 = quantile(pred, 0.75);
    } else {
      const double nan = std::numeric_limits<double>::quiet_NaN();
      s.est_median = s.est_q25 = s.est_q75 = s.pred_median = s.pred_q25 = s.pred_q75 = nan;
    }
    result.summary.push_back(s);
  }
  return result;
}

inline void write_replicates_csv(std::ostream& os, const ExperimentResult& result) {
  os << "replicate,seed,estimator,ok,estimation_error,prediction_error,lambda1,lambda2,lambdaL,lambdaE,failure\n";
  os << std::setprecision(17);
  for (const auto& r : result.records) {
    std::string failure = r.failure;
    std::replace(failure.begin(), failure.end(), ',', ';');
    std::replace(failure.begin(), failure.end(), '\n', ' ');
    os << r.replicate << ',' << r.seed << ',' << to_string(r.estimator) << ',' << (r.ok ? 1 : 0) << ','
       << r.metrics.estimation_error << ',' << r.metrics.prediction_error << ',' << r.params.lambda1 << ','
       << r.params.lambda2 << ',' << r.params.lambdaL << ',' << r.params.lambdaE << ',' << failure << '\n';
  }
}

inline void write_summary_csv(std::ostream& os, const ExperimentResult& result) {
  os << "estimator,n_ok,n_failed,est_median,est_q25,est_q75,pred_median,pred_q25,pred_q75\n";
  os << std::setprecision(17);
  for (const auto& s : result.summary)
    os << to_string(s.estimator) << ',' << s.n_ok << ',' << s.n_failed << ',' << s.est_median << ',' << s.est_q25
       << ',' << s.est_q75 << ',' << s.pred_median << ',' << s.pred_q25 << ',' << s.pred_q75 << '\n';
}

// ---------------------------------------------------------------------------
// Runtime benchmark instances
// ---------------------------------------------------------------------------

/// A timing instance: X ~ N(0, I), half the vertices one jump above the rest
/// (so ||Gamma beta*||_inf = jump), sigma = 1, and the GEN penalty at the
/// theoretical lambda1 with lambda2 = lambda1 / (8 jump), mean convention.
struct BenchInstance {
  Graph graph;
  Matrix x;
  Vector y;
  Vector beta_star;
  TheoryTuning tuning;
  PenaltySpec spec;
};

/// Graph for a bench point; "grid" is square and needs a perfect-square p.
inline Graph bench_graph(Index p, const std::string& kind) {
  if (kind == "grid") {
    const auto side = static_cast<Index>(std::llround(std::sqrt(static_cast<double>(p))));
    detail::require(side * side == p, "bench: grid points need p to be a perfect square");
    return grid_graph({side, side});
  }
  return build_graph(parse_graph_kind(kind), {p});
}

inline BenchInstance bench_instance(Index n, Index p, const std::string& kind, double jump, std::uint64_t seed) {
  detail::require(n >= 1 && p >= 2, "bench: need n >= 1 and p >= 2");
  detail::require(jump > 0.0, "bench: jump must be positive");
  BenchInstance inst{bench_graph(p, kind), {}, {}, Vector::Zero(p), {}, {}};
  inst.beta_star.head(p / 2).setConstant(jump);
  SeededRng rng(seed);
  inst.x = sample_gaussian_rows(n, identity_covariance(p), rng);
  inst.y = inst.x * inst.beta_star + standard_normal_vector(n, rng);
  inst.tuning = theoretical_lambdas(1.0, Matrix::Identity(p, p), inst.graph, n, inst.beta_star);
  const Hyperparams h{inst.tuning.lambda1, inst.tuning.lambda2, 0.0, 0.0};
  inst.spec = make_estimator(Preset::gen, &inst.graph, h, LossConvention::mean_sumsq);
  return inst;
}

}  // namespace genet
