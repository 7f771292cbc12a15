#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iomanip>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <tuple>
#include <utility>
#include <vector>

#include "genet/error.hpp"
#include "genet/graph.hpp"
#include "genet/numerics.hpp"
#include "genet/penalty.hpp"
#include "genet/solvers.hpp"

namespace genet {

// ---------------------------------------------------------------------------
// Folds
// ---------------------------------------------------------------------------

/// Seeded permutation of [0, n) cut into k contiguous blocks; the first n % k
/// blocks hold one extra index. Indices are sorted within each block.
inline std::vector<std::vector<Index>> kfold_indices(Index n, Index k, std::uint64_t seed) {
  detail::require(k >= 2, "kfold: k must be at least 2");
  detail::require(k <= n, "kfold: k must not exceed n");
  std::vector<Index> perm(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) perm[i] = i;
  // Fisher-Yates with our own bounded draws; std::shuffle is not portable.
  SeededRng rng(seed);
  for (Index i = n - 1; i > 0; --i) {
    const Index j = static_cast<Index>(rng.uniform_index(static_cast<std::uint64_t>(i + 1)));
    std::swap(perm[i], perm[j]);
  }
  std::vector<std::vector<Index>> folds(static_cast<std::size_t>(k));
  const Index base = n / k;
  const Index extra = n % k;
  Index pos = 0;
  for (Index f = 0; f < k; ++f) {
    const Index size = base + (f < extra ? 1 : 0);
    folds[f].assign(perm.begin() + pos, perm.begin() + pos + size);
    std::sort(folds[f].begin(), folds[f].end());
    pos += size;
  }
  return folds;
}

namespace detail {

inline Matrix select_rows(const Eigen::Ref<const Matrix>& x, const std::vector<Index>& rows) {
  Matrix out(static_cast<Index>(rows.size()), x.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) out.row(static_cast<Index>(i)) = x.row(rows[i]);
  return out;
}

inline Vector select_entries(const Eigen::Ref<const Vector>& y, const std::vector<Index>& rows) {
  Vector out(static_cast<Index>(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) out(static_cast<Index>(i)) = y(rows[i]);
  return out;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Grids
// ---------------------------------------------------------------------------

inline const std::vector<std::string>& hyperparameter_names() {
  static const std::vector<std::string> names{"lambda1", "lambda2", "lambdaL", "lambdaE"};
  return names;
}

/// Hyperparameters a preset actually reads.
inline std::vector<std::string> preset_hyperparameters(Preset preset) {
  switch (preset) {
    case Preset::ols: return {};
    case Preset::lasso: return {"lambdaL"};
    case Preset::elastic_net: return {"lambdaL", "lambdaE"};
    case Preset::fused_lasso: return {"lambda1", "lambdaL"};
    case Preset::smooth_lasso: return {"lambda2", "lambdaL"};
    case Preset::gen: return {"lambda1", "lambda2"};
  }
  return {};
}

inline double& hyperparameter_ref(Hyperparams& h, const std::string& name) {
  if (name == "lambda1") return h.lambda1;
  if (name == "lambda2") return h.lambda2;
  if (name == "lambdaL") return h.lambdaL;
  if (name == "lambdaE") return h.lambdaE;
  throw ValidationError("unknown hyperparameter '" + name + "'");
}

inline double hyperparameter_value(const Hyperparams& h, const std::string& name) {
  Hyperparams copy = h;
  return hyperparameter_ref(copy, name);
}

/// `count` log-spaced values from lo to hi inclusive.
inline std::vector<double> log_grid(double lo, double hi, Index count) {
  detail::require(lo > 0.0 && hi >= lo, "log_grid: need 0 < lo <= hi");
  detail::require(count >= 1, "log_grid: count must be positive");
  std::vector<double> out;
  if (count == 1) return {lo};
  const double a = std::log10(lo);
  const double b = std::log10(hi);
  for (Index i = 0; i < count; ++i)
    out.push_back(std::pow(10.0, a + (b - a) * static_cast<double>(i) / static_cast<double>(count - 1)));
  return out;
}

/// 0 followed by 20 log-spaced values on [1e-3, 1e2].
inline std::vector<double> default_grid() {
  std::vector<double> grid{0.0};
  const auto logs = log_grid(1e-3, 1e2, 20);
  grid.insert(grid.end(), logs.begin(), logs.end());
  return grid;
}

/// Comma-separated values; a token "log:LO:HI:N" expands to a log-spaced run.
/// The result is sorted ascending with duplicates removed.
inline std::vector<double> parse_grid(const std::string& text) {
  std::vector<double> values;
  std::stringstream ss(text);
  std::string token;
  auto to_double = [](const std::string& s) {
    try {
      std::size_t used = 0;
      const double v = std::stod(s, &used);
      if (used != s.size()) throw std::invalid_argument(s);
      return v;
    } catch (const std::exception&) {
      throw ValidationError("grid: cannot parse number '" + s + "'");
    }
  };
  while (std::getline(ss, token, ',')) {
    token.erase(0, token.find_first_not_of(" \t"));
    token.erase(token.find_last_not_of(" \t") + 1);
    if (token.empty()) continue;
    if (token.rfind("log:", 0) == 0) {
      std::vector<std::string> parts;
      std::stringstream ts(token.substr(4));
      std::string part;
      while (std::getline(ts, part, ':')) parts.push_back(part);
      detail::require(parts.size() == 3, "grid: log token must be log:LO:HI:N");
      const double count = to_double(parts[2]);
      detail::require(count >= 1 && count == std::floor(count), "grid: log count must be a positive integer");
      const auto run = log_grid(to_double(parts[0]), to_double(parts[1]), static_cast<Index>(count));
      values.insert(values.end(), run.begin(), run.end());
    } else {
      values.push_back(to_double(token));
    }
  }
  detail::require(!values.empty(), "grid: no values in '" + text + "'");
  for (double v : values) detail::require(std::isfinite(v) && v >= 0.0, "grid: values must be finite and >= 0");
  std::sort(values.begin(), values.end());
  values.erase(std::unique(values.begin(), values.end()), values.end());
  return values;
}

// ---------------------------------------------------------------------------
// Cross-validation
// ---------------------------------------------------------------------------

struct CVPlan {
  Index k = 5;
  std::uint64_t seed = 0;
  Preset preset = Preset::gen;
  std::map<std::string, std::vector<double>> grids;
  LossConvention loss = LossConvention::half_sumsq;
  Index jobs = 1;

  /// Fills every missing grid the preset needs with default_grid().
  void fill_default_grids() {
    for (const auto& name : preset_hyperparameters(preset))
      if (grids.find(name) == grids.end()) grids[name] = default_grid();
  }

  void validate() const {
    detail::require(k >= 2, "cv: k must be at least 2");
    detail::require(jobs >= 1, "cv: jobs must be positive");
    for (const auto& name : preset_hyperparameters(preset)) {
      auto it = grids.find(name);
      detail::require(it != grids.end(), "cv: no grid for '" + name + "'");
    }
    for (const auto& [name, values] : grids) {
      hyperparameter_value(Hyperparams{}, name);
      detail::require(!values.empty(), "cv: grid '" + name + "' is empty");
      for (double v : values)
        detail::require(std::isfinite(v) && v >= 0.0, "cv: grid '" + name + "' has a negative or non-finite value");
    }
  }
};

struct CVEntry {
  Hyperparams params;
  double mean_score = 0.0;
  std::vector<double> fold_scores;
  bool valid = true;  // converged on every fold
  Index failed_folds = 0;
};

struct CVResult {
  std::vector<std::string> names;  // hyperparameters varied, table column order
  std::vector<CVEntry> table;
  Index best_index = 0;
  Hyperparams best_params;
  bool any_valid = true;
  FitResult refit;
};

/// A training set paired with its validation set.
struct DataSplit {
  Matrix x_train;
  Vector y_train;
  Matrix x_val;
  Vector y_val;
};

namespace detail {

/// Cartesian product of the preset's grids, each sorted ascending; the last
/// name varies fastest.
inline std::vector<Hyperparams> enumerate_grid(const CVPlan& plan, std::vector<std::string>& names) {
  names = preset_hyperparameters(plan.preset);
  std::vector<std::vector<double>> axes;
  for (const auto& name : names) {
    std::vector<double> values = plan.grids.at(name);
    std::sort(values.begin(), values.end());
    values.erase(std::unique(values.begin(), values.end()), values.end());
    axes.push_back(values);
  }
  std::vector<Hyperparams> points{Hyperparams{}};
  for (std::size_t a = 0; a < axes.size(); ++a) {
    std::vector<Hyperparams> next;
    for (const auto& base : points)
      for (double v : axes[a]) {
        Hyperparams h = base;
        hyperparameter_ref(h, names[a]) = v;
        next.push_back(h);
      }
    points = std::move(next);
  }
  return points;
}

/// Grid points that share a signature share the augmented design and the l1
/// matrix, so they share one dual factorization and differ only in the box.
inline std::pair<double, int> structure_signature(Preset preset, const Hyperparams& h) {
  const double l2 = preset == Preset::elastic_net ? h.lambdaE
                    : (preset == Preset::gen || preset == Preset::smooth_lasso) ? h.lambda2
                                                                                  : 0.0;
  const int mask = (h.lambda1 > 0.0 ? 1 : 0) | (h.lambdaL > 0.0 ? 2 : 0);
  return {l2, mask};
}

inline double half_mse_score(const Matrix& x_val, const Vector& y_val, const Vector& beta) {
  return -(y_val - x_val * beta).squaredNorm() / static_cast<double>(y_val.size());
}

struct SplitScores {
  std::vector<double> scores;
  std::vector<char> converged;
};

/// Scores every grid point on one split, caching the dual per signature and
/// warm-starting CD and ADMM along ascending lambda1.
inline SplitScores score_split(const DataSplit& split, const Graph* graph, const CVPlan& plan,
                               const std::vector<Hyperparams>& points, const SolverOptions& opt) {
  SplitScores out;
  out.scores.assign(points.size(), 0.0);
  out.converged.assign(points.size(), 0);
  std::vector<std::size_t> order(points.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const auto sa = structure_signature(plan.preset, points[a]);
    const auto sb = structure_signature(plan.preset, points[b]);
    if (sa != sb) return sa < sb;
    return std::tie(points[a].lambdaL, points[a].lambda1) < std::tie(points[b].lambdaL, points[b].lambda1);
  });
  const Index p = split.x_train.cols();
  std::optional<std::pair<double, int>> cached_sig;
  std::optional<DualProblem> cached_dual;
  std::optional<WarmStart> warm;
  for (std::size_t idx : order) {
    const Hyperparams& h = points[idx];
    const PenaltySpec spec = make_estimator(plan.preset, graph, h, plan.loss, p);
    const AugmentedProblem ap = augment(split.x_train, split.y_train, spec);
    const auto sig = structure_signature(plan.preset, h);
    if (!cached_sig || *cached_sig != sig) {
      cached_dual = build_dual(ap, opt.svd_tol);
      cached_sig = sig;
      warm.reset();
    } else {
      cached_dual = with_box(std::move(*cached_dual), ap.box_radii());
    }
    const FitResult fit = fit_augmented(ap, *cached_dual, opt, warm ? &*warm : nullptr);
    if (fit.dual.u.size() == cached_dual->m1() && fit.converged)
      warm = WarmStart{fit.dual.u, fit.beta_hat, fit.admm_rho};
    out.scores[idx] = half_mse_score(split.x_val, split.y_val, fit.beta_hat);
    out.converged[idx] = fit.converged ? 1 : 0;
  }
  return out;
}

/// True when a should be preferred over b at equal score.
inline bool prefer_on_tie(const Hyperparams& a, const Hyperparams& b) {
  return std::tie(a.lambda2, a.lambda1, a.lambdaL, a.lambdaE) >
         std::tie(b.lambda2, b.lambda1, b.lambdaL, b.lambdaE);
}

inline CVResult run_grid_search(const std::vector<DataSplit>& splits, const Matrix& x_refit,
                                const Vector& y_refit, const Graph* graph, const CVPlan& plan,
                                const SolverOptions& opt) {
  plan.validate();
  CVResult result;
  const std::vector<Hyperparams> points = enumerate_grid(plan, result.names);
  std::vector<SplitScores> per_split(splits.size());
  const std::size_t workers = std::min<std::size_t>(static_cast<std::size_t>(plan.jobs), splits.size());
  if (workers <= 1) {
    for (std::size_t s = 0; s < splits.size(); ++s)
      per_split[s] = score_split(splits[s], graph, plan, points, opt);
  } else {
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(workers);
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        try {
          for (std::size_t s = w; s < splits.size(); s += workers)
            per_split[s] = score_split(splits[s], graph, plan, points, opt);
        } catch (...) {
          errors[w] = std::current_exception();
        }
      });
    }
    for (auto& t : pool) t.join();
    for (auto& e : errors)
      if (e) std::rethrow_exception(e);
  }

  result.table.resize(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) {
    CVEntry& entry = result.table[i];
    entry.params = points[i];
    double total = 0.0;
    for (const auto& s : per_split) {
      entry.fold_scores.push_back(s.scores[i]);
      total += s.scores[i];
      if (!s.converged[i]) ++entry.failed_folds;
    }
    entry.mean_score = total / static_cast<double>(per_split.size());
    entry.valid = entry.failed_folds == 0 && std::isfinite(entry.mean_score);
  }

  auto pick = [&](bool require_valid) -> std::optional<std::size_t> {
    std::optional<std::size_t> best;
    for (std::size_t i = 0; i < result.table.size(); ++i) {
      const CVEntry& e = result.table[i];
      if (require_valid && !e.valid) continue;
      if (!std::isfinite(e.mean_score)) continue;
      if (!best) {
        best = i;
        continue;
      }
      const CVEntry& b = result.table[*best];
      if (e.mean_score > b.mean_score ||
          (e.mean_score == b.mean_score && prefer_on_tie(e.params, b.params)))
        best = i;
    }
    return best;
  };
  auto best = pick(true);
  result.any_valid = best.has_value();
  if (!best) best = pick(false);
  detail::require(best.has_value(), "cv: every grid point produced a non-finite score");
  result.best_index = static_cast<Index>(*best);
  result.best_params = result.table[*best].params;
  const PenaltySpec spec = make_estimator(plan.preset, graph, result.best_params, plan.loss, x_refit.cols());
  result.refit = fit(x_refit, y_refit, spec, opt);
  return result;
}

}  // namespace detail

/// k-fold grid search scored by -(1/n_val) ||y_val - X_val beta||^2, refit on
/// all rows at the best point. Points that fail to converge on any fold are
/// kept in the table but excluded from the argmax; ties go to the larger
/// (lambda2, lambda1, lambdaL, lambdaE).
inline CVResult grid_search_cv(const Eigen::Ref<const Matrix>& x, const Eigen::Ref<const Vector>& y,
                               const Graph* graph, const CVPlan& plan, const SolverOptions& opt = {}) {
  detail::require(x.rows() == y.size(), "cv: X rows != length of y");
  plan.validate();
  const auto folds = kfold_indices(x.rows(), plan.k, plan.seed);
  std::vector<DataSplit> splits;
  for (std::size_t f = 0; f < folds.size(); ++f) {
    std::vector<Index> train;
    for (std::size_t g = 0; g < folds.size(); ++g)
      if (g != f) train.insert(train.end(), folds[g].begin(), folds[g].end());
    std::sort(train.begin(), train.end());
    splits.push_back({detail::select_rows(x, train), detail::select_entries(y, train),
                      detail::select_rows(x, folds[f]), detail::select_entries(y, folds[f])});
  }
  return detail::run_grid_search(splits, x, y, graph, plan, opt);
}

/// Grid search scored on a separate validation set; the refit uses the
/// training rows only. plan.k is ignored.
inline CVResult grid_search_holdout(const Eigen::Ref<const Matrix>& x_train, const Eigen::Ref<const Vector>& y_train,
                                    const Eigen::Ref<const Matrix>& x_val, const Eigen::Ref<const Vector>& y_val,
                                    const Graph* graph, CVPlan plan, const SolverOptions& opt = {}) {
  detail::require(x_train.rows() == y_train.size() && x_val.rows() == y_val.size(),
                  "holdout: X rows != length of y");
  detail::require(x_train.cols() == x_val.cols(), "holdout: train and validation column counts differ");
  detail::require(x_val.rows() >= 1, "holdout: empty validation set");
  plan.k = 2;
  std::vector<DataSplit> splits{{x_train, y_train, x_val, y_val}};
  return detail::run_grid_search(splits, x_train, y_train, graph, plan, opt);
}

/// One row per grid point: varied hyperparameters, mean_score, valid, fold scores.
inline void write_cv_table_csv(std::ostream& os, const CVResult& result) {
  for (const auto& name : result.names) os << name << ',';
  os << "mean_score,valid";
  const std::size_t n_folds = result.table.empty() ? 0 : result.table.front().fold_scores.size();
  for (std::size_t f = 0; f < n_folds; ++f) os << ",fold_" << f;
  os << '\n' << std::setprecision(17);
  for (const auto& e : result.table) {
    for (const auto& name : result.names) os << hyperparameter_value(e.params, name) << ',';
    os << e.mean_score << ',' << (e.valid ? 1 : 0);
    for (double s : e.fold_scores) os << ',' << s;
    os << '\n';
  }
}

}  // namespace genet
