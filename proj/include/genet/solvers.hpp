#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "genet/error.hpp"
#include "genet/numerics.hpp"
#include "genet/penalty.hpp"

namespace genet {

enum class SolverKind { cd, ip, admm, automatic };

inline const char* to_string(SolverKind kind) {
  switch (kind) {
    case SolverKind::cd: return "cd";
    case SolverKind::ip: return "ip";
    case SolverKind::admm: return "admm";
    case SolverKind::automatic: return "auto";
  }
  return "unknown";
}

inline SolverKind parse_solver_kind(const std::string& name) {
  if (name == "cd") return SolverKind::cd;
  if (name == "ip") return SolverKind::ip;
  if (name == "admm") return SolverKind::admm;
  if (name == "auto") return SolverKind::automatic;
  throw ValidationError("unknown solver '" + name + "'");
}

// ---------------------------------------------------------------------------
// Dual problem
// ---------------------------------------------------------------------------

/// min (1/2) u^T Q u - b^T u  subject to |u_j| <= box_j,
/// with Q = (A X~+)(A X~+)^T and b = A X~+ y~.
///
/// Built from the thin SVD X~ = U S V^T. With F = A V S^{-1} and z = U^T y~,
/// Q = F F^T, b = F z, and the primal is recovered as V S^{-1} (z - F^T u).
struct DualProblem {
  Matrix q;
  Vector b;
  Vector box;
  Index kernel_dim_xtilde = 0;

  Matrix v_scaled;    // V S^{-1}, p x r
  Matrix factor;      // F = A V S^{-1}, m1 x r
  Vector z;           // U^T y~, r
  double y_tilde_sq = 0.0;

  Index m1() const { return q.rows(); }
};

inline DualProblem build_dual(const AugmentedProblem& ap, double rel_tol = 1e-10) {
  detail::require(ap.l1_matrix.cols() == ap.dim(), "build_dual: A and X~ column counts differ");
  detail::require(ap.l1_weights.size() == ap.m1(), "build_dual: weight count mismatch");
  const TruncatedSvd svd = truncated_svd(ap.x_tilde, rel_tol);
  DualProblem dp;
  dp.kernel_dim_xtilde = svd.kernel_dim();
  dp.v_scaled = svd.v * svd.sigma.cwiseInverse().asDiagonal();
  dp.z = svd.u.transpose() * ap.y_tilde;
  dp.y_tilde_sq = ap.y_tilde.squaredNorm();
  dp.factor = ap.l1_matrix * dp.v_scaled;
  dp.q = dp.factor * dp.factor.transpose();
  dp.q = 0.5 * (dp.q + dp.q.transpose());
  dp.b = dp.factor * dp.z;
  dp.box = ap.box_radii();
  return dp;
}

/// Same factorization with a different box (lambda1 changes, X~ does not).
inline DualProblem with_box(DualProblem dp, const Vector& box) {
  detail::require(box.size() == dp.m1(), "with_box: radius count mismatch");
  dp.box = box;
  return dp;
}

/// (1/2) u^T Q u - b^T u.
inline double dual_objective(const DualProblem& dp, const Eigen::Ref<const Vector>& u) {
  return 0.5 * u.dot(dp.q * u) - dp.b.dot(u);
}

/// Lagrange dual value (1/2)||y~||^2 - (1/2)||y_check - A_check^T u||^2.
inline double lagrange_dual_value(const DualProblem& dp, const Eigen::Ref<const Vector>& u) {
  return 0.5 * dp.y_tilde_sq - 0.5 * dp.z.squaredNorm() - dual_objective(dp, u);
}

/// Projection of x onto [-radius, radius].
inline double box_project(double x, double radius) {
  detail::require(radius >= 0.0, "box_project: radius must be nonnegative");
  return std::clamp(x, -radius, radius);
}

inline double soft_threshold(double x, double k) {
  if (x > k) return x - k;
  if (x < -k) return x + k;
  return 0.0;
}

struct DualSolution {
  Vector u;
  Index iterations = 0;
  bool converged = false;
  double last_step_norm = 0.0;  // cd: ||u^(k) - u^(k-1)||_2
  double surrogate_gap = 0.0;   // ip
  double residual_norm = 0.0;   // ip
  Vector mu1;                   // ip multipliers for u - box <= 0
  Vector mu2;                   // ip multipliers for -u - box <= 0
  std::vector<double> objective_history;
  std::string message;
};

namespace detail {

class Deadline {
 public:
  explicit Deadline(double seconds)
      : start_(std::chrono::steady_clock::now()), seconds_(seconds) {}
  bool expired() const {
    if (!std::isfinite(seconds_)) return false;
    return elapsed() > seconds_;
  }
  double elapsed() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_;
  double seconds_;
};

inline constexpr double kUnlimited = std::numeric_limits<double>::infinity();

}  // namespace detail

// ---------------------------------------------------------------------------
// Coordinate descent on the dual
// ---------------------------------------------------------------------------

struct CdOptions {
  double tol = 1e-4;
  Index max_iter = 100000;
  std::optional<Vector> init;
  bool record_objective = false;
  double time_limit = detail::kUnlimited;
};

/// Gauss-Seidel sweeps u_i <- T_{box_i}((b_i - sum_{j != i} Q_ij u_j) / Q_ii) in
/// natural order until ||u^(k) - u^(k-1)||_2 <= tol. Coordinates whose Q_ii
/// vanishes are held at the projection of 0.
inline DualSolution solve_cd(const DualProblem& dp, const CdOptions& opt = {}) {
  detail::require(opt.tol > 0.0, "solve_cd: tol must be positive");
  detail::require(dp.box.size() == dp.m1(), "solve_cd: box size mismatch");
  const Index m = dp.m1();
  DualSolution sol;
  sol.u = Vector::Zero(m);
  if (opt.init) {
    detail::require(opt.init->size() == m, "solve_cd: init has wrong length");
    for (Index i = 0; i < m; ++i) sol.u(i) = box_project((*opt.init)(i), dp.box(i));
  }
  if (m == 0) {
    sol.converged = true;
    return sol;
  }
  const double diag_scale = std::max(dp.q.diagonal().maxCoeff(), 0.0);
  const double pin_threshold = 1e-12 * std::max(diag_scale, 1e-300);
  std::vector<char> pinned(static_cast<std::size_t>(m), 0);
  for (Index i = 0; i < m; ++i) {
    if (dp.q(i, i) <= pin_threshold) {
      pinned[i] = 1;
      sol.u(i) = box_project(0.0, dp.box(i));
    }
  }
  Vector qu = dp.q * sol.u;
  if (opt.record_objective) sol.objective_history.push_back(dual_objective(dp, sol.u));
  const detail::Deadline deadline(opt.time_limit);
  for (Index sweep = 1; sweep <= opt.max_iter; ++sweep) {
    double step_sq = 0.0;
    for (Index i = 0; i < m; ++i) {
      if (pinned[i]) continue;
      const double qii = dp.q(i, i);
      const double target = (dp.b(i) - qu(i) + qii * sol.u(i)) / qii;
      const double updated = box_project(target, dp.box(i));
      const double delta = updated - sol.u(i);
      if (delta != 0.0) {
        qu.noalias() += delta * dp.q.col(i);
        sol.u(i) = updated;
        step_sq += delta * delta;
      }
    }
    sol.iterations = sweep;
    sol.last_step_norm = std::sqrt(step_sq);
    if (opt.record_objective) sol.objective_history.push_back(dual_objective(dp, sol.u));
    if (sol.last_step_norm <= opt.tol) {
      sol.converged = true;
      return sol;
    }
    if ((sweep & 15) == 0 && deadline.expired()) {
      sol.message = "time limit reached";
      return sol;
    }
  }
  sol.message = "maximum number of sweeps reached";
  return sol;
}

// ---------------------------------------------------------------------------
// Primal-dual interior point on the dual
// ---------------------------------------------------------------------------

struct IpOptions {
  double tau = 10.0;
  double alpha = 0.01;
  double gamma = 0.5;
  double tol = 1e-4;
  Index max_iter = 500;
  double mu_init = 1.0;
  Index max_backtrack = 100;
  double time_limit = detail::kUnlimited;
};

/// Newton steps on the perturbed KKT system of the box-constrained dual with
/// inequality constraints f1 = u - box <= 0 and f2 = -u - box <= 0.
///
/// Each iteration sets t = 2 tau m / eta from the surrogate gap
/// eta = -f1^T mu1 - f2^T mu2, solves the reduced system
///   [Q - diag(mu1 / f1) - diag(mu2 / f2)] du = -(Q u - b - 1/(t f1) + 1/(t f2)),
/// back-substitutes the multiplier steps, and backtracks from the largest
/// step keeping the multipliers nonnegative, first until the iterate is
/// strictly feasible and then until the residual norm drops by (1 - alpha s).
inline DualSolution solve_ip(const DualProblem& dp, const IpOptions& opt = {}) {
  detail::require(opt.tau > 1.0, "solve_ip: tau must exceed 1");
  detail::require(opt.alpha > 0.0 && opt.alpha < 1.0, "solve_ip: alpha must be in (0, 1)");
  detail::require(opt.gamma > 0.0 && opt.gamma < 1.0, "solve_ip: gamma must be in (0, 1)");
  detail::require(opt.tol > 0.0, "solve_ip: tol must be positive");
  detail::require(opt.mu_init > 0.0, "solve_ip: initial multipliers must be positive");
  const Index m = dp.m1();
  DualSolution sol;
  sol.u = Vector::Zero(m);
  sol.mu1 = Vector::Constant(m, opt.mu_init);
  sol.mu2 = Vector::Constant(m, opt.mu_init);
  if (m == 0) {
    sol.converged = true;
    return sol;
  }
  detail::require(dp.box.minCoeff() > 0.0,
                  "solve_ip: all box radii must be positive for a strictly feasible start");

  const Vector& box = dp.box;
  auto residual = [&](const Vector& u, const Vector& mu1, const Vector& mu2, double t) {
    const Vector f1 = u - box;
    const Vector f2 = -u - box;
    Vector r(3 * m);
    r.segment(0, m) = dp.q * u - dp.b + mu1 - mu2;
    r.segment(m, m) = -mu1.cwiseProduct(f1) - Vector::Constant(m, 1.0 / t);
    r.segment(2 * m, m) = -mu2.cwiseProduct(f2) - Vector::Constant(m, 1.0 / t);
    return r;
  };
  auto gap = [&](const Vector& u, const Vector& mu1, const Vector& mu2) {
    return -(u - box).dot(mu1) - (-u - box).dot(mu2);
  };

  const detail::Deadline deadline(opt.time_limit);
  Vector& u = sol.u;
  Vector& mu1 = sol.mu1;
  Vector& mu2 = sol.mu2;
  for (Index iter = 0; iter <= opt.max_iter; ++iter) {
    const double eta = gap(u, mu1, mu2);
    const double t = 2.0 * opt.tau * static_cast<double>(m) / eta;
    const Vector r = residual(u, mu1, mu2, t);
    const double r_norm = r.norm();
    sol.surrogate_gap = eta;
    sol.residual_norm = r_norm;
    sol.iterations = iter;
    if (r_norm <= opt.tol && eta <= opt.tol) {
      sol.converged = true;
      return sol;
    }
    if (iter == opt.max_iter) break;
    if (deadline.expired()) {
      sol.message = "time limit reached";
      return sol;
    }

    const Vector f1 = u - box;
    const Vector f2 = -u - box;
    const Vector d1 = mu1.cwiseQuotient(f1);  // negative
    const Vector d2 = mu2.cwiseQuotient(f2);  // negative
    Matrix h = dp.q;
    h.diagonal() -= d1 + d2;
    const Vector rhs = -(dp.q * u - dp.b - (t * f1).cwiseInverse() + (t * f2).cwiseInverse());
    Eigen::LLT<Matrix> llt(h);
    if (llt.info() != Eigen::Success) {
      sol.message = "singular Newton system at iteration " + std::to_string(iter);
      return sol;
    }
    const Vector du = llt.solve(rhs);
    const Vector dmu1 = -(d1.cwiseProduct(du) + mu1 + (t * f1).cwiseInverse());
    const Vector dmu2 = -(-d2.cwiseProduct(du) + mu2 + (t * f2).cwiseInverse());

    double s_max = 1.0;
    for (Index i = 0; i < m; ++i) {
      if (dmu1(i) < 0.0) s_max = std::min(s_max, -mu1(i) / dmu1(i));
      if (dmu2(i) < 0.0) s_max = std::min(s_max, -mu2(i) / dmu2(i));
    }
    double s = 0.99 * s_max;
    Index backtracks = 0;
    auto strictly_feasible = [&](double step) {
      const Vector trial = u + step * du;
      return ((trial - box).array() < 0.0).all() && ((-trial - box).array() < 0.0).all();
    };
    while (!strictly_feasible(s) && backtracks < opt.max_backtrack) {
      s *= opt.gamma;
      ++backtracks;
    }
    bool accepted = false;
    while (backtracks < opt.max_backtrack) {
      const Vector r_new = residual(u + s * du, mu1 + s * dmu1, mu2 + s * dmu2, t);
      if (r_new.norm() <= (1.0 - opt.alpha * s) * r_norm) {
        accepted = true;
        break;
      }
      s *= opt.gamma;
      ++backtracks;
    }
    if (!accepted || !strictly_feasible(s)) {
      sol.message = "line search failed at iteration " + std::to_string(iter);
      return sol;
    }
    u += s * du;
    mu1 += s * dmu1;
    mu2 += s * dmu2;
  }
  sol.message = "maximum number of iterations reached";
  return sol;
}

// ---------------------------------------------------------------------------
// Primal recovery and optimality certificates
// ---------------------------------------------------------------------------

/// beta = X~+ (y_check - A_check^T u); the ker(X~) component is taken as zero.
inline Vector recover_primal(const AugmentedProblem& ap, const DualProblem& dp,
                             const Eigen::Ref<const Vector>& u) {
  detail::require(u.size() == dp.m1(), "recover_primal: dual vector has wrong length");
  detail::require(dp.v_scaled.rows() == ap.dim(), "recover_primal: dual built for another problem");
  if (dp.m1() == 0) return dp.v_scaled * dp.z;
  return dp.v_scaled * (dp.z - dp.factor.transpose() * u);
}

struct OptimalityReport {
  double kkt_residual = 0.0;
  double duality_gap = 0.0;
  double primal_objective = 0.0;
  double dual_objective = 0.0;
};

/// Stationarity residual and duality gap of a primal/dual pair.
///
/// kkt_residual is ||g - A^T v||_inf with g = X~^T (y~ - X~ beta) and v a
/// valid subgradient: v_j = radius_j sign((A beta)_j) where |(A beta)_j|
/// exceeds `dead_zone`, v_j free in [-radius_j, radius_j] otherwise. The
/// free entries start at the clamped dual vector and are refined by a few
/// projected coordinate sweeps on the squared residual; the smallest
/// infinity norm seen is reported, which bounds the exact minimum from above.
inline OptimalityReport optimality_report(const AugmentedProblem& ap, const DualProblem& dp,
                                          const Eigen::Ref<const Vector>& beta,
                                          const Eigen::Ref<const Vector>& u,
                                          double dead_zone = 1e-8) {
  detail::require(beta.size() == ap.dim(), "optimality_report: beta has wrong length");
  detail::require(u.size() == ap.m1(), "optimality_report: dual vector has wrong length");
  OptimalityReport rep;
  rep.primal_objective = augmented_objective(ap, beta);
  rep.dual_objective = lagrange_dual_value(dp, u);
  rep.duality_gap = std::max(0.0, rep.primal_objective - rep.dual_objective);

  const Vector g = ap.x_tilde.transpose() * (ap.y_tilde - ap.x_tilde * beta);
  const Index m = ap.m1();
  if (m == 0) {
    rep.kkt_residual = g.lpNorm<Eigen::Infinity>();
    return rep;
  }
  const Vector radii = ap.box_radii();
  const Vector ab = ap.l1_matrix * beta;
  Vector v(m);
  std::vector<Index> free_rows;
  for (Index j = 0; j < m; ++j) {
    if (std::abs(ab(j)) > dead_zone && radii(j) > 0.0) {
      v(j) = ab(j) > 0.0 ? radii(j) : -radii(j);
    } else {
      v(j) = std::clamp(u(j), -radii(j), radii(j));
      if (radii(j) > 0.0) free_rows.push_back(j);
    }
  }
  Vector res = g - ap.l1_matrix.transpose() * v;
  double best = res.lpNorm<Eigen::Infinity>();
  if (!free_rows.empty()) {
    for (int sweep = 0; sweep < 50 && best > 0.0; ++sweep) {
      for (Index j : free_rows) {
        const auto row = ap.l1_matrix.row(j);
        const double norm_sq = row.squaredNorm();
        if (norm_sq == 0.0) continue;
        const double updated = std::clamp(v(j) + row.dot(res) / norm_sq, -radii(j), radii(j));
        const double delta = updated - v(j);
        if (delta != 0.0) {
          res.noalias() -= delta * row.transpose();
          v(j) = updated;
        }
      }
      best = std::min(best, res.lpNorm<Eigen::Infinity>());
    }
  }
  rep.kkt_residual = best;
  return rep;
}

inline OptimalityReport optimality_report(const AugmentedProblem& ap,
                                          const Eigen::Ref<const Vector>& beta,
                                          const Eigen::Ref<const Vector>& u,
                                          double dead_zone = 1e-8) {
  return optimality_report(ap, build_dual(ap), beta, u, dead_zone);
}

// ---------------------------------------------------------------------------
// Fit results and ADMM
// ---------------------------------------------------------------------------

struct FitResult {
  Vector beta_hat;
  DualSolution dual;
  double kkt_residual = 0.0;
  double duality_gap = 0.0;
  double primal_objective = 0.0;
  SolverKind solver = SolverKind::cd;
  double wall_time = 0.0;
  bool converged = false;
  Index kernel_dim_xtilde = 0;
  double admm_rho = 0.0;  // final penalty parameter; 0 for the dual solvers
  std::vector<std::string> warnings;
};

/// State carried between neighbouring grid points. CD reads `u`; ADMM reads
/// `u`, `beta` and `rho`.
struct WarmStart {
  Vector u;
  Vector beta;
  double rho = 0.0;
};

struct AdmmOptions {
  double rho = 1.0;
  double tol = 1e-3;
  Index max_iter = 50000;
  bool adaptive_rho = true;
  double time_limit = detail::kUnlimited;
  // Warm start from a neighbouring solution: z = A beta, scaled dual u / rho.
  std::optional<Vector> init_beta;
  std::optional<Vector> init_u;
};

namespace detail {

class RidgeSystem {
 public:
  RidgeSystem(const Matrix& gram, const Matrix& penalty_gram, double rho) { factor(gram, penalty_gram, rho); }

  void factor(const Matrix& gram, const Matrix& penalty_gram, double rho) {
    const Matrix k = gram + rho * penalty_gram;
    llt_.compute(k);
    use_llt_ = llt_.info() == Eigen::Success;
    if (!use_llt_) cod_.compute(k);
  }

  Vector solve(const Vector& rhs) const { return use_llt_ ? Vector(llt_.solve(rhs)) : Vector(cod_.solve(rhs)); }

 private:
  Eigen::LLT<Matrix> llt_;
  Eigen::CompleteOrthogonalDecomposition<Matrix> cod_;
  bool use_llt_ = true;
};

}  // namespace detail

/// Scaled-form ADMM on min (1/2)||y~ - X~ beta||^2 + sum_j radius_j |z_j|
/// subject to z = A beta, with primal/dual residual stopping (absolute and
/// relative tolerance both equal to `tol`) and residual-balancing updates of rho.
inline FitResult solve_admm(const AugmentedProblem& ap, const AdmmOptions& opt = {}) {
  detail::require(opt.rho > 0.0, "solve_admm: rho must be positive");
  detail::require(opt.tol > 0.0, "solve_admm: tol must be positive");
  const auto clock_start = std::chrono::steady_clock::now();
  const Index p = ap.dim();
  const Index m = ap.m1();
  FitResult fit;
  fit.solver = SolverKind::admm;
  const Matrix& a = ap.l1_matrix;
  const Vector radii = ap.box_radii();

  if (m == 0) {
    fit.beta_hat = pseudoinverse(ap.x_tilde) * ap.y_tilde;
    fit.dual.u = Vector(0);
    fit.dual.converged = true;
    fit.converged = true;
  } else {
    const Matrix gram = ap.x_tilde.transpose() * ap.x_tilde;
    const Matrix penalty_gram = a.transpose() * a;
    const Vector xty = ap.x_tilde.transpose() * ap.y_tilde;
    double rho = opt.rho;
    detail::RidgeSystem system(gram, penalty_gram, rho);
    Vector beta = Vector::Zero(p);
    Vector z = Vector::Zero(m);
    Vector w = Vector::Zero(m);  // scaled dual, u = rho * w
    if (opt.init_beta && opt.init_u && opt.init_beta->size() == p && opt.init_u->size() == m) {
      z = a * *opt.init_beta;
      w = *opt.init_u / rho;
    }
    Index adaptations = 0;
    const detail::Deadline deadline(opt.time_limit);
    const double sqrt_m = std::sqrt(static_cast<double>(m));
    const double sqrt_p = std::sqrt(static_cast<double>(p));
    for (Index iter = 1; iter <= opt.max_iter; ++iter) {
      beta = system.solve(xty + rho * a.transpose() * (z - w));
      const Vector ab = a * beta;
      const Vector z_old = z;
      for (Index j = 0; j < m; ++j) z(j) = soft_threshold(ab(j) + w(j), radii(j) / rho);
      w += ab - z;
      const double r_norm = (ab - z).norm();
      const double s_norm = rho * (a.transpose() * (z - z_old)).norm();
      const double eps_pri = sqrt_m * opt.tol + opt.tol * std::max(ab.norm(), z.norm());
      const double eps_dual = sqrt_p * opt.tol + opt.tol * rho * (a.transpose() * w).norm();
      fit.dual.iterations = iter;
      fit.dual.residual_norm = r_norm;
      fit.dual.last_step_norm = s_norm;
      if (r_norm <= eps_pri && s_norm <= eps_dual) {
        fit.converged = true;
        break;
      }
      if ((iter & 15) == 0 && deadline.expired()) {
        fit.dual.message = "time limit reached";
        break;
      }
      if (opt.adaptive_rho && iter % 10 == 0 && adaptations < 100) {
        double scale = 1.0;
        if (r_norm > 10.0 * s_norm) scale = 2.0;
        else if (s_norm > 10.0 * r_norm) scale = 0.5;
        if (scale != 1.0) {
          rho *= scale;
          w /= scale;
          system.factor(gram, penalty_gram, rho);
          ++adaptations;
        }
      }
    }
    if (!fit.converged && fit.dual.message.empty()) fit.dual.message = "maximum number of iterations reached";
    fit.beta_hat = beta;
    fit.dual.u = (rho * w).cwiseMax(-radii).cwiseMin(radii);
    fit.dual.converged = fit.converged;
    fit.admm_rho = rho;
  }
  fit.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - clock_start).count();
  return fit;
}

// ---------------------------------------------------------------------------
// End-to-end fitting
// ---------------------------------------------------------------------------

struct SolverOptions {
  SolverKind solver = SolverKind::cd;
  std::optional<double> tol;   // default 1e-4 for cd/ip, 1e-3 for admm
  Index max_iter = 0;          // 0 selects the solver default
  double tau = 10.0;
  double alpha = 0.01;
  double gamma = 0.5;
  double rho_admm = 1.0;
  double svd_tol = 1e-10;
  double dead_zone = 1e-8;
  double time_limit = detail::kUnlimited;

  double tolerance_for(SolverKind kind) const {
    if (tol) return *tol;
    return kind == SolverKind::admm ? 1e-3 : 1e-4;
  }
};

/// Largest l1 block for which `auto` prefers interior point over CD.
inline constexpr Index kAutoIpMaxRows = 500;

/// The solver `auto` resolves to: ADMM when X~ has a kernel (the dual
/// solvers would miss the row-space constraint), interior point for modest
/// l1 blocks (insensitive to the conditioning of Q), CD otherwise.
inline SolverKind resolve_auto_solver(const DualProblem& dp) {
  if (dp.kernel_dim_xtilde > 0) return SolverKind::admm;
  return dp.m1() <= kAutoIpMaxRows ? SolverKind::ip : SolverKind::cd;
}

/// Solves an augmented problem whose dual factorization is already available.
/// `warm` seeds coordinate descent and ADMM; interior point ignores it.
inline FitResult fit_augmented(const AugmentedProblem& ap, const DualProblem& dp,
                               const SolverOptions& opt = {}, const WarmStart* warm = nullptr) {
  const auto clock_start = std::chrono::steady_clock::now();
  SolverKind kind = opt.solver;
  SolverOptions resolved = opt;
  if (kind == SolverKind::automatic) {
    kind = resolve_auto_solver(dp);
    // ADMM's 1e-3 default leaves a visible objective gap; auto asks for more.
    if (kind == SolverKind::admm && !opt.tol) resolved.tol = 1e-5;
  }

  FitResult fit;
  const bool no_l1 = ap.m1() == 0 || ap.box_radii().maxCoeff() <= 0.0;
  if (no_l1) {
    fit.solver = kind;
    fit.dual.u = Vector::Zero(ap.m1());
    fit.dual.converged = true;
    fit.converged = true;
    fit.beta_hat = dp.v_scaled * dp.z;
  } else if (kind == SolverKind::admm) {
    AdmmOptions ao;
    ao.rho = warm && warm->rho > 0.0 ? warm->rho : opt.rho_admm;
    ao.tol = resolved.tolerance_for(kind);
    if (warm) {
      ao.init_beta = warm->beta;
      ao.init_u = warm->u;
    }
    if (opt.max_iter > 0) ao.max_iter = opt.max_iter;
    ao.time_limit = opt.time_limit;
    fit = solve_admm(ap, ao);
  } else if (kind == SolverKind::ip) {
    IpOptions io;
    io.tau = opt.tau;
    io.alpha = opt.alpha;
    io.gamma = opt.gamma;
    io.tol = opt.tolerance_for(kind);
    if (opt.max_iter > 0) io.max_iter = opt.max_iter;
    io.time_limit = opt.time_limit;
    fit.solver = kind;
    fit.dual = solve_ip(dp, io);
    fit.converged = fit.dual.converged;
    fit.beta_hat = recover_primal(ap, dp, fit.dual.u);
  } else {
    CdOptions co;
    co.tol = opt.tolerance_for(kind);
    if (opt.max_iter > 0) co.max_iter = opt.max_iter;
    if (warm && warm->u.size() == dp.m1()) co.init = warm->u;
    co.time_limit = opt.time_limit;
    fit.solver = kind;
    fit.dual = solve_cd(dp, co);
    fit.converged = fit.dual.converged;
    fit.beta_hat = recover_primal(ap, dp, fit.dual.u);
  }
  fit.kernel_dim_xtilde = dp.kernel_dim_xtilde;
  if (dp.kernel_dim_xtilde > 0 && kind != SolverKind::admm && !no_l1)
    fit.warnings.push_back("augmented design has a " + std::to_string(dp.kernel_dim_xtilde) +
                           "-dimensional kernel; the relaxed dual ignores the row-space constraint "
                           "and the minimum-norm primal is returned");
  const OptimalityReport rep = optimality_report(ap, dp, fit.beta_hat, fit.dual.u, opt.dead_zone);
  fit.kkt_residual = rep.kkt_residual;
  fit.duality_gap = rep.duality_gap;
  fit.primal_objective = rep.primal_objective;
  fit.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - clock_start).count();
  return fit;
}

inline FitResult fit_augmented(const AugmentedProblem& ap, const SolverOptions& opt = {}) {
  const auto clock_start = std::chrono::steady_clock::now();
  const DualProblem dp = build_dual(ap, opt.svd_tol);
  FitResult fit = fit_augmented(ap, dp, opt);
  fit.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - clock_start).count();
  return fit;
}

/// Fits the penalized least-squares estimator described by `spec`.
inline FitResult fit(const Eigen::Ref<const Matrix>& x, const Eigen::Ref<const Vector>& y,
                     const PenaltySpec& spec, const SolverOptions& opt = {}) {
  return fit_augmented(augment(x, y, spec), opt);
}

}  // namespace genet
