#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include "genet/error.hpp"
#include "genet/graph.hpp"
#include "genet/numerics.hpp"

namespace genet {

// ---------------------------------------------------------------------------
// Theoretical tuning
// ---------------------------------------------------------------------------

/// Tuning values in the mean_sumsq convention: (1/n) loss.
struct TheoryTuning {
  double lambda1 = 0.0;
  double lambda2 = 0.0;  // +inf when Gamma beta* = 0 and lambda1 > 0
  double sigma = 0.0;
  double gmax_sigma = 0.0;
  double rho = 0.0;
  Index n = 0;
  Index p = 0;
  double tv_linf = 0.0;
};

/// lambda1 / (8 ||Gamma beta*||_inf): the largest lambda2 the rate allows.
/// With a constant signal any lambda2 is allowed, reported as +inf (0 when lambda1 = 0).
inline double lambda2_from_lambda1(double lambda1, double tv_linf) {
  detail::require(lambda1 >= 0.0 && tv_linf >= 0.0, "lambda2_from_lambda1: inputs must be >= 0");
  if (tv_linf == 0.0) return lambda1 == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
  return lambda1 / (8.0 * tv_linf);
}

/// lambda1 = 32 sigma rho(Gamma) sqrt(gmax(Sigma) log p / n) with the matching lambda2.
inline TheoryTuning theoretical_lambdas(double sigma, const Eigen::Ref<const Matrix>& sigma_x, const Graph& g,
                                        Index n, const Eigen::Ref<const Vector>& beta_star) {
  detail::require(std::isfinite(sigma) && sigma >= 0.0, "theoretical_lambdas: sigma must be >= 0");
  detail::require(n >= 1, "theoretical_lambdas: n must be positive");
  const Index p = g.num_vertices();
  detail::require(p >= 2, "theoretical_lambdas: p must be at least 2");
  detail::require(sigma_x.rows() == p && sigma_x.cols() == p, "theoretical_lambdas: Sigma has wrong shape");
  detail::require(beta_star.size() == p, "theoretical_lambdas: beta* has wrong length");
  TheoryTuning t;
  t.sigma = sigma;
  t.n = n;
  t.p = p;
  t.gmax_sigma = max_eigenvalue_sym(sigma_x);
  t.rho = graph_spectra(g).rho;
  t.tv_linf = g.num_edges() > 0 ? (incidence_matrix(g) * beta_star).lpNorm<Eigen::Infinity>() : 0.0;
  t.lambda1 = 32.0 * sigma * t.rho *
              std::sqrt(std::max(t.gmax_sigma, 0.0) * std::log(static_cast<double>(p)) / static_cast<double>(n));
  t.lambda2 = lambda2_from_lambda1(t.lambda1, t.tv_linf);
  return t;
}

// ---------------------------------------------------------------------------
// Minimum-eigenvalue curve
// ---------------------------------------------------------------------------

struct EigenCurve {
  std::vector<double> lambda2;
  std::vector<double> gmin;            // gmin(Sigma / 64 + lambda2 L)
  std::vector<char> ge_linear;         // gmin >= lambda2 / 64
  std::vector<char> ge_sqrt;           // gmin >= sqrt(lambda2) / 64
  static constexpr double kScale = 1.0 / 64.0;
};

inline EigenCurve min_eigen_curve(const Eigen::Ref<const Matrix>& sigma_x, const Eigen::Ref<const Matrix>& lap,
                                  const std::vector<double>& lambda2_grid) {
  detail::require(sigma_x.rows() == sigma_x.cols() && lap.rows() == lap.cols() && sigma_x.rows() == lap.rows(),
                  "min_eigen_curve: Sigma and L must be square of equal size");
  for (std::size_t i = 0; i < lambda2_grid.size(); ++i) {
    detail::require(std::isfinite(lambda2_grid[i]) && lambda2_grid[i] >= 0.0,
                    "min_eigen_curve: lambda2 values must be >= 0");
    if (i > 0) detail::require(lambda2_grid[i] >= lambda2_grid[i - 1], "min_eigen_curve: grid must be ascending");
  }
  EigenCurve curve;
  for (double l2 : lambda2_grid) {
    const Matrix m = EigenCurve::kScale * sigma_x + l2 * lap;
    const double value = min_eigenvalue_sym(m);
    curve.lambda2.push_back(l2);
    curve.gmin.push_back(value);
    curve.ge_linear.push_back(value >= EigenCurve::kScale * l2 ? 1 : 0);
    curve.ge_sqrt.push_back(value >= EigenCurve::kScale * std::sqrt(l2) ? 1 : 0);
  }
  return curve;
}

// ---------------------------------------------------------------------------
// Restricted-eigenvalue Monte Carlo
// ---------------------------------------------------------------------------

/// Quantities of the RE inequality that depend only on (Sigma, graph, n).
struct ReContext {
  Matrix gamma;
  Matrix sigma_root;
  Matrix pinv_incidence;
  Matrix kernel_projection;
  Matrix smoother;  // (L + I)^{-1}
  double gmax = 0.0;
  double rho = 0.0;
  Index n_components = 0;
  Index n = 0;

  ReContext(const Eigen::Ref<const Matrix>& sigma_x, const Graph& g, Index n_obs) : n(n_obs) {
    const Index p = g.num_vertices();
    detail::require(sigma_x.rows() == p && sigma_x.cols() == p, "re: Sigma has wrong shape");
    const GraphSpectra spectra = graph_spectra(g);
    gamma = incidence_matrix(g);
    sigma_root = psd_sqrt(sigma_x);
    pinv_incidence = spectra.pinv_incidence;
    kernel_projection = spectra.kernel_projection;
    smoother = (spectra.laplacian + Matrix::Identity(p, p)).inverse();
    gmax = max_eigenvalue_sym(sigma_x);
    rho = spectra.rho;
    n_components = spectra.n_components;
  }

  /// ||X v||_2 / sqrt(n) minus the right-hand side
  /// (1/4)||Sigma^{1/2} v|| - 3 sqrt(gmax nc / n) ||v|| - 6 sqrt(2) rho sqrt(gmax log p / n) ||Gamma v||_1.
  double margin(const Eigen::Ref<const Matrix>& x, const Eigen::Ref<const Vector>& v) const {
    const double nn = static_cast<double>(n);
    const double p = static_cast<double>(v.size());
    const double lhs = (x * v).norm() / std::sqrt(nn);
    const double rhs = 0.25 * (sigma_root * v).norm() -
                       3.0 * std::sqrt(gmax * static_cast<double>(n_components) / nn) * v.norm() -
                       6.0 * std::sqrt(2.0) * rho * std::sqrt(gmax * std::log(p) / nn) *
                           (gamma * v).lpNorm<1>();
    return lhs - rhs;
  }

  /// Unit direction from one of three families chosen by `family % 3`:
  /// sparse jumps (Gamma+ theta, theta sparse, plus a kernel component),
  /// smooth ((L + I)^{-1} g), or dense Gaussian.
  Vector direction(Index family, SeededRng& rng) const {
    const Index p = gamma.cols();
    const Index m = gamma.rows();
    Vector v;
    switch (family % 3) {
      case 0: {
        Vector theta = Vector::Zero(m);
        const Index support = std::min<Index>(3, m);
        for (Index s = 0; s < support; ++s) theta(static_cast<Index>(rng.uniform_index(m))) = rng.normal();
        v = pinv_incidence * theta + 0.5 * (kernel_projection * standard_normal_vector(p, rng));
        break;
      }
      case 1:
        v = smoother * standard_normal_vector(p, rng);
        break;
      default:
        v = standard_normal_vector(p, rng);
        break;
    }
    const double norm = v.norm();
    if (norm == 0.0) return standard_normal_vector(p, rng).normalized();
    return v / norm;
  }
};

struct ReTrialResult {
  double pass_fraction = 0.0;
  Index n_pass = 0;
  Index n_total = 0;
  double min_margin = std::numeric_limits<double>::infinity();
};

/// Fraction of (trial, direction) pairs satisfying the RE inequality, with a
/// fresh design X ~ N(0, Sigma) per trial. Trial t draws from SeededRng::derive(seed, t).
inline ReTrialResult re_condition_trial(const Eigen::Ref<const Matrix>& sigma_x, const Graph& g, Index n,
                                        Index n_trials, Index n_directions, std::uint64_t seed) {
  detail::require(n >= 10, "re_condition_trial: n must be at least 10");
  detail::require(g.num_edges() >= 2, "re_condition_trial: the graph needs at least two edges");
  detail::require(n_trials >= 1 && n_directions >= 1, "re_condition_trial: counts must be positive");
  const ReContext ctx(sigma_x, g, n);
  const GaussianSampler sampler{Matrix(sigma_x)};
  ReTrialResult out;
  for (Index t = 0; t < n_trials; ++t) {
    SeededRng rng(SeededRng::derive(seed, static_cast<std::uint64_t>(t)));
    const Matrix x = sampler.sample(n, rng);
    for (Index d = 0; d < n_directions; ++d) {
      const double margin = ctx.margin(x, ctx.direction(d, rng));
      out.min_margin = std::min(out.min_margin, margin);
      ++out.n_total;
      if (margin >= 0.0) ++out.n_pass;
    }
  }
  out.pass_fraction = static_cast<double>(out.n_pass) / static_cast<double>(out.n_total);
  return out;
}

}  // namespace genet
