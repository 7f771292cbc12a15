#pragma once

#include <cmath>
#include <optional>
#include <string>

#include "genet/error.hpp"
#include "genet/graph.hpp"
#include "genet/numerics.hpp"

namespace genet {

/// Scaling of the squared-error loss.
///   half_sumsq: (1/2) ||y - X beta||^2 + penalty   (the one the solvers use)
///   mean_sumsq: (1/n) ||y - X beta||^2 + penalty
enum class LossConvention { half_sumsq, mean_sumsq };

inline const char* to_string(LossConvention loss) {
  return loss == LossConvention::half_sumsq ? "half" : "mean";
}

inline LossConvention parse_loss_convention(const std::string& name) {
  if (name == "half" || name == "half_sumsq") return LossConvention::half_sumsq;
  if (name == "mean" || name == "mean_sumsq") return LossConvention::mean_sumsq;
  throw ValidationError("unknown loss convention '" + name + "'");
}

enum class Preset { ols, lasso, elastic_net, fused_lasso, smooth_lasso, gen };

inline const char* to_string(Preset preset) {
  switch (preset) {
    case Preset::ols: return "ols";
    case Preset::lasso: return "lasso";
    case Preset::elastic_net: return "elastic_net";
    case Preset::fused_lasso: return "fused_lasso";
    case Preset::smooth_lasso: return "smooth_lasso";
    case Preset::gen: return "gen";
  }
  return "unknown";
}

inline Preset parse_preset(const std::string& name) {
  if (name == "ols") return Preset::ols;
  if (name == "lasso" || name == "l") return Preset::lasso;
  if (name == "elastic_net" || name == "en") return Preset::elastic_net;
  if (name == "fused_lasso" || name == "fl") return Preset::fused_lasso;
  if (name == "smooth_lasso" || name == "sl") return Preset::smooth_lasso;
  if (name == "gen") return Preset::gen;
  throw ValidationError("unknown estimator preset '" + name + "'");
}

inline bool preset_needs_graph(Preset preset) {
  return preset == Preset::fused_lasso || preset == Preset::smooth_lasso || preset == Preset::gen;
}

struct Hyperparams {
  double lambda1 = 0.0;  // graph l1 weight (gen, fused_lasso)
  double lambda2 = 0.0;  // graph l2 weight (gen, smooth_lasso)
  double lambdaL = 0.0;  // plain l1 weight (lasso, elastic_net, fused/smooth lasso)
  double lambdaE = 0.0;  // plain l2 weight (elastic_net)
};

/// lambda1 * sum_j w_j |(A beta)_j| + lambda2 * ||B beta||^2 on top of the loss.
struct PenaltySpec {
  Matrix l1_matrix;   // A, m1 x p
  Vector l1_weights;  // w, m1, all > 0
  double lambda1 = 0.0;
  Matrix l2_matrix;   // B, m2 x p
  double lambda2 = 0.0;
  LossConvention loss = LossConvention::half_sumsq;

  Index dim() const { return l1_matrix.cols(); }

  /// Per-row dual box radii lambda1 * w_j.
  Vector box_radii() const { return lambda1 * l1_weights; }

  void validate() const {
    detail::require(l1_matrix.cols() == l2_matrix.cols(), "penalty: A and B column counts differ");
    detail::require(l1_weights.size() == l1_matrix.rows(), "penalty: weight count != rows of A");
    detail::require(lambda1 >= 0.0 && lambda2 >= 0.0, "penalty: lambdas must be nonnegative");
    detail::require(std::isfinite(lambda1) && std::isfinite(lambda2), "penalty: lambdas must be finite");
    if (l1_weights.size() > 0)
      detail::require(l1_weights.minCoeff() > 0.0, "penalty: l1 weights must be positive");
  }
};

/// Builds the penalty for one of the supported estimators.
///
///   ols           no penalty
///   lasso         lambdaL ||beta||_1
///   elastic_net   lambdaL ||beta||_1 + lambdaE ||beta||^2
///   fused_lasso   lambda1 ||Gamma beta||_1 + lambdaL ||beta||_1
///   smooth_lasso  lambdaL ||beta||_1 + lambda2 ||Gamma beta||^2
///   gen           lambda1 ||Gamma beta||_1 + lambda2 ||Gamma beta||^2
///
/// Fused lasso folds the plain l1 term into A = [Gamma; I] with weights
/// lambdaL / lambda1 on the identity rows. With lambda1 = 0 it reduces to the
/// lasso, and with lambdaL = 0 the identity rows are dropped.
inline PenaltySpec make_estimator(Preset preset, const Graph* graph, const Hyperparams& h,
                                  LossConvention loss = LossConvention::half_sumsq,
                                  std::optional<Index> p_hint = std::nullopt) {
  for (double v : {h.lambda1, h.lambda2, h.lambdaL, h.lambdaE})
    detail::require(std::isfinite(v) && v >= 0.0, "make_estimator: hyperparameters must be >= 0");
  if (preset_needs_graph(preset))
    detail::require(graph != nullptr, std::string("make_estimator: preset '") + to_string(preset) +
                                          "' requires a graph");
  Index p = 0;
  if (graph) p = graph->num_vertices();
  else if (p_hint) p = *p_hint;
  detail::require(p >= 1, "make_estimator: dimension unknown (pass a graph or p)");
  if (graph && p_hint)
    detail::require(*p_hint == p, "make_estimator: graph size does not match p");

  const Matrix identity = Matrix::Identity(p, p);
  const Matrix none(0, p);
  PenaltySpec spec;
  spec.loss = loss;
  spec.l1_matrix = none;
  spec.l1_weights = Vector(0);
  spec.l2_matrix = none;

  auto set_l1 = [&](const Matrix& a, double lambda) {
    spec.l1_matrix = a;
    spec.l1_weights = Vector::Ones(a.rows());
    spec.lambda1 = lambda;
  };

  switch (preset) {
    case Preset::ols:
      break;
    case Preset::lasso:
      set_l1(identity, h.lambdaL);
      break;
    case Preset::elastic_net:
      set_l1(identity, h.lambdaL);
      spec.l2_matrix = identity;
      spec.lambda2 = h.lambdaE;
      break;
    case Preset::fused_lasso: {
      const Matrix gamma = incidence_matrix(*graph);
      if (h.lambda1 == 0.0) {
        set_l1(identity, h.lambdaL);
      } else if (h.lambdaL == 0.0) {
        set_l1(gamma, h.lambda1);
      } else {
        spec.l1_matrix.resize(gamma.rows() + p, p);
        spec.l1_matrix << gamma, identity;
        spec.l1_weights.resize(gamma.rows() + p);
        spec.l1_weights << Vector::Ones(gamma.rows()), Vector::Constant(p, h.lambdaL / h.lambda1);
        spec.lambda1 = h.lambda1;
      }
      break;
    }
    case Preset::smooth_lasso:
      set_l1(identity, h.lambdaL);
      spec.l2_matrix = incidence_matrix(*graph);
      spec.lambda2 = h.lambda2;
      break;
    case Preset::gen: {
      const Matrix gamma = incidence_matrix(*graph);
      set_l1(gamma, h.lambda1);
      spec.l2_matrix = gamma;
      spec.lambda2 = h.lambda2;
      break;
    }
  }
  spec.validate();
  return spec;
}

/// Re-expresses a mean_sumsq spec in the half_sumsq convention (lambdas times n/2).
inline PenaltySpec to_half_sumsq(const PenaltySpec& spec, Index n) {
  detail::require(n >= 1, "to_half_sumsq: n must be positive");
  PenaltySpec out = spec;
  if (spec.loss == LossConvention::mean_sumsq) {
    const double scale = 0.5 * static_cast<double>(n);
    out.lambda1 *= scale;
    out.lambda2 *= scale;
    out.loss = LossConvention::half_sumsq;
  }
  return out;
}

/// lambda1 * sum_j w_j |(A beta)_j| + lambda2 ||B beta||^2.
inline double signal_penalty_value(const Eigen::Ref<const Vector>& beta, const PenaltySpec& spec) {
  detail::require(beta.size() == spec.dim(), "signal_penalty_value: dimension mismatch");
  double value = 0.0;
  if (spec.l1_matrix.rows() > 0)
    value += spec.lambda1 * spec.l1_weights.dot((spec.l1_matrix * beta).cwiseAbs());
  if (spec.l2_matrix.rows() > 0) value += spec.lambda2 * (spec.l2_matrix * beta).squaredNorm();
  return value;
}

/// Full objective in the spec's own loss convention.
inline double objective_value(const Eigen::Ref<const Matrix>& x, const Eigen::Ref<const Vector>& y,
                              const Eigen::Ref<const Vector>& beta, const PenaltySpec& spec) {
  detail::require(x.rows() == y.size() && x.cols() == beta.size(), "objective: dimension mismatch");
  const double rss = (y - x * beta).squaredNorm();
  const double loss = spec.loss == LossConvention::half_sumsq
                          ? 0.5 * rss
                          : rss / static_cast<double>(x.rows());
  return loss + signal_penalty_value(beta, spec);
}

/// (1/2)||y_tilde - x_tilde beta||^2 + sum_j radius_j |(A beta)_j|.
struct AugmentedProblem {
  Matrix x_tilde;  // (n + m2) x p
  Vector y_tilde;  // n + m2
  Matrix l1_matrix;
  Vector l1_weights;
  double lambda1 = 0.0;
  Index n_obs = 0;

  Index dim() const { return x_tilde.cols(); }
  Index m1() const { return l1_matrix.rows(); }
  Vector box_radii() const { return lambda1 * l1_weights; }
};

/// Stacks sqrt(2 lambda2) B under X so the quadratic penalty becomes part of the loss.
inline AugmentedProblem augment(const Eigen::Ref<const Matrix>& x, const Eigen::Ref<const Vector>& y,
                                const PenaltySpec& spec_in) {
  spec_in.validate();
  detail::require(x.rows() == y.size(), "augment: X rows != length of y");
  detail::require(x.cols() == spec_in.dim(), "augment: X columns != penalty dimension");
  detail::require(x.rows() >= 1, "augment: no observations");
  const PenaltySpec spec = to_half_sumsq(spec_in, x.rows());
  AugmentedProblem ap;
  ap.n_obs = x.rows();
  ap.l1_matrix = spec.l1_matrix;
  ap.l1_weights = spec.l1_weights;
  ap.lambda1 = spec.lambda1;
  const Index extra = spec.lambda2 > 0.0 ? spec.l2_matrix.rows() : 0;
  ap.x_tilde.resize(x.rows() + extra, x.cols());
  ap.x_tilde.topRows(x.rows()) = x;
  ap.y_tilde = Vector::Zero(x.rows() + extra);
  ap.y_tilde.head(x.rows()) = y;
  if (extra > 0) ap.x_tilde.bottomRows(extra) = std::sqrt(2.0 * spec.lambda2) * spec.l2_matrix;
  return ap;
}

/// Objective of the augmented problem.
inline double augmented_objective(const AugmentedProblem& ap, const Eigen::Ref<const Vector>& beta) {
  double value = 0.5 * (ap.y_tilde - ap.x_tilde * beta).squaredNorm();
  if (ap.m1() > 0) value += ap.box_radii().dot((ap.l1_matrix * beta).cwiseAbs());
  return value;
}

}  // namespace genet
