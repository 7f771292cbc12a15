#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "genet/genet.hpp"
#include "oracles.hpp"

using namespace genet;

namespace {

const Preset kAllPresets[] = {Preset::ols, Preset::lasso, Preset::elastic_net,
                              Preset::fused_lasso, Preset::smooth_lasso, Preset::gen};

}  // namespace

TEST(MakeEstimator, OlsHasNoPenalty) {
  const PenaltySpec s = make_estimator(Preset::ols, nullptr, {}, LossConvention::half_sumsq, 4);
  EXPECT_EQ(s.l1_matrix.rows(), 0);
  EXPECT_EQ(s.l2_matrix.rows(), 0);
  std::mt19937_64 gen(1);
  const Matrix x = oracle::random_matrix(6, 4, gen);
  const Vector y = oracle::random_vector(6, gen);
  const Vector b = oracle::random_vector(4, gen);
  EXPECT_NEAR(objective_value(x, y, b, s), 0.5 * (y - x * b).squaredNorm(), 1e-12);
}

TEST(MakeEstimator, GenWithIdentityOperatorIsElasticNet) {
  // Replacing Gamma by I in the gen construction gives exactly the elastic net spec.
  const Hyperparams h{0.7, 0.3, 0.7, 0.3};
  const PenaltySpec en = make_estimator(Preset::elastic_net, nullptr, h, LossConvention::half_sumsq, 5);
  PenaltySpec gen_identity;
  gen_identity.l1_matrix = Matrix::Identity(5, 5);
  gen_identity.l1_weights = Vector::Ones(5);
  gen_identity.lambda1 = h.lambda1;
  gen_identity.l2_matrix = Matrix::Identity(5, 5);
  gen_identity.lambda2 = h.lambda2;
  EXPECT_EQ(en.l1_matrix, gen_identity.l1_matrix);
  EXPECT_EQ(en.l2_matrix, gen_identity.l2_matrix);
  EXPECT_EQ(en.l1_weights, gen_identity.l1_weights);
  EXPECT_EQ(en.lambda1, gen_identity.lambda1);
  EXPECT_EQ(en.lambda2, gen_identity.lambda2);
}

TEST(MakeEstimator, FusedLassoWeights) {
  const Graph g = chain_graph(3);
  const PenaltySpec s = make_estimator(Preset::fused_lasso, &g, {2.0, 0.0, 1.0, 0.0});
  ASSERT_EQ(s.l1_matrix.rows(), 5);
  EXPECT_EQ(s.l1_matrix.topRows(2), incidence_matrix(g));
  EXPECT_EQ(s.l1_matrix.bottomRows(3), Matrix::Identity(3, 3));
  Vector w(5);
  w << 1, 1, 0.5, 0.5, 0.5;
  EXPECT_EQ(s.l1_weights, w);
  EXPECT_EQ(s.lambda1, 2.0);
}

TEST(MakeEstimator, FusedLassoDegenerateCases) {
  const Graph g = chain_graph(4);
  const PenaltySpec lasso_like = make_estimator(Preset::fused_lasso, &g, {0.0, 0.0, 0.8, 0.0});
  EXPECT_EQ(lasso_like.l1_matrix, Matrix::Identity(4, 4));
  EXPECT_EQ(lasso_like.lambda1, 0.8);
  const PenaltySpec tv = make_estimator(Preset::fused_lasso, &g, {0.8, 0.0, 0.0, 0.0});
  EXPECT_EQ(tv.l1_matrix, incidence_matrix(g));
}

TEST(MakeEstimator, PresetMatrices) {
  const Graph g = star_graph(4);
  const Matrix gamma = incidence_matrix(g);
  const PenaltySpec sl = make_estimator(Preset::smooth_lasso, &g, {0.0, 0.4, 0.2, 0.0});
  EXPECT_EQ(sl.l1_matrix, Matrix::Identity(4, 4));
  EXPECT_EQ(sl.l2_matrix, gamma);
  EXPECT_EQ(sl.lambda1, 0.2);
  EXPECT_EQ(sl.lambda2, 0.4);
  const PenaltySpec gen = make_estimator(Preset::gen, &g, {1.5, 0.4, 0.0, 0.0});
  EXPECT_EQ(gen.l1_matrix, gamma);
  EXPECT_EQ(gen.l2_matrix, gamma);
  const PenaltySpec lasso = make_estimator(Preset::lasso, &g, {0.0, 0.0, 0.3, 0.0});
  EXPECT_EQ(lasso.l1_matrix, Matrix::Identity(4, 4));
  EXPECT_EQ(lasso.lambda2, 0.0);
}

TEST(MakeEstimator, RejectsBadInput) {
  const Graph g = chain_graph(3);
  EXPECT_THROW(make_estimator(Preset::gen, &g, {-1.0, 0.0, 0.0, 0.0}), ValidationError);
  EXPECT_THROW(make_estimator(Preset::gen, nullptr, {1.0, 0.0, 0.0, 0.0}, LossConvention::half_sumsq, 3),
               ValidationError);
  EXPECT_THROW(make_estimator(Preset::lasso, nullptr, {0.0, 0.0, 1.0, 0.0}), ValidationError);
  EXPECT_THROW(make_estimator(Preset::lasso, &g, {0.0, 0.0, 1.0, 0.0}, LossConvention::half_sumsq, 5),
               ValidationError);
  EXPECT_THROW(parse_preset("ridge"), ValidationError);
}

TEST(Augment, NoQuadraticTermAddsNoRows) {
  std::mt19937_64 gen(2);
  const Graph g = chain_graph(4);
  const Matrix x = oracle::random_matrix(7, 4, gen);
  const Vector y = oracle::random_vector(7, gen);
  const AugmentedProblem ap = augment(x, y, make_estimator(Preset::gen, &g, {1.0, 0.0, 0, 0}));
  EXPECT_EQ(ap.x_tilde, x);
  EXPECT_EQ(ap.y_tilde, y);
}

TEST(Augment, StacksScaledOperator) {
  const Graph g = chain_graph(2);
  Vector y(2);
  y << 1, 3;
  const AugmentedProblem ap = augment(Matrix::Identity(2, 2), y, make_estimator(Preset::gen, &g, {1.0, 0.5, 0, 0}));
  ASSERT_EQ(ap.x_tilde.rows(), 3);
  EXPECT_NEAR(ap.x_tilde(2, 0), 1.0, 1e-15);
  EXPECT_NEAR(ap.x_tilde(2, 1), -1.0, 1e-15);
  EXPECT_EQ(ap.y_tilde(2), 0.0);
  EXPECT_EQ(ap.x_tilde.topRows(2), Matrix::Identity(2, 2));
}

TEST(Augment, MeanConventionIsRescaled) {
  std::mt19937_64 gen(3);
  const Graph g = chain_graph(3);
  const Matrix x = oracle::random_matrix(10, 3, gen);
  const Vector y = oracle::random_vector(10, gen);
  const AugmentedProblem ap = augment(x, y, make_estimator(Preset::gen, &g, {0.2, 0.0, 0, 0}, LossConvention::mean_sumsq));
  EXPECT_NEAR(ap.lambda1, 1.0, 1e-15);
}

TEST(Augment, RejectsDimensionMismatch) {
  const Graph g = chain_graph(3);
  const PenaltySpec s = make_estimator(Preset::gen, &g, {1.0, 0.0, 0, 0});
  EXPECT_THROW(augment(Matrix::Zero(4, 2), Vector::Zero(4), s), ValidationError);
  EXPECT_THROW(augment(Matrix::Zero(4, 3), Vector::Zero(5), s), ValidationError);
}

TEST(Augment, QuadraticIdentity) {
  std::mt19937_64 gen(4);
  const Graph g = grid_graph({3, 3});
  const Matrix x = oracle::random_matrix(12, 9, gen);
  const Vector y = oracle::random_vector(12, gen);
  const PenaltySpec s = make_estimator(Preset::gen, &g, {0.3, 0.7, 0, 0});
  const AugmentedProblem ap = augment(x, y, s);
  for (int rep = 0; rep < 20; ++rep) {
    const Vector b = oracle::random_vector(9, gen);
    const double lhs = (ap.x_tilde * b).squaredNorm() - (x * b).squaredNorm();
    const double rhs = 2.0 * 0.7 * (s.l2_matrix * b).squaredNorm();
    EXPECT_NEAR(lhs, rhs, 1e-10 * (1.0 + rhs));
  }
}

TEST(SignalPenalty, Examples) {
  const Graph g = grid_graph({3, 3});
  EXPECT_EQ(signal_penalty_value(Vector::Constant(9, 4.0), make_estimator(Preset::gen, &g, {1.0, 1.0, 0, 0})), 0.0);
  const Graph c2 = chain_graph(2);
  Vector b2(2);
  b2 << 1, 0;
  EXPECT_NEAR(signal_penalty_value(b2, make_estimator(Preset::gen, &c2, {1.0, 1.0, 0, 0})), 2.0, 1e-15);
  const Graph c3 = chain_graph(3);
  Vector b3(3);
  b3 << 0, 1, 3;
  EXPECT_NEAR(signal_penalty_value(b3, make_estimator(Preset::gen, &c3, {2.0, 1.0, 0, 0})), 11.0, 1e-15);
}

TEST(Objective, EqualsLossPlusPenaltyForEveryPreset) {
  std::mt19937_64 gen(5);
  const Graph g = chain_graph(6);
  const Matrix x = oracle::random_matrix(9, 6, gen);
  const Vector y = oracle::random_vector(9, gen);
  const Hyperparams h{0.4, 0.6, 0.3, 0.2};
  for (Preset preset : kAllPresets)
    for (LossConvention loss : {LossConvention::half_sumsq, LossConvention::mean_sumsq}) {
      const PenaltySpec s = make_estimator(preset, &g, h, loss);
      const Vector b = oracle::random_vector(6, gen);
      const double rss = (y - x * b).squaredNorm();
      const double data = loss == LossConvention::half_sumsq ? 0.5 * rss : rss / 9.0;
      EXPECT_NEAR(objective_value(x, y, b, s), data + signal_penalty_value(b, s), 1e-12);
    }
}

TEST(Objective, AugmentedObjectiveMatchesHalfConvention) {
  std::mt19937_64 gen(6);
  const Graph g = star_graph(5);
  const Matrix x = oracle::random_matrix(8, 5, gen);
  const Vector y = oracle::random_vector(8, gen);
  for (Preset preset : kAllPresets) {
    const PenaltySpec s = make_estimator(preset, &g, {0.4, 0.6, 0.3, 0.2});
    const AugmentedProblem ap = augment(x, y, s);
    const Vector b = oracle::random_vector(5, gen);
    EXPECT_NEAR(augmented_objective(ap, b), objective_value(x, y, b, s), 1e-10);
  }
}

TEST(Rescaling, MeanAndHalfConventionsShareArgmin) {
  std::mt19937_64 gen(7);
  const Graph g = chain_graph(8);
  SolverOptions opt;
  opt.tol = 1e-11;
  for (int rep = 0; rep < 5; ++rep) {
    const Matrix x = oracle::random_matrix(20, 8, gen);
    const Vector y = oracle::random_vector(20, gen);
    const Hyperparams mean_h{0.05, 0.02, 0, 0};
    const PenaltySpec mean_spec = make_estimator(Preset::gen, &g, mean_h, LossConvention::mean_sumsq);
    const Hyperparams half_h{mean_h.lambda1 * 10.0, mean_h.lambda2 * 10.0, 0, 0};
    const PenaltySpec half_spec = make_estimator(Preset::gen, &g, half_h, LossConvention::half_sumsq);
    const FitResult a = fit(x, y, mean_spec, opt);
    const FitResult b = fit(x, y, half_spec, opt);
    EXPECT_LE((a.beta_hat - b.beta_hat).lpNorm<Eigen::Infinity>(), 1e-6);
    const double mean_obj = objective_value(x, y, a.beta_hat, mean_spec);
    const double half_obj = objective_value(x, y, a.beta_hat, half_spec);
    EXPECT_NEAR(half_obj, 10.0 * mean_obj, 1e-9 * (1.0 + half_obj));
    EXPECT_NEAR(to_half_sumsq(mean_spec, 20).lambda1, half_h.lambda1, 1e-15);
  }
}
