#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "genet/genet.hpp"
#include "oracles.hpp"

using namespace genet;

namespace {

SignalSpec spec_of(SignalFamily family, double tv, Index jumps, Index ramp_edges) {
  SignalSpec s;
  s.family = family;
  s.target_tv = tv;
  s.n_jumps = jumps;
  s.ramp_edges = ramp_edges;
  return s;
}

ExperimentDefinition small_experiment() {
  ExperimentDefinition def;
  def.graph = "chain:12";
  def.covariance = CovarianceKind::toeplitz;
  def.covariance_param = 0.3;
  def.signal = spec_of(SignalFamily::piecewise_constant, 6.0, 2, 0);
  def.n_train = 30;
  def.n_test = 40;
  def.replicates = 3;
  def.seed = 100;
  def.estimators = {Preset::ols, Preset::lasso, Preset::gen};
  def.grids = {{"lambda1", {0.0, 1.0}}, {"lambda2", {0.0, 1.0}}, {"lambdaL", {0.0, 1.0}}};
  def.cv_folds = 3;
  return def;
}

}  // namespace

TEST(MakeSignal, PiecewiseChainJumpHeights) {
  const Graph g = chain_graph(110);
  const Vector b = make_signal(g, spec_of(SignalFamily::piecewise_constant, 15.0, 3, 0));
  const SignalStats s = signal_stats(g, b);
  EXPECT_EQ(s.tv_l0, 3);
  EXPECT_NEAR(s.tv_l1, 15.0, 1e-9);
  EXPECT_NEAR(s.tv_linf, 5.0, 1e-9);
}

TEST(MakeSignal, FullRampOnChain) {
  const Graph g = chain_graph(100);
  const Vector b = make_signal(g, spec_of(SignalFamily::smooth_ramp, 15.0, 0, 0));
  const SignalStats s = signal_stats(g, b);
  EXPECT_EQ(s.tv_l0, 99);
  EXPECT_NEAR(s.tv_l1, 15.0, 1e-9);
  EXPECT_NEAR(s.tv_linf, 15.0 / 99.0, 1e-9);
}

TEST(MakeSignal, BarbellLevels) {
  const Graph g = barbell_graph(3, 1);
  SignalSpec spec;
  spec.family = SignalFamily::barbell_levels;
  spec.level_a = 5.0;
  spec.level_b = 20.0;
  const SignalStats s = signal_stats(g, make_signal(g, spec));
  EXPECT_EQ(s.tv_l0, 1);
  EXPECT_NEAR(s.tv_linf, 15.0, 1e-12);
}

TEST(MakeSignal, BarbellPathInterpolates) {
  for (Index len : {1, 2, 4, 16}) {
    const Graph g = barbell_graph(5, len);
    SignalSpec spec;
    spec.family = SignalFamily::barbell_levels;
    const SignalStats s = signal_stats(g, make_signal(g, spec));
    EXPECT_EQ(s.tv_l0, len);
    EXPECT_NEAR(s.tv_l1, 15.0, 1e-9);
    EXPECT_NEAR(s.tv_linf, 15.0 / static_cast<double>(len), 1e-9);
  }
}

TEST(MakeSignal, MixedChainMatchesDeclaredStats) {
  const Graph g = chain_graph(110);
  for (Index jumps : {1, 2, 5}) {
    SignalSpec spec = spec_of(SignalFamily::mixed, 15.0, jumps, 40);
    spec.ramp_fraction = 0.4;
    const SignalStats s = signal_stats(g, make_signal(g, spec));
    EXPECT_EQ(s.tv_l0, jumps + 40);
    EXPECT_NEAR(s.tv_l1, 15.0, 1e-9);
    EXPECT_NEAR(s.tv_linf, std::max(0.6 * 15.0 / static_cast<double>(jumps), 0.4 * 15.0 / 40.0), 1e-9);
  }
}

TEST(MakeSignal, GridFamiliesMatchDeclaredStats) {
  const Graph g = grid_graph({10, 10});
  const SignalStats island = signal_stats(g, make_signal(g, spec_of(SignalFamily::piecewise_constant, 100.0, 12, 0)));
  EXPECT_EQ(island.tv_l0, 12);
  EXPECT_NEAR(island.tv_l1, 100.0, 1e-9);
  const SignalStats ramp = signal_stats(g, make_signal(g, spec_of(SignalFamily::smooth_ramp, 100.0, 0, 5)));
  EXPECT_EQ(ramp.tv_l0, 50);
  EXPECT_NEAR(ramp.tv_l1, 100.0, 1e-9);
  EXPECT_NEAR(ramp.tv_linf, 2.0, 1e-9);
  const SignalStats mixed = signal_stats(g, make_signal(g, spec_of(SignalFamily::mixed, 100.0, 8, 3)));
  EXPECT_EQ(mixed.tv_l0, 38);
  EXPECT_NEAR(mixed.tv_l1, 100.0, 1e-9);
  EXPECT_NEAR(mixed.tv_linf, 6.25, 1e-9);
}

TEST(MakeSignal, RejectsInfeasibleSpecs) {
  const Graph c = chain_graph(5);
  EXPECT_THROW(make_signal(c, spec_of(SignalFamily::piecewise_constant, 15.0, 5, 0)), ValidationError);
  EXPECT_THROW(make_signal(c, spec_of(SignalFamily::piecewise_constant, -1.0, 1, 0)), ValidationError);
  EXPECT_THROW(make_signal(c, spec_of(SignalFamily::smooth_ramp, 15.0, 0, 9)), ValidationError);
  EXPECT_THROW(make_signal(c, spec_of(SignalFamily::barbell_levels, 15.0, 0, 0)), ValidationError);
  EXPECT_THROW(make_signal(star_graph(5), spec_of(SignalFamily::mixed, 15.0, 1, 1)), ValidationError);
  const Graph g = grid_graph({4, 4});
  EXPECT_THROW(make_signal(g, spec_of(SignalFamily::piecewise_constant, 15.0, 3, 0)), ValidationError);
  EXPECT_THROW(make_signal(g, spec_of(SignalFamily::piecewise_constant, 15.0, 40, 0)), ValidationError);
  EXPECT_THROW(parse_signal_family("wavy"), ValidationError);
}

TEST(SignalStats, Examples) {
  const Graph c3 = chain_graph(3);
  Vector b(3);
  b << 0, 1, 3;
  const SignalStats s = signal_stats(c3, b, {0.5, 1.0});
  EXPECT_EQ(s.tv_l0, 2);
  EXPECT_DOUBLE_EQ(s.tv_l1, 3.0);
  EXPECT_DOUBLE_EQ(s.tv_linf, 2.0);
  EXPECT_EQ(s.sparsity, 2);
  ASSERT_EQ(s.lq_sum.size(), 2u);
  EXPECT_NEAR(s.lq_sum[0].second, 1.0 + std::sqrt(2.0), 1e-12);
  EXPECT_NEAR(s.lq_sum[1].second, 3.0, 1e-12);
  const SignalStats flat = signal_stats(grid_graph({3, 3}), Vector::Constant(9, 2.0));
  EXPECT_EQ(flat.tv_l0, 0);
  EXPECT_EQ(flat.tv_l1, 0.0);
  EXPECT_EQ(flat.tv_linf, 0.0);
  EXPECT_THROW(signal_stats(c3, b, {1.5}), ValidationError);
}

TEST(SignalStats, NormOrderingOnRandomSignals) {
  std::mt19937_64 gen(1);
  const Graph g = grid_graph({5, 6});
  for (int rep = 0; rep < 50; ++rep) {
    const SignalStats s = signal_stats(g, oracle::random_vector(30, gen));
    EXPECT_LE(s.tv_linf, s.tv_l1);
    EXPECT_LE(s.tv_l0, g.num_edges());
  }
}

TEST(Simulate, NoiselessResponse) {
  const Vector beta = Vector::LinSpaced(6, -1.0, 1.0);
  const ExperimentRun run = simulate(toeplitz_covariance(6, 0.4), beta, 0.0, 20, 5, 7, 3);
  EXPECT_LE((run.y_train - run.x_train * beta).lpNorm<Eigen::Infinity>(), 1e-15);
  EXPECT_LE((run.y_val - run.x_val * beta).lpNorm<Eigen::Infinity>(), 1e-15);
  EXPECT_LE((run.y_test - run.x_test * beta).lpNorm<Eigen::Infinity>(), 1e-15);
  EXPECT_EQ(run.x_val.rows(), 5);
  EXPECT_EQ(run.x_test.rows(), 7);
}

TEST(Simulate, DeterministicInSeed) {
  const Vector beta = Vector::Ones(4);
  const auto a = simulate(identity_covariance(4), beta, 1.0, 10, 3, 5, 11);
  const auto b = simulate(identity_covariance(4), beta, 1.0, 10, 3, 5, 11);
  const auto c = simulate(identity_covariance(4), beta, 1.0, 10, 3, 5, 12);
  EXPECT_EQ(a.x_train, b.x_train);
  EXPECT_EQ(a.y_train, b.y_train);
  EXPECT_EQ(a.y_val, b.y_val);
  EXPECT_EQ(a.y_test, b.y_test);
  EXPECT_NE(a.y_train, c.y_train);
  EXPECT_THROW(simulate(identity_covariance(4), beta, -1.0, 10, 0, 5, 1), ValidationError);
  EXPECT_THROW(simulate(identity_covariance(3), beta, 1.0, 10, 0, 5, 1), ValidationError);
}

TEST(Simulate, OlsIsConsistentOnLargeSample) {
  const Vector beta = Vector::LinSpaced(10, 0.0, 3.0);
  const ExperimentRun run = simulate(toeplitz_covariance(10, 0.5), beta, 1.0, 10000, 0, 10, 5);
  const Vector ols = run.x_train.colPivHouseholderQr().solve(run.y_train);
  EXPECT_LE((ols - beta).norm(), 0.1);
}

TEST(Evaluate, Examples) {
  const Vector beta = Vector::LinSpaced(4, 1.0, 4.0);
  ExperimentRun run = simulate(identity_covariance(4), beta, 1.0, 5, 0, 6, 1);
  const Metrics zero = evaluate(beta, run);
  EXPECT_EQ(zero.estimation_error, 0.0);
  EXPECT_EQ(zero.prediction_error, 0.0);
  run.x_test = Matrix::Identity(4, 4);
  Vector shifted = beta;
  shifted(0) += 1.0;
  const Metrics one = evaluate(shifted, run);
  EXPECT_DOUBLE_EQ(one.estimation_error, 1.0);
  EXPECT_DOUBLE_EQ(one.prediction_error, 0.25);
  EXPECT_THROW(evaluate(Vector::Zero(3), run), ValidationError);
}

TEST(Evaluate, PredictionErrorMatchesNaiveLoop) {
  std::mt19937_64 gen(2);
  const Vector beta = oracle::random_vector(7, gen);
  const ExperimentRun run = simulate(toeplitz_covariance(7, 0.2), beta, 1.0, 5, 0, 13, 9);
  for (int rep = 0; rep < 10; ++rep) {
    const Vector b = oracle::random_vector(7, gen);
    double total = 0.0;
    for (Index i = 0; i < 13; ++i) {
      double r = 0.0;
      for (Index j = 0; j < 7; ++j) r += run.x_test(i, j) * (b(j) - beta(j));
      total += r * r;
    }
    EXPECT_NEAR(evaluate(b, run).prediction_error, total / 13.0, 1e-12 * (1.0 + total));
  }
}

TEST(Quantile, LinearInterpolation) {
  EXPECT_DOUBLE_EQ(quantile({4, 1, 3, 2}, 0.5), 2.5);
  EXPECT_DOUBLE_EQ(quantile({4, 1, 3, 2}, 0.25), 1.75);
  EXPECT_DOUBLE_EQ(quantile({4, 1, 3, 2}, 1.0), 4.0);
  EXPECT_DOUBLE_EQ(quantile({7}, 0.75), 7.0);
  EXPECT_THROW(quantile({}, 0.5), ValidationError);
  EXPECT_THROW(quantile({1.0}, 1.5), ValidationError);
}

TEST(ParseExperiment, ReadsKeys) {
  std::stringstream text(
      "# comment\n"
      "graph = grid:6x6\n"
      "covariance = laplacian_inverse\n"
      "covariance_param = 0.7\n"
      "signal = smooth_ramp\n"
      "signal_tv = 100\n"
      "n_train = 40\n"
      "n_val = 20\n"
      "replicates = 4\n"
      "estimators = lasso, gen\n"
      "grid_lambda1 = 0, 1, 10\n"
      "solver = admm\n"
      "tol = 1e-6\n");
  const ExperimentDefinition def = parse_experiment(KeyValueConfig::parse(text));
  EXPECT_EQ(def.graph, "grid:6x6");
  EXPECT_EQ(def.covariance, CovarianceKind::laplacian_inverse);
  EXPECT_EQ(def.covariance_param, 0.7);
  EXPECT_EQ(def.signal.family, SignalFamily::smooth_ramp);
  EXPECT_EQ(def.signal.target_tv, 100.0);
  EXPECT_EQ(def.n_train, 40);
  EXPECT_EQ(def.n_val, 20);
  EXPECT_EQ(def.replicates, 4);
  EXPECT_EQ(def.estimators, (std::vector<Preset>{Preset::lasso, Preset::gen}));
  EXPECT_EQ(def.grids.at("lambda1"), (std::vector<double>{0.0, 1.0, 10.0}));
  EXPECT_EQ(def.solver.solver, SolverKind::admm);
  EXPECT_EQ(def.solver.tol.value(), 1e-6);
}

TEST(ParseExperiment, Rejects) {
  std::stringstream unknown("graph = chain:10\nsignal_heigth = 3\n");
  EXPECT_THROW(parse_experiment(KeyValueConfig::parse(unknown)), ValidationError);
  std::stringstream negative("sigma = -1\n");
  EXPECT_THROW(parse_experiment(KeyValueConfig::parse(negative)), ValidationError);
  std::stringstream bad_estimator("estimators = ols, ridge\n");
  EXPECT_THROW(parse_experiment(KeyValueConfig::parse(bad_estimator)), ValidationError);
  std::stringstream no_equals("graph chain:10\n");
  EXPECT_THROW(KeyValueConfig::parse(no_equals), ValidationError);
}

TEST(RunExperiment, RecordsAndSummaries) {
  const ExperimentDefinition def = small_experiment();
  Index callbacks = 0;
  const ExperimentResult r = run_experiment(def, [&](const ReplicateRecord&) { ++callbacks; });
  ASSERT_EQ(r.records.size(), 9u);
  EXPECT_EQ(callbacks, 9);
  for (std::size_t i = 0; i < r.records.size(); ++i) {
    const ReplicateRecord& rec = r.records[i];
    EXPECT_TRUE(rec.ok) << rec.failure;
    EXPECT_EQ(rec.replicate, static_cast<Index>(i / 3));
    EXPECT_EQ(rec.seed, def.seed + i / 3);
    EXPECT_EQ(rec.estimator, def.estimators[i % 3]);
  }
  ASSERT_EQ(r.summary.size(), 3u);
  for (const auto& s : r.summary) {
    EXPECT_EQ(s.n_ok, 3);
    EXPECT_LE(s.est_q25, s.est_median);
    EXPECT_LE(s.est_median, s.est_q75);
    EXPECT_LE(s.pred_q25, s.pred_median);
    EXPECT_LE(s.pred_median, s.pred_q75);
  }
  EXPECT_EQ(r.signal.tv_l0, 2);
}

TEST(RunExperiment, ReplicateMatchesDirectComputation) {
  const ExperimentDefinition def = small_experiment();
  const ExperimentResult r = run_experiment(def);
  const Graph g = parse_graph_preset(def.graph);
  const ExperimentRun run = simulate(experiment_covariance(def, g), r.beta_star, def.sigma, def.n_train, def.n_val,
                                     def.n_test, def.seed + 1);
  Hyperparams chosen;
  const FitResult f = tune_and_fit(def, g, run, Preset::gen, &chosen);
  const Metrics m = evaluate(f.beta_hat, run);
  const ReplicateRecord& rec = r.records[3 + 2];
  EXPECT_EQ(rec.metrics.estimation_error, m.estimation_error);
  EXPECT_EQ(rec.metrics.prediction_error, m.prediction_error);
  EXPECT_EQ(rec.params.lambda1, chosen.lambda1);
  EXPECT_EQ(rec.params.lambda2, chosen.lambda2);
}

TEST(RunExperiment, ThreadCountDoesNotChangeResults) {
  ExperimentDefinition def = small_experiment();
  const ExperimentResult serial = run_experiment(def);
  def.jobs = 2;
  const ExperimentResult parallel = run_experiment(def);
  ASSERT_EQ(serial.records.size(), parallel.records.size());
  for (std::size_t i = 0; i < serial.records.size(); ++i) {
    EXPECT_EQ(serial.records[i].metrics.estimation_error, parallel.records[i].metrics.estimation_error);
    EXPECT_EQ(serial.records[i].metrics.prediction_error, parallel.records[i].metrics.prediction_error);
  }
  std::stringstream a, b;
  write_summary_csv(a, serial);
  write_summary_csv(b, parallel);
  EXPECT_EQ(a.str(), b.str());
}

TEST(RunExperiment, CsvWriters) {
  ExperimentDefinition def = small_experiment();
  def.replicates = 1;
  const ExperimentResult r = run_experiment(def);
  std::stringstream rep, sum;
  write_replicates_csv(rep, r);
  write_summary_csv(sum, r);
  std::string header;
  std::getline(rep, header);
  EXPECT_EQ(header, "replicate,seed,estimator,ok,estimation_error,prediction_error,lambda1,lambda2,lambdaL,lambdaE,failure");
  std::getline(sum, header);
  EXPECT_EQ(header, "estimator,n_ok,n_failed,est_median,est_q25,est_q75,pred_median,pred_q25,pred_q75");
  int rows = 0;
  for (std::string line; std::getline(sum, line);) ++rows;
  EXPECT_EQ(rows, 3);
}
