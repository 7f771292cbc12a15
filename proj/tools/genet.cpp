// genet command-line tool: fit, cross-validate, simulate, benchmark and
// inspect generalized elastic net models on graphs.
//
// Exit codes: 0 success, 2 usage or validation error, 3 solver
// non-convergence (outputs are still written), 4 I/O error.

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "genet/genet.hpp"

namespace {

using namespace genet;
using json = nlohmann::json;
namespace fs = std::filesystem;

constexpr int kExitOk = 0;
constexpr int kExitUsage = static_cast<int>(ErrorCode::validation);
constexpr int kExitNonConvergence = static_cast<int>(ErrorCode::non_convergence);

// ---------------------------------------------------------------------------
// Output helpers
// ---------------------------------------------------------------------------

class OutputDir {
 public:
  explicit OutputDir(const std::string& path) : root_(path) {
    std::error_code ec;
    fs::create_directories(root_, ec);
    if (ec || !fs::is_directory(root_)) throw IoError("cannot create output directory '" + path + "'");
  }

  std::string path(const std::string& name) const { return (root_ / name).string(); }

  void write(const std::string& name, const std::string& content) {
    std::ofstream out(path(name), std::ios::binary);
    if (!out) throw IoError("cannot write '" + path(name) + "'");
    out << content;
    if (!out) throw IoError("write failed for '" + path(name) + "'");
    files_.push_back(name);
  }

  void write_json(const std::string& name, const json& j) { write(name, j.dump(2) + "\n"); }

  void write_matrix(const std::string& name, const Eigen::Ref<const Matrix>& m) {
    std::ostringstream ss;
    write_matrix_csv(ss, m);
    write(name, ss.str());
  }

  /// Written last so it can list every artifact of the run.
  void write_manifest(const std::string& subcommand, const json& config) {
    json manifest{{"tool", "genet"},
                  {"version", kVersion},
                  {"subcommand", subcommand},
                  {"config", config},
                  {"outputs", files_}};
    write_json("manifest.json", manifest);
  }

 private:
  fs::path root_;
  std::vector<std::string> files_;
};

json hyperparams_json(const Hyperparams& h) {
  return {{"lambda1", h.lambda1}, {"lambda2", h.lambda2}, {"lambdaL", h.lambdaL}, {"lambdaE", h.lambdaE}};
}

json fit_json(const FitResult& f) {
  return {{"solver", to_string(f.solver)},
          {"iterations", f.dual.iterations},
          {"converged", f.converged},
          {"kkt_residual", f.kkt_residual},
          {"duality_gap", f.duality_gap},
          {"primal_objective", f.primal_objective},
          {"wall_time", f.wall_time},
          {"kernel_dim_xtilde", f.kernel_dim_xtilde},
          {"message", f.dual.message},
          {"warnings", f.warnings}};
}

void report_nonconvergence(const FitResult& f) {
  std::cerr << "genet: warning: solver " << to_string(f.solver) << " did not converge";
  if (!f.dual.message.empty()) std::cerr << " (" << f.dual.message << ")";
  std::cerr << "\n";
}

// ---------------------------------------------------------------------------
// Shared option groups
// ---------------------------------------------------------------------------

struct SolverFlags {
  std::string solver = "cd";
  std::optional<double> tol;
  Index max_iter = 0;
  double timeout = 0.0;  // seconds; 0 = unlimited

  void add(CLI::App& cmd) {
    cmd.add_option("--solver", solver, "cd, ip, admm or auto")->capture_default_str();
    cmd.add_option("--tol", tol, "Solver tolerance (default 1e-4, 1e-3 for admm)");
    cmd.add_option("--max-iter", max_iter, "Iteration cap (0 = solver default)")->check(CLI::NonNegativeNumber);
    cmd.add_option("--timeout", timeout, "Per-solve time limit in seconds (0 = none)")->check(CLI::NonNegativeNumber);
  }

  SolverOptions resolve() const {
    SolverOptions opt;
    opt.solver = parse_solver_kind(solver);
    opt.tol = tol;
    if (tol) detail::require(*tol > 0.0, "--tol must be positive");
    opt.max_iter = max_iter;
    if (timeout > 0.0) opt.time_limit = timeout;
    return opt;
  }

  json to_json() const {
    return {{"solver", solver},
            {"tol", tol ? json(*tol) : json(nullptr)},
            {"max_iter", max_iter},
            {"timeout", timeout}};
  }
};

struct ModelFlags {
  std::string x_path;
  std::string y_path;
  std::string graph;
  std::string preset = "gen";
  std::string loss = "half";

  void add(CLI::App& cmd) {
    cmd.add_option("--x", x_path, "Design matrix CSV (n rows, p columns)")->required();
    cmd.add_option("--y", y_path, "Response CSV (one value per row)")->required();
    cmd.add_option("--graph", graph, "Edge-list path or preset (chain, chain:10, grid:5x5, star:4, ...)");
    cmd.add_option("--preset", preset, "ols, lasso, elastic_net, fused_lasso, smooth_lasso or gen")
        ->capture_default_str();
    cmd.add_option("--loss", loss, "half: (1/2)||y - Xb||^2, mean: (1/n)||y - Xb||^2")->capture_default_str();
  }

  json to_json() const {
    return {{"x", x_path}, {"y", y_path}, {"graph", graph}, {"preset", preset}, {"loss", loss}};
  }
};

/// Bare kind names take their size from the data, so "--graph chain" works
/// for any X. Anything else is a preset or an edge-list path.
std::optional<Graph> resolve_graph(const std::string& text, std::optional<Index> p) {
  if (text.empty()) return std::nullopt;
  if (looks_like_graph_preset(text)) {
    Graph g = parse_graph_preset(text);
    if (p) detail::require(g.num_vertices() == *p, "graph '" + text + "' has " + std::to_string(g.num_vertices()) +
                                                       " vertices but the data has " + std::to_string(*p) + " columns");
    return g;
  }
  if (!fs::exists(text) && (text == "chain" || text == "star" || text == "complete")) {
    detail::require(p.has_value(), "graph '" + text + "' needs a size: use " + text + ":P");
    return build_graph(parse_graph_kind(text), {*p});
  }
  if (!fs::exists(text) && (text == "grid" || text == "barbell"))
    throw ValidationError("graph '" + text + "' needs explicit parameters, e.g. grid:5x5 or barbell:3,4");
  return read_edge_list(text, p);
}

struct LoadedData {
  Matrix x;
  Vector y;
  std::optional<Graph> graph;
  Preset preset = Preset::gen;
  LossConvention loss = LossConvention::half_sumsq;
};

LoadedData load_data(const ModelFlags& flags) {
  LoadedData d;
  d.preset = parse_preset(flags.preset);
  d.loss = parse_loss_convention(flags.loss);
  d.x = read_matrix_csv(flags.x_path);
  d.y = read_vector_csv(flags.y_path);
  detail::require(d.x.rows() == d.y.size(), "X has " + std::to_string(d.x.rows()) + " rows but y has " +
                                                std::to_string(d.y.size()) + " entries");
  detail::require(d.x.rows() >= 1 && d.x.cols() >= 1, "X is empty");
  d.graph = resolve_graph(flags.graph, d.x.cols());
  if (preset_needs_graph(d.preset))
    detail::require(d.graph.has_value(), std::string("preset '") + to_string(d.preset) + "' needs --graph");
  return d;
}

const Graph* graph_ptr(const LoadedData& d) { return d.graph ? &*d.graph : nullptr; }

CovarianceMatrix covariance_for(const std::string& kind, double param, const Graph& g) {
  switch (parse_covariance_kind(kind)) {
    case CovarianceKind::identity: return identity_covariance(g.num_vertices());
    case CovarianceKind::toeplitz: return toeplitz_covariance(g.num_vertices(), param);
    case CovarianceKind::laplacian_inverse: return laplacian_inverse_covariance(g, param);
    case CovarianceKind::custom: break;
  }
  throw ValidationError("unsupported covariance '" + kind + "'");
}

// ---------------------------------------------------------------------------
// fit
// ---------------------------------------------------------------------------

struct FitCommand {
  ModelFlags model;
  SolverFlags solver;
  Hyperparams h;
  std::string out = ".";

  void add(CLI::App& app) {
    CLI::App* cmd = app.add_subcommand("fit", "Fit one estimator at fixed hyperparameters");
    model.add(*cmd);
    solver.add(*cmd);
    cmd->add_option("--lambda1", h.lambda1, "Graph l1 weight")->check(CLI::NonNegativeNumber);
    cmd->add_option("--lambda2", h.lambda2, "Graph l2 weight")->check(CLI::NonNegativeNumber);
    cmd->add_option("--lambdaL", h.lambdaL, "Plain l1 weight")->check(CLI::NonNegativeNumber);
    cmd->add_option("--lambdaE", h.lambdaE, "Plain l2 weight")->check(CLI::NonNegativeNumber);
    cmd->add_option("--out", out, "Output directory")->capture_default_str();
    cmd->callback([this] { code = run(); });
  }

  int run() const {
    const LoadedData d = load_data(model);
    const SolverOptions opt = solver.resolve();
    const PenaltySpec spec = make_estimator(d.preset, graph_ptr(d), h, d.loss, d.x.cols());
    OutputDir dir(out);
    const FitResult f = fit(d.x, d.y, spec, opt);
    dir.write_matrix("beta.csv", f.beta_hat);
    json diag = fit_json(f);
    diag["preset"] = to_string(d.preset);
    diag["hyperparameters"] = hyperparams_json(h);
    diag["n"] = d.x.rows();
    diag["p"] = d.x.cols();
    dir.write_json("diagnostics.json", diag);
    json config = model.to_json();
    config.update(solver.to_json());
    config["hyperparameters"] = hyperparams_json(h);
    config["out"] = out;
    dir.write_manifest("fit", config);
    if (!f.converged) {
      report_nonconvergence(f);
      return kExitNonConvergence;
    }
    return kExitOk;
  }

  int code = kExitOk;
};

// ---------------------------------------------------------------------------
// cv
// ---------------------------------------------------------------------------

struct CvCommand {
  ModelFlags model;
  SolverFlags solver;
  std::map<std::string, std::string> grids;
  Index folds = 5;
  std::uint64_t seed = 0;
  Index jobs = 1;
  std::string x_val, y_val;
  std::string out = ".";

  void add(CLI::App& app) {
    CLI::App* cmd = app.add_subcommand("cv", "Select hyperparameters by k-fold CV or a validation set, then refit");
    model.add(*cmd);
    solver.add(*cmd);
    for (const auto& name : hyperparameter_names())
      cmd->add_option("--grid-" + name, grids[name],
                      "Grid for " + name + ": comma list and/or log:LO:HI:N (default: 0 plus 20 log values on [1e-3, 1e2])");
    cmd->add_option("--folds", folds, "Number of folds")->capture_default_str()->check(CLI::Range(2, 1000000));
    cmd->add_option("--seed", seed, "Fold shuffling seed")->capture_default_str();
    cmd->add_option("--jobs", jobs, "Worker threads over folds")->capture_default_str()->check(CLI::PositiveNumber);
    cmd->add_option("--x-val", x_val, "Validation design; replaces k-fold CV");
    cmd->add_option("--y-val", y_val, "Validation response");
    cmd->add_option("--out", out, "Output directory")->capture_default_str();
    cmd->callback([this] { code = run(); });
  }

  int run() const {
    const LoadedData d = load_data(model);
    const SolverOptions opt = solver.resolve();
    CVPlan plan;
    plan.k = folds;
    plan.seed = seed;
    plan.preset = d.preset;
    plan.loss = d.loss;
    plan.jobs = jobs;
    for (const auto& [name, text] : grids)
      if (!text.empty()) plan.grids[name] = parse_grid(text);
    plan.fill_default_grids();
    detail::require(x_val.empty() == y_val.empty(), "--x-val and --y-val must be given together");

    CVResult r;
    if (!x_val.empty()) {
      const Matrix xv = read_matrix_csv(x_val);
      const Vector yv = read_vector_csv(y_val);
      r = grid_search_holdout(d.x, d.y, xv, yv, graph_ptr(d), plan, opt);
    } else {
      detail::require(plan.k <= d.x.rows(), "--folds exceeds the number of rows");
      r = grid_search_cv(d.x, d.y, graph_ptr(d), plan, opt);
    }

    OutputDir dir(out);
    std::ostringstream table;
    write_cv_table_csv(table, r);
    dir.write("cv_table.csv", table.str());
    json best_params = json::object();
    for (const auto& name : r.names) best_params[name] = hyperparameter_value(r.best_params, name);
    json best{{"preset", to_string(d.preset)},
              {"best_params", best_params},
              {"best_index", r.best_index},
              {"mean_score", r.table[static_cast<std::size_t>(r.best_index)].mean_score},
              {"any_valid", r.any_valid},
              {"invalid_points", std::count_if(r.table.begin(), r.table.end(), [](const CVEntry& e) { return !e.valid; })},
              {"grid_points", r.table.size()},
              {"refit", fit_json(r.refit)}};
    dir.write_json("best.json", best);
    dir.write_matrix("beta.csv", r.refit.beta_hat);

    json config = model.to_json();
    config.update(solver.to_json());
    json grid_json = json::object();
    for (const auto& [name, values] : plan.grids) grid_json[name] = values;
    config["grids"] = grid_json;
    config["folds"] = folds;
    config["seed"] = seed;
    config["jobs"] = jobs;
    config["x_val"] = x_val;
    config["y_val"] = y_val;
    config["out"] = out;
    dir.write_manifest("cv", config);

    if (!r.any_valid) {
      std::cerr << "genet: warning: no grid point converged on every fold\n";
      return kExitNonConvergence;
    }
    if (!r.refit.converged) {
      report_nonconvergence(r.refit);
      return kExitNonConvergence;
    }
    return kExitOk;
  }

  int code = kExitOk;
};

// ---------------------------------------------------------------------------
// synth
// ---------------------------------------------------------------------------

json experiment_json(const ExperimentDefinition& def) {
  std::vector<std::string> estimators;
  for (Preset p : def.estimators) estimators.emplace_back(to_string(p));
  json grids = json::object();
  for (const auto& [name, values] : def.grids) grids[name] = values;
  return {{"graph", def.graph},
          {"covariance", to_string(def.covariance)},
          {"covariance_param", def.covariance_param},
          {"signal",
           {{"family", to_string(def.signal.family)},
            {"target_tv", def.signal.target_tv},
            {"n_jumps", def.signal.n_jumps},
            {"ramp_edges", def.signal.ramp_edges},
            {"ramp_start", def.signal.ramp_start},
            {"ramp_fraction", def.signal.ramp_fraction},
            {"base_level", def.signal.base_level},
            {"level_a", def.signal.level_a},
            {"level_b", def.signal.level_b}}},
          {"n_train", def.n_train},
          {"n_val", def.n_val},
          {"n_test", def.n_test},
          {"sigma", def.sigma},
          {"seed", def.seed},
          {"replicates", def.replicates},
          {"estimators", estimators},
          {"cv_folds", def.cv_folds},
          {"grids", grids},
          {"solver", to_string(def.solver.solver)},
          {"tol", def.solver.tol ? json(*def.solver.tol) : json(nullptr)},
          {"max_iter", def.solver.max_iter},
          {"loss", to_string(def.loss)},
          {"jobs", def.jobs}};
}

struct SynthCommand {
  std::string experiment;
  std::optional<std::uint64_t> seed;
  std::optional<Index> replicates;
  std::optional<Index> jobs;
  std::optional<std::string> solver;
  std::optional<double> tol;
  std::string out = ".";

  void add(CLI::App& app) {
    CLI::App* cmd = app.add_subcommand("synth", "Run a synthetic resampling study from an experiment file");
    cmd->add_option("--experiment", experiment, "Experiment definition (key = value lines)")->required();
    cmd->add_option("--seed", seed, "Override the base seed");
    cmd->add_option("--replicates", replicates, "Override the replicate count")->check(CLI::PositiveNumber);
    cmd->add_option("--jobs", jobs, "Worker threads over replicates")->check(CLI::PositiveNumber);
    cmd->add_option("--solver", solver, "Override the solver");
    cmd->add_option("--tol", tol, "Override the solver tolerance");
    cmd->add_option("--out", out, "Output directory")->capture_default_str();
    cmd->callback([this] { code = run(); });
  }

  int run() const {
    KeyValueConfig cfg = KeyValueConfig::read(experiment);
    std::ostringstream num;
    num << std::setprecision(17);
    if (seed) cfg.set("seed", std::to_string(*seed));
    if (replicates) cfg.set("replicates", std::to_string(*replicates));
    if (jobs) cfg.set("jobs", std::to_string(*jobs));
    if (solver) cfg.set("solver", *solver);
    if (tol) {
      num << *tol;
      cfg.set("tol", num.str());
    }
    const ExperimentDefinition def = parse_experiment(cfg);
    OutputDir dir(out);
    const ExperimentResult r = run_experiment(def, [](const ReplicateRecord& rec) {
      if (!rec.ok)
        std::cerr << "genet: replicate " << rec.replicate << " " << to_string(rec.estimator)
                  << " failed: " << rec.failure << "\n";
    });
    std::ostringstream reps, summary;
    write_replicates_csv(reps, r);
    write_summary_csv(summary, r);
    dir.write("replicates.csv", reps.str());
    dir.write("summary.csv", summary.str());
    dir.write_matrix("beta_star.csv", r.beta_star);
    json config = experiment_json(def);
    config["experiment_file"] = experiment;
    config["signal_stats"] = {{"tv_l0", r.signal.tv_l0}, {"tv_l1", r.signal.tv_l1}, {"tv_linf", r.signal.tv_linf},
                              {"sparsity", r.signal.sparsity}};
    config["out"] = out;
    dir.write_manifest("synth", config);
    bool all_failed = false;
    for (const auto& s : r.summary) {
      if (s.n_failed > 0)
        std::cerr << "genet: " << to_string(s.estimator) << ": " << s.n_failed << " of " << def.replicates
                  << " replicates failed and are excluded from the summary\n";
      if (s.n_ok == 0) all_failed = true;
    }
    return all_failed ? kExitNonConvergence : kExitOk;
  }

  int code = kExitOk;
};

// ---------------------------------------------------------------------------
// bench
// ---------------------------------------------------------------------------

struct BenchPoint {
  Index n = 0;
  Index p = 0;
  std::string kind;
};

BenchPoint parse_bench_point(const std::string& text) {
  const auto parts = KeyValueConfig::split_list(text);
  detail::require(parts.size() == 3, "bench point must be n,p,kind: '" + text + "'");
  BenchPoint pt;
  try {
    pt.n = std::stoll(parts[0]);
    pt.p = std::stoll(parts[1]);
  } catch (const std::exception&) {
    throw ValidationError("bench point has a non-integer size: '" + text + "'");
  }
  pt.kind = parts[2];
  detail::require(pt.n >= 1 && pt.p >= 2, "bench point needs n >= 1 and p >= 2: '" + text + "'");
  return pt;
}

struct BenchCommand {
  std::vector<std::string> points{"10,10,chain"};
  std::string solvers = "cd,ip,admm";
  Index repeats = 3;
  double timeout = 0.0;
  double jump = 0.3;
  std::optional<double> tol;
  std::uint64_t seed = 1;
  std::string out = ".";

  void add(CLI::App& app) {
    CLI::App* cmd = app.add_subcommand("bench", "Time the solvers on synthetic instances");
    cmd->add_option("--point", points, "Instance n,p,kind (repeatable; kind = chain, grid, star, complete)")
        ->capture_default_str();
    cmd->add_option("--solvers", solvers, "Comma-separated solver list")->capture_default_str();
    cmd->add_option("--repeats", repeats, "Timed runs per point; the median is reported")
        ->capture_default_str()->check(CLI::PositiveNumber);
    cmd->add_option("--timeout", timeout, "Per-run time limit in seconds (0 = none); hits are censored")
        ->check(CLI::NonNegativeNumber);
    cmd->add_option("--jump", jump, "Signal jump height ||Gamma beta*||_inf")->capture_default_str()
        ->check(CLI::PositiveNumber);
    cmd->add_option("--tol", tol, "Override the solver tolerances (default 1e-4, 1e-3 for admm)");
    cmd->add_option("--seed", seed, "Instance seed")->capture_default_str();
    cmd->add_option("--out", out, "Output directory")->capture_default_str();
    cmd->callback([this] { code = run(); });
  }

  int run() const {
    std::vector<BenchPoint> pts;
    for (const auto& text : points) pts.push_back(parse_bench_point(text));
    std::vector<SolverKind> kinds;
    for (const auto& name : KeyValueConfig::split_list(solvers)) kinds.push_back(parse_solver_kind(name));
    detail::require(!kinds.empty(), "bench: no solvers listed");
    OutputDir dir(out);

    std::ostringstream csv;
    csv << "n,p,graph,solver,median_seconds,min_seconds,max_seconds,runs,censored,converged,iterations,"
           "lambda1,lambda2\n";
    csv << std::setprecision(10);
    for (std::size_t i = 0; i < pts.size(); ++i) {
      const BenchPoint& pt = pts[i];
      const BenchInstance inst = bench_instance(pt.n, pt.p, pt.kind, jump, SeededRng::derive(seed, i));

      for (SolverKind kind : kinds) {
        SolverOptions opt;
        opt.solver = kind;
        opt.tol = tol;
        if (timeout > 0.0) opt.time_limit = timeout;
        std::vector<double> times;
        bool censored = false;
        bool converged = true;
        Index iterations = 0;
        for (Index rep = 0; rep < repeats && !censored; ++rep) {
          const auto start = std::chrono::steady_clock::now();
          const FitResult f = fit(inst.x, inst.y, inst.spec, opt);
          times.push_back(std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count());
          censored = f.dual.message == "time limit reached" || (timeout > 0.0 && times.back() >= timeout);
          converged = converged && f.converged;
          iterations = f.dual.iterations;
        }
        csv << pt.n << ',' << pt.p << ',' << pt.kind << ',' << to_string(kind) << ',' << quantile(times, 0.5) << ','
            << *std::min_element(times.begin(), times.end()) << ',' << *std::max_element(times.begin(), times.end())
            << ',' << times.size() << ',' << (censored ? 1 : 0) << ',' << (converged ? 1 : 0) << ',' << iterations
            << ',' << inst.tuning.lambda1 << ',' << inst.tuning.lambda2 << '\n';
        std::cerr << "genet: bench n=" << pt.n << " p=" << pt.p << " " << pt.kind << " " << to_string(kind) << ": "
                  << quantile(times, 0.5) << " s" << (censored ? " (censored)" : "") << "\n";
      }
    }
    dir.write("runtimes.csv", csv.str());
    dir.write_manifest("bench", {{"points", points},
                                 {"solvers", solvers},
                                 {"repeats", repeats},
                                 {"timeout", timeout},
                                 {"jump", jump},
                                 {"tol", tol ? json(*tol) : json(nullptr)},
                                 {"seed", seed},
                                 {"loss", "mean"},
                                 {"lambdas", "theory: lambda2 = lambda1 / (8 jump)"},
                                 {"out", out}});
    return kExitOk;
  }

  int code = kExitOk;
};

// ---------------------------------------------------------------------------
// eigen-curve, re-check, graph
// ---------------------------------------------------------------------------

struct CovarianceFlags {
  std::string graph;
  std::string covariance;
  double param = 0.0;

  void add(CLI::App& cmd) {
    cmd.add_option("--graph", graph, "Graph preset or edge-list path")->capture_default_str();
    cmd.add_option("--covariance", covariance, "identity, toeplitz or laplacian_inverse")->capture_default_str();
    cmd.add_option("--covariance-param", param, "rho for toeplitz, c for laplacian_inverse")->capture_default_str();
  }

  json to_json() const { return {{"graph", graph}, {"covariance", covariance}, {"covariance_param", param}}; }
};

struct EigenCurveCommand {
  CovarianceFlags cov{"chain:100", "toeplitz", 0.8};
  std::string grid;
  std::string out = ".";

  void add(CLI::App& app) {
    CLI::App* cmd = app.add_subcommand("eigen-curve", "Smallest eigenvalue of Sigma/64 + lambda2 L over a grid");
    cov.add(*cmd);
    cmd->add_option("--lambda2-grid", grid, "lambda2 values (default 21 points on [0, 1])");
    cmd->add_option("--out", out, "Output directory")->capture_default_str();
    cmd->callback([this] { code = run(); });
  }

  int run() const {
    const Graph g = *resolve_graph(cov.graph, std::nullopt);
    const CovarianceMatrix s = covariance_for(cov.covariance, cov.param, g);
    std::vector<double> values;
    if (grid.empty()) {
      for (int i = 0; i <= 20; ++i) values.push_back(i / 20.0);
    } else {
      values = parse_grid(grid);
    }
    const EigenCurve c = min_eigen_curve(s.values, laplacian(g), values);
    OutputDir dir(out);
    std::ostringstream csv;
    csv << "lambda2,gmin,gmin_ge_lambda2_over64,gmin_ge_sqrt_lambda2_over64\n" << std::setprecision(17);
    for (std::size_t i = 0; i < c.lambda2.size(); ++i)
      csv << c.lambda2[i] << ',' << c.gmin[i] << ',' << int(c.ge_linear[i]) << ',' << int(c.ge_sqrt[i]) << '\n';
    dir.write("eigen_curve.csv", csv.str());
    json config = cov.to_json();
    config["lambda2_grid"] = values;
    config["out"] = out;
    dir.write_manifest("eigen-curve", config);
    return kExitOk;
  }

  int code = kExitOk;
};

struct ReCheckCommand {
  CovarianceFlags cov{"chain:20", "identity", 0.0};
  Index n = 200;
  Index trials = 50;
  Index directions = 20;
  std::uint64_t seed = 1;
  std::string out = ".";

  void add(CLI::App& app) {
    CLI::App* cmd = app.add_subcommand("re-check", "Monte Carlo check of the restricted eigenvalue inequality");
    cov.add(*cmd);
    cmd->add_option("--n", n, "Rows per simulated design")->capture_default_str();
    cmd->add_option("--trials", trials, "Simulated designs")->capture_default_str();
    cmd->add_option("--directions", directions, "Directions tested per design")->capture_default_str();
    cmd->add_option("--seed", seed, "Base seed")->capture_default_str();
    cmd->add_option("--out", out, "Output directory")->capture_default_str();
    cmd->callback([this] { code = run(); });
  }

  int run() const {
    const Graph g = *resolve_graph(cov.graph, std::nullopt);
    const CovarianceMatrix s = covariance_for(cov.covariance, cov.param, g);
    const ReTrialResult r = re_condition_trial(s.values, g, n, trials, directions, seed);
    OutputDir dir(out);
    std::ostringstream csv;
    csv << "pass_fraction,n_pass,n_total,min_margin\n"
        << std::setprecision(17) << r.pass_fraction << ',' << r.n_pass << ',' << r.n_total << ',' << r.min_margin
        << '\n';
    dir.write("re_check.csv", csv.str());
    json config = cov.to_json();
    config.update(json{{"n", n}, {"trials", trials}, {"directions", directions}, {"seed", seed}, {"out", out}});
    dir.write_manifest("re-check", config);
    std::cout << "pass_fraction " << r.pass_fraction << " (" << r.n_pass << "/" << r.n_total << ")\n";
    return kExitOk;
  }

  int code = kExitOk;
};

struct GraphCommand {
  std::string graph;
  std::string kind;
  std::optional<Index> p;
  std::string out = ".";

  void add(CLI::App& app) {
    CLI::App* cmd = app.add_subcommand("graph", "Dump incidence matrix, Laplacian and rho of a graph");
    cmd->add_option("--graph", graph, "Graph preset or edge-list path");
    cmd->add_option("--kind", kind, "chain, star or complete (with --p)");
    cmd->add_option("--p", p, "Vertex count for --kind")->check(CLI::PositiveNumber);
    cmd->add_option("--out", out, "Output directory")->capture_default_str();
    cmd->callback([this] { code = run(); });
  }

  int run() const {
    detail::require(graph.empty() != kind.empty(), "give exactly one of --graph or --kind");
    const Graph g = graph.empty() ? *resolve_graph(kind, p) : *resolve_graph(graph, p);
    const GraphSpectra s = graph_spectra(g);
    OutputDir dir(out);
    dir.write_matrix("incidence.csv", incidence_matrix(g));
    dir.write_matrix("laplacian.csv", s.laplacian);
    std::ostringstream edges;
    write_edge_list(edges, g);
    dir.write("edges.txt", edges.str());
    dir.write_json("graph.json", {{"kind", to_string(g.kind())},
                                  {"shape", g.shape()},
                                  {"p", g.num_vertices()},
                                  {"m", g.num_edges()},
                                  {"rho", s.rho},
                                  {"n_components", s.n_components},
                                  {"max_degree", s.max_degree}});
    dir.write_manifest("graph", {{"graph", graph}, {"kind", kind}, {"p", p ? json(*p) : json(nullptr)}, {"out", out}});
    return kExitOk;
  }

  int code = kExitOk;
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"genet: generalized elastic net regression on graphs"};
  app.set_version_flag("--version", std::string(genet::kVersion));
  app.require_subcommand(1);
  app.set_config("--config", "", "INI or TOML file with option values ([fit], [cv], ... sections)");

  FitCommand fit_cmd;
  CvCommand cv_cmd;
  SynthCommand synth_cmd;
  BenchCommand bench_cmd;
  EigenCurveCommand eigen_cmd;
  ReCheckCommand re_cmd;
  GraphCommand graph_cmd;
  fit_cmd.add(app);
  cv_cmd.add(app);
  synth_cmd.add(app);
  bench_cmd.add(app);
  eigen_cmd.add(app);
  re_cmd.add(app);
  graph_cmd.add(app);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitUsage;
  } catch (const genet::Error& e) {
    std::cerr << "genet: error: " << e.what() << "\n";
    return static_cast<int>(e.code());
  } catch (const std::exception& e) {
    std::cerr << "genet: internal error: " << e.what() << "\n";
    return 1;
  }
  for (int code : {fit_cmd.code, cv_cmd.code, synth_cmd.code, bench_cmd.code, eigen_cmd.code, re_cmd.code,
                   graph_cmd.code})
    if (code != kExitOk) return code;
  return kExitOk;
}
