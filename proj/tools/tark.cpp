// Command-line front end: problem generation, single solves, multi-method
// comparisons, Monte-Carlo bound checks, active regression and figure data.

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "tark/active.hpp"
#include "tark/harness.hpp"
#include "tark/kaczmarz.hpp"
#include "tark/linalg.hpp"
#include "tark/problems.hpp"
#include "tark/ridge.hpp"

using namespace tark;
namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

struct Globals {
  std::uint64_t seed = 0;
  bool seed_given = false;
  std::string out;
  std::size_t threads = 1;
};

/// Writes to the file at `path`, or to stdout when the path is empty or "-".
template <class Fn>
void with_output(const std::string& path, Fn&& fn) {
  if (path.empty() || path == "-") {
    fn(std::cout);
    return;
  }
  if (const fs::path parent = fs::path(path).parent_path(); !parent.empty()) {
    fs::create_directories(parent);
  }
  std::ofstream out(path);
  if (!out) throw std::invalid_argument("cannot write " + path);
  fn(out);
}

json spectral_json(const SpectralSummary& s) {
  return json{{"sigma_max", s.sigma_max},
              {"sigma_min_pos", s.sigma_min_pos},
              {"frob_norm", s.frob_norm},
              {"rank", s.rank},
              {"kappa_dem", s.kappa_dem()},
              {"spectral_condition", s.spectral_condition()}};
}

// --- generate ----------------------------------------------------------------

struct GenerateArgs {
  std::string kind = "poly";
  std::size_t n = 100000;
  std::size_t d = 25;
  std::string basis = "chebyshev";
  double noise_std = 0.2;
  std::size_t m = 10;
  double v = 5.0;
  std::string prefix = "problem";
};

int cmd_generate(const Globals& g, const GenerateArgs& a) {
  const fs::path dir = g.out.empty() ? fs::path(".") : fs::path(g.out);
  fs::create_directories(dir);
  json spec;
  std::optional<LeastSquaresProblem> problem;
  if (a.kind == "poly") {
    PolyRegressionSpec s{a.n, a.d, parse_basis(a.basis), a.noise_std, g.seed};
    problem.emplace(gen_poly_regression(s));
    spec = {{"kind", "poly_regression"}, {"n", s.n}, {"d", s.d}, {"basis", a.basis},
            {"noise_std", s.noise_std}, {"seed", s.seed}};
  } else if (a.kind == "lower_bound") {
    LowerBoundSpec s{a.d, a.m, a.v, g.seed};
    problem.emplace(gen_lower_bound_problem(s));
    spec = {{"kind", "lower_bound"}, {"d", s.d}, {"m", s.m}, {"v", s.v}, {"seed", s.seed}};
  } else if (a.kind == "gaussian") {
    Rng rng(g.seed);
    problem.emplace(gen_gaussian_problem(a.n, a.d, a.noise_std, rng));
    spec = {{"kind", "gaussian"}, {"n", a.n}, {"d", a.d}, {"noise_std", a.noise_std}, {"seed", g.seed}};
  } else {
    throw std::invalid_argument("generate: unknown kind " + a.kind);
  }
  const fs::path matrix = dir / (a.prefix + "_matrix.txt");
  const fs::path rhs = dir / (a.prefix + "_rhs.txt");
  const fs::path solution = dir / (a.prefix + "_solution.txt");
  write_matrix_file(matrix.string(), problem->matrix);
  write_vector_file(rhs.string(), problem->rhs);
  write_vector_file(solution.string(), *problem->reference_solution);

  json sidecar{{"spec", spec},
               {"spectral", spectral_json(spectral_summary(problem->matrix))},
               {"reference_residual_sq", *problem->reference_residual_sq},
               {"matrix", matrix.filename().string()},
               {"rhs", rhs.filename().string()},
               {"reference_solution", solution.filename().string()}};
  std::ofstream(dir / (a.prefix + ".json")) << sidecar.dump(2) << '\n';
  std::cerr << "wrote " << matrix.string() << ", " << rhs.string() << ", " << solution.string() << '\n';
  return 0;
}

// --- solve -------------------------------------------------------------------

struct SolveArgs {
  std::string matrix;
  std::string rhs;
  std::string method = "TARK";
  std::size_t t = 0;
  std::optional<std::size_t> t_b;
  std::optional<double> omega;
  std::size_t q = 1;
  std::optional<double> mu;
  std::string trace;
  bool timing = false;
};

int cmd_solve(const Globals& g, const SolveArgs& a) {
  ExperimentConfig c;
  c.problem.kind = ProblemConfig::Kind::Files;
  c.problem.matrix_path = a.matrix;
  c.problem.rhs_path = a.rhs;
  MethodSpec m;
  m.kind = parse_method_kind(a.method);
  m.label = a.method;
  m.t_b = a.t_b;
  m.omega = a.omega;
  m.q = a.q;
  c.methods = {m};
  c.budget = a.t;
  c.trials = 1;
  c.master_seed = g.seed;
  c.mu = a.mu;
  c.record_timing = a.timing;
  c.validate();

  const LeastSquaresProblem problem = build_problem(c.problem);
  const ExperimentResult r = run_experiment(problem, c);
  with_output(g.out, [&](std::ostream& os) { write_vector(os, r.finals.front().x); });
  if (!a.trace.empty()) with_output(a.trace, [&](std::ostream& os) { write_csv(os, r.records); });
  const TraceRecord& last = r.records.back();
  std::cerr << "rows_accessed " << last.rows_accessed << " rel_err_lstsq "
            << format_double(last.rel_err_lstsq);
  if (last.rel_err_ridge) std::cerr << " rel_err_ridge " << format_double(*last.rel_err_ridge);
  std::cerr << " residual_norm " << format_double(last.residual_norm) << '\n';
  return 0;
}

// --- compare / figure-data -----------------------------------------------------

void write_experiment(const std::string& csv_path, const ExperimentResult& r) {
  with_output(csv_path, [&](std::ostream& os) { write_csv(os, r.records); });
  if (!csv_path.empty() && csv_path != "-") {
    fs::path summary(csv_path);
    summary.replace_extension(".summary.csv");
    with_output(summary.string(), [&](std::ostream& os) { write_summary_csv(os, r.summary); });
  }
}

struct CompareArgs {
  std::string config;
  bool timing = false;
};

int cmd_compare(const Globals& g, const CompareArgs& a, bool threads_given) {
  ExperimentConfig c = load_experiment_config(a.config);
  if (g.seed_given) c.master_seed = g.seed;
  if (threads_given) c.threads = g.threads;
  if (a.timing) c.record_timing = true;
  const LeastSquaresProblem problem = build_problem(c.problem);
  const ExperimentResult r = run_experiment(problem, c);
  write_experiment(g.out.empty() ? c.output : g.out, r);
  return 0;
}

struct FigureArgs {
  int figure = 1;
  bool full = false;
  std::optional<std::size_t> n;
  std::size_t trials = 10;
};

/// Coefficients of the trial whose final error is the (lower) median.
Vector median_trial_estimate(const ExperimentResult& r, const std::string& method,
                             std::size_t budget) {
  std::vector<std::pair<double, std::size_t>> finals;
  for (const TraceRecord& rec : r.records) {
    if (rec.method == method && rec.rows_accessed == budget) finals.emplace_back(rec.rel_err_lstsq, rec.trial);
  }
  std::sort(finals.begin(), finals.end());
  const std::size_t trial = finals[(finals.size() - 1) / 2].second;
  for (const FinalEstimate& f : r.finals) {
    if (f.method == method && f.trial == trial) return f.x;
  }
  throw std::logic_error("median_trial_estimate: missing estimate");
}

int cmd_figure_data(const Globals& g, const FigureArgs& a, bool threads_given) {
  const std::size_t n = a.n.value_or(a.full ? 1000000 : 100000);
  ExperimentConfig c = figure_preset(a.figure, n, a.trials, g.seed);
  if (threads_given) c.threads = g.threads;
  const LeastSquaresProblem problem = build_problem(c.problem);
  const ExperimentResult r = run_experiment(problem, c);

  const fs::path dir = g.out.empty() ? fs::path(".") : fs::path(g.out);
  const std::string stem = "fig" + std::to_string(a.figure);
  write_experiment((dir / (stem + ".csv")).string(), r);

  json coeffs = json::object();
  for (const MethodSpec& m : c.methods) coeffs[m.label] = median_trial_estimate(r, m.label, c.budget);
  json sidecar{{"basis", std::string(to_string(c.problem.poly.basis))},
               {"d", c.problem.poly.d},
               {"domain", {-1.0, 1.0}},
               {"target", "sin(pi*u)*exp(-2*u)+cos(4*pi*u)"},
               {"reference", problem.reference_solution.value()},
               {"methods", coeffs}};
  std::ofstream(dir / (stem + ".polyfit.json")) << sidecar.dump(2) << '\n';

  for (const MethodSpec& m : c.methods) {
    const SummaryRow last = r.series(m.label).back();
    std::cerr << m.label << " median final rel_err_lstsq " << format_double(last.median_rel_err_lstsq);
    if (last.median_rel_err_ridge) {
      std::cerr << " rel_err_ridge " << format_double(*last.median_rel_err_ridge);
    }
    std::cerr << '\n';
  }
  return 0;
}

// --- bounds ------------------------------------------------------------------

struct BoundsArgs {
  std::string theorem = "2";
  std::string problem = "gaussian";
  std::size_t n = 100;
  std::size_t d = 5;
  double noise_std = 0.5;
  std::string matrix;
  std::string rhs;
  std::vector<std::size_t> times;
  std::size_t t_b = 0;
  double mu = 0.9;
  std::size_t trials = 1000;
};

int cmd_bounds(const Globals& g, const BoundsArgs& a) {
  std::optional<LeastSquaresProblem> problem;
  if (a.problem == "gaussian") {
    Rng rng(g.seed);
    problem.emplace(gen_gaussian_problem(a.n, a.d, a.noise_std, rng));
  } else if (a.problem == "two_row") {
    problem.emplace(DenseMatrix::from_rows({{1.0}, {1.0}}), Vector{0.0, 2.0});
  } else if (a.problem == "files") {
    problem.emplace(read_matrix_file(a.matrix), read_vector_file(a.rhs));
  } else {
    throw std::invalid_argument("bounds: unknown problem " + a.problem);
  }
  BoundCheckConfig c;
  c.kind = parse_bound_kind(a.theorem);
  c.times = a.times;
  c.t_b = a.t_b;
  c.mu = a.mu;
  c.trials = a.trials;
  c.seed = g.seed;
  c.threads = g.threads;
  const std::vector<BoundCheck> checks = verify_bounds(*problem, c);
  bool ok = true;
  with_output(g.out, [&](std::ostream& os) {
    os << "t,mse,std_err,bound,pass\n";
    for (const BoundCheck& k : checks) {
      os << k.t << ',' << format_double(k.mse) << ',' << format_double(k.std_err) << ','
         << format_double(k.bound) << ',' << (k.pass ? "true" : "false") << '\n';
      ok = ok && k.pass;
    }
  });
  return ok ? 0 : 1;
}

// --- active ------------------------------------------------------------------

struct ActiveArgs {
  std::size_t n = 200;
  std::size_t d = 10;
  double noise_std = 1.0;
  std::string matrix;
  std::string rhs;
  std::optional<std::size_t> t;
  std::optional<std::size_t> t_b;
  std::optional<double> eps;
  std::size_t trials = 20;
  std::size_t points_per_decade = 10;
};

int cmd_active(const Globals& g, const ActiveArgs& a) {
  Rng problem_rng(g.seed);
  const LeastSquaresProblem problem =
      a.matrix.empty() ? gen_gaussian_problem(a.n, a.d, a.noise_std, problem_rng) : [&] {
        LeastSquaresProblem p(read_matrix_file(a.matrix), read_vector_file(a.rhs));
        p.attach_reference();
        return p;
      }();
  const std::size_t r = spectral_summary(problem.matrix).rank;
  std::size_t t = 0;
  std::size_t t_b = 0;
  if (a.eps) {
    if (a.t || a.t_b) throw std::invalid_argument("active: give either --eps or --t/--t-b");
    const BudgetSchedule s = budget_schedule(r, *a.eps);
    t = s.t;
    t_b = s.t_b;
  } else {
    if (!a.t) throw std::invalid_argument("active: --t or --eps is required");
    t = *a.t;
    t_b = a.t_b.value_or(t / 2);
  }
  const double best = *problem.reference_residual_sq;
  const std::vector<std::size_t> grid = checkpoint_grid(t - 1, a.points_per_decade);

  const QRFactors factors = thin_qr(problem.matrix);
  const LeastSquaresProblem pre(factors.q, problem.rhs);
  // Trace rows are TARK steps; entries add the r rows read for the start.
  std::vector<std::vector<std::pair<std::size_t, double>>> traces(a.trials);
  std::vector<ActiveResult> results(a.trials);
  parallel_for(a.trials, g.threads, [&](std::size_t trial) {
    Rng rng(derive_seed(g.seed, {1, trial}));
    Trace trace;
    trace.checkpoints = grid;
    trace.sink = [&](std::size_t rows, std::span<const double> y) {
      const double res = dist_sq(pre.matrix.multiply(y), pre.rhs);
      traces[trial].emplace_back(rows, res / best);
    };
    results[trial] = run_preconditioned_tark(problem, t_b, t, rng, trace);
  });

  with_output(g.out, [&](std::ostream& os) {
    os << "trial,entries_accessed,residual_ratio,bound\n";
    for (std::size_t trial = 0; trial < a.trials; ++trial) {
      for (const auto& [rows, ratio] : traces[trial]) {
        os << trial << ',' << r + rows << ',' << format_double(ratio) << ',';
        if (rows + 1 > t_b) os << format_double(bound_theorem6(r, t_b, rows + 1));
        os << '\n';
      }
    }
  });
  double mean = 0.0;
  for (const ActiveResult& res : results) {
    mean += dist_sq(problem.matrix.multiply(res.x), problem.rhs) / best;
  }
  mean /= static_cast<double>(a.trials);
  std::cerr << "rank " << r << " t_b " << t_b << " t " << t << " entries " << results.front().entries_accessed
            << " mean residual ratio " << format_double(mean) << " bound "
            << format_double(bound_theorem6(r, t_b, t)) << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Randomized Kaczmarz solvers with tail averaging"};
  app.require_subcommand(1);
  app.fallthrough();
  Globals g;
  auto* seed_opt = app.add_option("--seed", g.seed, "master seed");
  app.add_option("--out", g.out, "output file or directory");
  auto* threads_opt = app.add_option("--threads", g.threads, "worker threads for trials")
                          ->check(CLI::PositiveNumber);

  GenerateArgs gen;
  auto* generate = app.add_subcommand("generate", "write a test problem to text files");
  generate->add_option("--kind", gen.kind, "poly, lower_bound or gaussian")
      ->check(CLI::IsMember({"poly", "lower_bound", "gaussian"}));
  generate->add_option("--n", gen.n, "rows");
  generate->add_option("--d", gen.d, "columns");
  generate->add_option("--basis", gen.basis)->check(CLI::IsMember({"chebyshev", "monomial"}));
  generate->add_option("--noise-std", gen.noise_std);
  generate->add_option("--m", gen.m, "block height (lower_bound)");
  generate->add_option("--v", gen.v, "shared variance (lower_bound)");
  generate->add_option("--prefix", gen.prefix, "output file stem");

  SolveArgs sol;
  auto* solve = app.add_subcommand("solve", "run one method on a problem from files");
  solve->add_option("--matrix", sol.matrix)->required();
  solve->add_option("--rhs", sol.rhs)->required();
  solve->add_option("--method", sol.method, "RK, TARK, TARK_DOUBLING, RKU, RKA, RKRR, TARK_RR, "
                                            "AUG_RK, AUG_TARK, DUAL_RK");
  solve->add_option("--t", sol.t, "rows accessed")->required();
  solve->add_option("--t-b", sol.t_b, "burn-in");
  solve->add_option("--omega", sol.omega, "underrelaxation");
  solve->add_option("--q", sol.q, "RKA threads");
  solve->add_option("--mu", sol.mu, "ridge weight decay");
  solve->add_option("--trace", sol.trace, "write the checkpoint trace CSV here");
  solve->add_flag("--timing", sol.timing, "record wall-clock times in the trace");

  CompareArgs cmp;
  auto* compare = app.add_subcommand("compare", "run a JSON experiment and write its CSV");
  compare->add_option("--config", cmp.config)->required();
  compare->add_flag("--timing", cmp.timing, "record wall-clock times");

  BoundsArgs bnd;
  auto* bounds = app.add_subcommand("bounds", "Monte-Carlo check of an error bound");
  bounds->add_option("--theorem", bnd.theorem, "1..5")->check(CLI::IsMember({"1", "2", "3", "4", "5"}));
  bounds->add_option("--problem", bnd.problem, "gaussian, two_row or files")
      ->check(CLI::IsMember({"gaussian", "two_row", "files"}));
  bounds->add_option("--n", bnd.n);
  bounds->add_option("--d", bnd.d);
  bounds->add_option("--noise-std", bnd.noise_std);
  bounds->add_option("--matrix", bnd.matrix);
  bounds->add_option("--rhs", bnd.rhs);
  bounds->add_option("--times", bnd.times, "checkpoint times")->required()->delimiter(',');
  bounds->add_option("--t-b", bnd.t_b);
  bounds->add_option("--mu", bnd.mu);
  bounds->add_option("--trials", bnd.trials);

  ActiveArgs act;
  auto* active = app.add_subcommand("active", "preconditioned TARK with volume-sampled start");
  active->add_option("--n", act.n);
  active->add_option("--d", act.d);
  active->add_option("--noise-std", act.noise_std);
  active->add_option("--matrix", act.matrix);
  active->add_option("--rhs", act.rhs);
  active->add_option("--t", act.t, "TARK final time");
  active->add_option("--t-b", act.t_b, "burn-in (default t/2)");
  active->add_option("--eps", act.eps, "target residual inflation");
  active->add_option("--trials", act.trials);
  active->add_option("--points-per-decade", act.points_per_decade);

  FigureArgs fig;
  auto* figure = app.add_subcommand("figure-data", "convergence traces and fitted coefficients");
  figure->add_option("--figure", fig.figure)->check(CLI::IsMember({1, 2}));
  figure->add_flag("--full", fig.full, "n = 10^6 instead of 10^5");
  figure->add_option("--n", fig.n, "sample count (overrides --full)");
  figure->add_option("--trials", fig.trials);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    g.seed_given = seed_opt->count() > 0;
    const bool threads_given = threads_opt->count() > 0;
    if (*generate) return cmd_generate(g, gen);
    if (*solve) return cmd_solve(g, sol);
    if (*compare) return cmd_compare(g, cmp, threads_given);
    if (*bounds) return cmd_bounds(g, bnd);
    if (*active) return cmd_active(g, act);
    if (*figure) return cmd_figure_data(g, fig, threads_given);
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const tark::NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
