#include "tark/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <fstream>
#include <map>
#include <mutex>
#include <ostream>
#include <set>
#include <sstream>
#include <stdexcept>
#include <thread>

#include <json.hpp>

#include "tark/kaczmarz.hpp"
#include "tark/ridge.hpp"

namespace tark {

namespace {

using json = nlohmann::json;

constexpr MethodKind all_methods[] = {
    MethodKind::RK,     MethodKind::TARK,    MethodKind::TARK_DOUBLING, MethodKind::RKU,
    MethodKind::RKA,    MethodKind::RKRR,    MethodKind::TARK_RR,       MethodKind::AUG_RK,
    MethodKind::AUG_TARK, MethodKind::DUAL_RK};

bool is_averaged(MethodKind kind) {
  return kind == MethodKind::TARK || kind == MethodKind::TARK_RR || kind == MethodKind::AUG_TARK;
}

// --- strict JSON access ----------------------------------------------------

void check_keys(const json& obj, std::initializer_list<std::string_view> allowed,
                std::string_view where) {
  if (!obj.is_object()) throw std::invalid_argument(std::string(where) + ": expected an object");
  for (const auto& [key, value] : obj.items()) {
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
      throw std::invalid_argument(std::string(where) + ": unknown key '" + key + "'");
    }
  }
}

std::size_t get_count(const json& obj, const char* key) {
  const json& v = obj.at(key);
  if (!v.is_number_integer() || v.get<long long>() < 0) {
    throw std::invalid_argument(std::string(key) + ": expected a non-negative integer");
  }
  return v.get<std::size_t>();
}

std::uint64_t get_seed(const json& obj, const char* key) {
  const json& v = obj.at(key);
  if (!v.is_number_unsigned()) throw std::invalid_argument(std::string(key) + ": expected an unsigned integer");
  return v.get<std::uint64_t>();
}

double get_real(const json& obj, const char* key) {
  const json& v = obj.at(key);
  if (!v.is_number()) throw std::invalid_argument(std::string(key) + ": expected a number");
  return v.get<double>();
}

std::string get_text(const json& obj, const char* key) {
  const json& v = obj.at(key);
  if (!v.is_string()) throw std::invalid_argument(std::string(key) + ": expected a string");
  return v.get<std::string>();
}

bool get_flag(const json& obj, const char* key) {
  const json& v = obj.at(key);
  if (!v.is_boolean()) throw std::invalid_argument(std::string(key) + ": expected true or false");
  return v.get<bool>();
}

ProblemConfig parse_problem(const json& obj) {
  ProblemConfig p;
  if (!obj.is_object() || !obj.contains("kind")) {
    throw std::invalid_argument("problem: expected an object with a 'kind'");
  }
  const std::string kind = get_text(obj, "kind");
  if (kind == "poly_regression") {
    check_keys(obj, {"kind", "n", "d", "basis", "noise_std", "seed"}, "problem");
    p.kind = ProblemConfig::Kind::PolyRegression;
    if (obj.contains("n")) p.poly.n = get_count(obj, "n");
    if (obj.contains("d")) p.poly.d = get_count(obj, "d");
    if (obj.contains("basis")) p.poly.basis = parse_basis(get_text(obj, "basis"));
    if (obj.contains("noise_std")) p.poly.noise_std = get_real(obj, "noise_std");
    if (obj.contains("seed")) p.poly.seed = get_seed(obj, "seed");
  } else if (kind == "lower_bound") {
    check_keys(obj, {"kind", "d", "m", "v", "seed"}, "problem");
    p.kind = ProblemConfig::Kind::LowerBound;
    if (obj.contains("d")) p.lower_bound.d = get_count(obj, "d");
    if (obj.contains("m")) p.lower_bound.m = get_count(obj, "m");
    if (obj.contains("v")) p.lower_bound.v = get_real(obj, "v");
    if (obj.contains("seed")) p.lower_bound.seed = get_seed(obj, "seed");
  } else if (kind == "files") {
    check_keys(obj, {"kind", "matrix", "rhs"}, "problem");
    p.kind = ProblemConfig::Kind::Files;
    p.matrix_path = get_text(obj, "matrix");
    p.rhs_path = get_text(obj, "rhs");
  } else {
    throw std::invalid_argument("problem: unknown kind '" + kind + "'");
  }
  return p;
}

MethodSpec parse_method_spec(const json& obj) {
  check_keys(obj, {"method", "label", "t_b", "omega", "q"}, "method");
  MethodSpec m;
  m.kind = parse_method_kind(get_text(obj, "method"));
  m.label = obj.contains("label") ? get_text(obj, "label") : std::string(to_string(m.kind));
  if (obj.contains("t_b")) m.t_b = get_count(obj, "t_b");
  if (obj.contains("omega")) m.omega = get_real(obj, "omega");
  if (obj.contains("q")) m.q = get_count(obj, "q");
  return m;
}

// --- runs --------------------------------------------------------------------

struct RunOutput {
  std::vector<TraceRecord> records;
  Vector x;
};

struct RunContext {
  const LeastSquaresProblem& problem;
  const std::optional<LeastSquaresProblem>& augmented;
  const ExperimentConfig& config;
  const ErrorMetrics& metrics;
  const std::vector<std::size_t>& grid;
  std::optional<double> lambda;
};

RunOutput run_one(const RunContext& ctx, std::size_t method_index, std::size_t trial) {
  const MethodSpec& spec = ctx.config.methods[method_index];
  const std::size_t budget = ctx.config.budget;
  RunOutput out;
  Rng rng(trial_seed(ctx.config.master_seed, method_index, trial));
  const auto start = std::chrono::steady_clock::now();

  Trace trace;
  trace.checkpoints = ctx.grid;
  trace.sink = [&](std::size_t rows, std::span<const double> x) {
    TraceRecord rec;
    rec.method = spec.label;
    rec.trial = trial;
    rec.rows_accessed = rows;
    rec.rel_err_lstsq = ctx.metrics.rel_err_lstsq(x);
    rec.rel_err_ridge = ctx.metrics.rel_err_ridge(x);
    rec.residual_norm = ctx.metrics.residual_norm(x);
    if (ctx.config.record_timing) {
      rec.wall_ns = static_cast<std::uint64_t>(std::chrono::duration_cast<std::chrono::nanoseconds>(
                                                   std::chrono::steady_clock::now() - start)
                                                   .count());
    }
    out.records.push_back(std::move(rec));
  };

  const Vector x0(ctx.problem.cols(), 0.0);
  const std::size_t t = budget + 1;  // final time of the tail-averaged runs
  const std::size_t t_b = spec.t_b.value_or(t / 4);
  switch (spec.kind) {
    case MethodKind::RK: out.x = run_rk(ctx.problem, x0, budget, rng, trace); break;
    case MethodKind::TARK: out.x = run_tark(ctx.problem, x0, t_b, t, rng, trace); break;
    case MethodKind::TARK_DOUBLING: out.x = run_tark_doubling(ctx.problem, x0, t, rng, trace); break;
    case MethodKind::RKU: {
      const double omega = spec.omega.value_or(1.0 / std::sqrt(static_cast<double>(budget)));
      out.x = run_rku(ctx.problem, x0, budget, omega, rng, trace);
      break;
    }
    case MethodKind::RKA: out.x = run_rka(ctx.problem, x0, budget / spec.q, spec.q, rng, trace); break;
    case MethodKind::RKRR: out.x = run_rkrr(ctx.problem, *ctx.config.mu, x0, budget, rng, trace); break;
    case MethodKind::TARK_RR:
      out.x = run_tark_rr(ctx.problem, *ctx.config.mu, x0, t_b, t, rng, trace);
      break;
    case MethodKind::AUG_RK: out.x = run_rk(*ctx.augmented, x0, budget, rng, trace); break;
    case MethodKind::AUG_TARK: out.x = run_tark(*ctx.augmented, x0, t_b, t, rng, trace); break;
    case MethodKind::DUAL_RK: out.x = run_dual_rk(ctx.problem, *ctx.lambda, budget, rng, trace); break;
  }
  return out;
}

void write_optional(std::ostream& out, const std::optional<double>& v) {
  if (v) out << format_double(*v);
}

}  // namespace

// ---------------------------------------------------------------------------

std::string_view to_string(MethodKind kind) {
  switch (kind) {
    case MethodKind::RK: return "RK";
    case MethodKind::TARK: return "TARK";
    case MethodKind::TARK_DOUBLING: return "TARK_DOUBLING";
    case MethodKind::RKU: return "RKU";
    case MethodKind::RKA: return "RKA";
    case MethodKind::RKRR: return "RKRR";
    case MethodKind::TARK_RR: return "TARK_RR";
    case MethodKind::AUG_RK: return "AUG_RK";
    case MethodKind::AUG_TARK: return "AUG_TARK";
    case MethodKind::DUAL_RK: return "DUAL_RK";
  }
  return "?";
}

MethodKind parse_method_kind(std::string_view name) {
  for (MethodKind k : all_methods) {
    if (name == to_string(k)) return k;
  }
  throw std::invalid_argument("unknown method: " + std::string(name));
}

bool is_ridge_method(MethodKind kind) {
  return kind == MethodKind::RKRR || kind == MethodKind::TARK_RR || kind == MethodKind::AUG_RK ||
         kind == MethodKind::AUG_TARK || kind == MethodKind::DUAL_RK;
}

void ExperimentConfig::validate() const {
  if (budget < 1) throw std::invalid_argument("config: budget must be >= 1");
  if (trials < 1) throw std::invalid_argument("config: trials must be >= 1");
  if (points_per_decade < 1) throw std::invalid_argument("config: points_per_decade must be >= 1");
  if (threads < 1) throw std::invalid_argument("config: threads must be >= 1");
  if (methods.empty()) throw std::invalid_argument("config: no methods");
  if (mu && !(*mu > 0.0 && *mu < 1.0)) throw std::invalid_argument("config: mu must be in (0, 1)");
  std::set<std::string> labels;
  for (const MethodSpec& m : methods) {
    if (m.label.empty() || m.label.find_first_of(",\"\n\r") != std::string::npos) {
      throw std::invalid_argument("config: method label must be non-empty without commas or quotes");
    }
    if (!labels.insert(m.label).second) {
      throw std::invalid_argument("config: duplicate method label " + m.label);
    }
    if (is_ridge_method(m.kind) && !mu) {
      throw std::invalid_argument("config: " + m.label + " needs the ridge parameter mu");
    }
    if (m.t_b && !is_averaged(m.kind)) {
      throw std::invalid_argument("config: t_b given for non-averaged method " + m.label);
    }
    if (m.t_b && *m.t_b > budget) {
      throw std::invalid_argument("config: t_b of " + m.label + " exceeds the budget");
    }
    if (m.omega && m.kind != MethodKind::RKU) {
      throw std::invalid_argument("config: omega given for " + m.label);
    }
    if (m.omega && !(*m.omega > 0.0 && *m.omega <= 1.0)) {
      throw std::invalid_argument("config: omega must be in (0, 1]");
    }
    if (m.q < 1) throw std::invalid_argument("config: q must be >= 1");
    if (m.q != 1 && m.kind != MethodKind::RKA) {
      throw std::invalid_argument("config: q given for " + m.label);
    }
    if (m.kind == MethodKind::RKA && budget % m.q != 0) {
      throw std::invalid_argument("config: budget mismatch, " + m.label +
                                  " cannot spend exactly the budget in blocks of q rows");
    }
  }
}

ExperimentConfig figure_preset(int figure, std::size_t n, std::size_t trials, std::uint64_t seed) {
  if (figure != 1 && figure != 2) throw std::invalid_argument("figure_preset: figure must be 1 or 2");
  ExperimentConfig c;
  c.problem.kind = ProblemConfig::Kind::PolyRegression;
  c.problem.poly.n = n;
  c.problem.poly.d = 25;
  c.problem.poly.noise_std = 0.2;
  c.problem.poly.seed = seed;
  c.budget = n;
  c.trials = trials;
  c.master_seed = seed;
  const std::size_t t_b = std::min<std::size_t>(1000, n / 4);
  auto method = [](MethodKind kind, std::optional<std::size_t> burn_in = std::nullopt, std::size_t q = 1) {
    MethodSpec m;
    m.kind = kind;
    m.label = std::string(to_string(kind));
    m.t_b = burn_in;
    m.q = q;
    return m;
  };
  if (figure == 1) {
    c.problem.poly.basis = PolyBasis::Chebyshev;
    c.methods = {method(MethodKind::RK), method(MethodKind::RKU),
                 method(MethodKind::RKA, std::nullopt, 10),
                 method(MethodKind::TARK, t_b)};
  } else {
    c.problem.poly.basis = PolyBasis::Monomial;
    c.mu = 0.999;
    c.methods = {method(MethodKind::RK),       method(MethodKind::TARK, t_b),
                 method(MethodKind::RKRR),     method(MethodKind::TARK_RR, t_b),
                 method(MethodKind::AUG_TARK, t_b), method(MethodKind::DUAL_RK)};
  }
  c.validate();
  return c;
}

ExperimentConfig parse_experiment_config(std::string_view json_text) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("config: malformed JSON: ") + e.what());
  }
  ExperimentConfig c;
  try {
    check_keys(root, {"problem", "methods", "budget", "trials", "master_seed", "points_per_decade",
                      "mu", "threads", "record_timing", "output"},
               "config");
    c.problem = parse_problem(root.at("problem"));
    const json& methods = root.at("methods");
    if (!methods.is_array()) throw std::invalid_argument("methods: expected an array");
    for (const json& m : methods) c.methods.push_back(parse_method_spec(m));
    c.budget = get_count(root, "budget");
    if (root.contains("trials")) c.trials = get_count(root, "trials");
    if (root.contains("master_seed")) c.master_seed = get_seed(root, "master_seed");
    if (root.contains("points_per_decade")) c.points_per_decade = get_count(root, "points_per_decade");
    if (root.contains("mu")) c.mu = get_real(root, "mu");
    if (root.contains("threads")) c.threads = get_count(root, "threads");
    if (root.contains("record_timing")) c.record_timing = get_flag(root, "record_timing");
    if (root.contains("output")) c.output = get_text(root, "output");
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("config: ") + e.what());
  }
  c.validate();
  return c;
}

ExperimentConfig load_experiment_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open config file " + path);
  std::ostringstream text;
  text << in.rdbuf();
  return parse_experiment_config(text.str());
}

LeastSquaresProblem build_problem(const ProblemConfig& config) {
  switch (config.kind) {
    case ProblemConfig::Kind::PolyRegression: return gen_poly_regression(config.poly);
    case ProblemConfig::Kind::LowerBound: return gen_lower_bound_problem(config.lower_bound);
    case ProblemConfig::Kind::Files: {
      LeastSquaresProblem p(read_matrix_file(config.matrix_path), read_vector_file(config.rhs_path));
      p.attach_reference();
      return p;
    }
  }
  throw std::logic_error("build_problem: unhandled kind");
}

// ---------------------------------------------------------------------------

ErrorMetrics::ErrorMetrics(const LeastSquaresProblem& problem, std::optional<double> lambda)
    : gram_(problem.matrix.gram()) {
  if (problem.reference_solution && problem.reference_residual_sq) {
    x_star_ = *problem.reference_solution;
    residual_sq_ = *problem.reference_residual_sq;
  } else {
    x_star_ = lstsq_reference(problem);
    const Vector ax = problem.matrix.multiply(x_star_);
    residual_sq_ = dist_sq(ax, problem.rhs);
  }
  x_star_norm_ = norm2(x_star_);
  if (lambda) {
    x_mu_ = ridge_solution(problem, *lambda);
    x_mu_norm_ = norm2(*x_mu_);
  }
}

double ErrorMetrics::rel_err_lstsq(std::span<const double> x) const {
  const double e = std::sqrt(dist_sq(x, x_star_));
  return x_star_norm_ > 0.0 ? e / x_star_norm_ : e;
}

std::optional<double> ErrorMetrics::rel_err_ridge(std::span<const double> x) const {
  if (!x_mu_) return std::nullopt;
  const double e = std::sqrt(dist_sq(x, *x_mu_));
  return x_mu_norm_ > 0.0 ? e / x_mu_norm_ : e;
}

double ErrorMetrics::residual_norm(std::span<const double> x) const {
  const std::size_t d = x_star_.size();
  Vector e(d);
  for (std::size_t j = 0; j < d; ++j) e[j] = x[j] - x_star_[j];
  double quad = 0.0;
  for (std::size_t i = 0; i < d; ++i) quad += e[i] * dot(gram_.row(i), e);
  return std::sqrt(std::max(0.0, residual_sq_ + quad));
}

std::vector<std::size_t> checkpoint_grid(std::size_t t_max, std::size_t points_per_decade) {
  if (t_max < 1) throw std::invalid_argument("checkpoint_grid: t_max must be >= 1");
  if (points_per_decade < 1) throw std::invalid_argument("checkpoint_grid: points_per_decade must be >= 1");
  std::vector<std::size_t> grid{1};
  const auto ppd = static_cast<double>(points_per_decade);
  for (std::size_t k = 1;; ++k) {
    const double value = std::pow(10.0, static_cast<double>(k) / ppd);
    const auto rounded = static_cast<std::size_t>(std::llround(value));
    if (rounded >= t_max) break;
    if (rounded > grid.back()) grid.push_back(rounded);
  }
  if (grid.back() != t_max) grid.push_back(t_max);
  return grid;
}

std::uint64_t trial_seed(std::uint64_t master_seed, std::size_t method_index, std::size_t trial) {
  return derive_seed(master_seed, {static_cast<std::uint64_t>(method_index),
                                   static_cast<std::uint64_t>(trial)});
}

void parallel_for(std::size_t count, std::size_t threads,
                  const std::function<void(std::size_t)>& fn) {
  const std::size_t workers = std::max<std::size_t>(1, std::min(threads, count));
  if (workers == 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (;;) {
        const std::size_t i = next.fetch_add(1);
        if (i >= count || failed.load()) return;
        try {
          fn(i);
        } catch (...) {
          std::lock_guard lock(error_mutex);
          if (!error) error = std::current_exception();
          failed.store(true);
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
}

double quantile(std::vector<double> values, double p) {
  if (values.empty()) throw std::invalid_argument("quantile: no data");
  if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("quantile: p must be in [0, 1]");
  std::sort(values.begin(), values.end());
  const double pos = p * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return values[lo] + frac * (values[hi] - values[lo]);
}

std::vector<SummaryRow> ExperimentResult::series(std::string_view method) const {
  std::vector<SummaryRow> out;
  for (const SummaryRow& row : summary) {
    if (row.method == method) out.push_back(row);
  }
  return out;
}

ExperimentResult run_experiment(const LeastSquaresProblem& problem, const ExperimentConfig& config) {
  config.validate();
  std::optional<double> lambda;
  if (config.mu) lambda = mu_to_lambda(*config.mu, problem.matrix.frob_sq());
  std::optional<LeastSquaresProblem> augmented;
  const bool needs_aug = std::any_of(config.methods.begin(), config.methods.end(), [](const MethodSpec& m) {
    return m.kind == MethodKind::AUG_RK || m.kind == MethodKind::AUG_TARK;
  });
  if (needs_aug) augmented.emplace(augmented_problem(problem, *lambda));

  const ErrorMetrics metrics(problem, lambda);
  const std::vector<std::size_t> grid = checkpoint_grid(config.budget, config.points_per_decade);
  const RunContext ctx{problem, augmented, config, metrics, grid, lambda};

  const std::size_t runs = config.methods.size() * config.trials;
  std::vector<RunOutput> outputs(runs);
  parallel_for(runs, config.threads, [&](std::size_t k) {
    outputs[k] = run_one(ctx, k / config.trials, k % config.trials);
  });

  ExperimentResult result;
  for (std::size_t mi = 0; mi < config.methods.size(); ++mi) {
    const std::string& label = config.methods[mi].label;
    const std::size_t begin = result.records.size();
    for (std::size_t trial = 0; trial < config.trials; ++trial) {
      RunOutput& run = outputs[mi * config.trials + trial];
      result.records.insert(result.records.end(), run.records.begin(), run.records.end());
      result.finals.push_back(FinalEstimate{label, trial, std::move(run.x)});
    }
    // Every trial of a method visits the same row counts.
    std::map<std::size_t, std::vector<const TraceRecord*>> by_rows;
    for (std::size_t i = begin; i < result.records.size(); ++i) {
      by_rows[result.records[i].rows_accessed].push_back(&result.records[i]);
    }
    for (const auto& [rows, recs] : by_rows) {
      SummaryRow row;
      row.method = label;
      row.rows_accessed = rows;
      std::vector<double> lstsq;
      std::vector<double> ridge;
      std::vector<double> residual;
      for (const TraceRecord* r : recs) {
        lstsq.push_back(r->rel_err_lstsq);
        residual.push_back(r->residual_norm);
        if (r->rel_err_ridge) ridge.push_back(*r->rel_err_ridge);
      }
      row.median_rel_err_lstsq = quantile(lstsq, 0.5);
      row.q25_rel_err_lstsq = quantile(lstsq, 0.25);
      row.q75_rel_err_lstsq = quantile(lstsq, 0.75);
      if (!ridge.empty()) {
        row.median_rel_err_ridge = quantile(ridge, 0.5);
        row.q25_rel_err_ridge = quantile(ridge, 0.25);
        row.q75_rel_err_ridge = quantile(ridge, 0.75);
      }
      row.median_residual_norm = quantile(residual, 0.5);
      result.summary.push_back(std::move(row));
    }
  }
  return result;
}

void write_csv(std::ostream& out, const std::vector<TraceRecord>& records) {
  out << csv_header << '\n';
  for (const TraceRecord& r : records) {
    out << r.method << ',' << r.trial << ',' << r.rows_accessed << ','
        << format_double(r.rel_err_lstsq) << ',';
    write_optional(out, r.rel_err_ridge);
    out << ',' << format_double(r.residual_norm) << ',' << r.wall_ns << '\n';
  }
}

void write_summary_csv(std::ostream& out, const std::vector<SummaryRow>& rows) {
  out << summary_header << '\n';
  for (const SummaryRow& r : rows) {
    out << r.method << ',' << r.rows_accessed << ',' << format_double(r.median_rel_err_lstsq) << ','
        << format_double(r.q25_rel_err_lstsq) << ',' << format_double(r.q75_rel_err_lstsq) << ',';
    write_optional(out, r.median_rel_err_ridge);
    out << ',';
    write_optional(out, r.q25_rel_err_ridge);
    out << ',';
    write_optional(out, r.q75_rel_err_ridge);
    out << ',' << format_double(r.median_residual_norm) << '\n';
  }
}

// ---------------------------------------------------------------------------

std::string_view to_string(BoundKind kind) {
  switch (kind) {
    case BoundKind::Theorem1: return "theorem1";
    case BoundKind::Theorem2: return "theorem2";
    case BoundKind::Theorem3: return "theorem3";
    case BoundKind::Theorem4: return "theorem4";
    case BoundKind::Theorem5: return "theorem5";
  }
  return "?";
}

BoundKind parse_bound_kind(std::string_view name) {
  for (BoundKind k : {BoundKind::Theorem1, BoundKind::Theorem2, BoundKind::Theorem3,
                      BoundKind::Theorem4, BoundKind::Theorem5}) {
    if (name == to_string(k) || (name.size() == 1 && name[0] == to_string(k).back())) return k;
  }
  throw std::invalid_argument("unknown bound: " + std::string(name));
}

std::vector<BoundCheck> verify_bounds(const LeastSquaresProblem& problem,
                                      const BoundCheckConfig& config) {
  if (config.times.empty()) throw std::invalid_argument("verify_bounds: no checkpoint times");
  if (config.trials < 2) throw std::invalid_argument("verify_bounds: need at least two trials");
  std::vector<std::size_t> times = config.times;
  std::sort(times.begin(), times.end());
  times.erase(std::unique(times.begin(), times.end()), times.end());

  const BoundKind kind = config.kind;
  const bool averaged =
      kind == BoundKind::Theorem2 || kind == BoundKind::Theorem3 || kind == BoundKind::Theorem5;
  const bool ridge = kind == BoundKind::Theorem4 || kind == BoundKind::Theorem5;
  if (averaged && times.front() <= config.t_b) {
    throw std::invalid_argument("verify_bounds: every final time must exceed t_b");
  }

  const std::size_t d = problem.cols();
  const Vector x0(d, 0.0);
  const SpectralSummary spectral = spectral_summary(problem.matrix);
  const double kappa = spectral.kappa_dem();
  const double lambda = ridge ? mu_to_lambda(config.mu, problem.matrix.frob_sq()) : 0.0;
  Vector target;
  double residual_sq = 0.0;
  if (ridge) {
    target = ridge_solution(problem, lambda);
  } else if (problem.reference_solution) {
    target = *problem.reference_solution;
  } else {
    target = lstsq_reference(problem);
  }
  residual_sq = dist_sq(problem.matrix.multiply(target), problem.rhs);
  if (!ridge && problem.reference_residual_sq) residual_sq = *problem.reference_residual_sq;
  const double init = dist_sq(x0, target);

  // Row-access counts at which each final time is observed.
  std::vector<std::size_t> rows(times.size());
  for (std::size_t k = 0; k < times.size(); ++k) rows[k] = averaged ? times[k] - 1 : times[k];

  std::vector<std::vector<double>> errors(config.trials, std::vector<double>(times.size()));
  parallel_for(config.trials, config.threads, [&](std::size_t trial) {
    Rng rng(derive_seed(config.seed, {static_cast<std::uint64_t>(kind), trial}));
    Trace trace;
    trace.checkpoints = rows;
    std::size_t slot = 0;
    trace.sink = [&](std::size_t r, std::span<const double> x) {
      while (slot < rows.size() && rows[slot] < r) ++slot;
      if (slot < rows.size() && rows[slot] == r) errors[trial][slot] = dist_sq(x, target);
    };
    const std::size_t last = times.back();
    switch (kind) {
      case BoundKind::Theorem1: run_rk(problem, x0, last, rng, trace); break;
      case BoundKind::Theorem2:
      case BoundKind::Theorem3: run_tark(problem, x0, config.t_b, last, rng, trace); break;
      case BoundKind::Theorem4: run_rkrr(problem, config.mu, x0, last, rng, trace); break;
      case BoundKind::Theorem5: run_tark_rr(problem, config.mu, x0, config.t_b, last, rng, trace); break;
    }
  });

  std::vector<BoundCheck> out;
  const auto n = static_cast<double>(config.trials);
  for (std::size_t k = 0; k < times.size(); ++k) {
    double mean = 0.0;
    for (const auto& e : errors) mean += e[k];
    mean /= n;
    double var = 0.0;
    for (const auto& e : errors) var += (e[k] - mean) * (e[k] - mean);
    var /= n - 1.0;
    BoundCheck c;
    c.t = times[k];
    c.mse = mean;
    c.std_err = std::sqrt(var / n);
    switch (kind) {
      case BoundKind::Theorem1:
        c.bound = bound_theorem1(kappa, init, spectral.pinv_norm_sq(), residual_sq, c.t);
        break;
      case BoundKind::Theorem2:
        c.bound = bound_theorem2(kappa, init, spectral.pinv_norm_sq(), residual_sq, config.t_b, c.t);
        break;
      case BoundKind::Theorem3:
        c.bound = bound_theorem3(kappa, init, spectral.pinv_norm_sq(), residual_sq, config.t_b, c.t);
        break;
      case BoundKind::Theorem4:
        c.bound = bound_theorem4(kappa, config.mu, lambda, init, residual_sq, c.t);
        break;
      case BoundKind::Theorem5:
        c.bound = bound_theorem5(kappa, config.mu, lambda, init, residual_sq, config.t_b, c.t);
        break;
    }
    c.pass = c.mse <= c.bound + 3.0 * c.std_err;
    out.push_back(c);
  }
  return out;
}

}  // namespace tark
