#include "rcm/bench.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <limits>
#include <mutex>
#include <sstream>
#include <thread>

#include <fmt/format.h>

#include "CLI11.hpp"
#include "rcm/constraint_projection.hpp"
#include "rcm/errors.hpp"
#include "rcm/problem_suite.hpp"

namespace rcm::bench {

namespace {

constexpr double kArmijoC = 1e-4;
constexpr int kMaxHalvings = 60;
constexpr std::string_view kRcmtr = "rcmtr";
constexpr std::string_view kProjGrad = "projgrad";

bool is_success(std::string_view status) {
  return status == to_string(Status::Converged) || status == to_string(Status::SingleFeasiblePoint);
}

// ---- number encoding shared by CSV and JSON ---------------------------------

std::string format_double(double v) { return fmt::format("{}", v); }

double parse_double(std::string_view text) {
  const std::string s(text);
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (s.empty() || end != s.c_str() + s.size()) {
    throw InvalidArgument(fmt::format("not a number: '{}'", s));
  }
  return v;
}

int parse_int(std::string_view text) {
  const std::string s(text);
  char* end = nullptr;
  const long v = std::strtol(s.c_str(), &end, 10);
  if (s.empty() || end != s.c_str() + s.size()) {
    throw InvalidArgument(fmt::format("not an integer: '{}'", s));
  }
  return static_cast<int>(v);
}

// JSON has no inf/nan; those travel as strings.
nlohmann::json json_double(double v) {
  if (std::isfinite(v)) {
    return v;
  }
  return format_double(v);
}

double json_to_double(const nlohmann::json& j) {
  if (j.is_string()) {
    return parse_double(j.get<std::string>());
  }
  return j.get<double>();
}

nlohmann::json record_to_json(const IterationRecord& r) {
  return {{"k", r.k},
          {"f", json_double(r.f)},
          {"kkt", json_double(r.kkt)},
          {"feas", json_double(r.feas)},
          {"dt", json_double(r.dt)},
          {"rho", json_double(r.rho)},
          {"accepted", r.accepted},
          {"phase", std::string(to_string(r.phase))},
          {"hessian_rebuilt", r.hessian_rebuilt},
          {"wall_time_ns", r.wall_time_ns}};
}

IterationRecord record_from_json(const nlohmann::json& j) {
  IterationRecord r;
  r.k = j.at("k").get<int>();
  r.f = json_to_double(j.at("f"));
  r.kkt = json_to_double(j.at("kkt"));
  r.feas = json_to_double(j.at("feas"));
  r.dt = json_to_double(j.at("dt"));
  r.rho = json_to_double(j.at("rho"));
  r.accepted = j.at("accepted").get<bool>();
  const auto phase = j.at("phase").get<std::string>();
  if (phase == to_string(Phase::WellPosed)) {
    r.phase = Phase::WellPosed;
  } else if (phase == to_string(Phase::IllPosed)) {
    r.phase = Phase::IllPosed;
  } else {
    throw InvalidArgument(fmt::format("unknown phase '{}'", phase));
  }
  r.hessian_rebuilt = j.at("hessian_rebuilt").get<bool>();
  r.wall_time_ns = j.at("wall_time_ns").get<std::int64_t>();
  return r;
}

std::vector<std::string_view> split(std::string_view line, char sep) {
  std::vector<std::string_view> out;
  std::size_t pos = 0;
  while (true) {
    const auto next = line.find(sep, pos);
    out.push_back(line.substr(pos, next - pos));
    if (next == std::string_view::npos) break;
    pos = next + 1;
  }
  return out;
}

// ---- CLI helpers ------------------------------------------------------------

void apply_override(SolverConfig& cfg, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos) {
    throw InvalidArgument(fmt::format("--config expects key=value, got '{}'", assignment));
  }
  const std::string key = assignment.substr(0, eq);
  const std::string value = assignment.substr(eq + 1);
  if (key == "max_itc") {
    cfg.max_itc = parse_int(value);
    return;
  }
  if (key == "analytic_hessian") {
    if (value != "true" && value != "false") {
      throw InvalidArgument("analytic_hessian expects true or false");
    }
    cfg.analytic_hessian = value == "true";
    return;
  }
  double* target = nullptr;
  if (key == "tol") target = &cfg.tol;
  else if (key == "sigma0") target = &cfg.sigma0;
  else if (key == "dt0") target = &cfg.dt0;
  else if (key == "eta_a") target = &cfg.eta_a;
  else if (key == "eta_m") target = &cfg.eta_m;
  else if (key == "eta1") target = &cfg.eta1;
  else if (key == "eta2") target = &cfg.eta2;
  else if (key == "gamma1") target = &cfg.gamma1;
  else if (key == "gamma2") target = &cfg.gamma2;
  else if (key == "theta") target = &cfg.theta;
  else if (key == "illposed_switch") target = &cfg.illposed_switch;
  else if (key == "fd_eps") target = &cfg.fd_eps;
  else if (key == "rank_tol") target = &cfg.rank_tol;
  else if (key == "dt_min") target = &cfg.dt_min;
  if (target == nullptr) {
    throw InvalidArgument(fmt::format("unknown config key '{}'", key));
  }
  *target = parse_double(value);
}

std::optional<int> dimension_for(const CatalogEntry& entry, std::optional<int> n) {
  return entry.scalable ? n : std::nullopt;
}

}  // namespace

SolverReport baseline_projected_gradient(const ProblemInstance& problem, const SolverConfig& config) {
  const auto start = std::chrono::steady_clock::now();
  config.validate();
  problem.validate();
  const ConstraintSystem& cs = problem.cs;
  const ProjectorBasis basis = factor(cs, config.rank_tol);

  SolverReport report;
  Vector x = restore_feasibility(basis, problem.x0);
  double f = problem.objective(x);
  Vector g = problem.gradient(x);
  report.objective_evals = 1;
  report.gradient_evals = 1;
  Vector pg = project_gradient(basis, g);
  double kkt = pg.lpNorm<Eigen::Infinity>();

  Status status = Status::MaxIterations;
  if (basis.rank == basis.dim()) {
    status = Status::SingleFeasiblePoint;
  } else {
    int k = 0;
    bool stalled = false;
    while (kkt > config.tol && k < config.max_itc) {
      ++k;
      const Vector d = -pg;
      const double slope = g.dot(d);
      double alpha = 1.0;
      bool found = false;
      Vector x_trial;
      double f_trial = 0.0;
      for (int h = 0; h <= kMaxHalvings; ++h, alpha *= 0.5) {
        x_trial = x + alpha * d;
        f_trial = problem.objective(x_trial);
        ++report.objective_evals;
        if (f_trial <= f + kArmijoC * alpha * slope) {
          found = true;
          break;
        }
      }
      IterationRecord rec;
      rec.k = k;
      rec.dt = alpha;
      rec.accepted = found;
      if (found) {
        x = std::move(x_trial);
        f = f_trial;
        g = problem.gradient(x);
        ++report.gradient_evals;
        if (!g.allFinite()) {
          throw NonFiniteGradient(fmt::format("problem '{}': gradient is not finite", problem.name));
        }
        pg = project_gradient(basis, g);
        kkt = pg.lpNorm<Eigen::Infinity>();
        ++report.accepted_steps;
      }
      rec.f = f;
      rec.kkt = kkt;
      rec.feas = (cs.A * x - cs.b).lpNorm<Eigen::Infinity>();
      rec.wall_time_ns = std::chrono::duration_cast<std::chrono::nanoseconds>(
                             std::chrono::steady_clock::now() - start)
                             .count();
      report.trace.push_back(rec);
      if (!found) {
        stalled = true;
        break;
      }
    }
    report.iterations = k;
    const double feas = (cs.A * x - cs.b).lpNorm<Eigen::Infinity>();
    if (kkt <= config.tol) {
      status = feas <= config.tol ? Status::Converged : Status::StepFailure;
    } else if (stalled) {
      status = Status::StepFailure;
    }
  }

  report.status = status;
  report.f_star = f;
  report.kkt = kkt;
  report.feas = (cs.A * x - cs.b).lpNorm<Eigen::Infinity>();
  report.x_star = std::move(x);
  report.wall_time_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return report;
}

std::vector<std::string> expand_selection(const std::vector<std::string>& selection) {
  std::vector<std::string> names;
  auto add_set = [&](auto keep) {
    for (const auto& e : catalog()) {
      if (keep(e)) names.push_back(e.name);
    }
  };
  for (const auto& item : selection) {
    if (item == "all") {
      add_set([](const CatalogEntry&) { return true; });
    } else if (item == "all-convex") {
      add_set([](const CatalogEntry& e) { return e.convex; });
    } else if (item == "all-nonconvex") {
      add_set([](const CatalogEntry& e) { return !e.convex; });
    } else {
      names.push_back(find_problem(item).name);
    }
  }
  return names;
}

BenchRow make_row(const ProblemInstance& problem, std::string solver, const SolverReport& report,
                  bool keep_trace) {
  BenchRow row;
  row.problem = problem.name;
  row.n = problem.cs.cols();
  row.m = problem.cs.rows();
  row.solver = std::move(solver);
  row.steps = report.iterations;
  row.time_s = report.wall_time_s;
  row.f_star = report.f_star;
  row.kkt = report.kkt;
  row.feas = report.feas;
  row.status = std::string(to_string(report.status));
  if (keep_trace) {
    row.trace = report.trace;
  }
  return row;
}

std::vector<BenchRow> run_rows(const RunSpec& spec) {
  const auto names = expand_selection(spec.problems);
  // Build every instance up front so dimension errors surface before solving.
  std::vector<ProblemInstance> problems;
  problems.reserve(names.size());
  for (const auto& name : names) {
    problems.push_back(make_problem(name, dimension_for(find_problem(name), spec.n)));
  }

  const std::size_t per_problem = spec.baseline ? 2 : 1;
  std::vector<BenchRow> rows(problems.size() * per_problem);
  auto solve_one = [&](std::size_t i) {
    const ProblemInstance& p = problems[i];
    auto guarded = [&](std::string_view solver, auto&& fn) {
      try {
        return make_row(p, std::string(solver), fn(), spec.trace);
      } catch (const Error& e) {
        BenchRow row;
        row.problem = p.name;
        row.n = p.cs.cols();
        row.m = p.cs.rows();
        row.solver = std::string(solver);
        const double nan = std::numeric_limits<double>::quiet_NaN();
        row.f_star = row.kkt = row.feas = nan;
        row.status = "Error";
        return row;
      }
    };
    rows[i * per_problem] = guarded(kRcmtr, [&] { return solve(p, spec.config); });
    if (spec.baseline) {
      rows[i * per_problem + 1] =
          guarded(kProjGrad, [&] { return baseline_projected_gradient(p, spec.config); });
    }
  };

  const int jobs = std::max(1, spec.jobs);
  if (jobs == 1 || problems.size() < 2) {
    for (std::size_t i = 0; i < problems.size(); ++i) solve_one(i);
    return rows;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> workers;
  for (int t = 0; t < jobs; ++t) {
    workers.emplace_back([&] {
      for (std::size_t i = next++; i < problems.size(); i = next++) solve_one(i);
    });
  }
  for (auto& w : workers) w.join();
  return rows;
}

std::string to_csv(const std::vector<BenchRow>& rows) {
  std::string out(kCsvHeader);
  out += '\n';
  for (const auto& r : rows) {
    out += fmt::format("{},{},{},{},{},{},{},{},{},{}\n", r.problem, r.n, r.m, r.solver, r.steps,
                       format_double(r.time_s), format_double(r.f_star), format_double(r.kkt),
                       format_double(r.feas), r.status);
  }
  return out;
}

std::vector<BenchRow> parse_csv(std::string_view text) {
  std::vector<BenchRow> rows;
  bool header_seen = false;
  for (auto line : split(text, '\n')) {
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty()) continue;
    if (!header_seen) {
      if (line != kCsvHeader) {
        throw InvalidArgument("CSV header does not match the bench schema");
      }
      header_seen = true;
      continue;
    }
    const auto f = split(line, ',');
    if (f.size() != 10) {
      throw InvalidArgument(fmt::format("CSV row has {} fields, expected 10", f.size()));
    }
    BenchRow r;
    r.problem = std::string(f[0]);
    r.n = parse_int(f[1]);
    r.m = parse_int(f[2]);
    r.solver = std::string(f[3]);
    r.steps = parse_int(f[4]);
    r.time_s = parse_double(f[5]);
    r.f_star = parse_double(f[6]);
    r.kkt = parse_double(f[7]);
    r.feas = parse_double(f[8]);
    r.status = std::string(f[9]);
    rows.push_back(std::move(r));
  }
  return rows;
}

nlohmann::json to_json(const std::vector<BenchRow>& rows) {
  nlohmann::json doc = nlohmann::json::array();
  for (const auto& r : rows) {
    nlohmann::json j = {{"problem", r.problem},
                        {"n", r.n},
                        {"m", r.m},
                        {"solver", r.solver},
                        {"steps", r.steps},
                        {"time_s", json_double(r.time_s)},
                        {"f_star", json_double(r.f_star)},
                        {"kkt", json_double(r.kkt)},
                        {"feas", json_double(r.feas)},
                        {"status", r.status}};
    if (!r.trace.empty()) {
      nlohmann::json trace = nlohmann::json::array();
      for (const auto& rec : r.trace) trace.push_back(record_to_json(rec));
      j["trace"] = std::move(trace);
    }
    doc.push_back(std::move(j));
  }
  return doc;
}

std::vector<BenchRow> parse_json(const nlohmann::json& doc) {
  if (!doc.is_array()) {
    throw InvalidArgument("bench JSON must be an array of rows");
  }
  std::vector<BenchRow> rows;
  for (const auto& j : doc) {
    BenchRow r;
    r.problem = j.at("problem").get<std::string>();
    r.n = j.at("n").get<int>();
    r.m = j.at("m").get<int>();
    r.solver = j.at("solver").get<std::string>();
    r.steps = j.at("steps").get<int>();
    r.time_s = json_to_double(j.at("time_s"));
    r.f_star = json_to_double(j.at("f_star"));
    r.kkt = json_to_double(j.at("kkt"));
    r.feas = json_to_double(j.at("feas"));
    r.status = j.at("status").get<std::string>();
    if (j.contains("trace")) {
      for (const auto& rec : j.at("trace")) r.trace.push_back(record_from_json(rec));
    }
    rows.push_back(std::move(r));
  }
  return rows;
}

std::string to_table(const std::vector<BenchRow>& rows) {
  std::string out = fmt::format("{:<26} {:>6} {:>5} {:<9} {:>16} {:>22} {:>10} {}\n", "problem", "n",
                                "m", "solver", "steps (time)", "f(x*) (KKT)", "feas", "status");
  for (const auto& r : rows) {
    out += fmt::format("{:<26} {:>6} {:>5} {:<9} {:>16} {:>22} {:>10.2e} {}\n", r.problem, r.n,
                       r.m, r.solver, fmt::format("{} ({:.2e})", r.steps, r.time_s),
                       fmt::format("{:.4g} ({:.2e})", r.f_star, r.kkt), r.feas, r.status);
  }
  int ok = 0;
  for (const auto& r : rows) ok += is_success(r.status) ? 1 : 0;
  out += fmt::format("{} of {} solves converged\n", ok, rows.size());
  return out;
}

namespace {

struct CliOptions {
  RunSpec spec;
  std::string format = "table";
  std::string out_path;
  std::vector<std::string> overrides;
  std::optional<int> n;
  std::optional<int> max_iter;
  std::optional<double> tol, sigma0, dt0;
};

void configure(CLI::App& app, CliOptions& o) {
  const auto policy = CLI::MultiOptionPolicy::Throw;
  app.add_option("--problem", o.spec.problems, "problem name(s) or all / all-convex / all-nonconvex")
      ->required()
      ->delimiter(',');
  app.add_option("--n", o.n, "dimension for scalable problems")->multi_option_policy(policy);
  app.add_option("--max-iter", o.max_iter, "iteration cap")->multi_option_policy(policy);
  app.add_option("--tol", o.tol, "KKT tolerance")->multi_option_policy(policy);
  app.add_option("--sigma0", o.sigma0, "regularization scale")->multi_option_policy(policy);
  app.add_option("--dt0", o.dt0, "initial time step")->multi_option_policy(policy);
  app.add_option("--format", o.format, "table, json or csv")
      ->check(CLI::IsMember({"table", "json", "csv"}))
      ->multi_option_policy(policy);
  app.add_option("--out", o.out_path, "write results to this file")->multi_option_policy(policy);
  app.add_flag("--baseline", o.spec.baseline, "also run projected gradient descent");
  app.add_flag("--trace", o.spec.trace, "include per-iteration traces (json only)");
  app.add_option("--jobs", o.spec.jobs, "parallel solves")
      ->check(CLI::PositiveNumber)
      ->multi_option_policy(policy);
  app.add_option("--config", o.overrides, "any solver constant as key=value");
}

constexpr const char* kDescription =
    "Benchmark the regularization continuation solver on linearly constrained problems";

std::string help_text(const std::vector<std::string>& args) {
  CLI::App app{kDescription, args.empty() ? "rcm_bench" : args.front()};
  CliOptions o;
  configure(app, o);
  return app.help();
}

}  // namespace

RunSpec parse_args(const std::vector<std::string>& args) {
  CLI::App app{kDescription, args.empty() ? "rcm_bench" : args.front()};
  CliOptions o;
  configure(app, o);
  RunSpec& spec = o.spec;
  const std::string& format = o.format;

  std::vector<std::string> argv_rest(args.size() > 1 ? args.begin() + 1 : args.end(), args.end());
  std::reverse(argv_rest.begin(), argv_rest.end());
  app.parse(argv_rest);

  spec.format = format == "json"  ? OutputFormat::Json
                : format == "csv" ? OutputFormat::Csv
                                  : OutputFormat::Table;
  if (spec.trace && spec.format != OutputFormat::Json) {
    throw CLI::ValidationError("--trace", "traces are only emitted with --format json");
  }
  if (!o.out_path.empty()) spec.out_path = o.out_path;
  for (const auto& kv : o.overrides) apply_override(spec.config, kv);
  if (o.n) spec.n = *o.n;
  if (o.max_iter) spec.config.max_itc = *o.max_iter;
  if (o.tol) spec.config.tol = *o.tol;
  if (o.sigma0) spec.config.sigma0 = *o.sigma0;
  if (o.dt0) spec.config.dt0 = *o.dt0;
  spec.config.validate();
  return spec;
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  RunSpec spec;
  try {
    spec = parse_args(args);
    for (const auto& name : expand_selection(spec.problems)) {
      const auto& entry = find_problem(name);
      const int dim = dimension_for(entry, spec.n).value_or(entry.default_n);
      if (dim < 2 || dim % entry.n_multiple_of != 0) {
        throw DimensionError(fmt::format("problem '{}' needs n divisible by {}, got {}", name,
                                         entry.n_multiple_of, dim));
      }
    }
  } catch (const CLI::CallForHelp&) {
    out << help_text(args);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  }

  std::vector<BenchRow> rows;
  try {
    rows = run_rows(spec);
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  }

  std::string text;
  switch (spec.format) {
    case OutputFormat::Csv:
      text = to_csv(rows);
      break;
    case OutputFormat::Json:
      text = to_json(rows).dump(2) + "\n";
      break;
    case OutputFormat::Table:
      text = to_table(rows);
      break;
  }
  if (spec.out_path) {
    std::ofstream file(*spec.out_path);
    if (!file) {
      err << "error: cannot open " << *spec.out_path << " for writing\n";
      return 2;
    }
    file << text;
  } else {
    out << text;
  }

  int failed = 0;
  for (const auto& r : rows) {
    if (r.solver == kRcmtr && !is_success(r.status)) ++failed;
  }
  int solved = 0;
  for (const auto& r : rows) solved += r.solver == kRcmtr ? 1 : 0;
  err << fmt::format("{} of {} problems converged\n", solved - failed, solved);
  return failed == 0 ? 0 : 1;
}

}  // namespace rcm::bench
