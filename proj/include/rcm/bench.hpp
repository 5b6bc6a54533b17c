#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "rcm/continuation_solver.hpp"
#include "rcm/problem.hpp"

namespace rcm::bench {

enum class OutputFormat { Table, Json, Csv };

struct RunSpec {
  /// Problem names or the sets "all", "all-convex", "all-nonconvex".
  std::vector<std::string> problems;
  /// Applies to scalable problems only; fixed-size ones keep their dimension.
  std::optional<int> n;
  SolverConfig config;
  OutputFormat format = OutputFormat::Table;
  std::optional<std::string> out_path;
  bool baseline = false;
  bool trace = false;
  int jobs = 1;
};

/// One "steps (time) / f(x*) (KKT)" cell pair of a results table.
struct BenchRow {
  std::string problem;
  int n = 0;
  int m = 0;
  std::string solver;  // "rcmtr" or "projgrad"
  int steps = 0;
  double time_s = 0.0;
  double f_star = 0.0;
  double kkt = 0.0;
  double feas = 0.0;
  std::string status;
  std::vector<IterationRecord> trace;  // filled only when tracing

  bool operator==(const BenchRow&) const = default;
};

inline constexpr std::string_view kCsvHeader = "problem,n,m,solver,steps,time_s,f_star,kkt,feas,status";

/// Projected steepest descent with Armijo backtracking (alpha halved from 1
/// until f(x + alpha d) <= f(x) + 1e-4 alpha g^T d). Uses the same
/// feasibility restoration, termination test and iteration cap as solve().
SolverReport baseline_projected_gradient(const ProblemInstance& problem, const SolverConfig& config);

/// Expands set names and checks every name against the catalog, preserving order.
/// Throws UnknownProblem.
std::vector<std::string> expand_selection(const std::vector<std::string>& selection);

BenchRow make_row(const ProblemInstance& problem, std::string solver, const SolverReport& report,
                  bool keep_trace);

/// Solves every selected problem (and the baseline when requested). Rows are
/// ordered by selection order, rcmtr before projgrad, regardless of jobs.
std::vector<BenchRow> run_rows(const RunSpec& spec);

std::string to_csv(const std::vector<BenchRow>& rows);
std::vector<BenchRow> parse_csv(std::string_view text);

nlohmann::json to_json(const std::vector<BenchRow>& rows);
std::vector<BenchRow> parse_json(const nlohmann::json& doc);

std::string to_table(const std::vector<BenchRow>& rows);

/// Parses arguments (argv[0] is the program name). Throws CLI::ParseError
/// subclasses or rcm::Error on usage errors.
RunSpec parse_args(const std::vector<std::string>& args);

/// Full command-line behavior: 0 when every rcmtr solve converged, 1 when
/// any did not, 2 on a usage error.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace rcm::bench
