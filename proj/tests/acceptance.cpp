// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fail.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Eigenvalues>
#include <fmt/format.h>

#include "oracles.hpp"
#include "rcm/bench.hpp"
#include "rcm/constraint_projection.hpp"
#include "rcm/continuation_solver.hpp"
#include "rcm/lbfgs_preconditioner.hpp"
#include "rcm/problem_suite.hpp"
#include "rcm/regularized_hessian.hpp"

namespace {

using namespace rcm;
using Clock = std::chrono::steady_clock;

struct Outcome {
  bool pass = true;
  std::string detail;

  void check(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail += (detail.empty() ? "" : "; ") + std::string("FAILED ") + what;
    }
  }
  void note(const std::string& what) { detail += (detail.empty() ? "" : "; ") + what; }
};

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

double oracle_fstar(const ProblemInstance& p) {
  const auto sol = quadratic_oracle(p.cs, p.quadratic->q, p.quadratic->c);
  return sol.f_star + p.quadratic->constant;
}

double rel_err(double value, double ref) { return std::abs(value - ref) / std::abs(ref); }

// Initial feasibility plus the trace covers every iterate of a run.
double max_feasibility(const ProblemInstance& p, const SolverReport& r) {
  const Vector x0 = restore_feasibility(factor(p.cs), p.x0);
  double worst = (p.cs.A * x0 - p.cs.b).lpNorm<Eigen::Infinity>();
  for (const auto& rec : r.trace) worst = std::max(worst, rec.feas);
  return worst;
}

Outcome booth() {
  Outcome o;
  const auto start = Clock::now();
  const auto r = solve(make_problem("booth"), SolverConfig{});
  const double t = seconds_since(start);
  o.check(std::abs(r.f_star - 9.0) <= 1e-6, fmt::format("|f*-9| = {:.2e}", std::abs(r.f_star - 9.0)));
  o.check(r.kkt <= 1e-6, fmt::format("kkt {:.2e}", r.kkt));
  o.check(r.feas <= 1e-8, fmt::format("feas {:.2e}", r.feas));
  o.check(r.iterations <= 50, fmt::format("{} iterations", r.iterations));
  o.check(t < 1.0, fmt::format("time {:.3f}s", t));
  o.note(fmt::format("f*={:.10g} kkt={:.2e} feas={:.2e} iters={} time={:.2e}s", r.f_star, r.kkt,
                     r.feas, r.iterations, t));
  return o;
}

Outcome sphere() {
  Outcome o;
  const auto p = make_problem("sphere", 1000);
  const auto start = Clock::now();
  const auto r = solve(p, SolverConfig{});
  const double t = seconds_since(start);
  const double ref = oracle_fstar(p);
  o.check(rel_err(r.f_star, ref) <= 1e-6, fmt::format("oracle rel err {:.2e}", rel_err(r.f_star, ref)));
  o.check(r.kkt <= 1e-6, fmt::format("kkt {:.2e}", r.kkt));
  o.check(r.accepted_steps <= 5, fmt::format("{} accepted steps > 5", r.accepted_steps));
  o.check(t < 5.0, fmt::format("time {:.2f}s", t));
  o.check(rel_err(r.f_star, 167.0) <= 0.05, fmt::format("f* {:.6g} vs 1.67e+02", r.f_star));
  o.note(fmt::format("f*={:.10g} oracle={:.10g} kkt={:.2e} accepted={} time={:.2f}s", r.f_star, ref,
                     r.kkt, r.accepted_steps, t));
  return o;
}

struct ConvexRun {
  std::string name;
  int n;
  int rcm_steps;
  int baseline_steps;
};

std::vector<ConvexRun> g_convex_runs;

Outcome convex_suite() {
  Outcome o;
  SolverConfig cfg;
  cfg.max_itc = 400;
  std::vector<std::pair<std::string, int>> runs;
  for (int n : {100, 1000}) {
    for (const char* name : {"sphere", "sum_squares", "trid"}) runs.emplace_back(name, n);
  }
  runs.emplace_back("booth", 2);
  int ok = 0;
  for (const auto& [name, n] : runs) {
    const auto p = make_problem(name, n);
    const auto r = solve(p, cfg);
    const double ref = oracle_fstar(p);
    const double feas = max_feasibility(p, r);
    const bool good = r.status == Status::Converged && rel_err(r.f_star, ref) <= 1e-6 && feas <= 1e-8;
    ok += good ? 1 : 0;
    o.check(good, fmt::format("{} n={}: {} after {} iters, rel err {:.1e}, max feas {:.1e}", name, n,
                              to_string(r.status), r.iterations, rel_err(r.f_star, ref), feas));
    const auto b = bench::baseline_projected_gradient(p, cfg);
    g_convex_runs.push_back({name, n, r.iterations, b.iterations});
  }
  o.note(fmt::format("{}/{} runs converged to the oracle with feasibility kept", ok, runs.size()));
  return o;
}

Outcome nonconvex_suite() {
  Outcome o;
  SolverConfig cfg;
  cfg.max_itc = 400;
  const std::vector<std::string> names{"rosenbrock", "dixon_price",     "griewank", "levy",
                                       "rastrigin",  "ackley",          "powell",   "styblinski_tang",
                                       "schwefel",   "beale",           "three_hump_camel",
                                       "six_hump_camel"};
  const auto start = Clock::now();
  int solved = 0;
  std::string misses;
  for (const auto& name : names) {
    const auto& entry = find_problem(name);
    const auto r = solve(make_problem(name, entry.scalable ? 100 : entry.default_n), cfg);
    if (r.kkt <= 1e-6 && r.iterations <= 400) {
      ++solved;
    } else {
      misses += fmt::format(" {}({}, kkt {:.1e})", name, to_string(r.status), r.kkt);
    }
  }
  const double t = seconds_since(start);
  o.check(solved >= 10, fmt::format("only {}/12 reached kkt <= 1e-6", solved));
  o.check(t < 60.0, fmt::format("time {:.1f}s", t));
  o.note(fmt::format("{}/12 solved in {:.2f}s", solved, t));
  if (!misses.empty()) o.note("unsolved:" + misses);
  return o;
}

Outcome projector_suite() {
  Outcome o;
  const auto start = Clock::now();
  std::mt19937_64 rng(20240501);
  double worst_idem = 0, worst_sym = 0, worst_ap = 0;
  for (int t = 0; t < 100; ++t) {
    const int n = std::uniform_int_distribution<int>(2, 40)(rng);
    const int m = std::uniform_int_distribution<int>(1, n)(rng);
    ConstraintSystem cs;
    cs.A = testing::random_matrix(rng, m, n);
    cs.b = testing::random_vector(rng, m);
    const auto basis = factor(cs);
    Matrix p(n, n);
    for (int i = 0; i < n; ++i) p.col(i) = project_gradient(basis, Vector::Unit(n, i));
    worst_idem = std::max(worst_idem, (project_columns(basis, p) - p).norm());
    worst_sym = std::max(worst_sym, (p.transpose() - p).norm());
    worst_ap = std::max(worst_ap, (cs.A * p).norm() / cs.A.norm());
  }
  o.check(worst_idem <= 1e-10, fmt::format("|P^2-P| {:.1e}", worst_idem));
  o.check(worst_sym <= 1e-10, fmt::format("|P^T-P| {:.1e}", worst_sym));
  o.check(worst_ap <= 1e-10, fmt::format("|AP|/|A| {:.1e}", worst_ap));

  int agree = 0;
  for (int t = 0; t < 50; ++t) {
    const int n = std::uniform_int_distribution<int>(3, 30)(rng);
    const int m = std::uniform_int_distribution<int>(2, n)(rng);
    const int r = std::uniform_int_distribution<int>(1, m - 1)(rng);
    ConstraintSystem cs;
    cs.A = testing::planted_rank(rng, m, n, r);
    cs.b = cs.A * testing::random_vector(rng, n);
    const auto basis = factor(cs);
    agree += (basis.rank == testing::svd_rank(cs.A) && basis.rank == r) ? 1 : 0;
  }
  const double t = seconds_since(start);
  o.check(agree == 50, fmt::format("rank agreement {}/50", agree));
  o.check(t < 10.0, fmt::format("time {:.2f}s", t));
  o.note(fmt::format("max |P^2-P|={:.1e} |P^T-P|={:.1e} |AP|/|A|={:.1e}; rank {}/50; {:.2f}s",
                     worst_idem, worst_sym, worst_ap, agree, t));
  return o;
}

Outcome lbfgs_suite() {
  Outcome o;
  constexpr double theta = 1e-6;
  std::mt19937_64 rng(20240502);
  double eig_margin = std::numeric_limits<double>::infinity();
  double sum_err = 0, prod_err = 0, round_err = 0, secant_err = 0;
  int pairs = 0;
  while (pairs < 100) {
    const int n = 10;
    auto pair = make_lbfgs_pair(testing::random_vector(rng, n), testing::random_vector(rng, n), theta);
    if (!pair.usable) continue;
    ++pairs;
    const Matrix b = Matrix::Identity(n, n) - pair.s * pair.s.transpose() / pair.ss +
                     pair.y * pair.y.transpose() / pair.yy;
    Eigen::SelfAdjointEigenSolver<Matrix> eig(b);
    const Vector lambda = eig.eigenvalues();
    const double lower = theta * theta * pair.ss / (2.0 * pair.yy);
    eig_margin = std::min({eig_margin, lambda.minCoeff() - (lower - 1e-12),
                           (2.0 + 1e-12) - lambda.maxCoeff()});
    std::vector<double> ev(lambda.data(), lambda.data() + n);
    std::sort(ev.begin(), ev.end(),
              [](double a, double c) { return std::abs(a - 1.0) > std::abs(c - 1.0); });
    sum_err = std::max(sum_err, std::abs(ev[0] + ev[1] - 2.0));
    prod_err = std::max(prod_err,
                        std::abs(ev[0] * ev[1] - pair.sy * pair.sy / (pair.ss * pair.yy)));
    const Vector v = testing::random_vector(rng, n).normalized();
    round_err = std::max(round_err, (apply_inverse(pair, apply_forward(pair, v)) - v).norm());
    secant_err = std::max(secant_err,
                          (apply_forward(pair, pair.s) - (pair.sy / pair.yy) * pair.y).norm());
  }
  o.check(eig_margin > 0.0, fmt::format("eigenvalue outside bounds by {:.1e}", -eig_margin));
  o.check(sum_err <= 1e-10, fmt::format("eigen sum err {:.1e}", sum_err));
  o.check(prod_err <= 1e-10, fmt::format("eigen product err {:.1e}", prod_err));
  o.check(round_err <= 1e-10, fmt::format("round trip err {:.1e}", round_err));
  o.check(secant_err <= 1e-12, fmt::format("B s err {:.1e}", secant_err));
  o.note(fmt::format("sum err {:.1e}, product err {:.1e}, round trip {:.1e}, B s {:.1e}", sum_err,
                     prod_err, round_err, secant_err));
  return o;
}

Outcome fd_hessian_suite() {
  Outcome o;
  std::mt19937_64 rng(20240503);
  double worst = 0;
  for (int n : {4, 10, 25, 50}) {
    ConstraintSystem cs;
    cs.A = testing::random_matrix(rng, n / 2, n);
    cs.b = testing::random_vector(rng, n / 2);
    const auto basis = factor(cs);
    const Matrix m = testing::random_matrix(rng, n, n);
    const Matrix q = m + m.transpose();
    const Vector c = testing::random_vector(rng, n);
    const GradientFn grad = [&](const Vector& x) -> Vector { return q * x + c; };
    const auto h = fd_projected_hessian(grad, basis, testing::random_vector(rng, n));
    worst = std::max(worst, (h.h - exact_projected_hessian(q, basis).h).norm());
  }
  o.check(worst <= 1e-6, fmt::format("quadratic FD error {:.1e}", worst));

  const auto p = make_problem("rosenbrock", 20);
  const auto basis = factor(p.cs);
  const Vector x = restore_feasibility(basis, Vector::Constant(20, 0.5));
  const Matrix exact = exact_projected_hessian(p.hessian(x), basis).h;
  const double e1 = (fd_projected_hessian(p.gradient, basis, x, kDefaultFdEps).h - exact).norm();
  const double e2 = (fd_projected_hessian(p.gradient, basis, x, kDefaultFdEps / 2).h - exact).norm();
  const double ratio = e1 / e2;
  o.check(std::abs(ratio - 2.0) <= 0.6, fmt::format("halving ratio {:.3f}", ratio));
  o.note(fmt::format("max quadratic error {:.1e}; Rosenbrock errors {:.2e} -> {:.2e}, ratio {:.3f}",
                     worst, e1, e2, ratio));
  return o;
}

Outcome timestep_table() {
  Outcome o;
  const SolverConfig cfg;
  const double dt = 0.01;
  const double rhos[] = {1.0, 0.76, 0.5, 1.24, -0.1, -std::numeric_limits<double>::infinity()};
  const double factors[] = {2.0, 2.0, 1.0, 2.0, 0.5, 0.5};
  for (int i = 0; i < 6; ++i) {
    const double got = update_timestep(dt, rhos[i], cfg);
    o.check(got == factors[i] * dt, fmt::format("rho {} -> {} (want {})", rhos[i], got, factors[i] * dt));
  }
  if (o.pass) o.note("all six rows exact");
  return o;
}

Outcome descent_and_termination() {
  Outcome o;
  const SolverConfig cfg;
  int runs = 0;
  for (const auto& entry : catalog()) {
    const auto p = make_problem(entry.name, entry.scalable ? std::optional<int>(100) : std::nullopt);
    const auto a = solve(p, cfg);
    const auto b = solve(p, cfg);
    ++runs;
    const bool definite = a.status == Status::Converged || a.status == Status::MaxIterations ||
                          a.status == Status::StepFailure;
    o.check(definite && a.iterations <= cfg.max_itc,
            fmt::format("{}: status {} after {} iterations", entry.name, to_string(a.status), a.iterations));
    double f_prev = p.objective(restore_feasibility(factor(p.cs), p.x0));
    for (const auto& rec : a.trace) {
      if (rec.accepted && !(rec.f < f_prev)) {
        o.check(false, fmt::format("{}: f rose on accepted step {}", entry.name, rec.k));
      }
      f_prev = rec.f;
    }
    bool same = a.trace.size() == b.trace.size();
    for (std::size_t i = 0; same && i < a.trace.size(); ++i) same = a.trace[i].same_numerics(b.trace[i]);
    o.check(same, fmt::format("{}: traces differ between runs", entry.name));
  }
  o.note(fmt::format("{} problems, each solved twice", runs));
  return o;
}

Outcome baseline_comparison() {
  Outcome o;
  int at_least = 0;
  std::string detail;
  for (const auto& r : g_convex_runs) {
    at_least += r.baseline_steps >= r.rcm_steps ? 1 : 0;
    detail += fmt::format(" {}/{}:{}vs{}", r.name, r.n, r.baseline_steps, r.rcm_steps);
  }
  const double share = g_convex_runs.empty() ? 0.0 : double(at_least) / g_convex_runs.size();
  o.check(share >= 0.8, fmt::format("baseline needs >= as many steps on only {:.0f}%", 100 * share));
  o.note(fmt::format("{}/{} runs (projgrad vs rcmtr steps):{}", at_least, g_convex_runs.size(), detail));
  return o;
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"C1 booth", booth},
      {"C2 sphere n=1000", sphere},
      {"C3 convex quadratic suite", convex_suite},
      {"C4 non-convex suite n=100", nonconvex_suite},
      {"C5 projector properties", projector_suite},
      {"C6 L-BFGS spectral suite", lbfgs_suite},
      {"C7 FD Hessian", fd_hessian_suite},
      {"C8 time-step table", timestep_table},
      {"C9 descent, termination, determinism", descent_and_termination},
      {"baseline step comparison (convex runs)", baseline_comparison},
  };
  int failed = 0;
  for (const auto& [name, run] : criteria) {
    Outcome o;
    try {
      o = run();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("exception: ") + e.what();
    }
    failed += o.pass ? 0 : 1;
    fmt::print("{} {}: {}\n", o.pass ? "PASS" : "FAIL", name, o.detail);
    std::fflush(stdout);
  }
  fmt::print("{} of {} acceptance checks passed\n", criteria.size() - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
