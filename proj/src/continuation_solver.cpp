#include "rcm/continuation_solver.hpp"

#include <bit>
#include <chrono>
#include <cmath>
#include <limits>
#include <optional>

#include <fmt/format.h>

#include "rcm/errors.hpp"
#include "rcm/lbfgs_preconditioner.hpp"
#include "rcm/regularized_hessian.hpp"

namespace rcm {

namespace {

using Clock = std::chrono::steady_clock;

bool same_bits(double a, double b) {
  return std::bit_cast<std::uint64_t>(a) == std::bit_cast<std::uint64_t>(b);
}

std::int64_t elapsed_ns(Clock::time_point start) {
  return std::chrono::duration_cast<std::chrono::nanoseconds>(Clock::now() - start).count();
}

void require(bool ok, const char* what) {
  if (!ok) {
    throw InvalidArgument(fmt::format("solver config: {}", what));
  }
}

// Callbacks wrapped with evaluation counters and size checks.
class CountedProblem {
 public:
  explicit CountedProblem(const ProblemInstance& problem) : problem_(problem) {}

  double objective(const Vector& x) {
    ++objective_evals;
    return problem_.objective(x);
  }

  Vector gradient(const Vector& x) {
    ++gradient_evals;
    Vector g = problem_.gradient(x);
    if (g.size() != x.size()) {
      throw DimensionError(
          fmt::format("problem '{}': gradient has length {}, expected {}", problem_.name,
                      g.size(), x.size()));
    }
    return g;
  }

  int objective_evals = 0;
  int gradient_evals = 0;

 private:
  const ProblemInstance& problem_;
};

}  // namespace

std::string_view to_string(Phase phase) {
  return phase == Phase::WellPosed ? "WellPosed" : "IllPosed";
}

std::string_view to_string(Status status) {
  switch (status) {
    case Status::Converged:
      return "Converged";
    case Status::MaxIterations:
      return "MaxIterations";
    case Status::StepFailure:
      return "StepFailure";
    case Status::SingleFeasiblePoint:
      return "SingleFeasiblePoint";
  }
  return "Unknown";
}

void SolverConfig::validate() const {
  require(tol > 0.0, "tol must be positive");
  require(max_itc >= 0, "max_itc must be nonnegative");
  require(sigma0 > 0.0, "sigma0 must be positive");
  require(dt0 > 0.0 && std::isfinite(dt0), "dt0 must be positive and finite");
  require(eta_a > 0.0, "eta_a must be positive");
  require(eta_m > 0.0, "eta_m must be positive");
  require(eta1 > 0.0 && eta1 < eta2, "need 0 < eta1 < eta2");
  require(gamma1 > 1.0, "gamma1 must exceed 1");
  require(gamma2 > 0.0 && gamma2 < 1.0, "gamma2 must lie in (0, 1)");
  require(theta > 0.0, "theta must be positive");
  require(illposed_switch > 0.0, "illposed_switch must be positive");
  require(fd_eps > 0.0, "fd_eps must be positive");
  require(rank_tol > 0.0, "rank_tol must be positive");
  require(dt_min > 0.0, "dt_min must be positive");
}

bool IterationRecord::same_numerics(const IterationRecord& other) const {
  return k == other.k && same_bits(f, other.f) && same_bits(kkt, other.kkt) &&
         same_bits(feas, other.feas) && same_bits(dt, other.dt) && same_bits(rho, other.rho) &&
         accepted == other.accepted && phase == other.phase &&
         hessian_rebuilt == other.hessian_rebuilt;
}

TrialRatio trial_ratio(double f_k, double f_trial, const Vector& g, const Vector& s, double dt) {
  if (!(dt > 0.0)) {
    throw InvalidArgument("trial_ratio: dt must be positive");
  }
  const double decrease = -((1.0 + 0.5 * dt) / (1.0 + dt)) * g.dot(s);
  constexpr double kRejected = -std::numeric_limits<double>::infinity();
  if (!(decrease > 0.0) || !std::isfinite(decrease) || !std::isfinite(f_trial)) {
    return {kRejected, decrease};
  }
  return {(f_k - f_trial) / decrease, decrease};
}

double update_timestep(double dt, double rho, const SolverConfig& config) {
  const double gap = std::abs(1.0 - rho);
  if (gap <= config.eta1) {
    return config.gamma1 * dt;
  }
  if (gap < config.eta2) {
    return dt;
  }
  // Also reached for rho = -inf and NaN.
  return config.gamma2 * dt;
}

SolverReport solve(const ProblemInstance& problem, const SolverConfig& config,
                   const StepObserver& observer) {
  const auto start = Clock::now();
  config.validate();
  problem.validate();

  const ConstraintSystem& cs = problem.cs;
  const ProjectorBasis basis = factor(cs, config.rank_tol);
  const Eigen::Index n = basis.dim();
  CountedProblem counted(problem);

  SolverReport report;
  Vector x = restore_feasibility(basis, problem.x0);
  double f = counted.objective(x);
  Vector g = counted.gradient(x);
  if (!g.allFinite()) {
    throw NonFiniteGradient(fmt::format("problem '{}': gradient is not finite at the start", problem.name));
  }
  Vector pg = project_gradient(basis, g);
  double kkt = pg.lpNorm<Eigen::Infinity>();

  auto finish = [&](Status status) {
    report.status = status;
    report.f_star = f;
    report.kkt = kkt;
    report.feas = (cs.A * x - cs.b).lpNorm<Eigen::Infinity>();
    report.x_star = std::move(x);
    report.objective_evals = counted.objective_evals;
    report.gradient_evals = counted.gradient_evals;
    report.wall_time_s = 1e-9 * static_cast<double>(elapsed_ns(start));
    return std::move(report);
  };

  if (basis.rank == n) {
    return finish(Status::SingleFeasiblePoint);
  }

  const bool exact_hessian = config.analytic_hessian && static_cast<bool>(problem.hessian);
  auto evaluate_hessian = [&](int k) {
    ++report.hessian_evals;
    if (exact_hessian) {
      return exact_projected_hessian(problem.hessian(x), basis, k);
    }
    const GradientFn probe = [&](const Vector& z) { return counted.gradient(z); };
    return fd_projected_hessian(probe, basis, x, config.fd_eps, k);
  };

  double dt = config.dt0;
  Phase phase = Phase::WellPosed;
  bool last_accepted = true;
  LbfgsPair pair = zero_lbfgs_pair(n);
  Vector d = Vector::Zero(n);
  std::optional<ProjectedHessian> hessian;
  std::optional<RegularizedFactor> reg;
  double rho_prev = 0.0;
  bool dt_underflow = false;
  int k = 0;

  while (kkt > config.tol && k < config.max_itc) {
    ++k;
    if (dt < config.illposed_switch) {
      phase = Phase::IllPosed;
    }

    bool rebuilt = false;
    if (phase == Phase::WellPosed) {
      if (last_accepted) {
        d = -project_gradient(basis, apply_inverse(pair, pg));
      }
    } else {
      auto refactor = [&] {
        try {
          reg = build_and_factor(*hessian, config.sigma0, dt);
        } catch (const SingularFactor&) {
          dt *= config.gamma2;
          reg = build_and_factor(*hessian, config.sigma0, dt);
        }
      };
      const bool fresh_hessian =
          !hessian || (last_accepted && std::abs(rho_prev - 1.0) > config.eta1);
      if (fresh_hessian) {
        hessian = evaluate_hessian(k);
        rebuilt = true;
        refactor();
      } else if (!last_accepted) {
        refactor();
      } else {
        reg->stale = true;
      }
      // The shifted solve amplifies rounding in the constraint normal
      // directions by dt / sigma0; projecting keeps s in the null space of A.
      d = project_gradient(basis, solve(*reg, -pg));
    }

    const Vector s = (dt / (1.0 + dt)) * d;
    const Vector x_trial = x + s;
    const double f_trial = counted.objective(x_trial);
    const TrialRatio ratio = trial_ratio(f, f_trial, g, s, dt);
    const bool accept = ratio.rho >= config.eta_a &&
                        ratio.decrease >= config.eta_m * s.norm() * pg.norm();

    if (observer) {
      observer(StepEvent{k, phase, x, pg, d, s, dt, ratio.decrease, ratio.rho, accept, rebuilt});
    }

    if (accept) {
      x = x_trial;
      f = f_trial;
      g = counted.gradient(x);
      if (!g.allFinite()) {
        throw NonFiniteGradient(
            fmt::format("problem '{}': gradient is not finite at iteration {}", problem.name, k));
      }
      Vector pg_new = project_gradient(basis, g);
      pair = make_lbfgs_pair(s, pg_new - pg, config.theta);
      pg = std::move(pg_new);
      kkt = pg.lpNorm<Eigen::Infinity>();
      ++report.accepted_steps;
    } else {
      pair = zero_lbfgs_pair(n);
    }
    last_accepted = accept;
    rho_prev = ratio.rho;

    IterationRecord rec;
    rec.k = k;
    rec.f = f;
    rec.kkt = kkt;
    rec.feas = (cs.A * x - cs.b).lpNorm<Eigen::Infinity>();
    rec.dt = dt;
    rec.rho = ratio.rho;
    rec.accepted = accept;
    rec.phase = phase;
    rec.hessian_rebuilt = rebuilt;
    rec.wall_time_ns = elapsed_ns(start);
    report.trace.push_back(rec);

    dt = update_timestep(dt, ratio.rho, config);
    if (dt < config.dt_min) {
      dt_underflow = true;
      break;
    }
  }
  report.iterations = k;

  if (kkt <= config.tol) {
    const double feas = (cs.A * x - cs.b).lpNorm<Eigen::Infinity>();
    // Steps never leave the feasible subspace, so a restoration that missed
    // the tolerance cannot be repaired by iterating.
    return finish(feas <= config.tol ? Status::Converged : Status::StepFailure);
  }
  return finish(dt_underflow ? Status::StepFailure : Status::MaxIterations);
}

}  // namespace rcm
