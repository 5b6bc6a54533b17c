#pragma once

#include <cstdint>
#include <functional>
#include <string_view>
#include <vector>

#include "rcm/constraint_projection.hpp"
#include "rcm/problem.hpp"
#include "rcm/types.hpp"

namespace rcm {

enum class Phase { WellPosed, IllPosed };

enum class Status { Converged, MaxIterations, StepFailure, SingleFeasiblePoint };

std::string_view to_string(Phase phase);
std::string_view to_string(Status status);

/// Constants of the regularization continuation iteration. Defaults are the
/// published settings.
struct SolverConfig {
  double tol = 1e-6;             // stop when ||P g||_inf <= tol
  int max_itc = 300;             // outer iteration cap
  double sigma0 = 1e-4;          // regularization scale
  double dt0 = 1e-2;             // initial time step
  double eta_a = 1e-6;           // acceptance threshold on rho
  double eta_m = 1e-10;          // sufficient model decrease constant
  double eta1 = 0.25;            // |1 - rho| band for enlarging dt
  double eta2 = 0.75;            // |1 - rho| band for keeping dt
  double gamma1 = 2.0;           // dt enlargement factor
  double gamma2 = 0.5;           // dt reduction factor
  double theta = 1e-6;           // L-BFGS pair guard
  double illposed_switch = 1e-3; // dt below this switches to the Hessian preconditioner for good
  double fd_eps = 1e-6;          // finite-difference increment for P H P
  double rank_tol = 1e-10;       // relative rank threshold for A
  double dt_min = 1e-16;         // dt underflow floor (StepFailure)
  bool analytic_hessian = false; // use the problem's Hessian instead of differencing, if it has one

  /// Throws InvalidArgument when a constant is out of range.
  void validate() const;
};

struct IterationRecord {
  int k = 0;
  double f = 0.0;     // objective after the iteration
  double kkt = 0.0;   // ||P g||_inf after the iteration
  double feas = 0.0;  // ||A x - b||_inf after the iteration
  double dt = 0.0;    // time step used for the trial
  double rho = 0.0;
  bool accepted = false;
  Phase phase = Phase::WellPosed;
  bool hessian_rebuilt = false;
  std::int64_t wall_time_ns = 0;  // since the start of the solve

  /// Field-wise equality ignoring wall time; doubles are compared bitwise.
  bool same_numerics(const IterationRecord& other) const;
  bool operator==(const IterationRecord&) const = default;
};

struct SolverReport {
  Status status = Status::MaxIterations;
  Vector x_star;
  double f_star = 0.0;
  double kkt = 0.0;
  double feas = 0.0;
  int iterations = 0;
  int accepted_steps = 0;
  int objective_evals = 0;
  int gradient_evals = 0;  // includes finite-difference probes
  int hessian_evals = 0;
  double wall_time_s = 0.0;
  std::vector<IterationRecord> trace;
};

/// Snapshot handed to a StepObserver after each trial step is judged and
/// before the iterate moves. References are valid only during the call.
struct StepEvent {
  int k;
  Phase phase;
  const Vector& x;   // iterate the trial started from
  const Vector& pg;  // projected gradient at x
  const Vector& d;   // search direction
  const Vector& s;   // trial step dt / (1 + dt) d
  double dt;
  double decrease;   // m(0) - m(s)
  double rho;
  bool accepted;
  bool hessian_rebuilt;
};

using StepObserver = std::function<void(const StepEvent&)>;

struct TrialRatio {
  double rho;
  double decrease;
};

/// Ratio of actual to predicted decrease for the simplified model
/// m(0) - m(s) = -((1 + dt/2) / (1 + dt)) g^T s. A non-positive or non-finite
/// prediction, or a non-finite trial value, yields rho = -infinity.
TrialRatio trial_ratio(double f_k, double f_trial, const Vector& g, const Vector& s, double dt);

/// gamma1 dt if |1 - rho| <= eta1, dt if eta1 < |1 - rho| < eta2, gamma2 dt otherwise.
double update_timestep(double dt, double rho, const SolverConfig& config);

/// Regularization continuation method with trust-region time-step control.
///
/// Starts from the feasibility restoration of problem.x0. Each iteration
/// builds a direction d from the L-BFGS pair (well-posed phase) or from the
/// factored (sigma0/dt) I + P H P (ill-posed phase, entered permanently once
/// dt < illposed_switch), tries s = dt/(1+dt) d, accepts on rho >= eta_a with
/// sufficient model decrease, and adapts dt. Every step lies in null(A), so
/// feasibility is preserved without correction steps.
///
/// Throws NonFiniteGradient for a non-finite gradient at an accepted point and
/// SingularFactor if the regularized matrix stays singular after one dt halving.
SolverReport solve(const ProblemInstance& problem, const SolverConfig& config,
                   const StepObserver& observer = {});

}  // namespace rcm
