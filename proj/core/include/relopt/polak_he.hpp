#pragma once

#include <Eigen/Dense>
#include <functional>
#include <optional>
#include <vector>

namespace relopt {

struct ConstraintEval {
  double value = 0.0;          // <= 0 when satisfied
  Eigen::VectorXd gradient;    // d value / d theta
};

// Cost and constraint values (line-search probes need no gradients).
struct PointValues {
  double cost = 0.0;
  std::vector<double> constraints;
};

struct PointEval {
  double cost = 0.0;
  Eigen::VectorXd cost_gradient;
  std::vector<ConstraintEval> constraints;
};

struct PolakHeOptions {
  double base = 0.6;          // line-search step base b
  int k_min = 0;
  int k_max = 10;
  double alpha = 0.5;         // sufficient-decrease parameter
  double gamma = 1.0;         // constraint-violation weight
  double direction_tolerance = 1e-8;
  double feasibility_tolerance = 1e-8;
  int max_iterations = 200;
  double qp_tolerance = 1e-10;
};

// Direction from the convex-combination QP over the simplex
// {mu >= 0, mu_0 + sum mu_j = 1}:
//   minimize 1/2 ||mu_0 grad_c + sum_j mu_j grad_f_j||^2 - gamma sum_j mu_j f_j
// returning delta = -(mu_0 grad_c + sum_j mu_j grad_f_j). The signed slack
// term keeps strictly feasible constraints out of the combination; at a
// feasible stationary point delta = 0.
Eigen::VectorXd polak_he_direction(const Eigen::VectorXd& cost_gradient,
                                   const std::vector<ConstraintEval>& constraints,
                                   double gamma, Eigen::VectorXd* multipliers = nullptr);

// base^k by iterated multiplication (decimal-exact step table).
double step_factor(double base, int k);

struct LineSearchResult {
  Eigen::VectorXd design;
  PointValues values;
  bool accepted = false;       // false -> stalled, design == input
  int accepted_k = 0;
  int next_start_k = 0;        // warm-start exponent for the next iteration
  std::vector<int> probed;     // exponents tried, in order
  bool projected = false;      // a trial point was pulled back onto bounds
};

using ValueEvaluator = std::function<PointValues(const Eigen::VectorXd&)>;
using FullEvaluator = std::function<PointEval(const Eigen::VectorXd&)>;
using Projector = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;

// Goldstein-Armijo search over step sizes base^k, k = start_k, start_k+1, ...
// against the merit F(theta) = max(c(theta) - c_i - gamma v_i, max_j f_j(theta))
// with v_i the current violation; a step is accepted when
// F <= v_i - alpha base^k ||delta||^2.
LineSearchResult goldstein_armijo_step(const Eigen::VectorXd& theta,
                                       const PointValues& at_theta,
                                       const Eigen::VectorXd& direction, int start_k,
                                       const ValueEvaluator& evaluate,
                                       const PolakHeOptions& options,
                                       const Projector& project = nullptr);

struct IterationRecord {
  Eigen::VectorXd design;
  double cost = 0.0;
  std::vector<double> constraints;
  double direction_norm = 0.0;
  int step_exponent = 0;
  std::vector<int> probed;
};

struct DriverResult {
  Eigen::VectorXd design;
  PointEval at_design;
  bool converged = false;
  bool stalled = false;
  int iterations = 0;
  std::vector<IterationRecord> history;
};

// Polak-He loop: direction QP, then the warm-started line search, with
// optional projection of trials onto box bounds. Per-constraint feasibility
// tolerances may override the scalar option (noisy reliability constraints).
// When `values_only` is supplied the line search uses it instead of the full
// evaluator (gradients are only needed at accepted iterates).
DriverResult polak_he_minimize(const FullEvaluator& evaluate,
                               const Eigen::VectorXd& theta0,
                               const PolakHeOptions& options,
                               const Projector& project = nullptr,
                               const std::vector<double>* feasibility_tol = nullptr,
                               const ValueEvaluator& values_only = nullptr);

Eigen::VectorXd normalize_design(const Eigen::VectorXd& design,
                                 const Eigen::VectorXd& initial);
Eigen::VectorXd denormalize_design(const Eigen::VectorXd& normalized,
                                   const Eigen::VectorXd& initial);

}  // namespace relopt
