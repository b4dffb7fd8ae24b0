#pragma once

#include <Eigen/Dense>
#include <functional>
#include <string>
#include <vector>

#include "relopt/distributions.hpp"
#include "relopt/polak_he.hpp"
#include "relopt/refine.hpp"
#include "relopt/subset.hpp"

namespace relopt {

enum class ReliabilityConstraintMode { SystemMin, PerComponent };

struct RbdoProblem {
  // Cost of the mean physical vector; the analytic design gradient is used
  // when provided, central finite differences otherwise.
  std::function<double(const Eigen::VectorXd&)> cost;
  std::function<Eigen::VectorXd(const Eigen::VectorXd&)> cost_gradient;

  // Deterministic constraints f_i(theta) <= 0.
  std::vector<std::function<double(const Eigen::VectorXd&)>> deterministic_constraints;

  std::vector<LimitState> limit_states;  // true performance functions
  RandomVectorSpec spec;
  DesignVector design;  // initial design + bounds
  std::vector<std::string> design_names;

  ReliabilityConstraintMode mode = ReliabilityConstraintMode::SystemMin;
  std::vector<double> beta_targets;  // one (system) or one per limit state

  double epsilon_pf0 = 5e-2;
  int initial_doe_size = 50;
  int enrichment_batch = 50;
  int candidate_count = 10000;
  double margin_k = 0.0;  // 0 -> default
  double box_beta = 8.0;
  long long refine_budget = 1000;  // true calls per limit state, initial DOE included

  SubsetConfig subset_inner;   // surrogate analyses
  SubsetConfig subset_verify;  // true-model verification
  PolakHeOptions optimizer;
  int max_outer_iterations = 60;
  // Stationarity under estimator noise: converged once the scaled design
  // movement stays below this for `movement_window` consecutive accepted
  // steps (with feasibility and spread also satisfied).
  double movement_tolerance = 1e-4;
  int movement_window = 3;
  uint64_t seed = 0;
  int threads = 1;

  void validate() const;
  int reliability_constraint_count() const;
  Eigen::VectorXd cost_gradient_at(const Eigen::VectorXd& theta) const;
  double cost_at(const Eigen::VectorXd& theta) const;
};

struct RbdoIteration {
  int iteration = 0;
  Eigen::VectorXd design;
  Eigen::VectorXd design_normalized;
  double cost = 0.0;
  std::vector<double> beta;  // surrogate-based, one per reliability constraint
  double direction_norm = 0.0;
  int step_exponent = 0;
  double log10_spread = 0.0;
  bool refined = false;  // enrichment re-entered at this design
  std::vector<long long> true_calls;  // cumulative per limit state
};

struct RbdoHistory {
  std::vector<RbdoIteration> iterations;
  bool converged = false;
  bool budget_exhausted = false;
  int projections = 0;  // line-search trials pulled back onto the bounds
  DesignVector final_design;
  std::vector<long long> true_calls;  // final cumulative counts
  SurrogateSet surrogates;
  std::vector<RefinementRound> refinement_log;
};

// Deterministic warm start: random variates frozen at their means, the
// probabilistic limit states used as deterministic constraints g >= 0.
DesignVector ddo_solve(const RbdoProblem& problem, DriverResult* trace = nullptr);

// Full surrogate-based double loop (see README): confidence box, initial
// space-filling DOE, margin-driven enrichment, Polak-He outer iterations with
// subset simulation on the surrogate means, accuracy recheck at every new
// design. True-model calls occur only in the DOE/enrichment phase.
RbdoHistory rbdo_solve(const RbdoProblem& problem);

// Subset verification on the true limit states (one result per reliability
// constraint), at the verification sample size.
std::vector<SubsetResult> verify_design(const RbdoProblem& problem,
                                        const DesignVector& design);

}  // namespace relopt
