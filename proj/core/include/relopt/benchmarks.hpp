#pragma once

#include <Eigen/Dense>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "relopt/distributions.hpp"
#include "relopt/subset.hpp"

namespace relopt {

// Verification problems with executable oracles. The catalog is static:
// changing any entry is a breaking change for recorded results.
struct BenchmarkProblem {
  std::string name;
  int dimension = 0;
  RandomVectorSpec spec;
  DesignVector design;
  std::vector<LimitState> limit_states;  // failure at g <= 0, physical space

  // Cost of a design, evaluated on the mean physical vector.
  std::function<double(const Eigen::VectorXd&)> cost;
  std::function<Eigen::VectorXd(const Eigen::VectorXd&)> cost_gradient;  // wrt theta

  // Closed forms where available.
  std::optional<double> exact_pf;  // at the nominal design
  std::function<double(const Eigen::VectorXd&)> exact_beta;        // beta(theta)
  std::function<Eigen::VectorXd(const Eigen::VectorXd&)> exact_pf_gradient;
  std::function<double(double)> optimal_cost;  // beta_target -> cost at optimum

  // Brute-force Monte Carlo failure probability at the nominal design.
  double brute_force_pf(long long samples, uint64_t seed) const;
};

// g(x) = beta_true - sum(x_i)/sqrt(n), x_i ~ Normal(theta_i, 1) with
// design-linked means (theta = 0 nominally): Pf = Phi(-beta_true) exactly.
BenchmarkProblem linear_benchmark(int dim = 2, double beta_true = 3.0);

// Two-branch series system in 2-D standard normal space; the single limit
// state is the minimum of two smooth parabolic branches.
BenchmarkProblem series_2d_benchmark();

// cost = theta_1 + theta_2, X_i ~ Normal(theta_i, 1), g = X_1 + X_2 - a with
// a = 0: beta(theta) = (theta_1 + theta_2 - a)/sqrt(2); the optimum is the
// line theta_1 + theta_2 = a + beta_0 sqrt(2).
BenchmarkProblem rbdo_closed_form_benchmark();

std::vector<BenchmarkProblem> benchmark_catalog();
BenchmarkProblem benchmark_by_name(const std::string& name);

}  // namespace relopt
