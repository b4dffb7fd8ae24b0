#include "relopt/benchmarks.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "relopt/math.hpp"
#include "relopt/rng.hpp"

namespace relopt {

double BenchmarkProblem::brute_force_pf(long long samples, uint64_t seed) const {
  if (samples < 1) throw std::invalid_argument("brute_force_pf: samples must be >= 1");
  long long failures = 0;
  const int n = spec.dim();
  Eigen::VectorXd x(n);
  // Blocked substreams keep the oracle reproducible without 10^7 stream setups.
  const long long block = 1 << 14;
  for (long long start = 0; start < samples; start += block) {
    RngStream rng(derive_seed(seed, "brute-force", static_cast<uint64_t>(start)));
    const long long stop = std::min(samples, start + block);
    for (long long i = start; i < stop; ++i) {
      for (int k = 0; k < n; ++k) {
        const MarginalSpec m = spec.effective(k, design);
        x[k] = m.is_stochastic() ? marginal_quantile(m, rng.uniform01()) : m.mean;
      }
      double g = std::numeric_limits<double>::infinity();
      for (const auto& ls : limit_states) g = std::min(g, ls(x));
      if (g <= 0.0) ++failures;
    }
  }
  return static_cast<double>(failures) / static_cast<double>(samples);
}

BenchmarkProblem linear_benchmark(int dim, double beta_true) {
  if (dim < 1) throw std::invalid_argument("linear_benchmark: dim must be >= 1");
  BenchmarkProblem p;
  p.name = "linear";
  p.dimension = dim;
  for (int i = 0; i < dim; ++i)
    p.spec.marginals.push_back(
        {"x" + std::to_string(i + 1), MarginalFamily::Normal, 0.0, 1.0, i});
  p.design.values = Eigen::VectorXd::Zero(dim);
  p.design.lower = Eigen::VectorXd::Constant(dim, -5.0);
  p.design.upper = Eigen::VectorXd::Constant(dim, 5.0);

  const double inv_sqrt_n = 1.0 / std::sqrt(static_cast<double>(dim));
  p.limit_states.push_back([beta_true, inv_sqrt_n](const Eigen::VectorXd& x) {
    return beta_true - x.sum() * inv_sqrt_n;
  });
  p.cost = [](const Eigen::VectorXd& x) { return x.sum(); };
  p.cost_gradient = [dim](const Eigen::VectorXd&) {
    return Eigen::VectorXd::Ones(dim).eval();
  };
  p.exact_pf = normal_cdf(-beta_true);
  p.exact_beta = [beta_true, inv_sqrt_n](const Eigen::VectorXd& theta) {
    return beta_true - theta.sum() * inv_sqrt_n;
  };
  p.exact_pf_gradient = [beta_true, inv_sqrt_n](const Eigen::VectorXd& theta) {
    const double z = theta.sum() * inv_sqrt_n - beta_true;
    return (normal_pdf(z) * inv_sqrt_n *
            Eigen::VectorXd::Ones(theta.size())).eval();
  };
  return p;
}

BenchmarkProblem series_2d_benchmark() {
  BenchmarkProblem p;
  p.name = "series-2d";
  p.dimension = 2;
  p.spec.marginals = {{"x1", MarginalFamily::Normal, 0.0, 1.0, std::nullopt},
                      {"x2", MarginalFamily::Normal, 0.0, 1.0, std::nullopt}};
  p.design.values.resize(0);
  p.design.lower.resize(0);
  p.design.upper.resize(0);

  // Failure in two opposite corners along x1 + x2; the quadratic term bends
  // both branches.
  const auto branch1 = [](const Eigen::VectorXd& x) {
    return 3.0 + 0.1 * (x[0] - x[1]) * (x[0] - x[1]) - (x[0] + x[1]) / std::sqrt(2.0);
  };
  const auto branch2 = [](const Eigen::VectorXd& x) {
    return 3.0 + 0.1 * (x[0] - x[1]) * (x[0] - x[1]) + (x[0] + x[1]) / std::sqrt(2.0);
  };
  p.limit_states.push_back([branch1, branch2](const Eigen::VectorXd& x) {
    return std::min(branch1(x), branch2(x));
  });
  p.cost = [](const Eigen::VectorXd&) { return 0.0; };
  return p;
}

BenchmarkProblem rbdo_closed_form_benchmark() {
  BenchmarkProblem p;
  p.name = "rbdo-closed-form";
  p.dimension = 2;
  p.spec.marginals = {{"x1", MarginalFamily::Normal, 3.0, 1.0, 0},
                      {"x2", MarginalFamily::Normal, 3.0, 1.0, 1}};
  p.design.values.resize(2);
  p.design.values << 3.0, 3.0;
  p.design.lower = Eigen::VectorXd::Constant(2, -5.0);
  p.design.upper = Eigen::VectorXd::Constant(2, 10.0);

  p.limit_states.push_back([](const Eigen::VectorXd& x) { return x[0] + x[1]; });
  p.cost = [](const Eigen::VectorXd& x) { return x[0] + x[1]; };
  p.cost_gradient = [](const Eigen::VectorXd&) {
    return Eigen::VectorXd::Ones(2).eval();
  };
  p.exact_pf = normal_cdf(-6.0 / std::sqrt(2.0));
  p.exact_beta = [](const Eigen::VectorXd& theta) {
    return (theta[0] + theta[1]) / std::sqrt(2.0);
  };
  p.exact_pf_gradient = [](const Eigen::VectorXd& theta) {
    const double beta = (theta[0] + theta[1]) / std::sqrt(2.0);
    return (-normal_pdf(beta) / std::sqrt(2.0) *
            Eigen::VectorXd::Ones(2)).eval();
  };
  p.optimal_cost = [](double beta_target) { return beta_target * std::sqrt(2.0); };
  return p;
}

std::vector<BenchmarkProblem> benchmark_catalog() {
  return {linear_benchmark(), series_2d_benchmark(), rbdo_closed_form_benchmark()};
}

BenchmarkProblem benchmark_by_name(const std::string& name) {
  for (auto& p : benchmark_catalog())
    if (p.name == name) return p;
  throw std::invalid_argument("unknown benchmark: " + name);
}

}  // namespace relopt
