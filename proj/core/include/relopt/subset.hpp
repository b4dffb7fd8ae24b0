#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "relopt/distributions.hpp"

namespace relopt {

using LimitState = std::function<double(const Eigen::VectorXd&)>;
// Vectorized evaluation over the rows of a matrix of physical points.
using BatchLimitState = std::function<Eigen::VectorXd(const Eigen::MatrixXd&)>;

struct SubsetConfig {
  int samples_per_level = 10000;
  double level_probability = 0.1;
  double proposal_spread = 1.0;
  int max_levels = 20;
  uint64_t seed = 0;

  void validate() const;
  int chains() const;       // samples_per_level * level_probability
  int steps_per_chain() const;
};

struct SensitivityEstimate {
  double value = 0.0;
  double std_error = 0.0;
};

struct SubsetResult {
  double pf = 0.0;
  double cov = 0.0;
  double beta = 0.0;  // -Phi^{-1}(pf); -inf when pf = 1
  int levels = 0;
  std::vector<double> thresholds;
  std::vector<SensitivityEstimate> sensitivities;  // one per design variable
  long long calls = 0;
};

// Raised when no failure domain is found within max_levels; carries the
// partial state so callers can treat the estimate as a floor.
class PfFloorError : public std::runtime_error {
 public:
  PfFloorError(const std::string& what, SubsetResult partial)
      : std::runtime_error(what), partial_(std::move(partial)) {}
  const SubsetResult& partial() const { return partial_; }

 private:
  SubsetResult partial_;
};

double generalized_beta(double pf);

// Subset simulation in standard-normal space with componentwise
// modified-Metropolis resampling. The limit state receives physical vectors.
// Every generated sample costs exactly one limit-state call, so
// calls == samples_per_level * levels on return. Bit-reproducible for a
// fixed seed (one derived substream per sample/chain). When a batch
// evaluator is supplied the level-0 population and the synchronized chain
// steps are evaluated in blocks (same chains, same draws).
SubsetResult subset_simulate(const LimitState& limit_state,
                             const RandomVectorSpec& spec,
                             const DesignVector& design, const SubsetConfig& config,
                             bool with_sensitivities = false,
                             const BatchLimitState& batch_limit_state = nullptr);

}  // namespace relopt
