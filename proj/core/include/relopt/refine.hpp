#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <vector>

#include "relopt/distributions.hpp"
#include "relopt/kriging.hpp"
#include "relopt/subset.hpp"
#include "relopt/surface.hpp"

namespace relopt {

// Probability that the true response sign is uncertain at x: the prediction
// falls inside the margin |G| <= k sigma with respect to the epistemic
// (Gaussian) prediction uncertainty.
double margin_probability(const GaussianSurface& surface, const Eigen::VectorXd& x,
                          double k);
double margin_log_probability(const GaussianSurface& surface, const Eigen::VectorXd& x,
                              double k);

// Unnormalized log of the refinement sampling density: margin probability
// weighted by a uniform density over the confidence box (-inf outside).
double refinement_log_density(const GaussianSurface& surface, const Eigen::VectorXd& x,
                              double k, const ConfidenceBox& box);

class EmptyMarginError : public std::runtime_error {
 public:
  explicit EmptyMarginError(const std::string& what) : std::runtime_error(what) {}
};

struct SliceOptions {
  int burn_in_updates = 0;  // 0 -> 100 * dim
  int thin_updates = 0;     // 0 -> dim (one full coordinate sweep per sample)
  double initial_width_fraction = 0.05;  // box width / 20
  int start_trials = 100000;
  int max_step_out = 1000;
};

// Univariate slice-within-Gibbs sampler with step-out and shrink. The chain
// is inherently sequential; fixed seed means bit-identical output. Throws
// EmptyMarginError when no finite-density start is found by uniform
// rejection within `start_trials`.
Eigen::MatrixXd slice_sample(
    const std::function<double(const Eigen::VectorXd&)>& log_density,
    const Eigen::VectorXd& lower, const Eigen::VectorXd& upper, int count,
    uint64_t seed, const SliceOptions& options = {});

struct KMeansResult {
  Eigen::MatrixXd centers;           // K x n
  std::vector<int> assignments;      // per point
  std::vector<double> wcss_history;  // objective after each Lloyd iteration
  int iterations = 0;
};

// Lloyd iterations from k-means++ seeding to an assignment fixpoint (or 100
// iterations). K must not exceed the number of distinct points.
KMeansResult kmeans(const Eigen::MatrixXd& points, int K, uint64_t seed);

// One kriging model per limit state, all sharing the augmented-space
// dimensions and confidence box.
struct SurrogateSet {
  std::vector<KrigingModel> models;
  std::vector<int> dims;   // physical indices of the model inputs
  ConfidenceBox box;       // full physical dimension

  Eigen::VectorXd sub_lower() const;
  Eigen::VectorXd sub_upper() const;
  std::vector<KrigingSurface> surfaces() const;
};

struct BracketingResult {
  double pf_plus = 0.0;   // shift +k sigma (smallest failure domain)
  double pf_zero = 0.0;
  double pf_minus = 0.0;  // shift -k sigma
  double log10_spread = 0.0;  // +inf when pf_plus hit the estimator floor
  SubsetResult detail_zero;   // full result of the unshifted analysis
  bool ordering_enforced = false;
};

// Three common-random-number subset analyses on the shifted surrogate limit
// states min_l(G_l + i k sigma_l), i = +1, 0, -1. If simulation noise breaks
// the nesting order, the analyses are re-run once with a re-derived common
// seed and finally clamped to sorted order.
BracketingResult bracketing_probabilities(
    const std::vector<const GaussianSurface*>& surfaces,
    const RandomVectorSpec& spec, const DesignVector& design, double k,
    const SubsetConfig& config);

struct RefineOptions {
  double margin_k = 0.0;  // 0 -> Phi^{-1}(0.975)
  int candidate_count = 10000;
  int cluster_count = 50;
  double epsilon_pf0 = 5e-2;
  long long budget = 1000;  // max true-model calls per limit state
  // Per-model remaining budgets override the scalar (cumulative accounting
  // across repeated enrichment phases).
  std::vector<long long> budget_per_model;
  SubsetConfig subset;
  SliceOptions slice;
  double dedupe_fraction = 1e-8;  // x box diagonal
  uint64_t seed = 0;
  int fit_threads = 1;
  KrigingFitOptions refit;  // basis/bounds template for refits
};

struct RefinementRound {
  int round = 0;
  long long calls_used = 0;
  double pf_plus = 0.0, pf_zero = 0.0, pf_minus = 0.0;
  double log10_spread = 0.0;
};

struct RefinementState {
  Eigen::MatrixXd candidates;  // last slice-sampled population (model space)
  Eigen::MatrixXd centers;     // last cluster centers (model space)
  double pf_plus = 0.0, pf_zero = 0.0, pf_minus = 0.0;
  double log10_spread = 0.0;
  long long calls_used = 0;                // total across limit states
  std::vector<long long> calls_per_model;  // one per limit state
  bool converged = false;
  std::vector<RefinementRound> rounds;
};

// Margin-driven enrichment: sample candidates from each surrogate's
// refinement density, reduce them by k-means, evaluate the true limit states
// at the centers, refit, and repeat until the log10 bracketing spread at the
// given design satisfies epsilon_pf0 or the budget is exhausted.
RefinementState enrich(SurrogateSet& set, const std::vector<LimitState>& true_limit_states,
                       const RandomVectorSpec& spec, const DesignVector& design,
                       const RefineOptions& options);

// Default margin half-width multiplier (95% two-sided confidence).
double default_margin_k();

}  // namespace relopt
