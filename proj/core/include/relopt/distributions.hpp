#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace relopt {

enum class MarginalFamily { Normal, Lognormal, Uniform, Deterministic };

std::string family_name(MarginalFamily family);
MarginalFamily family_from_name(const std::string& name);

// One independent marginal law. When `design_linked` is set, the marginal's
// mean tracks that component of the design vector while the standard
// deviation stays fixed.
struct MarginalSpec {
  std::string name;
  MarginalFamily family = MarginalFamily::Normal;
  double mean = 0.0;
  double std_dev = 0.0;
  std::optional<int> design_linked;

  bool is_stochastic() const { return family != MarginalFamily::Deterministic; }
  void validate() const;
};

struct DesignVector {
  Eigen::VectorXd values;
  Eigen::VectorXd lower;
  Eigen::VectorXd upper;

  int dim() const { return static_cast<int>(values.size()); }
  void validate() const;
  bool contains(const Eigen::VectorXd& theta, double tol = 0.0) const;
  Eigen::VectorXd project(const Eigen::VectorXd& theta) const;
};

// Independent random vector whose design-linked means follow theta.
struct RandomVectorSpec {
  std::vector<MarginalSpec> marginals;

  int dim() const { return static_cast<int>(marginals.size()); }
  void validate(int design_dim) const;

  // Marginal with the design linkage applied.
  MarginalSpec effective(int i, const DesignVector& design) const;

  std::vector<int> stochastic_indices() const;
  // Dimensions that vary in the augmented space: stochastic ones plus
  // design-linked deterministic ones.
  std::vector<int> augmented_indices() const;

  // Mean physical vector at a given design (all marginals at their means).
  Eigen::VectorXd mean_vector(const DesignVector& design) const;
};

// Hyperrectangular confidence region of the augmented density. Dimensions
// that never vary collapse to a zero-width interval at their constant.
struct ConfidenceBox {
  Eigen::VectorXd lower;
  Eigen::VectorXd upper;

  int dim() const { return static_cast<int>(lower.size()); }
  bool contains(const Eigen::VectorXd& x) const;
  double diagonal() const { return (upper - lower).norm(); }
};

// Moment matching for the lognormal law: returns (log_location, log_scale)
// reproducing the requested mean and standard deviation.
std::pair<double, double> lognormal_shape_scale(double mean, double std_dev);

double marginal_pdf(const MarginalSpec& spec, double x);
double marginal_cdf(const MarginalSpec& spec, double x);
double marginal_quantile(const MarginalSpec& spec, double p);

// Marginal value at the standard-normal coordinate u (the per-component
// isoprobabilistic map). Equivalent to quantile(Phi(u)) but keeps full
// precision deep in the tails, where Phi(u) is not representable.
double marginal_from_u(const MarginalSpec& spec, double u);
double marginal_to_u(const MarginalSpec& spec, double x);

// d ln f(x | mean) / d mean, with the standard deviation held fixed.
// Defined for Normal and Lognormal; zero by convention otherwise.
double marginal_score_dmean(const MarginalSpec& spec, double x);

// Rows i.i.d. from the joint law at the given design; reproducible under the
// seed and independent of evaluation order (one substream per row).
Eigen::MatrixXd sample(const RandomVectorSpec& spec, const DesignVector& design,
                       int count, uint64_t seed);

// Componentwise isoprobabilistic transform u_i = Phi^{-1}(F_i(x_i)).
// Deterministic components map to u = 0 and back to their constants.
Eigen::VectorXd to_standard_normal(const RandomVectorSpec& spec,
                                   const DesignVector& design,
                                   const Eigen::VectorXd& x);
Eigen::VectorXd from_standard_normal(const RandomVectorSpec& spec,
                                     const DesignVector& design,
                                     const Eigen::VectorXd& u);

// Reduced transform over the stochastic dimensions only; the remaining
// components are pinned at their constants.
Eigen::VectorXd physical_from_reduced(const RandomVectorSpec& spec,
                                      const DesignVector& design,
                                      const Eigen::VectorXd& u_reduced);

// Box spanning the augmented density (theta uniform over the design bounds,
// X | theta from the spec) out to +-beta_target marginal quantiles. Extremes
// are taken over the endpoints of each linked design interval, which is
// exact for the supported families whose quantiles are monotone in the mean
// over the ranges of interest.
ConfidenceBox augmented_confidence_box(const RandomVectorSpec& spec,
                                       const DesignVector& design,
                                       double beta_target);

}  // namespace relopt
