#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

namespace relopt {

enum class TrendBasis { Constant, Linear };

int trend_size(TrendBasis basis, int dim);
Eigen::VectorXd trend_eval(TrendBasis basis, const Eigen::VectorXd& x);

struct DesignOfExperiments {
  Eigen::MatrixXd inputs;   // m x n
  Eigen::VectorXd outputs;  // m

  int points() const { return static_cast<int>(inputs.rows()); }
  int dim() const { return static_cast<int>(inputs.cols()); }
  void validate() const;  // distinct rows, consistent sizes
};

struct KrigingFitOptions {
  TrendBasis basis = TrendBasis::Constant;
  // Empty bounds select the default [1e-2, 1e2] x per-dimension DOE range.
  Eigen::VectorXd length_lower;
  Eigen::VectorXd length_upper;
  int multistart = 0;   // 0 -> 10 * dim
  int polish_top = 0;   // 0 -> min(multistart, max(4, dim/2 + 1))
  uint64_t seed = 0;
  double nugget_initial = 1e-12;
  double nugget_max = 1e-6;
  // Length scales are rejected while searching when the nugget-induced
  // smoothing at the DOE points exceeds this fraction of the output scale
  // (keeps the exact-interpolation contract). Densely clustered DOEs may
  // need a looser cap.
  double defect_cap_scale = 1e-9;
  int threads = 1;
  // Extra candidate lengths appended to the polish set (e.g. a previous
  // fit's optimum when re-fitting an enriched DOE).
  std::vector<Eigen::VectorXd> extra_starts;
};

class KrigingFitError : public std::runtime_error {
 public:
  explicit KrigingFitError(const std::string& what) : std::runtime_error(what) {}
};

// Gaussian-process emulator with trend f(x)'b and stationary squared
// exponential residual; exact interpolator up to the numerical nugget.
class KrigingModel {
 public:
  static double correlation(const Eigen::VectorXd& x, const Eigen::VectorXd& x_prime,
                            const Eigen::VectorXd& lengths);

  // Profiled negative log-likelihood after closed-form elimination of the
  // trend coefficients and process variance. Returns +inf when the
  // correlation matrix is not positive definite at the base nugget.
  static double negative_log_likelihood(const DesignOfExperiments& doe,
                                        TrendBasis basis,
                                        const Eigen::VectorXd& lengths,
                                        double nugget = 1e-12);

  // Two-step maximum likelihood: global multistart search over the length
  // scales followed by local polish, then closed-form trend/variance.
  static KrigingModel fit(const DesignOfExperiments& doe, const KrigingFitOptions& options = {});

  // Bypass the hyperparameter search (fixed lengths; optionally a fixed
  // process variance instead of the closed-form estimate).
  static KrigingModel with_hyperparameters(const DesignOfExperiments& doe, TrendBasis basis,
                                           const Eigen::VectorXd& lengths,
                                           double process_variance = -1.0,
                                           double nugget_initial = 1e-12,
                                           double nugget_max = 1e-6);

  // Mean and variance in whitened form: two triangular solves per point,
  // stable at DOE points even when the correlation matrix is nearly
  // singular (exact interpolation to ~1e-10 at condition numbers ~1e12).
  void predict(const Eigen::VectorXd& x, double& mean, double& variance) const;
  // Fast mean-only path (dual weights, O(m n) per point) for bulk sampling
  // on the surrogate; round-off may reach ~1e-5 relative on extremely
  // ill-conditioned fits, which is immaterial to sampling estimators.
  double predict_mean(const Eigen::VectorXd& x) const;
  void predict_batch(const Eigen::MatrixXd& points, Eigen::VectorXd& means,
                     Eigen::VectorXd& variances) const;
  Eigen::VectorXd predict_mean_batch(const Eigen::MatrixXd& points) const;

  const DesignOfExperiments& doe() const { return doe_; }
  TrendBasis basis() const { return basis_; }
  const Eigen::VectorXd& lengths() const { return lengths_; }
  double process_variance() const { return process_variance_; }
  const Eigen::VectorXd& trend_coefficients() const { return trend_; }
  double nugget() const { return nugget_; }
  // Lower-triangular factor of R + nugget*I.
  const Eigen::MatrixXd& correlation_factor() const { return chol_lower_; }

  // Versioned text snapshot; byte-stable for identical inputs. The manifest
  // hash stored in the file is checked on load when `expected_hash` is
  // non-empty; a mismatch is a hard error.
  void save(const std::filesystem::path& path, const std::string& manifest_hash) const;
  static KrigingModel load(const std::filesystem::path& path,
                           const std::string& expected_hash = "");

 private:
  KrigingModel() = default;
  void factorize();  // builds chol_lower_, trend_, residual weights

  DesignOfExperiments doe_;
  TrendBasis basis_ = TrendBasis::Constant;
  Eigen::VectorXd lengths_;
  double process_variance_ = 0.0;
  double nugget_ = 0.0;
  double nugget_max_ = 1e-6;
  bool fixed_variance_ = false;

  Eigen::VectorXd trend_;           // GLS trend coefficients
  Eigen::MatrixXd chol_lower_;      // L with L L' = R + nugget I
  Eigen::MatrixXd whitened_f_;      // L^{-1} F
  Eigen::MatrixXd gls_lower_;       // chol factor of F' R^{-1} F
  Eigen::VectorXd whitened_resid_;  // L^{-1} (y - F b)
  Eigen::VectorXd resid_weights_;   // R^{-1} (y - F b), fast mean-only path
};

}  // namespace relopt
