#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "relopt/distributions.hpp"
#include "relopt/polak_he.hpp"
#include "relopt/subset.hpp"

namespace relopt {

class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

struct MarginalConfig {
  std::string name;
  std::string family;
  double mean = 0.0;
  double std_dev = 0.0;            // either std_dev or cov is given
  bool std_dev_is_cov = false;
  std::optional<int> design_var;

  MarginalSpec to_spec() const;
};

struct DesignConfig {
  std::vector<double> initial;
  std::vector<double> lower;
  std::vector<double> upper;
};

// Run configuration: a single structured text (JSON) file. Unknown keys are
// rejected; only `problem` and `seed` are required, everything else carries
// the documented default.
struct RunConfig {
  std::string problem;  // linear | series-2d | rbdo-closed-form | hull
  uint64_t seed = 0;
  int threads = 1;

  std::vector<double> beta_targets{3.0};
  std::string constraint_mode = "system";  // or "per-component"
  double epsilon_pf0 = 5e-2;
  int initial_doe = 50;
  int enrichment_batch = 50;
  int candidate_count = 10000;
  double margin_k = 0.0;  // 0 -> Phi^{-1}(0.975)
  double box_beta = 8.0;
  long long refine_budget = 1000;

  SubsetConfig subset;
  int verification_samples_per_level = 100000;
  PolakHeOptions optimizer;
  int max_outer_iterations = 60;

  // Problem-specific knobs.
  int linear_dimension = 2;
  double linear_beta_true = 3.0;
  std::string collapse_model = "illustrative";
  double bs5500_c_web = 1.1;
  double bs5500_c_flange = 0.5;

  // Optional overrides of the problem's built-in stochastic model / design
  // space / starting point.
  std::vector<MarginalConfig> marginals;
  std::optional<DesignConfig> design;
  std::optional<std::vector<double>> start;

  static RunConfig parse(const std::string& json_text);
  static RunConfig load(const std::string& path);
  std::string serialize() const;    // canonical form (defaults filled)
  std::string manifest_hash() const;
};

}  // namespace relopt
