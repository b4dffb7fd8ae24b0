#include "relopt/subset.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "relopt/math.hpp"
#include "relopt/rng.hpp"

namespace relopt {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Score-function sensitivities assembled from the last-level population:
// dPf/dtheta_j = Pf * E[ d ln f(X|theta) / d theta_j | X in F ].
std::vector<SensitivityEstimate> score_sensitivities(
    const Eigen::MatrixXd& last_level_x, const Eigen::VectorXd& last_level_g,
    const RandomVectorSpec& spec, const DesignVector& design, double pf,
    double pf_cov) {
  const int n_design = design.dim();
  std::vector<SensitivityEstimate> out(static_cast<size_t>(n_design));
  if (n_design == 0) return out;

  std::vector<int> fail_rows;
  for (int i = 0; i < last_level_g.size(); ++i)
    if (last_level_g[i] <= 0.0) fail_rows.push_back(i);
  if (fail_rows.empty()) return out;

  for (int j = 0; j < n_design; ++j) {
    // Sum the scores of every marginal linked to theta_j.
    double acc = 0.0, acc2 = 0.0;
    for (int row : fail_rows) {
      double s = 0.0;
      for (int i = 0; i < spec.dim(); ++i) {
        const auto& m = spec.marginals[static_cast<size_t>(i)];
        if (m.design_linked && *m.design_linked == j)
          s += marginal_score_dmean(spec.effective(i, design), last_level_x(row, i));
      }
      acc += s;
      acc2 += s * s;
    }
    const double nf = static_cast<double>(fail_rows.size());
    const double mean_score = acc / nf;
    const double var_score = std::max(0.0, acc2 / nf - mean_score * mean_score);
    const double se_score = std::sqrt(var_score / nf);
    out[static_cast<size_t>(j)].value = pf * mean_score;
    out[static_cast<size_t>(j)].std_error = std::hypot(
        pf * se_score, pf * pf_cov * mean_score);
  }
  return out;
}

}  // namespace

void SubsetConfig::validate() const {
  if (samples_per_level < 2)
    throw std::invalid_argument("subset: samples_per_level must be >= 2");
  if (!(level_probability > 0.0 && level_probability < 1.0))
    throw std::invalid_argument("subset: level_probability must lie in (0, 1)");
  const double nc = samples_per_level * level_probability;
  if (std::abs(nc - std::round(nc)) > 1e-9 || std::round(nc) < 2.0)
    throw std::invalid_argument(
        "subset: samples_per_level * level_probability must be an integer >= 2");
  const int chains_n = static_cast<int>(std::round(nc));
  if (samples_per_level % chains_n != 0)
    throw std::invalid_argument(
        "subset: samples_per_level must be divisible by the chain count");
  if (!(proposal_spread > 0.0))
    throw std::invalid_argument("subset: proposal_spread must be positive");
  if (max_levels < 1) throw std::invalid_argument("subset: max_levels must be >= 1");
}

int SubsetConfig::chains() const {
  return static_cast<int>(std::round(samples_per_level * level_probability));
}

int SubsetConfig::steps_per_chain() const { return samples_per_level / chains(); }

double generalized_beta(double pf) {
  if (!(pf > 0.0 && pf < 1.0))
    throw std::domain_error("generalized_beta: pf must lie in (0, 1)");
  return -normal_quantile(pf);
}

SubsetResult subset_simulate(const LimitState& limit_state,
                             const RandomVectorSpec& spec,
                             const DesignVector& design, const SubsetConfig& config,
                             bool with_sensitivities,
                             const BatchLimitState& batch_limit_state) {
  config.validate();
  const auto stoch = spec.stochastic_indices();
  const int nd = static_cast<int>(stoch.size());
  if (nd == 0)
    throw std::invalid_argument("subset: spec has no stochastic dimension");

  const int N = config.samples_per_level;
  const double p0 = config.level_probability;
  const int n_chains = config.chains();
  const int steps = config.steps_per_chain();

  SubsetResult result;
  Eigen::MatrixXd u(N, nd);
  Eigen::VectorXd g(N);
  Eigen::MatrixXd x_phys(N, spec.dim());

  const auto check_finite = [](double value, int row) {
    if (!std::isfinite(value))
      throw std::invalid_argument("subset: non-finite limit state value at sample " +
                                  std::to_string(row));
    return value;
  };
  // Evaluate g on the rows of a block of physical points.
  const auto eval_block = [&](const Eigen::MatrixXd& x) {
    Eigen::VectorXd values;
    if (batch_limit_state) {
      values = batch_limit_state(x);
    } else {
      values.resize(x.rows());
      for (int i = 0; i < x.rows(); ++i) values[i] = limit_state(x.row(i).transpose());
    }
    for (int i = 0; i < values.size(); ++i) check_finite(values[i], i);
    return values;
  };

  // Level 0: crude Monte Carlo.
  for (int i = 0; i < N; ++i) {
    RngStream rng(derive_seed(config.seed, "subset-mc", static_cast<uint64_t>(i)));
    for (int k = 0; k < nd; ++k) u(i, k) = rng.normal();
    x_phys.row(i) =
        physical_from_reduced(spec, design, u.row(i).transpose()).transpose();
  }
  g = eval_block(x_phys);
  result.calls = N;
  result.levels = 1;

  std::vector<int> order(static_cast<size_t>(N));
  double log_pf_prefix = 0.0;
  std::vector<double> level_cond_p;

  for (;;) {
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b) { return g[a] < g[b]; });
    const double threshold =
        0.5 * (g[order[static_cast<size_t>(n_chains - 1)]] +
               g[order[static_cast<size_t>(n_chains)]]);

    if (threshold <= 0.0) {
      const double n_fail =
          static_cast<double>(std::count_if(g.begin(), g.end(),
                                            [](double v) { return v <= 0.0; }));
      const double p_last = n_fail / N;
      result.thresholds.push_back(std::min(threshold, 0.0));
      result.pf = std::exp(log_pf_prefix) * p_last;
      level_cond_p.push_back(p_last);
      break;
    }
    if (result.levels >= config.max_levels) {
      result.thresholds.push_back(threshold);
      result.pf = std::exp(log_pf_prefix) * p0;  // upper-bound style partial
      result.beta = result.pf > 0.0 && result.pf < 1.0
                        ? generalized_beta(result.pf) : kInf;
      throw PfFloorError("subset: failure threshold not reached within " +
                             std::to_string(config.max_levels) + " levels",
                         result);
    }

    result.thresholds.push_back(threshold);
    log_pf_prefix += std::log(p0);
    level_cond_p.push_back(p0);

    // Seeds: the n_chains samples with the smallest g values. Chains advance
    // synchronously so candidate blocks can be evaluated together; each
    // chain consumes its own substream exactly as a serial walk would.
    Eigen::MatrixXd state_u(n_chains, nd);
    Eigen::VectorXd state_g(n_chains);
    Eigen::MatrixXd state_x(n_chains, spec.dim());
    std::vector<RngStream> chain_rng;
    chain_rng.reserve(static_cast<size_t>(n_chains));
    for (int c = 0; c < n_chains; ++c) {
      state_u.row(c) = u.row(order[static_cast<size_t>(c)]);
      state_g[c] = g[order[static_cast<size_t>(c)]];
      state_x.row(c) = x_phys.row(order[static_cast<size_t>(c)]);
      chain_rng.emplace_back(derive_seed(config.seed, "subset-chain",
                                         static_cast<uint64_t>(result.levels),
                                         static_cast<uint64_t>(c)));
    }

    Eigen::MatrixXd new_u(N, nd);
    Eigen::VectorXd new_g(N);
    Eigen::MatrixXd new_x(N, spec.dim());
    Eigen::MatrixXd cand_u(n_chains, nd);
    Eigen::MatrixXd cand_x(n_chains, spec.dim());
    for (int t = 0; t < steps; ++t) {
      for (int c = 0; c < n_chains; ++c) {
        RngStream& rng = chain_rng[static_cast<size_t>(c)];
        for (int k = 0; k < nd; ++k) {
          const double current = state_u(c, k);
          const double prop =
              current + config.proposal_spread * (2.0 * rng.uniform01() - 1.0);
          const double ratio = std::exp(0.5 * (current * current - prop * prop));
          cand_u(c, k) = (rng.uniform01() <= ratio) ? prop : current;
        }
        cand_x.row(c) =
            physical_from_reduced(spec, design, cand_u.row(c).transpose())
                .transpose();
      }
      const Eigen::VectorXd cand_g = eval_block(cand_x);
      result.calls += n_chains;
      for (int c = 0; c < n_chains; ++c) {
        if (cand_g[c] <= threshold) {
          state_u.row(c) = cand_u.row(c);
          state_g[c] = cand_g[c];
          state_x.row(c) = cand_x.row(c);
        }
        const int row = c * steps + t;
        new_u.row(row) = state_u.row(c);
        new_g[row] = state_g[c];
        new_x.row(row) = state_x.row(c);
      }
    }
    u = std::move(new_u);
    g = std::move(new_g);
    x_phys = std::move(new_x);
    ++result.levels;
  }

  // Independent-chain approximation of the estimator scatter.
  double cov2 = 0.0;
  for (double p : level_cond_p)
    if (p > 0.0) cov2 += (1.0 - p) / (p * N);
  result.cov = std::sqrt(cov2);
  if (result.pf <= 0.0) {
    result.thresholds.pop_back();
    throw PfFloorError("subset: zero failure frequency at the final level", result);
  }
  result.beta = result.pf < 1.0 ? generalized_beta(result.pf) : -kInf;

  if (with_sensitivities)
    result.sensitivities =
        score_sensitivities(x_phys, g, spec, design, result.pf, result.cov);
  else
    result.sensitivities.assign(static_cast<size_t>(design.dim()), {});
  return result;
}

}  // namespace relopt
