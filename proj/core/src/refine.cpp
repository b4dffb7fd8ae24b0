#include "relopt/refine.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "relopt/math.hpp"
#include "relopt/rng.hpp"

namespace relopt {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double margin_log_probability_of(double mean, double sd, double k) {
  if (sd <= 0.0) return mean == 0.0 ? 0.0 : -kInf;
  const double t = mean / sd;
  // P = Phi(k - t) - Phi(-k - t), computed via the stable interval routine.
  return log_normal_cdf_interval(-k - t, k - t);
}

}  // namespace

double default_margin_k() { return normal_quantile(0.975); }

double margin_probability(const GaussianSurface& surface, const Eigen::VectorXd& x,
                          double k) {
  if (!(k > 0.0)) throw std::domain_error("margin_probability: k must be positive");
  double mean = 0.0, sd = 0.0;
  surface.eval(x, mean, sd);
  if (sd <= 0.0) return mean == 0.0 ? 1.0 : 0.0;
  const double t = mean / sd;
  if (std::abs(t) < 30.0) return normal_cdf(k - t) - normal_cdf(-k - t);
  return std::exp(margin_log_probability_of(mean, sd, k));
}

double margin_log_probability(const GaussianSurface& surface, const Eigen::VectorXd& x,
                              double k) {
  if (!(k > 0.0)) throw std::domain_error("margin_probability: k must be positive");
  double mean = 0.0, sd = 0.0;
  surface.eval(x, mean, sd);
  return margin_log_probability_of(mean, sd, k);
}

double refinement_log_density(const GaussianSurface& surface, const Eigen::VectorXd& x,
                              double k, const ConfidenceBox& box) {
  if (!box.contains(x)) return -kInf;
  return margin_log_probability(surface, x, k);
}

Eigen::MatrixXd slice_sample(
    const std::function<double(const Eigen::VectorXd&)>& log_density,
    const Eigen::VectorXd& lower, const Eigen::VectorXd& upper, int count,
    uint64_t seed, const SliceOptions& options) {
  const int n = static_cast<int>(lower.size());
  if (upper.size() != n) throw std::invalid_argument("slice_sample: bound size mismatch");
  if (count < 1) throw std::invalid_argument("slice_sample: count must be >= 1");

  RngStream rng(derive_seed(seed, "slice-chain"));

  // Find a finite-density start by rejection from the uniform box law.
  Eigen::VectorXd state(n);
  double state_logp = -kInf;
  bool found = false;
  for (int trial = 0; trial < options.start_trials; ++trial) {
    for (int j = 0; j < n; ++j) state[j] = rng.uniform(lower[j], upper[j]);
    state_logp = log_density(state);
    if (std::isfinite(state_logp)) {
      found = true;
      break;
    }
  }
  if (!found)
    throw EmptyMarginError("slice_sample: no finite-density start in " +
                           std::to_string(options.start_trials) + " trials");

  const int burn_in = options.burn_in_updates > 0 ? options.burn_in_updates : 100 * n;
  const int thin = options.thin_updates > 0 ? options.thin_updates : n;
  Eigen::VectorXd width =
      options.initial_width_fraction * (upper - lower).cwiseMax(1e-300);

  Eigen::MatrixXd samples(count, n);
  int kept = 0, updates = 0, coord = 0;
  Eigen::VectorXd probe = state;

  while (kept < count) {
    // One univariate slice update of the current coordinate.
    const int j = coord;
    coord = (coord + 1) % n;
    const double slice_level = state_logp - (-std::log(rng.uniform01()));

    double lo = state[j] - width[j] * rng.uniform01();
    double hi = lo + width[j];
    lo = std::max(lo, lower[j]);
    hi = std::min(hi, upper[j]);

    const auto logp_at = [&](double v) {
      probe = state;
      probe[j] = v;
      return log_density(probe);
    };
    for (int s = 0; s < options.max_step_out && lo > lower[j]; ++s) {
      if (logp_at(lo) <= slice_level) break;
      lo = std::max(lo - width[j], lower[j]);
    }
    for (int s = 0; s < options.max_step_out && hi < upper[j]; ++s) {
      if (logp_at(hi) <= slice_level) break;
      hi = std::min(hi + width[j], upper[j]);
    }

    // Shrink until acceptance; the interval always contains the current
    // state, so this terminates.
    for (;;) {
      const double v = rng.uniform(lo, hi);
      const double lp = logp_at(v);
      if (lp > slice_level || v == state[j]) {
        state[j] = v;
        state_logp = lp;
        break;
      }
      if (v < state[j]) lo = v; else hi = v;
    }

    ++updates;
    if (updates > burn_in && (updates - burn_in) % thin == 0) {
      samples.row(kept) = state.transpose();
      ++kept;
    }
  }
  return samples;
}

KMeansResult kmeans(const Eigen::MatrixXd& points, int K, uint64_t seed) {
  const int m = static_cast<int>(points.rows());
  const int n = static_cast<int>(points.cols());
  if (K < 1) throw std::domain_error("kmeans: K must be >= 1");

  // Count distinct rows (exact comparison; duplicates arise from rejected
  // MCMC moves).
  std::vector<int> order(static_cast<size_t>(m));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    for (int j = 0; j < n; ++j) {
      if (points(a, j) < points(b, j)) return true;
      if (points(a, j) > points(b, j)) return false;
    }
    return false;
  });
  int distinct = m > 0 ? 1 : 0;
  for (int i = 1; i < m; ++i)
    if ((points.row(order[static_cast<size_t>(i)]) -
         points.row(order[static_cast<size_t>(i - 1)])).cwiseAbs().maxCoeff() > 0.0)
      ++distinct;
  if (K > distinct)
    throw std::domain_error("kmeans: K exceeds the number of distinct points (" +
                            std::to_string(distinct) + ")");

  RngStream rng(derive_seed(seed, "kmeans"));
  KMeansResult result;
  result.centers.resize(K, n);

  // k-means++ seeding: zero-distance points carry zero weight, so all K
  // chosen centers are distinct.
  std::vector<double> dist2(static_cast<size_t>(m), kInf);
  int first = static_cast<int>(rng.below(static_cast<uint64_t>(m)));
  result.centers.row(0) = points.row(first);
  for (int c = 1; c < K; ++c) {
    double total = 0.0;
    for (int i = 0; i < m; ++i) {
      const double d = (points.row(i) - result.centers.row(c - 1)).squaredNorm();
      dist2[static_cast<size_t>(i)] = std::min(dist2[static_cast<size_t>(i)], d);
      total += dist2[static_cast<size_t>(i)];
    }
    double u = rng.uniform01() * total;
    int pick = m - 1;
    for (int i = 0; i < m; ++i) {
      u -= dist2[static_cast<size_t>(i)];
      if (u <= 0.0) {
        pick = i;
        break;
      }
    }
    result.centers.row(c) = points.row(pick);
  }

  result.assignments.assign(static_cast<size_t>(m), -1);
  std::vector<int> counts(static_cast<size_t>(K), 0);
  for (int iter = 0; iter < 100; ++iter) {
    bool changed = false;
    double wcss = 0.0;
    for (int i = 0; i < m; ++i) {
      int best = 0;
      double best_d = kInf;
      for (int c = 0; c < K; ++c) {
        const double d = (points.row(i) - result.centers.row(c)).squaredNorm();
        if (d < best_d) {
          best_d = d;
          best = c;
        }
      }
      wcss += best_d;
      if (result.assignments[static_cast<size_t>(i)] != best) {
        result.assignments[static_cast<size_t>(i)] = best;
        changed = true;
      }
    }
    result.wcss_history.push_back(wcss);
    result.iterations = iter + 1;
    if (!changed) break;

    Eigen::MatrixXd sums = Eigen::MatrixXd::Zero(K, n);
    std::fill(counts.begin(), counts.end(), 0);
    for (int i = 0; i < m; ++i) {
      sums.row(result.assignments[static_cast<size_t>(i)]) += points.row(i);
      ++counts[static_cast<size_t>(result.assignments[static_cast<size_t>(i)])];
    }
    for (int c = 0; c < K; ++c) {
      if (counts[static_cast<size_t>(c)] > 0) {
        result.centers.row(c) = sums.row(c) / counts[static_cast<size_t>(c)];
      } else {
        // Re-seed an empty cluster at the point farthest from its center.
        int far = 0;
        double far_d = -1.0;
        for (int i = 0; i < m; ++i) {
          const double d =
              (points.row(i) -
               result.centers.row(result.assignments[static_cast<size_t>(i)]))
                  .squaredNorm();
          if (d > far_d) {
            far_d = d;
            far = i;
          }
        }
        result.centers.row(c) = points.row(far);
      }
    }
  }
  return result;
}

Eigen::VectorXd SurrogateSet::sub_lower() const {
  Eigen::VectorXd v(static_cast<Eigen::Index>(dims.size()));
  for (size_t k = 0; k < dims.size(); ++k)
    v[static_cast<Eigen::Index>(k)] = box.lower[dims[k]];
  return v;
}

Eigen::VectorXd SurrogateSet::sub_upper() const {
  Eigen::VectorXd v(static_cast<Eigen::Index>(dims.size()));
  for (size_t k = 0; k < dims.size(); ++k)
    v[static_cast<Eigen::Index>(k)] = box.upper[dims[k]];
  return v;
}

std::vector<KrigingSurface> SurrogateSet::surfaces() const {
  std::vector<KrigingSurface> out;
  out.reserve(models.size());
  for (const auto& m : models) out.emplace_back(m, dims);
  return out;
}

BracketingResult bracketing_probabilities(
    const std::vector<const GaussianSurface*>& surfaces,
    const RandomVectorSpec& spec, const DesignVector& design, double k,
    const SubsetConfig& config) {
  if (!(k > 0.0))
    throw std::domain_error("bracketing_probabilities: k must be positive");

  const auto run_three = [&](uint64_t seed) {
    BracketingResult r;
    SubsetConfig cfg = config;
    cfg.seed = seed;
    const double shifts[3] = {+k, 0.0, -k};
    double pf[3] = {0.0, 0.0, 0.0};
    for (int s = 0; s < 3; ++s) {
      const LimitState g = shifted_min_limit_state(surfaces, shifts[s]);
      const BatchLimitState g_batch =
          shifted_min_limit_state_batch(surfaces, shifts[s]);
      try {
        SubsetResult res = subset_simulate(g, spec, design, cfg, false, g_batch);
        pf[s] = res.pf;
        if (s == 1) r.detail_zero = std::move(res);
      } catch (const PfFloorError& floor) {
        pf[s] = 0.0;  // below the estimator floor
        if (s == 1) r.detail_zero = floor.partial();
      }
    }
    r.pf_plus = pf[0];
    r.pf_zero = pf[1];
    r.pf_minus = pf[2];
    return r;
  };

  BracketingResult r = run_three(config.seed);
  const auto ordered = [](const BracketingResult& b) {
    return b.pf_plus <= b.pf_zero && b.pf_zero <= b.pf_minus;
  };
  if (!ordered(r)) {
    r = run_three(derive_seed(config.seed, "bracket-retry"));
    if (!ordered(r)) {
      // Near coincidence the noise can still break the nesting; clamp.
      const double lo = std::min({r.pf_plus, r.pf_zero, r.pf_minus});
      const double hi = std::max({r.pf_plus, r.pf_zero, r.pf_minus});
      r.pf_plus = lo;
      r.pf_minus = hi;
      r.pf_zero = std::min(std::max(r.pf_zero, lo), hi);
      r.ordering_enforced = true;
    }
  }
  r.log10_spread = (r.pf_plus > 0.0 && r.pf_minus > 0.0)
                       ? std::log10(r.pf_minus) - std::log10(r.pf_plus)
                       : kInf;
  if (r.pf_minus <= 0.0) r.log10_spread = kInf;
  return r;
}

RefinementState enrich(SurrogateSet& set,
                       const std::vector<LimitState>& true_limit_states,
                       const RandomVectorSpec& spec, const DesignVector& design,
                       const RefineOptions& options) {
  if (set.models.size() != true_limit_states.size())
    throw std::invalid_argument("enrich: one true limit state per model required");
  const double k = options.margin_k > 0.0 ? options.margin_k : default_margin_k();
  const int n_sub = static_cast<int>(set.dims.size());
  const Eigen::VectorXd lo = set.sub_lower();
  const Eigen::VectorXd hi = set.sub_upper();
  const Eigen::VectorXd span = (hi - lo).cwiseMax(1e-300);

  RefinementState state;

  const auto embed = [&](const Eigen::VectorXd& sub) {
    Eigen::VectorXd x = spec.mean_vector(design);
    for (size_t d = 0; d < set.dims.size(); ++d)
      x[set.dims[d]] = sub[static_cast<Eigen::Index>(d)];
    return x;
  };

  // Common random numbers tie the three shifted analyses within a round; a
  // fresh draw per round keeps one unlucky realization from becoming a
  // persistent stopping floor.
  const auto compute_bracket = [&](int round_index) {
    std::vector<KrigingSurface> surfs = set.surfaces();
    std::vector<const GaussianSurface*> ptrs;
    for (const auto& s : surfs) ptrs.push_back(&s);
    SubsetConfig cfg = options.subset;
    cfg.seed = derive_seed(options.seed, "bracketing",
                           static_cast<uint64_t>(round_index));
    return bracketing_probabilities(ptrs, spec, design, k, cfg);
  };

  BracketingResult bracket = compute_bracket(0);
  state.pf_plus = bracket.pf_plus;
  state.pf_zero = bracket.pf_zero;
  state.pf_minus = bracket.pf_minus;
  state.log10_spread = bracket.log10_spread;
  state.calls_per_model.assign(set.models.size(), 0);
  state.rounds.push_back(
      {0, 0, bracket.pf_plus, bracket.pf_zero, bracket.pf_minus, bracket.log10_spread});

  const auto budget_of = [&](size_t l) {
    return l < options.budget_per_model.size() ? options.budget_per_model[l]
                                               : options.budget;
  };
  const auto under_budget = [&] {
    for (size_t l = 0; l < state.calls_per_model.size(); ++l)
      if (state.calls_per_model[l] < budget_of(l)) return true;
    return false;
  };

  int round = 0;
  bool empty_margin = false;
  while (state.log10_spread > options.epsilon_pf0 && under_budget()) {
    ++round;
    bool any_empty_margin = false;

    for (size_t l = 0; l < set.models.size(); ++l) {
      if (state.calls_per_model[l] >= budget_of(l)) continue;
      const auto log_density = [&](const Eigen::VectorXd& sub) {
        // The surface projects from physical space; candidates already live
        // in the model subspace, so evaluate the model directly.
        double mean = 0.0, variance = 0.0;
        set.models[l].predict(sub, mean, variance);
        bool inside = true;
        for (int j = 0; j < n_sub; ++j)
          if (sub[j] < lo[j] || sub[j] > hi[j]) { inside = false; break; }
        if (!inside) return -kInf;
        const double sd = std::sqrt(std::max(variance, 0.0));
        if (sd <= 0.0) return mean == 0.0 ? 0.0 : -kInf;
        return log_normal_cdf_interval(-k - mean / sd, k - mean / sd);
      };

      Eigen::MatrixXd candidates;
      try {
        candidates = slice_sample(
            log_density, lo, hi, options.candidate_count,
            derive_seed(options.seed, "slice", static_cast<uint64_t>(l),
                        static_cast<uint64_t>(round)),
            options.slice);
      } catch (const EmptyMarginError&) {
        any_empty_margin = true;
        continue;
      }
      state.candidates = candidates;

      // Cluster in box-normalized coordinates; centroids map back exactly.
      Eigen::MatrixXd unit = candidates;
      for (int j = 0; j < n_sub; ++j)
        unit.col(j) = (candidates.col(j).array() - lo[j]) / span[j];
      KMeansResult clusters;
      try {
        clusters = kmeans(unit, options.cluster_count,
                          derive_seed(options.seed, "kmeans",
                                      static_cast<uint64_t>(l),
                                      static_cast<uint64_t>(round)));
      } catch (const std::domain_error&) {
        // Fewer distinct candidates than clusters: use the distinct points.
        std::vector<int> rows;
        for (int i = 0; i < unit.rows(); ++i) {
          bool dup = false;
          for (int r : rows)
            if ((unit.row(i) - unit.row(r)).cwiseAbs().maxCoeff() == 0.0) {
              dup = true;
              break;
            }
          if (!dup) rows.push_back(i);
        }
        clusters.centers.resize(static_cast<int>(rows.size()), n_sub);
        for (size_t i = 0; i < rows.size(); ++i)
          clusters.centers.row(static_cast<int>(i)) = unit.row(rows[i]);
      }
      Eigen::MatrixXd centers(clusters.centers.rows(), n_sub);
      for (int j = 0; j < n_sub; ++j)
        centers.col(j) = lo[j] + clusters.centers.col(j).array() * span[j];

      // Drop centers colliding with existing DOE points or with each other,
      // cap by the remaining budget.
      const double tol = options.dedupe_fraction * (hi - lo).norm();
      std::vector<int> keep;
      for (int c = 0; c < centers.rows(); ++c) {
        bool close = false;
        const auto& doe = set.models[l].doe().inputs;
        for (int i = 0; i < doe.rows() && !close; ++i)
          close = (doe.row(i) - centers.row(c)).norm() < tol;
        for (size_t k2 = 0; k2 < keep.size() && !close; ++k2)
          close = (centers.row(keep[k2]) - centers.row(c)).norm() < tol;
        if (!close) keep.push_back(c);
        if (static_cast<long long>(keep.size()) >=
            budget_of(l) - state.calls_per_model[l])
          break;
      }
      if (keep.empty()) continue;

      DesignOfExperiments doe = set.models[l].doe();
      const int old_m = doe.points();
      doe.inputs.conservativeResize(old_m + static_cast<int>(keep.size()),
                                    Eigen::NoChange);
      doe.outputs.conservativeResize(old_m + static_cast<int>(keep.size()));
      Eigen::MatrixXd kept_centers(static_cast<int>(keep.size()), n_sub);
      for (size_t c = 0; c < keep.size(); ++c) {
        const Eigen::VectorXd sub = centers.row(keep[c]).transpose();
        kept_centers.row(static_cast<int>(c)) = sub.transpose();
        doe.inputs.row(old_m + static_cast<int>(c)) = sub.transpose();
        doe.outputs[old_m + static_cast<int>(c)] = true_limit_states[l](embed(sub));
        ++state.calls_used;
        ++state.calls_per_model[l];
      }
      state.centers = kept_centers;

      KrigingFitOptions refit = options.refit;
      refit.threads = options.fit_threads;
      refit.seed = derive_seed(options.seed, "refit", static_cast<uint64_t>(l),
                               static_cast<uint64_t>(round));
      refit.extra_starts.push_back(set.models[l].lengths());
      // Margin batches cluster along the limit-state band; the contract-grade
      // defect cap would strand the length search there. A cap of 1e-6 of
      // the output scale is still orders below any margin width of interest.
      refit.defect_cap_scale = std::max(refit.defect_cap_scale, 1e-6);
      set.models[l] = KrigingModel::fit(doe, refit);
    }

    bracket = compute_bracket(round);
    state.pf_plus = bracket.pf_plus;
    state.pf_zero = bracket.pf_zero;
    state.pf_minus = bracket.pf_minus;
    state.log10_spread = bracket.log10_spread;
    state.rounds.push_back({round, state.calls_used, bracket.pf_plus,
                            bracket.pf_zero, bracket.pf_minus,
                            bracket.log10_spread});
    if (any_empty_margin) {
      // No candidate falls in the margin any more; treat as converged with
      // the spread recomputed above as confirmation.
      empty_margin = true;
      break;
    }
  }

  state.converged = state.log10_spread <= options.epsilon_pf0 || empty_margin;
  return state;
}

}  // namespace relopt
