#include "relopt/rbdo.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "relopt/math.hpp"
#include "relopt/rng.hpp"
#include "relopt/sampling.hpp"

namespace relopt {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

Eigen::VectorXd finite_difference(const std::function<double(const Eigen::VectorXd&)>& f,
                                  const Eigen::VectorXd& theta) {
  Eigen::VectorXd grad(theta.size());
  for (int j = 0; j < theta.size(); ++j) {
    const double h = 1e-6 * std::max(1.0, std::abs(theta[j]));
    Eigen::VectorXd plus = theta, minus = theta;
    plus[j] += h;
    minus[j] -= h;
    grad[j] = (f(plus) - f(minus)) / (2.0 * h);
  }
  return grad;
}

// beta-constraint gradient via the chain rule d beta / d theta =
// -(d Pf / d theta) / phi(Phi^{-1}(Pf)), clipped at estimator floors.
Eigen::VectorXd beta_constraint_gradient(const SubsetResult& result, int design_dim) {
  Eigen::VectorXd grad = Eigen::VectorXd::Zero(design_dim);
  const double density = normal_pdf(result.beta);
  if (!(density > 1e-300) || !std::isfinite(result.beta)) return grad;
  for (int j = 0; j < design_dim; ++j)
    grad[j] = result.sensitivities[static_cast<size_t>(j)].value / density;
  return grad;
}

struct CountingLimitStates {
  const std::vector<LimitState>* raw;
  std::vector<long long> calls;

  explicit CountingLimitStates(const std::vector<LimitState>& ls)
      : raw(&ls), calls(ls.size(), 0) {}

  std::vector<LimitState> wrapped() {
    std::vector<LimitState> out;
    for (size_t l = 0; l < raw->size(); ++l) {
      out.push_back([this, l](const Eigen::VectorXd& x) {
        ++calls[l];
        return (*raw)[l](x);
      });
    }
    return out;
  }
};

// The optimizer runs on design variables scaled by their initial magnitude
// (components starting at zero keep unit scale), so that the b^k step table
// covers useful moves for any physical units.
struct DesignScaling {
  Eigen::VectorXd scale;

  explicit DesignScaling(const Eigen::VectorXd& initial) {
    scale = initial.cwiseAbs();
    for (int j = 0; j < scale.size(); ++j)
      if (scale[j] == 0.0) scale[j] = 1.0;
  }
  Eigen::VectorXd to_raw(const Eigen::VectorXd& eta) const {
    return eta.cwiseProduct(scale);
  }
  Eigen::VectorXd to_scaled(const Eigen::VectorXd& theta) const {
    return theta.cwiseQuotient(scale);
  }
  Eigen::VectorXd gradient_to_scaled(const Eigen::VectorXd& grad_theta) const {
    return grad_theta.cwiseProduct(scale);
  }
};

}  // namespace

void RbdoProblem::validate() const {
  if (!cost) throw std::invalid_argument("rbdo: cost function required");
  if (limit_states.empty()) throw std::invalid_argument("rbdo: no limit states");
  spec.validate(design.dim());
  design.validate();
  if (beta_targets.empty())
    throw std::invalid_argument("rbdo: beta target required");
  for (double b : beta_targets)
    if (!(b > 0.0)) throw std::invalid_argument("rbdo: beta targets must be positive");
  if (mode == ReliabilityConstraintMode::SystemMin && beta_targets.size() != 1)
    throw std::invalid_argument("rbdo: system mode takes a single beta target");
  if (mode == ReliabilityConstraintMode::PerComponent &&
      beta_targets.size() != limit_states.size())
    throw std::invalid_argument("rbdo: one beta target per limit state required");
  if (!(epsilon_pf0 > 0.0))
    throw std::invalid_argument("rbdo: epsilon_pf0 must be positive");
  if (initial_doe_size < 2 || enrichment_batch < 1)
    throw std::invalid_argument("rbdo: DOE sizes must be positive");
}

int RbdoProblem::reliability_constraint_count() const {
  return mode == ReliabilityConstraintMode::SystemMin
             ? 1
             : static_cast<int>(limit_states.size());
}

double RbdoProblem::cost_at(const Eigen::VectorXd& theta) const {
  DesignVector d = design;
  d.values = theta;
  return cost(spec.mean_vector(d));
}

Eigen::VectorXd RbdoProblem::cost_gradient_at(const Eigen::VectorXd& theta) const {
  if (cost_gradient) return cost_gradient(theta);
  return finite_difference([this](const Eigen::VectorXd& t) { return cost_at(t); },
                           theta);
}

DesignVector ddo_solve(const RbdoProblem& problem, DriverResult* trace) {
  problem.validate();

  const auto mean_at = [&](const Eigen::VectorXd& theta) {
    DesignVector d = problem.design;
    d.values = theta;
    return problem.spec.mean_vector(d);
  };

  std::vector<std::function<double(const Eigen::VectorXd&)>> constraint_fns;
  for (const auto& f : problem.deterministic_constraints) constraint_fns.push_back(f);
  for (const auto& g : problem.limit_states)
    constraint_fns.push_back(
        [&, g](const Eigen::VectorXd& theta) { return -g(mean_at(theta)); });

  const DesignScaling scaling(problem.design.values);
  const FullEvaluator evaluate = [&](const Eigen::VectorXd& eta) {
    const Eigen::VectorXd theta = scaling.to_raw(eta);
    PointEval out;
    out.cost = problem.cost_at(theta);
    out.cost_gradient = scaling.gradient_to_scaled(problem.cost_gradient_at(theta));
    for (const auto& f : constraint_fns) {
      ConstraintEval c;
      c.value = f(theta);
      c.gradient = scaling.gradient_to_scaled(finite_difference(f, theta));
      out.constraints.push_back(std::move(c));
    }
    return out;
  };
  const ValueEvaluator values_only = [&](const Eigen::VectorXd& eta) {
    const Eigen::VectorXd theta = scaling.to_raw(eta);
    PointValues out;
    out.cost = problem.cost_at(theta);
    for (const auto& f : constraint_fns) out.constraints.push_back(f(theta));
    return out;
  };
  const Projector project = [&](const Eigen::VectorXd& eta) {
    return scaling.to_scaled(problem.design.project(scaling.to_raw(eta)));
  };

  DriverResult result =
      polak_he_minimize(evaluate, scaling.to_scaled(problem.design.values),
                        problem.optimizer, project, nullptr, values_only);
  result.design = scaling.to_raw(result.design);
  for (auto& record : result.history) record.design = scaling.to_raw(record.design);
  if (trace) *trace = result;
  DesignVector out = problem.design;
  out.values = result.design;
  return out;
}

RbdoHistory rbdo_solve(const RbdoProblem& problem) {
  problem.validate();
  RbdoHistory history;

  CountingLimitStates counter(problem.limit_states);
  const std::vector<LimitState> true_g = counter.wrapped();

  // Augmented confidence box and the varying input dimensions.
  SurrogateSet set;
  set.box = augmented_confidence_box(problem.spec, problem.design, problem.box_beta);
  set.dims = problem.spec.augmented_indices();
  const Eigen::VectorXd lo = set.sub_lower();
  const Eigen::VectorXd hi = set.sub_upper();

  // Initial space-filling DOE shared by every limit state.
  RngStream doe_rng(derive_seed(problem.seed, "initial-doe"));
  const Eigen::MatrixXd doe_inputs =
      latin_hypercube(lo, hi, problem.initial_doe_size, doe_rng);
  DesignVector design = problem.design;
  const auto embed = [&](const Eigen::VectorXd& sub) {
    Eigen::VectorXd x = problem.spec.mean_vector(design);
    for (size_t d = 0; d < set.dims.size(); ++d)
      x[set.dims[d]] = sub[static_cast<Eigen::Index>(d)];
    return x;
  };

  KrigingFitOptions fit_options;
  fit_options.threads = problem.threads;
  for (size_t l = 0; l < true_g.size(); ++l) {
    DesignOfExperiments doe;
    doe.inputs = doe_inputs;
    doe.outputs.resize(doe_inputs.rows());
    for (int i = 0; i < doe_inputs.rows(); ++i)
      doe.outputs[i] = true_g[l](embed(doe_inputs.row(i).transpose()));
    fit_options.seed = derive_seed(problem.seed, "initial-fit", l);
    set.models.push_back(KrigingModel::fit(doe, fit_options));
  }

  RefineOptions refine_options;
  refine_options.margin_k = problem.margin_k;
  refine_options.candidate_count = problem.candidate_count;
  refine_options.cluster_count = problem.enrichment_batch;
  refine_options.epsilon_pf0 = problem.epsilon_pf0;
  refine_options.subset = problem.subset_inner;
  refine_options.fit_threads = problem.threads;

  const int n_rel = problem.reliability_constraint_count();
  const int n_design = problem.design.dim();
  const DesignScaling scaling(problem.design.values);
  Eigen::VectorXd theta = problem.design.values;
  int start_k = problem.optimizer.k_min;
  double current_spread = kInf;
  std::vector<double> noise_slack(static_cast<size_t>(n_rel), 0.0);

  // Reliability constraints (beta_0 - beta <= 0) on the surrogate means,
  // evaluated by subset simulation under common random numbers per outer
  // iteration.
  const auto reliability_eval = [&](const Eigen::VectorXd& t, uint64_t seed,
                                    bool with_gradients, PointEval* full,
                                    PointValues* values) {
    DesignVector at = problem.design;
    at.values = t;
    std::vector<KrigingSurface> surfs = set.surfaces();
    SubsetConfig cfg = problem.subset_inner;
    cfg.seed = seed;

    const auto one_constraint = [&](const std::vector<const GaussianSurface*>& group,
                                    double beta_target, int rel_index) {
      double beta_hat, cov;
      SubsetResult res;
      try {
        res = subset_simulate(shifted_min_limit_state(group, 0.0), problem.spec, at,
                              cfg, with_gradients,
                              shifted_min_limit_state_batch(group, 0.0));
        beta_hat = res.beta;
        cov = res.cov;
      } catch (const PfFloorError& floor) {
        res = floor.partial();
        res.sensitivities.assign(static_cast<size_t>(n_design), {});
        beta_hat = res.pf > 0.0 && res.pf < 1.0 ? generalized_beta(res.pf) : 8.5;
        cov = res.cov;
      }
      if (full) {
        ConstraintEval c;
        c.value = beta_target - beta_hat;
        c.gradient = beta_constraint_gradient(res, n_design);
        full->constraints.push_back(std::move(c));
      }
      if (values) values->constraints.push_back(beta_target - beta_hat);
      if (rel_index >= 0)
        noise_slack[static_cast<size_t>(rel_index)] =
            2.0 * std::abs(beta_hat) * cov;
    };

    if (problem.mode == ReliabilityConstraintMode::SystemMin) {
      std::vector<const GaussianSurface*> group;
      for (const auto& s : surfs) group.push_back(&s);
      one_constraint(group, problem.beta_targets[0], full ? 0 : -1);
    } else {
      for (size_t l = 0; l < surfs.size(); ++l)
        one_constraint({&surfs[l]}, problem.beta_targets[l],
                       full ? static_cast<int>(l) : -1);
    }
  };

  // Gradients are expressed in the scaled design coordinates.
  const auto evaluate_full = [&](const Eigen::VectorXd& t, uint64_t seed) {
    PointEval out;
    out.cost = problem.cost_at(t);
    out.cost_gradient = scaling.gradient_to_scaled(problem.cost_gradient_at(t));
    reliability_eval(t, seed, true, &out, nullptr);
    for (auto& c : out.constraints) c.gradient = scaling.gradient_to_scaled(c.gradient);
    for (const auto& f : problem.deterministic_constraints) {
      ConstraintEval c;
      c.value = f(t);
      c.gradient = scaling.gradient_to_scaled(finite_difference(f, t));
      out.constraints.push_back(std::move(c));
    }
    return out;
  };
  const auto evaluate_values = [&](const Eigen::VectorXd& t, uint64_t seed) {
    PointValues out;
    out.cost = problem.cost_at(t);
    reliability_eval(t, seed, false, nullptr, &out);
    for (const auto& f : problem.deterministic_constraints)
      out.constraints.push_back(f(t));
    return out;
  };

  const auto ensure_accuracy = [&](int outer_iter) {
    DesignVector at = problem.design;
    at.values = theta;
    refine_options.budget_per_model.clear();
    for (size_t l = 0; l < true_g.size(); ++l)
      refine_options.budget_per_model.push_back(
          std::max<long long>(0, problem.refine_budget - counter.calls[l]));
    refine_options.seed = derive_seed(problem.seed, "refine", outer_iter);
    refine_options.refit = fit_options;
    RefinementState st = enrich(set, true_g, problem.spec, at, refine_options);
    for (auto& r : st.rounds) history.refinement_log.push_back(r);
    current_spread = st.log10_spread;
    return st;
  };

  bool converged = false;
  int refinement_epoch = 0;
  int small_moves = 0;
  for (int iter = 0; iter < problem.max_outer_iterations; ++iter) {
    const RefinementState refined = ensure_accuracy(iter);
    if (!refined.converged) {
      history.budget_exhausted = true;
    }
    if (refined.calls_used > 0) {
      // New surrogate data: new common-random-number realization of the
      // inner sample-average problem.
      ++refinement_epoch;
      small_moves = 0;
    }

    const uint64_t inner_seed = derive_seed(problem.seed, "inner", refinement_epoch);
    const PointEval eval = evaluate_full(theta, inner_seed);

    Eigen::VectorXd delta;
    delta = polak_he_direction(eval.cost_gradient, eval.constraints,
                               problem.optimizer.gamma);

    RbdoIteration record;
    record.iteration = iter;
    record.design = theta;
    record.design_normalized = scaling.to_scaled(theta);
    record.cost = eval.cost;
    for (int j = 0; j < n_rel; ++j)
      record.beta.push_back(problem.beta_targets[problem.mode ==
                                    ReliabilityConstraintMode::SystemMin
                                ? 0
                                : static_cast<size_t>(j)] -
                            eval.constraints[static_cast<size_t>(j)].value);
    record.direction_norm = delta.norm();
    record.log10_spread = current_spread;
    record.refined = refined.calls_used > 0;
    record.true_calls = counter.calls;

    bool feasible = true;
    for (size_t j = 0; j < eval.constraints.size(); ++j) {
      const double tol = j < static_cast<size_t>(n_rel)
                             ? noise_slack[j]
                             : problem.optimizer.feasibility_tolerance;
      if (eval.constraints[j].value > tol) feasible = false;
    }

    const bool stationary =
        record.direction_norm <= problem.optimizer.direction_tolerance ||
        small_moves >= problem.movement_window;
    if (stationary && feasible && current_spread <= problem.epsilon_pf0) {
      record.step_exponent = -1;
      history.iterations.push_back(std::move(record));
      converged = true;
      break;
    }
    if (history.budget_exhausted) {
      record.step_exponent = -1;
      history.iterations.push_back(std::move(record));
      break;
    }

    PointValues at_theta{eval.cost, {}};
    for (const auto& c : eval.constraints) at_theta.constraints.push_back(c.value);
    const LineSearchResult ls = goldstein_armijo_step(
        scaling.to_scaled(theta), at_theta, delta, start_k,
        [&](const Eigen::VectorXd& eta) {
          return evaluate_values(scaling.to_raw(eta), inner_seed);
        },
        problem.optimizer,
        [&](const Eigen::VectorXd& eta) {
          return scaling.to_scaled(problem.design.project(scaling.to_raw(eta)));
        });

    record.step_exponent = ls.accepted ? ls.accepted_k : -1;
    if (ls.projected) ++history.projections;
    history.iterations.push_back(std::move(record));

    if (!ls.accepted) {
      converged = feasible && current_spread <= problem.epsilon_pf0;
      break;
    }
    start_k = ls.next_start_k;
    const double movement = (ls.design - scaling.to_scaled(theta)).norm();
    small_moves = movement <= problem.movement_tolerance ? small_moves + 1 : 0;
    theta = scaling.to_raw(ls.design);
  }

  history.converged = converged;
  history.final_design = problem.design;
  history.final_design.values = theta;
  history.true_calls = counter.calls;
  history.surrogates = std::move(set);
  return history;
}

std::vector<SubsetResult> verify_design(const RbdoProblem& problem,
                                        const DesignVector& design) {
  problem.validate();
  design.validate();
  SubsetConfig cfg = problem.subset_verify;
  cfg.seed = derive_seed(problem.seed, "verify");

  std::vector<SubsetResult> results;
  if (problem.mode == ReliabilityConstraintMode::SystemMin) {
    const auto& ls = problem.limit_states;
    const LimitState system = [&ls](const Eigen::VectorXd& x) {
      double g = kInf;
      for (const auto& f : ls) g = std::min(g, f(x));
      return g;
    };
    results.push_back(subset_simulate(system, problem.spec, design, cfg, true));
  } else {
    for (const auto& g : problem.limit_states)
      results.push_back(subset_simulate(g, problem.spec, design, cfg, true));
  }
  return results;
}

}  // namespace relopt
