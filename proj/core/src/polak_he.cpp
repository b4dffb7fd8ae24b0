#include "relopt/polak_he.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace relopt {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double violation(const std::vector<double>& constraints) {
  double v = 0.0;
  for (double c : constraints) v = std::max(v, c);
  return v;
}

// Max over the constraint values; -inf for an unconstrained problem so the
// merit reduces to the plain Armijo cost test.
double worst_constraint(const std::vector<double>& constraints) {
  double v = -kInf;
  for (double c : constraints) v = std::max(v, c);
  return v;
}

}  // namespace

// Iterated product: exact in the last place for decimal bases like 0.6
// (std::pow is not correctly rounded) and identical on every platform.
double step_factor(double base, int k) {
  double s = 1.0;
  for (int i = 0; i < k; ++i) s *= base;
  return s;
}

namespace {

}  // namespace

Eigen::VectorXd polak_he_direction(const Eigen::VectorXd& cost_gradient,
                                   const std::vector<ConstraintEval>& constraints,
                                   double gamma, Eigen::VectorXd* multipliers) {
  const int n = static_cast<int>(cost_gradient.size());
  const int d = 1 + static_cast<int>(constraints.size());
  if (!cost_gradient.allFinite())
    throw std::invalid_argument("polak_he_direction: non-finite cost gradient");
  if (d > 16)
    throw std::invalid_argument("polak_he_direction: too many constraints for the "
                                "combinatorial QP");

  Eigen::MatrixXd grads(n, d);
  grads.col(0) = cost_gradient;
  Eigen::VectorXd q = Eigen::VectorXd::Zero(d);
  for (int j = 1; j < d; ++j) {
    const auto& c = constraints[static_cast<size_t>(j - 1)];
    if (!c.gradient.allFinite() || c.gradient.size() != n)
      throw std::invalid_argument("polak_he_direction: bad constraint gradient");
    grads.col(j) = c.gradient;
    // Signed slack term: violated constraints attract weight, strictly
    // feasible ones are penalized in proportion to their slack and drop out
    // of the combination away from the boundary.
    q[j] = -gamma * c.value;
  }
  const Eigen::MatrixXd gram = grads.transpose() * grads;

  // Exact active-set solve by support enumeration: the simplex dimension is
  // 1 + n_constraints, so every support set can be checked directly.
  double best_obj = kInf;
  Eigen::VectorXd best_mu;
  for (unsigned mask = 1; mask < (1u << d); ++mask) {
    std::vector<int> support;
    for (int j = 0; j < d; ++j)
      if (mask & (1u << j)) support.push_back(j);
    const int s = static_cast<int>(support.size());

    // KKT system on the support: [G_SS 1; 1' 0][mu; lam] = [-q_S; 1].
    Eigen::MatrixXd kkt = Eigen::MatrixXd::Zero(s + 1, s + 1);
    Eigen::VectorXd rhs(s + 1);
    for (int a = 0; a < s; ++a) {
      for (int b = 0; b < s; ++b) kkt(a, b) = gram(support[a], support[b]);
      kkt(a, s) = 1.0;
      kkt(s, a) = 1.0;
      rhs[a] = -q[support[a]];
    }
    rhs[s] = 1.0;
    Eigen::FullPivLU<Eigen::MatrixXd> lu(kkt);
    if (!lu.isInvertible()) continue;
    const Eigen::VectorXd sol = lu.solve(rhs);

    Eigen::VectorXd mu = Eigen::VectorXd::Zero(d);
    bool ok = true;
    for (int a = 0; a < s; ++a) {
      if (sol[a] < -1e-12) { ok = false; break; }
      mu[support[a]] = std::max(sol[a], 0.0);
    }
    if (!ok) continue;
    const double lambda = sol[s];
    // Multiplier sign condition for the excluded coordinates.
    const Eigen::VectorXd kkt_grad = gram * mu + q;
    for (int j = 0; j < d && ok; ++j)
      if (!(mask & (1u << j)) && kkt_grad[j] + lambda < -1e-9) ok = false;
    if (!ok) continue;

    const double obj = 0.5 * mu.dot(gram * mu) + q.dot(mu);
    if (obj < best_obj - 1e-15) {
      best_obj = obj;
      best_mu = mu;
    }
  }
  if (best_mu.size() == 0)
    throw std::runtime_error("polak_he_direction: QP enumeration found no KKT point");
  if (multipliers) *multipliers = best_mu;
  return -(grads * best_mu);
}

LineSearchResult goldstein_armijo_step(const Eigen::VectorXd& theta,
                                       const PointValues& at_theta,
                                       const Eigen::VectorXd& direction, int start_k,
                                       const ValueEvaluator& evaluate,
                                       const PolakHeOptions& options,
                                       const Projector& project) {
  if (direction.norm() == 0.0)
    throw std::invalid_argument("goldstein_armijo_step: zero direction");
  LineSearchResult out;
  out.design = theta;
  out.values = at_theta;

  const double v_i = violation(at_theta.constraints);
  const double decrease = direction.squaredNorm();
  start_k = std::clamp(start_k, options.k_min, options.k_max);

  for (int k = start_k; k <= options.k_max; ++k) {
    out.probed.push_back(k);
    const double step = step_factor(options.base, k);
    Eigen::VectorXd trial = theta + step * direction;
    if (project) {
      Eigen::VectorXd projected = project(trial);
      if ((projected - trial).cwiseAbs().maxCoeff() > 0.0) out.projected = true;
      trial = projected;
    }
    const PointValues values = evaluate(trial);
    const double merit = std::max(values.cost - at_theta.cost - options.gamma * v_i,
                                  worst_constraint(values.constraints));
    if (merit <= v_i - options.alpha * step * decrease) {
      out.design = trial;
      out.values = values;
      out.accepted = true;
      out.accepted_k = k;
      // Warm restart both ways: an immediate success probes a bolder step
      // next time, otherwise restart from the accepted exponent.
      out.next_start_k = (k == start_k) ? std::max(k - 1, options.k_min) : k;
      return out;
    }
  }
  out.accepted = false;
  out.next_start_k = start_k;
  return out;
}

DriverResult polak_he_minimize(const FullEvaluator& evaluate,
                               const Eigen::VectorXd& theta0,
                               const PolakHeOptions& options,
                               const Projector& project,
                               const std::vector<double>* feasibility_tol,
                               const ValueEvaluator& values_only) {
  DriverResult result;
  Eigen::VectorXd theta = project ? project(theta0) : theta0;
  int start_k = options.k_min;

  const auto feasible = [&](const std::vector<double>& constraints) {
    for (size_t j = 0; j < constraints.size(); ++j) {
      const double tol = feasibility_tol && j < feasibility_tol->size()
                             ? (*feasibility_tol)[j]
                             : options.feasibility_tolerance;
      if (constraints[j] > tol) return false;
    }
    return true;
  };

  PointEval eval = evaluate(theta);
  for (int iter = 0; iter < options.max_iterations; ++iter) {
    const Eigen::VectorXd delta =
        polak_he_direction(eval.cost_gradient, eval.constraints, options.gamma);

    IterationRecord record;
    record.design = theta;
    record.cost = eval.cost;
    for (const auto& c : eval.constraints) record.constraints.push_back(c.value);
    record.direction_norm = delta.norm();

    if (record.direction_norm <= options.direction_tolerance &&
        feasible(record.constraints)) {
      result.history.push_back(std::move(record));
      result.converged = true;
      break;
    }
    if (record.direction_norm == 0.0) {
      // Stationary but infeasible: no descent direction available.
      result.history.push_back(std::move(record));
      result.stalled = true;
      break;
    }

    PointValues values{eval.cost, record.constraints};
    const ValueEvaluator value_eval =
        values_only ? values_only : ValueEvaluator([&](const Eigen::VectorXd& t) {
          const PointEval full = evaluate(t);
          PointValues v{full.cost, {}};
          for (const auto& c : full.constraints) v.constraints.push_back(c.value);
          return v;
        });
    const LineSearchResult ls = goldstein_armijo_step(
        theta, values, delta, start_k, value_eval, options, project);
    record.step_exponent = ls.accepted ? ls.accepted_k : -1;
    record.probed = ls.probed;
    result.history.push_back(std::move(record));

    if (!ls.accepted) {
      result.stalled = true;
      result.converged = feasible(result.history.back().constraints);
      break;
    }
    start_k = ls.next_start_k;
    theta = ls.design;
    eval = evaluate(theta);
    ++result.iterations;
  }

  result.design = theta;
  result.at_design = std::move(eval);
  return result;
}

Eigen::VectorXd normalize_design(const Eigen::VectorXd& design,
                                 const Eigen::VectorXd& initial) {
  if (design.size() != initial.size())
    throw std::invalid_argument("normalize_design: size mismatch");
  if ((initial.array() == 0.0).any())
    throw std::domain_error("normalize_design: initial component is zero");
  return design.cwiseQuotient(initial);
}

Eigen::VectorXd denormalize_design(const Eigen::VectorXd& normalized,
                                   const Eigen::VectorXd& initial) {
  if (normalized.size() != initial.size())
    throw std::invalid_argument("denormalize_design: size mismatch");
  if ((initial.array() == 0.0).any())
    throw std::domain_error("denormalize_design: initial component is zero");
  return normalized.cwiseProduct(initial);
}

}  // namespace relopt
