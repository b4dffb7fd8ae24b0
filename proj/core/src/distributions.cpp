#include "relopt/distributions.hpp"

#include <cmath>
#include <limits>
#include <set>
#include <stdexcept>

#include "relopt/math.hpp"
#include "relopt/rng.hpp"

namespace relopt {

namespace {

constexpr double kSqrt3 = 1.7320508075688772935;

double uniform_half_width(double std_dev) { return kSqrt3 * std_dev; }

}  // namespace

std::string family_name(MarginalFamily family) {
  switch (family) {
    case MarginalFamily::Normal: return "normal";
    case MarginalFamily::Lognormal: return "lognormal";
    case MarginalFamily::Uniform: return "uniform";
    case MarginalFamily::Deterministic: return "deterministic";
  }
  return "?";
}

MarginalFamily family_from_name(const std::string& name) {
  if (name == "normal") return MarginalFamily::Normal;
  if (name == "lognormal") return MarginalFamily::Lognormal;
  if (name == "uniform") return MarginalFamily::Uniform;
  if (name == "deterministic") return MarginalFamily::Deterministic;
  throw std::invalid_argument("unknown marginal family: " + name);
}

void MarginalSpec::validate() const {
  if (family == MarginalFamily::Deterministic) {
    if (std_dev != 0.0)
      throw std::invalid_argument("marginal '" + name +
                                  "': deterministic family requires std_dev = 0");
    return;
  }
  if (!(std_dev > 0.0))
    throw std::invalid_argument("marginal '" + name +
                                "': stochastic family requires std_dev > 0");
  if (family == MarginalFamily::Lognormal && !(mean > 0.0))
    throw std::invalid_argument("marginal '" + name +
                                "': lognormal requires mean > 0");
}

void DesignVector::validate() const {
  const int n = dim();
  if (lower.size() != n || upper.size() != n)
    throw std::invalid_argument("design vector: bound size mismatch");
  for (int j = 0; j < n; ++j) {
    if (!(lower[j] <= upper[j]))
      throw std::invalid_argument("design vector: empty bound interval");
    if (values[j] < lower[j] || values[j] > upper[j])
      throw std::invalid_argument("design vector: value outside bounds");
  }
}

bool DesignVector::contains(const Eigen::VectorXd& theta, double tol) const {
  for (int j = 0; j < dim(); ++j)
    if (theta[j] < lower[j] - tol || theta[j] > upper[j] + tol) return false;
  return true;
}

Eigen::VectorXd DesignVector::project(const Eigen::VectorXd& theta) const {
  return theta.cwiseMax(lower).cwiseMin(upper);
}

void RandomVectorSpec::validate(int design_dim) const {
  std::set<std::string> names;
  for (const auto& m : marginals) {
    m.validate();
    if (!names.insert(m.name).second)
      throw std::invalid_argument("duplicate marginal name: " + m.name);
    if (m.design_linked &&
        (*m.design_linked < 0 || *m.design_linked >= design_dim))
      throw std::invalid_argument("marginal '" + m.name +
                                  "': design link index out of range");
  }
}

MarginalSpec RandomVectorSpec::effective(int i, const DesignVector& design) const {
  MarginalSpec m = marginals[static_cast<size_t>(i)];
  if (m.design_linked) m.mean = design.values[*m.design_linked];
  return m;
}

std::vector<int> RandomVectorSpec::stochastic_indices() const {
  std::vector<int> idx;
  for (int i = 0; i < dim(); ++i)
    if (marginals[static_cast<size_t>(i)].is_stochastic()) idx.push_back(i);
  return idx;
}

std::vector<int> RandomVectorSpec::augmented_indices() const {
  std::vector<int> idx;
  for (int i = 0; i < dim(); ++i) {
    const auto& m = marginals[static_cast<size_t>(i)];
    if (m.is_stochastic() || m.design_linked) idx.push_back(i);
  }
  return idx;
}

Eigen::VectorXd RandomVectorSpec::mean_vector(const DesignVector& design) const {
  Eigen::VectorXd x(dim());
  for (int i = 0; i < dim(); ++i) x[i] = effective(i, design).mean;
  return x;
}

bool ConfidenceBox::contains(const Eigen::VectorXd& x) const {
  for (int j = 0; j < dim(); ++j)
    if (x[j] < lower[j] || x[j] > upper[j]) return false;
  return true;
}

std::pair<double, double> lognormal_shape_scale(double mean, double std_dev) {
  if (!(mean > 0.0))
    throw std::domain_error("lognormal_shape_scale: mean must be positive");
  if (std_dev < 0.0)
    throw std::domain_error("lognormal_shape_scale: std_dev must be >= 0");
  const double cov = std_dev / mean;
  const double log_scale2 = std::log1p(cov * cov);
  const double log_scale = std::sqrt(log_scale2);
  const double log_location = std::log(mean) - 0.5 * log_scale2;
  return {log_location, log_scale};
}

double marginal_pdf(const MarginalSpec& spec, double x) {
  switch (spec.family) {
    case MarginalFamily::Normal:
      return normal_pdf((x - spec.mean) / spec.std_dev) / spec.std_dev;
    case MarginalFamily::Lognormal: {
      if (x <= 0.0) return 0.0;
      const auto [loc, scale] = lognormal_shape_scale(spec.mean, spec.std_dev);
      return normal_pdf((std::log(x) - loc) / scale) / (scale * x);
    }
    case MarginalFamily::Uniform: {
      const double h = uniform_half_width(spec.std_dev);
      return (x >= spec.mean - h && x <= spec.mean + h) ? 0.5 / h : 0.0;
    }
    case MarginalFamily::Deterministic:
      return x == spec.mean ? std::numeric_limits<double>::infinity() : 0.0;
  }
  return 0.0;
}

double marginal_cdf(const MarginalSpec& spec, double x) {
  switch (spec.family) {
    case MarginalFamily::Normal:
      return normal_cdf((x - spec.mean) / spec.std_dev);
    case MarginalFamily::Lognormal: {
      if (x <= 0.0) return 0.0;
      const auto [loc, scale] = lognormal_shape_scale(spec.mean, spec.std_dev);
      return normal_cdf((std::log(x) - loc) / scale);
    }
    case MarginalFamily::Uniform: {
      const double h = uniform_half_width(spec.std_dev);
      if (x <= spec.mean - h) return 0.0;
      if (x >= spec.mean + h) return 1.0;
      return (x - (spec.mean - h)) / (2.0 * h);
    }
    case MarginalFamily::Deterministic:
      return x < spec.mean ? 0.0 : 1.0;
  }
  return 0.0;
}

double marginal_quantile(const MarginalSpec& spec, double p) {
  if (spec.family == MarginalFamily::Deterministic) return spec.mean;
  if (!(p > 0.0 && p < 1.0))
    throw std::domain_error("marginal_quantile: p must lie in (0, 1)");
  switch (spec.family) {
    case MarginalFamily::Normal:
      return spec.mean + spec.std_dev * normal_quantile(p);
    case MarginalFamily::Lognormal: {
      const auto [loc, scale] = lognormal_shape_scale(spec.mean, spec.std_dev);
      return std::exp(loc + scale * normal_quantile(p));
    }
    case MarginalFamily::Uniform: {
      const double h = uniform_half_width(spec.std_dev);
      return spec.mean - h + p * 2.0 * h;
    }
    default:
      return spec.mean;
  }
}

double marginal_from_u(const MarginalSpec& spec, double u) {
  switch (spec.family) {
    case MarginalFamily::Normal:
      return spec.mean + spec.std_dev * u;
    case MarginalFamily::Lognormal: {
      const auto [loc, scale] = lognormal_shape_scale(spec.mean, spec.std_dev);
      return std::exp(loc + scale * u);
    }
    case MarginalFamily::Uniform:
      return marginal_quantile(spec, normal_cdf(u));
    case MarginalFamily::Deterministic:
      return spec.mean;
  }
  return spec.mean;
}

double marginal_to_u(const MarginalSpec& spec, double x) {
  switch (spec.family) {
    case MarginalFamily::Normal:
      return (x - spec.mean) / spec.std_dev;
    case MarginalFamily::Lognormal: {
      if (!(x > 0.0))
        throw std::domain_error("marginal_to_u: x outside lognormal support");
      const auto [loc, scale] = lognormal_shape_scale(spec.mean, spec.std_dev);
      return (std::log(x) - loc) / scale;
    }
    case MarginalFamily::Deterministic:
      return 0.0;
    default: {
      const double p = marginal_cdf(spec, x);
      if (!(p > 0.0 && p < 1.0))
        throw std::domain_error("marginal_to_u: x outside support");
      return normal_quantile(p);
    }
  }
}

double marginal_score_dmean(const MarginalSpec& spec, double x) {
  switch (spec.family) {
    case MarginalFamily::Normal:
      return (x - spec.mean) / (spec.std_dev * spec.std_dev);
    case MarginalFamily::Lognormal: {
      // Both log-location and log-scale move with the mean when the standard
      // deviation is held fixed.
      const double m = spec.mean, s = spec.std_dev;
      const auto [loc, scale] = lognormal_shape_scale(m, s);
      const double z = (std::log(x) - loc) / scale;
      const double dscale2_dm = -2.0 * s * s / (m * (m * m + s * s));
      const double dloc_dm = 1.0 / m - 0.5 * dscale2_dm;
      const double dscale_dm = dscale2_dm / (2.0 * scale);
      const double dlnf_dloc = z / scale;
      const double dlnf_dscale = (z * z - 1.0) / scale;
      return dlnf_dloc * dloc_dm + dlnf_dscale * dscale_dm;
    }
    default:
      return 0.0;
  }
}

Eigen::MatrixXd sample(const RandomVectorSpec& spec, const DesignVector& design,
                       int count, uint64_t seed) {
  if (count < 1) throw std::invalid_argument("sample: count must be >= 1");
  const int n = spec.dim();
  Eigen::MatrixXd rows(count, n);
  for (int r = 0; r < count; ++r) {
    RngStream rng(derive_seed(seed, "sample-row", static_cast<uint64_t>(r)));
    for (int i = 0; i < n; ++i) {
      const MarginalSpec m = spec.effective(i, design);
      rows(r, i) = m.is_stochastic() ? marginal_quantile(m, rng.uniform01())
                                     : m.mean;
    }
  }
  return rows;
}

Eigen::VectorXd to_standard_normal(const RandomVectorSpec& spec,
                                   const DesignVector& design,
                                   const Eigen::VectorXd& x) {
  const int n = spec.dim();
  if (x.size() != n) throw std::invalid_argument("to_standard_normal: dimension mismatch");
  Eigen::VectorXd u(n);
  for (int i = 0; i < n; ++i)
    u[i] = marginal_to_u(spec.effective(i, design), x[i]);
  return u;
}

Eigen::VectorXd from_standard_normal(const RandomVectorSpec& spec,
                                     const DesignVector& design,
                                     const Eigen::VectorXd& u) {
  const int n = spec.dim();
  if (u.size() != n) throw std::invalid_argument("from_standard_normal: dimension mismatch");
  Eigen::VectorXd x(n);
  for (int i = 0; i < n; ++i)
    x[i] = marginal_from_u(spec.effective(i, design), u[i]);
  return x;
}

Eigen::VectorXd physical_from_reduced(const RandomVectorSpec& spec,
                                      const DesignVector& design,
                                      const Eigen::VectorXd& u_reduced) {
  const auto idx = spec.stochastic_indices();
  if (u_reduced.size() != static_cast<Eigen::Index>(idx.size()))
    throw std::invalid_argument("physical_from_reduced: dimension mismatch");
  Eigen::VectorXd u = Eigen::VectorXd::Zero(spec.dim());
  for (size_t k = 0; k < idx.size(); ++k) u[idx[k]] = u_reduced[static_cast<Eigen::Index>(k)];
  return from_standard_normal(spec, design, u);
}

ConfidenceBox augmented_confidence_box(const RandomVectorSpec& spec,
                                       const DesignVector& design,
                                       double beta_target) {
  if (!(beta_target > 0.0))
    throw std::domain_error("augmented_confidence_box: beta_target must be > 0");
  design.validate();

  const int n = spec.dim();
  ConfidenceBox box{Eigen::VectorXd(n), Eigen::VectorXd(n)};
  for (int i = 0; i < n; ++i) {
    const auto& m = spec.marginals[static_cast<size_t>(i)];
    double mean_lo = m.mean, mean_hi = m.mean;
    if (m.design_linked) {
      mean_lo = design.lower[*m.design_linked];
      mean_hi = design.upper[*m.design_linked];
    }
    if (!m.is_stochastic()) {
      box.lower[i] = mean_lo;
      box.upper[i] = mean_hi;
      continue;
    }
    MarginalSpec at_lo = m, at_hi = m;
    at_lo.mean = mean_lo;
    at_hi.mean = mean_hi;
    box.lower[i] = std::min(marginal_from_u(at_lo, -beta_target),
                            marginal_from_u(at_hi, -beta_target));
    box.upper[i] = std::max(marginal_from_u(at_lo, beta_target),
                            marginal_from_u(at_hi, beta_target));
  }
  return box;
}

}  // namespace relopt
