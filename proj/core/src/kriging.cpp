#include "relopt/kriging.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <limits>
#include <sstream>
#include <thread>

#include "relopt/rng.hpp"
#include "relopt/sampling.hpp"

namespace relopt {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kLog2Pi = 1.8378770664093454836;
constexpr double kSigma2Floor = 1e-280;

void parallel_for(int count, int threads, const std::function<void(int)>& body) {
  threads = std::max(1, std::min(threads, count));
  if (threads == 1) {
    for (int i = 0; i < count; ++i) body(i);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(static_cast<size_t>(threads));
  for (int t = 0; t < threads; ++t) {
    pool.emplace_back([&, t] {
      for (int i = t; i < count; i += threads) body(i);
    });
  }
  for (auto& th : pool) th.join();
}

Eigen::MatrixXd correlation_matrix(const Eigen::MatrixXd& inputs,
                                   const Eigen::VectorXd& lengths) {
  const int m = static_cast<int>(inputs.rows());
  const int n = static_cast<int>(inputs.cols());
  Eigen::MatrixXd dist2 = Eigen::MatrixXd::Zero(m, m);
  for (int k = 0; k < n; ++k) {
    const Eigen::VectorXd col = inputs.col(k) / lengths[k];
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < i; ++j) {
        const double d = col[i] - col[j];
        dist2(i, j) += d * d;
      }
  }
  Eigen::MatrixXd corr(m, m);
  for (int i = 0; i < m; ++i) {
    corr(i, i) = 1.0;
    for (int j = 0; j < i; ++j) {
      const double r = std::exp(-dist2(i, j));
      corr(i, j) = r;
      corr(j, i) = r;
    }
  }
  return corr;
}

Eigen::MatrixXd regression_matrix(TrendBasis basis, const Eigen::MatrixXd& inputs) {
  const int m = static_cast<int>(inputs.rows());
  Eigen::MatrixXd f(m, trend_size(basis, static_cast<int>(inputs.cols())));
  for (int i = 0; i < m; ++i) f.row(i) = trend_eval(basis, inputs.row(i)).transpose();
  return f;
}

struct GlsSolve {
  bool ok = false;
  double nll = kInf;
  double sigma2 = 0.0;
  // Nugget-induced smoothing at the DOE points, nu * max|w_i| with
  // w = (R + nu I)^{-1} (y - F b): the exact-interpolation defect a
  // candidate length scale would cause.
  double interpolation_defect = 0.0;
  Eigen::VectorXd beta;
  Eigen::MatrixXd chol_lower;
  Eigen::MatrixXd whitened_f;
  Eigen::VectorXd whitened_resid;
};

// Cholesky of R + nugget I, then generalized least squares for the trend and
// the profiled ML variance.
GlsSolve gls_at(const Eigen::MatrixXd& inputs, const Eigen::VectorXd& outputs,
                TrendBasis basis, const Eigen::VectorXd& lengths, double nugget) {
  GlsSolve out;
  const int m = static_cast<int>(inputs.rows());
  Eigen::MatrixXd corr = correlation_matrix(inputs, lengths);
  corr.diagonal().array() += nugget;
  Eigen::LLT<Eigen::MatrixXd> llt(corr);
  if (llt.info() != Eigen::Success) return out;
  out.chol_lower = llt.matrixL();

  const Eigen::MatrixXd f = regression_matrix(basis, inputs);
  out.whitened_f = out.chol_lower.triangularView<Eigen::Lower>().solve(f);
  const Eigen::VectorXd z =
      out.chol_lower.triangularView<Eigen::Lower>().solve(outputs);

  Eigen::LLT<Eigen::MatrixXd> gls(out.whitened_f.transpose() * out.whitened_f);
  if (gls.info() != Eigen::Success) return out;
  out.beta = gls.solve(out.whitened_f.transpose() * z);
  out.whitened_resid = z - out.whitened_f * out.beta;
  out.sigma2 = out.whitened_resid.squaredNorm() / m;

  double logdet = 0.0;
  for (int i = 0; i < m; ++i) logdet += std::log(out.chol_lower(i, i));
  logdet *= 2.0;

  // Zero residual (up to round-off of the output scale) collapses the
  // likelihood; report a flat finite sentinel so the length search
  // degenerates gracefully.
  const double output_scale2 = outputs.squaredNorm() / m;
  if (out.sigma2 <= std::max(kSigma2Floor, 1e-24 * output_scale2)) {
    out.nll = 0.5 * (m * kLog2Pi + m * std::log(kSigma2Floor) + m);
  } else {
    out.nll = 0.5 * (m * kLog2Pi + m * std::log(out.sigma2) + logdet + m);
  }
  const Eigen::VectorXd dual_weights =
      out.chol_lower.triangularView<Eigen::Lower>().transpose().solve(
          out.whitened_resid);
  out.interpolation_defect = nugget * dual_weights.cwiseAbs().maxCoeff();
  out.ok = true;
  return out;
}

std::pair<int, int> closest_pair(const Eigen::MatrixXd& inputs) {
  int bi = 0, bj = 1;
  double best = kInf;
  for (int i = 0; i < inputs.rows(); ++i)
    for (int j = 0; j < i; ++j) {
      const double d = (inputs.row(i) - inputs.row(j)).squaredNorm();
      if (d < best) {
        best = d;
        bi = j;
        bj = i;
      }
    }
  return {bi, bj};
}

// Bounded Nelder-Mead in the search space (coordinates clamped to the box
// before each evaluation).
Eigen::VectorXd nelder_mead(const std::function<double(const Eigen::VectorXd&)>& f,
                            const Eigen::VectorXd& x0, const Eigen::VectorXd& lo,
                            const Eigen::VectorXd& hi, int max_evals,
                            double* best_value) {
  const int n = static_cast<int>(x0.size());
  const auto clamp = [&](const Eigen::VectorXd& x) {
    return x.cwiseMax(lo).cwiseMin(hi).eval();
  };
  std::vector<Eigen::VectorXd> verts;
  std::vector<double> vals;
  verts.push_back(clamp(x0));
  vals.push_back(f(verts[0]));
  int evals = 1;
  for (int k = 0; k < n; ++k) {
    Eigen::VectorXd v = verts[0];
    v[k] += 0.5 * (v[k] + 0.25 < hi[k] ? 1.0 : -1.0);
    verts.push_back(clamp(v));
    vals.push_back(f(verts.back()));
    ++evals;
  }
  std::vector<int> order(verts.size());
  const auto sort_order = [&] {
    for (size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b) { return vals[a] < vals[b]; });
  };
  while (evals < max_evals) {
    sort_order();
    const int worst = order.back();
    const int best = order.front();
    const int second_worst = order[order.size() - 2];
    if (std::abs(vals[worst] - vals[best]) <
        1e-10 * (1.0 + std::abs(vals[best])))
      break;

    Eigen::VectorXd centroid = Eigen::VectorXd::Zero(n);
    for (int idx : order)
      if (idx != worst) centroid += verts[static_cast<size_t>(idx)];
    centroid /= n;

    Eigen::VectorXd xr = clamp(centroid + (centroid - verts[static_cast<size_t>(worst)]));
    double fr = f(xr);
    ++evals;
    if (fr < vals[static_cast<size_t>(best)]) {
      Eigen::VectorXd xe = clamp(centroid + 2.0 * (centroid - verts[static_cast<size_t>(worst)]));
      double fe = f(xe);
      ++evals;
      if (fe < fr) {
        verts[static_cast<size_t>(worst)] = xe;
        vals[static_cast<size_t>(worst)] = fe;
      } else {
        verts[static_cast<size_t>(worst)] = xr;
        vals[static_cast<size_t>(worst)] = fr;
      }
    } else if (fr < vals[static_cast<size_t>(second_worst)]) {
      verts[static_cast<size_t>(worst)] = xr;
      vals[static_cast<size_t>(worst)] = fr;
    } else {
      Eigen::VectorXd xc = clamp(centroid + 0.5 * (verts[static_cast<size_t>(worst)] - centroid));
      double fc = f(xc);
      ++evals;
      if (fc < vals[static_cast<size_t>(worst)]) {
        verts[static_cast<size_t>(worst)] = xc;
        vals[static_cast<size_t>(worst)] = fc;
      } else {
        for (int idx : order) {
          if (idx == best) continue;
          verts[static_cast<size_t>(idx)] =
              clamp(verts[static_cast<size_t>(best)] +
                    0.5 * (verts[static_cast<size_t>(idx)] - verts[static_cast<size_t>(best)]));
          vals[static_cast<size_t>(idx)] = f(verts[static_cast<size_t>(idx)]);
          ++evals;
        }
      }
    }
  }
  sort_order();
  if (best_value) *best_value = vals[static_cast<size_t>(order[0])];
  return verts[static_cast<size_t>(order[0])];
}

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

int trend_size(TrendBasis basis, int dim) {
  return basis == TrendBasis::Constant ? 1 : dim + 1;
}

Eigen::VectorXd trend_eval(TrendBasis basis, const Eigen::VectorXd& x) {
  if (basis == TrendBasis::Constant) return Eigen::VectorXd::Ones(1);
  Eigen::VectorXd f(x.size() + 1);
  f[0] = 1.0;
  f.tail(x.size()) = x;
  return f;
}

void DesignOfExperiments::validate() const {
  if (inputs.rows() != outputs.size())
    throw std::invalid_argument("DOE: inputs/outputs row count mismatch");
  if (inputs.rows() < 1) throw std::invalid_argument("DOE: empty");
  for (int i = 0; i < inputs.rows(); ++i)
    for (int j = 0; j < i; ++j)
      if ((inputs.row(i) - inputs.row(j)).cwiseAbs().maxCoeff() == 0.0)
        throw std::invalid_argument("DOE: duplicate input rows " + std::to_string(j) +
                                    " and " + std::to_string(i));
}

double KrigingModel::correlation(const Eigen::VectorXd& x, const Eigen::VectorXd& x_prime,
                                 const Eigen::VectorXd& lengths) {
  if (x.size() != x_prime.size() || x.size() != lengths.size())
    throw std::invalid_argument("correlation: dimension mismatch");
  if ((lengths.array() <= 0.0).any())
    throw std::domain_error("correlation: lengths must be positive");
  double s = 0.0;
  for (int k = 0; k < x.size(); ++k) {
    const double d = (x[k] - x_prime[k]) / lengths[k];
    s += d * d;
  }
  return std::exp(-s);
}

double KrigingModel::negative_log_likelihood(const DesignOfExperiments& doe,
                                             TrendBasis basis,
                                             const Eigen::VectorXd& lengths,
                                             double nugget) {
  if ((lengths.array() <= 0.0).any())
    throw std::domain_error("negative_log_likelihood: lengths must be positive");
  const GlsSolve s = gls_at(doe.inputs, doe.outputs, basis, lengths, nugget);
  return s.ok ? s.nll : kInf;
}

void KrigingModel::factorize() {
  double nugget = nugget_;
  const double nugget_max = std::max(nugget_, nugget_max_);
  GlsSolve s;
  for (;;) {
    s = gls_at(doe_.inputs, doe_.outputs, basis_, lengths_, nugget);
    if (s.ok) break;
    if (nugget >= nugget_max) {
      const auto [i, j] = closest_pair(doe_.inputs);
      throw KrigingFitError(
          "correlation matrix not positive definite at maximum nugget; closest "
          "DOE points are rows " + std::to_string(i) + " and " + std::to_string(j));
    }
    nugget = std::min(nugget * 10.0, nugget_max);
  }
  nugget_ = nugget;
  trend_ = s.beta;
  chol_lower_ = std::move(s.chol_lower);
  whitened_f_ = std::move(s.whitened_f);
  whitened_resid_ = std::move(s.whitened_resid);
  if (!fixed_variance_) process_variance_ = s.sigma2;

  Eigen::LLT<Eigen::MatrixXd> gls(whitened_f_.transpose() * whitened_f_);
  gls_lower_ = gls.matrixL();
  resid_weights_ = chol_lower_.triangularView<Eigen::Lower>().transpose().solve(
      whitened_resid_);
}

KrigingModel KrigingModel::with_hyperparameters(const DesignOfExperiments& doe,
                                                TrendBasis basis,
                                                const Eigen::VectorXd& lengths,
                                                double process_variance,
                                                double nugget_initial,
                                                double nugget_max) {
  doe.validate();
  if ((lengths.array() <= 0.0).any())
    throw std::domain_error("kriging: lengths must be positive");
  KrigingModel model;
  model.doe_ = doe;
  model.basis_ = basis;
  model.lengths_ = lengths;
  model.nugget_ = nugget_initial;
  model.nugget_max_ = nugget_max;
  if (process_variance >= 0.0) {
    model.fixed_variance_ = true;
    model.process_variance_ = process_variance;
  }
  model.factorize();
  return model;
}

KrigingModel KrigingModel::fit(const DesignOfExperiments& doe, const KrigingFitOptions& options) {
  doe.validate();
  const int n = doe.dim();
  const int m = doe.points();
  const int p = trend_size(options.basis, n);
  if (m < p)
    throw KrigingFitError("kriging fit: " + std::to_string(m) + " points cannot identify " +
                          std::to_string(p) + " trend coefficients");

  Eigen::VectorXd lo = options.length_lower, hi = options.length_upper;
  if (lo.size() == 0 || hi.size() == 0) {
    Eigen::VectorXd range(n);
    for (int k = 0; k < n; ++k) {
      range[k] = doe.inputs.col(k).maxCoeff() - doe.inputs.col(k).minCoeff();
      if (range[k] <= 0.0)
        throw KrigingFitError("kriging fit: input dimension " + std::to_string(k) +
                              " has zero range; drop it before fitting");
    }
    lo = 1e-2 * range;
    hi = 1e2 * range;
  }
  if (lo.size() != n || hi.size() != n || (lo.array() <= 0.0).any() ||
      (lo.array() > hi.array()).any())
    throw std::invalid_argument("kriging fit: invalid length bounds");

  const Eigen::VectorXd s_lo = lo.array().log();
  const Eigen::VectorXd s_hi = hi.array().log();
  // Length scales whose correlation matrix is singular past the nugget would
  // break exact interpolation; the search treats them as infeasible.
  const double defect_cap =
      options.defect_cap_scale * std::max(1.0, doe.outputs.cwiseAbs().maxCoeff());
  const auto objective = [&](const Eigen::VectorXd& s) {
    const Eigen::VectorXd lengths = s.array().exp();
    const GlsSolve g = gls_at(doe.inputs, doe.outputs, options.basis, lengths,
                              options.nugget_initial);
    if (!g.ok || g.interpolation_defect > defect_cap) return kInf;
    return g.nll;
  };

  const int multistart = options.multistart > 0 ? options.multistart : 10 * n;
  RngStream rng(derive_seed(options.seed, "kriging-multistart"));
  Eigen::MatrixXd starts(multistart + 3, n);
  starts.topRows(multistart) = latin_hypercube(s_lo, s_hi, multistart, rng);
  // Deterministic short-length starts: nearly uncorrelated points are always
  // defect-feasible, so the search never strands on clustered DOEs.
  starts.row(multistart) = s_lo.transpose();
  starts.row(multistart + 1) = (s_lo + 0.15 * (s_hi - s_lo)).transpose();
  starts.row(multistart + 2) = (s_lo + 0.30 * (s_hi - s_lo)).transpose();

  // Screen all starts, then polish the most promising subset.
  const int n_starts = static_cast<int>(starts.rows());
  std::vector<double> screened(static_cast<size_t>(n_starts));
  parallel_for(n_starts, options.threads, [&](int i) {
    screened[static_cast<size_t>(i)] = objective(starts.row(i).transpose());
  });

  std::vector<int> order(static_cast<size_t>(n_starts));
  for (size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return screened[static_cast<size_t>(a)] < screened[static_cast<size_t>(b)];
  });

  const int polish_top =
      options.polish_top > 0 ? std::min(options.polish_top, n_starts)
                             : std::min(n_starts, std::max(4, n / 2 + 1));
  std::vector<Eigen::VectorXd> polish_starts;
  for (int i = 0; i < polish_top; ++i)
    polish_starts.push_back(starts.row(order[static_cast<size_t>(i)]).transpose());
  for (const auto& extra : options.extra_starts)
    if (extra.size() == n && (extra.array() > 0.0).all())
      polish_starts.push_back(extra.array().log().matrix().cwiseMax(s_lo).cwiseMin(s_hi));

  const int max_evals = 60 + 25 * n;
  std::vector<double> best_vals(polish_starts.size(), kInf);
  std::vector<Eigen::VectorXd> best_args(polish_starts.size());
  const auto polish = [&](const std::function<double(const Eigen::VectorXd&)>& f) {
    parallel_for(static_cast<int>(polish_starts.size()), options.threads, [&](int i) {
      best_args[static_cast<size_t>(i)] =
          nelder_mead(f, polish_starts[static_cast<size_t>(i)], s_lo, s_hi, max_evals,
                      &best_vals[static_cast<size_t>(i)]);
    });
  };
  polish(objective);

  const auto best_index = [&] {
    int best = 0;
    for (size_t i = 1; i < best_vals.size(); ++i)
      if (best_vals[i] < best_vals[best]) best = static_cast<int>(i);
    return best;
  };
  int best = best_index();
  if (!std::isfinite(best_vals[static_cast<size_t>(best)])) {
    // Every candidate tripped the interpolation-defect gate (near-duplicate
    // DOE points leave no well-conditioned length scale). Fall back to the
    // most interpolation-faithful positive definite model available.
    const auto least_defect = [&](const Eigen::VectorXd& s) {
      const Eigen::VectorXd lengths = s.array().exp();
      const GlsSolve g = gls_at(doe.inputs, doe.outputs, options.basis, lengths,
                                options.nugget_initial);
      return g.ok ? g.interpolation_defect : kInf;
    };
    polish(least_defect);
    best = best_index();
  }
  if (!std::isfinite(best_vals[static_cast<size_t>(best)])) {
    const auto [i, j] = closest_pair(doe.inputs);
    throw KrigingFitError("kriging fit: no positive definite correlation found; closest "
                          "DOE points are rows " + std::to_string(i) + " and " +
                          std::to_string(j));
  }

  KrigingModel model;
  model.doe_ = doe;
  model.basis_ = options.basis;
  model.lengths_ = best_args[static_cast<size_t>(best)].array().exp();
  model.nugget_ = options.nugget_initial;
  model.nugget_max_ = options.nugget_max;
  model.factorize();
  return model;
}

void KrigingModel::predict(const Eigen::VectorXd& x, double& mean, double& variance) const {
  const int m = doe_.points();
  if (x.size() != doe_.dim())
    throw std::invalid_argument("kriging predict: dimension mismatch");
  Eigen::VectorXd r(m);
  for (int i = 0; i < m; ++i)
    r[i] = correlation(x, doe_.inputs.row(i).transpose(), lengths_);
  const Eigen::VectorXd f = trend_eval(basis_, x);

  const Eigen::VectorXd a = chol_lower_.triangularView<Eigen::Lower>().solve(r);
  mean = f.dot(trend_) + a.dot(whitened_resid_);

  const Eigen::VectorXd u = whitened_f_.transpose() * a - f;
  const Eigen::VectorXd w = gls_lower_.triangularView<Eigen::Lower>().solve(u);
  double reduced = 1.0 - a.squaredNorm() + w.squaredNorm();
  variance = process_variance_ * reduced;
  if (variance < 0.0) {
    if (variance < -1e-10 * std::max(process_variance_, 1e-300))
      throw std::runtime_error("kriging predict: negative variance beyond round-off");
    variance = 0.0;
  }
}

double KrigingModel::predict_mean(const Eigen::VectorXd& x) const {
  const int m = doe_.points();
  const int n = doe_.dim();
  double acc = trend_eval(basis_, x).dot(trend_);
  for (int i = 0; i < m; ++i) {
    double d2 = 0.0;
    for (int k = 0; k < n; ++k) {
      const double d = (x[k] - doe_.inputs(i, k)) / lengths_[k];
      d2 += d * d;
    }
    acc += std::exp(-d2) * resid_weights_[i];
  }
  return acc;
}

void KrigingModel::predict_batch(const Eigen::MatrixXd& points, Eigen::VectorXd& means,
                                 Eigen::VectorXd& variances) const {
  const int q = static_cast<int>(points.rows());
  const int m = doe_.points();
  const int n = doe_.dim();
  means.resize(q);
  variances.resize(q);
  const int block = std::max(1, std::min(q, 4096));
  for (int start = 0; start < q; start += block) {
    const int count = std::min(block, q - start);
    Eigen::MatrixXd dist2 = Eigen::MatrixXd::Zero(count, m);
    for (int k = 0; k < n; ++k) {
      const double inv = 1.0 / lengths_[k];
      const auto qc = points.col(k).segment(start, count) * inv;
      const auto dc = doe_.inputs.col(k) * inv;
      dist2.noalias() += (qc.replicate(1, m) - dc.transpose().replicate(count, 1))
                             .array().square().matrix();
    }
    const Eigen::MatrixXd corr = (-dist2.array()).exp();  // count x m
    Eigen::MatrixXd f(count, trend_size(basis_, n));
    for (int i = 0; i < count; ++i)
      f.row(i) = trend_eval(basis_, points.row(start + i).transpose()).transpose();

    const Eigen::MatrixXd a =
        chol_lower_.triangularView<Eigen::Lower>().solve(corr.transpose());  // m x count
    means.segment(start, count) = f * trend_ + a.transpose() * whitened_resid_;

    const Eigen::MatrixXd u = whitened_f_.transpose() * a - f.transpose();
    const Eigen::MatrixXd w = gls_lower_.triangularView<Eigen::Lower>().solve(u);
    for (int i = 0; i < count; ++i) {
      double reduced = 1.0 - a.col(i).squaredNorm() + w.col(i).squaredNorm();
      double v = process_variance_ * reduced;
      if (v < 0.0) {
        if (v < -1e-10 * std::max(process_variance_, 1e-300))
          throw std::runtime_error("kriging predict: negative variance beyond round-off");
        v = 0.0;
      }
      variances[start + i] = v;
    }
  }
}

Eigen::VectorXd KrigingModel::predict_mean_batch(const Eigen::MatrixXd& points) const {
  const int q = static_cast<int>(points.rows());
  const int m = doe_.points();
  const int n = doe_.dim();
  Eigen::VectorXd means(q);
  const int block = std::max(1, std::min(q, 8192));
  for (int start = 0; start < q; start += block) {
    const int count = std::min(block, q - start);
    Eigen::MatrixXd dist2 = Eigen::MatrixXd::Zero(count, m);
    for (int k = 0; k < n; ++k) {
      const double inv = 1.0 / lengths_[k];
      const auto qc = points.col(k).segment(start, count) * inv;
      const auto dc = doe_.inputs.col(k) * inv;
      dist2.noalias() += (qc.replicate(1, m) - dc.transpose().replicate(count, 1))
                             .array().square().matrix();
    }
    const Eigen::MatrixXd corr = (-dist2.array()).exp();
    Eigen::MatrixXd f(count, trend_size(basis_, n));
    for (int i = 0; i < count; ++i)
      f.row(i) = trend_eval(basis_, points.row(start + i).transpose()).transpose();
    means.segment(start, count) = f * trend_ + corr * resid_weights_;
  }
  return means;
}

void KrigingModel::save(const std::filesystem::path& path,
                        const std::string& manifest_hash) const {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out << "relopt-kriging v1\n";
  out << "manifest " << (manifest_hash.empty() ? "-" : manifest_hash) << "\n";
  out << "dim " << doe_.dim() << " points " << doe_.points() << " basis "
      << (basis_ == TrendBasis::Constant ? "constant" : "linear") << "\n";
  out << "lengths";
  for (int k = 0; k < lengths_.size(); ++k) out << " " << fmt17(lengths_[k]);
  out << "\nprocess_variance " << fmt17(process_variance_) << "\n";
  out << "nugget " << fmt17(nugget_) << "\n";
  out << "trend";
  for (int k = 0; k < trend_.size(); ++k) out << " " << fmt17(trend_[k]);
  out << "\ninputs\n";
  for (int i = 0; i < doe_.points(); ++i) {
    for (int k = 0; k < doe_.dim(); ++k)
      out << (k ? " " : "") << fmt17(doe_.inputs(i, k));
    out << "\n";
  }
  out << "outputs\n";
  for (int i = 0; i < doe_.points(); ++i) out << fmt17(doe_.outputs[i]) << "\n";
  out << "end\n";
}

KrigingModel KrigingModel::load(const std::filesystem::path& path,
                                const std::string& expected_hash) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::string line, word;
  std::getline(in, line);
  if (line != "relopt-kriging v1")
    throw std::runtime_error(path.string() + ": unrecognized snapshot header");
  std::string hash;
  in >> word >> hash;
  if (!expected_hash.empty() && hash != expected_hash)
    throw std::runtime_error(path.string() + ": manifest hash mismatch (file " + hash +
                             ", expected " + expected_hash + ")");
  int dim = 0, points = 0;
  std::string basis_word;
  in >> word >> dim >> word >> points >> word >> basis_word;
  const TrendBasis basis =
      basis_word == "linear" ? TrendBasis::Linear : TrendBasis::Constant;
  Eigen::VectorXd lengths(dim);
  in >> word;
  for (int k = 0; k < dim; ++k) in >> lengths[k];
  double process_variance = 0.0, nugget = 0.0;
  in >> word >> process_variance >> word >> nugget;
  in >> word;  // "trend"
  Eigen::VectorXd trend(trend_size(basis, dim));
  for (int k = 0; k < trend.size(); ++k) in >> trend[k];
  in >> word;  // "inputs"
  DesignOfExperiments doe;
  doe.inputs.resize(points, dim);
  for (int i = 0; i < points; ++i)
    for (int k = 0; k < dim; ++k) in >> doe.inputs(i, k);
  in >> word;  // "outputs"
  doe.outputs.resize(points);
  for (int i = 0; i < points; ++i) in >> doe.outputs[i];
  in >> word;
  if (!in || word != "end")
    throw std::runtime_error(path.string() + ": truncated snapshot");
  return with_hyperparameters(doe, basis, lengths, process_variance, nugget, nugget);
}

}  // namespace relopt
