#include "relopt/surface.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace relopt {

Eigen::VectorXd KrigingSurface::project(const Eigen::VectorXd& x) const {
  if (dims_.empty()) return x;
  Eigen::VectorXd sub(static_cast<Eigen::Index>(dims_.size()));
  for (size_t k = 0; k < dims_.size(); ++k) {
    const int d = dims_[k];
    if (d < 0 || d >= x.size())
      throw std::invalid_argument("KrigingSurface: dimension index out of range");
    sub[static_cast<Eigen::Index>(k)] = x[d];
  }
  return sub;
}

void KrigingSurface::eval(const Eigen::VectorXd& x, double& mean, double& sd) const {
  double variance = 0.0;
  model_->predict(project(x), mean, variance);
  sd = std::sqrt(std::max(variance, 0.0));
}

double KrigingSurface::mean_only(const Eigen::VectorXd& x) const {
  return model_->predict_mean(project(x));
}

Eigen::MatrixXd KrigingSurface::project_rows(const Eigen::MatrixXd& points) const {
  if (dims_.empty()) return points;
  Eigen::MatrixXd sub(points.rows(), static_cast<Eigen::Index>(dims_.size()));
  for (size_t k = 0; k < dims_.size(); ++k)
    sub.col(static_cast<Eigen::Index>(k)) = points.col(dims_[k]);
  return sub;
}

void KrigingSurface::eval_batch(const Eigen::MatrixXd& points, Eigen::VectorXd& means,
                                Eigen::VectorXd& sds) const {
  Eigen::VectorXd variances;
  model_->predict_batch(project_rows(points), means, variances);
  sds = variances.cwiseMax(0.0).cwiseSqrt();
}

Eigen::VectorXd KrigingSurface::mean_batch(const Eigen::MatrixXd& points) const {
  return model_->predict_mean_batch(project_rows(points));
}

std::function<double(const Eigen::VectorXd&)> shifted_min_limit_state(
    const std::vector<const GaussianSurface*>& surfaces, double shift) {
  if (surfaces.empty())
    throw std::invalid_argument("shifted_min_limit_state: no surfaces");
  if (shift == 0.0) {
    return [surfaces](const Eigen::VectorXd& x) {
      double best = std::numeric_limits<double>::infinity();
      for (const auto* s : surfaces) best = std::min(best, s->mean_only(x));
      return best;
    };
  }
  return [surfaces, shift](const Eigen::VectorXd& x) {
    double best = std::numeric_limits<double>::infinity();
    for (const auto* s : surfaces) {
      double m = 0.0, sd = 0.0;
      s->eval(x, m, sd);
      best = std::min(best, m + shift * sd);
    }
    return best;
  };
}

std::function<Eigen::VectorXd(const Eigen::MatrixXd&)> shifted_min_limit_state_batch(
    const std::vector<const GaussianSurface*>& surfaces, double shift) {
  if (surfaces.empty())
    throw std::invalid_argument("shifted_min_limit_state: no surfaces");
  if (shift == 0.0) {
    return [surfaces](const Eigen::MatrixXd& points) {
      Eigen::VectorXd best = surfaces[0]->mean_batch(points);
      for (size_t l = 1; l < surfaces.size(); ++l)
        best = best.cwiseMin(surfaces[l]->mean_batch(points));
      return best;
    };
  }
  return [surfaces, shift](const Eigen::MatrixXd& points) {
    Eigen::VectorXd best =
        Eigen::VectorXd::Constant(points.rows(),
                                  std::numeric_limits<double>::infinity());
    Eigen::VectorXd means, sds;
    for (const auto* s : surfaces) {
      s->eval_batch(points, means, sds);
      best = best.cwiseMin(means + shift * sds);
    }
    return best;
  };
}

}  // namespace relopt
