#pragma once

#include <Eigen/Dense>
#include <functional>
#include <memory>
#include <vector>

#include "relopt/kriging.hpp"

namespace relopt {

// A probabilistic response surface over the physical space: Gaussian
// prediction with pointwise mean and standard deviation. Implemented by the
// kriging emulator (possibly on a subspace of the physical coordinates) and
// by analytic stand-ins in tests.
class GaussianSurface {
 public:
  virtual ~GaussianSurface() = default;
  virtual void eval(const Eigen::VectorXd& x, double& mean, double& sd) const = 0;
  virtual double mean_only(const Eigen::VectorXd& x) const {
    double m = 0.0, s = 0.0;
    eval(x, m, s);
    return m;
  }
  virtual void eval_batch(const Eigen::MatrixXd& points, Eigen::VectorXd& means,
                          Eigen::VectorXd& sds) const {
    means.resize(points.rows());
    sds.resize(points.rows());
    for (int i = 0; i < points.rows(); ++i)
      eval(points.row(i).transpose(), means[i], sds[i]);
  }
  virtual Eigen::VectorXd mean_batch(const Eigen::MatrixXd& points) const {
    Eigen::VectorXd means(points.rows());
    for (int i = 0; i < points.rows(); ++i)
      means[i] = mean_only(points.row(i).transpose());
    return means;
  }
};

// Adapts a kriging model built over a subset of the physical dimensions.
// An empty dimension list means the model consumes the full vector.
class KrigingSurface final : public GaussianSurface {
 public:
  KrigingSurface(const KrigingModel& model, std::vector<int> dims = {})
      : model_(&model), dims_(std::move(dims)) {}

  void eval(const Eigen::VectorXd& x, double& mean, double& sd) const override;
  double mean_only(const Eigen::VectorXd& x) const override;
  void eval_batch(const Eigen::MatrixXd& points, Eigen::VectorXd& means,
                  Eigen::VectorXd& sds) const override;
  Eigen::VectorXd mean_batch(const Eigen::MatrixXd& points) const override;

  const KrigingModel& model() const { return *model_; }
  Eigen::VectorXd project(const Eigen::VectorXd& x) const;
  Eigen::MatrixXd project_rows(const Eigen::MatrixXd& points) const;

 private:
  const KrigingModel* model_;
  std::vector<int> dims_;
};

class AnalyticSurface final : public GaussianSurface {
 public:
  using Fn = std::function<double(const Eigen::VectorXd&)>;
  AnalyticSurface(Fn mean, Fn sd) : mean_(std::move(mean)), sd_(std::move(sd)) {}

  void eval(const Eigen::VectorXd& x, double& mean, double& sd) const override {
    mean = mean_(x);
    sd = sd_(x);
  }
  double mean_only(const Eigen::VectorXd& x) const override { return mean_(x); }

 private:
  Fn mean_, sd_;
};

// Limit state from a set of surfaces, each shifted by `shift` standard
// deviations, combined as a serial system (pointwise minimum). With a single
// surface and shift 0 this is just the surrogate mean.
std::function<double(const Eigen::VectorXd&)> shifted_min_limit_state(
    const std::vector<const GaussianSurface*>& surfaces, double shift);
std::function<Eigen::VectorXd(const Eigen::MatrixXd&)> shifted_min_limit_state_batch(
    const std::vector<const GaussianSurface*>& surfaces, double shift);

}  // namespace relopt
