#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <filesystem>
#include <fstream>

#include "relopt/kriging.hpp"
#include "relopt/rng.hpp"
#include "relopt/sampling.hpp"

using namespace relopt;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

DesignOfExperiments doe_1d(std::initializer_list<std::pair<double, double>> pts) {
  DesignOfExperiments doe;
  doe.inputs.resize(static_cast<int>(pts.size()), 1);
  doe.outputs.resize(static_cast<int>(pts.size()));
  int i = 0;
  for (const auto& [x, y] : pts) {
    doe.inputs(i, 0) = x;
    doe.outputs[i] = y;
    ++i;
  }
  return doe;
}

// Direct multivariate-normal negative log density with the GLS trend and
// the profiled variance plugged in; an independent route to the profiled
// likelihood (no Cholesky shared with the implementation).
double direct_density_nll(const DesignOfExperiments& doe, TrendBasis basis,
                          const VectorXd& lengths, double nugget) {
  const int m = doe.points();
  MatrixXd corr(m, m);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j)
      corr(i, j) = KrigingModel::correlation(doe.inputs.row(i).transpose(),
                                             doe.inputs.row(j).transpose(), lengths);
  corr.diagonal().array() += nugget;
  MatrixXd f(m, trend_size(basis, doe.dim()));
  for (int i = 0; i < m; ++i)
    f.row(i) = trend_eval(basis, doe.inputs.row(i).transpose()).transpose();

  const MatrixXd corr_inv = corr.inverse();
  const MatrixXd normal = f.transpose() * corr_inv * f;
  const VectorXd beta = normal.ldlt().solve(f.transpose() * corr_inv * doe.outputs);
  const VectorXd resid = doe.outputs - f * beta;
  const double sigma2 = resid.dot(corr_inv * resid) / m;
  const double logdet = std::log(corr.determinant());
  const double quad = resid.dot(corr_inv * resid) / sigma2;
  return 0.5 * (m * std::log(2.0 * M_PI) + m * std::log(sigma2) + logdet + quad);
}

}  // namespace

TEST_SUITE_BEGIN("kriging");

TEST_CASE("correlation values") {
  VectorXd x(1), y(1), l(1);
  x << 0.0;
  y << 1.0;
  l << 1.0;
  CHECK(KrigingModel::correlation(x, x, l) == 1.0);
  CHECK(KrigingModel::correlation(x, y, l) ==
        doctest::Approx(std::exp(-1.0)).epsilon(1e-15));

  VectorXd a(2), b(2), l2(2);
  a << 0.0, 0.0;
  b << 1.0, 2.0;
  l2 << 1.0, 2.0;
  CHECK(KrigingModel::correlation(a, b, l2) ==
        doctest::Approx(std::exp(-2.0)).epsilon(1e-15));
  CHECK(KrigingModel::correlation(a, b, l2) ==
        KrigingModel::correlation(b, a, l2));

  VectorXd bad(2);
  bad << 1.0, 0.0;
  CHECK_THROWS_AS((void)KrigingModel::correlation(a, b, bad), std::domain_error);
}

TEST_CASE("fit interpolates exactly") {
  const auto doe = doe_1d({{0.0, 0.0}, {1.0, 1.0}, {2.0, 4.0}});
  const KrigingModel model = KrigingModel::fit(doe);
  for (int i = 0; i < doe.points(); ++i) {
    double mean = 0.0, variance = 0.0;
    model.predict(doe.inputs.row(i).transpose(), mean, variance);
    CHECK(mean == doctest::Approx(doe.outputs[i]).epsilon(1e-8));
    CHECK(variance <= 1e-6 * std::max(model.process_variance(), 1e-300));
  }
}

TEST_CASE("constant outputs recover the constant with zero variance") {
  const auto doe = doe_1d({{0.0, 5.5}, {1.0, 5.5}, {2.5, 5.5}, {4.0, 5.5}});
  const KrigingModel model = KrigingModel::fit(doe);
  CHECK(model.trend_coefficients()[0] == doctest::Approx(5.5).epsilon(1e-10));
  CHECK(model.process_variance() <= 1e-10);
  // NLL is finite and flat in the length scale for the zero-residual case.
  VectorXd l1(1), l2(1);
  l1 << 0.5;
  l2 << 3.0;
  const double n1 = KrigingModel::negative_log_likelihood(doe, TrendBasis::Constant, l1);
  const double n2 = KrigingModel::negative_log_likelihood(doe, TrendBasis::Constant, l2);
  CHECK(std::isfinite(n1));
  CHECK(n1 == doctest::Approx(n2).epsilon(1e-8));
}

TEST_CASE("profiled likelihood matches the direct density oracle") {
  RngStream rng(derive_seed(5, "nll-doe"));
  DesignOfExperiments doe;
  doe.inputs.resize(5, 1);
  doe.outputs.resize(5);
  for (int i = 0; i < 5; ++i) {
    doe.inputs(i, 0) = i + 0.3 * rng.uniform01();
    doe.outputs[i] = std::sin(doe.inputs(i, 0)) + 0.2 * rng.normal();
  }
  for (double len : {0.3, 1.0, 2.7}) {
    VectorXd l(1);
    l << len;
    const double profiled =
        KrigingModel::negative_log_likelihood(doe, TrendBasis::Constant, l);
    const double direct = direct_density_nll(doe, TrendBasis::Constant, l, 1e-12);
    CHECK(profiled == doctest::Approx(direct).epsilon(1e-8));
  }
}

TEST_CASE("tiny lengths reduce to the iid Gaussian likelihood") {
  const auto doe = doe_1d({{0.0, 1.0}, {5.0, -2.0}, {10.0, 0.5}, {15.0, 3.0}});
  VectorXd l(1);
  l << 1e-4;  // correlations vanish on distinct points
  const double nll = KrigingModel::negative_log_likelihood(doe, TrendBasis::Constant, l);
  const int m = doe.points();
  const double mean = doe.outputs.mean();
  const double sigma2 = (doe.outputs.array() - mean).square().sum() / m;
  const double iid = 0.5 * (m * std::log(2.0 * M_PI) + m * std::log(sigma2) + m);
  CHECK(nll == doctest::Approx(iid).epsilon(1e-8));
}

TEST_CASE("identifiability and singularity errors") {
  DesignOfExperiments doe;
  doe.inputs.resize(2, 2);
  doe.inputs << 0.0, 0.0, 1.0, 1.0;
  doe.outputs.resize(2);
  doe.outputs << 1.0, 2.0;
  KrigingFitOptions options;
  options.basis = TrendBasis::Linear;  // p = 3 > m = 2
  CHECK_THROWS_AS((void)KrigingModel::fit(doe, options), KrigingFitError);

  DesignOfExperiments dup;
  dup.inputs.resize(2, 1);
  dup.inputs << 1.0, 1.0;
  dup.outputs.resize(2);
  dup.outputs << 0.0, 1.0;
  CHECK_THROWS(dup.validate());
}

TEST_CASE("leave-one-out errors are consistent with predicted variance") {
  // Smooth 2-D function on a 20-point Latin hypercube.
  RngStream rng(derive_seed(42, "loo"));
  VectorXd lo(2), hi(2);
  lo << 0.0, 0.0;
  hi << 4.0, 4.0;
  const MatrixXd inputs = latin_hypercube(lo, hi, 20, rng);
  DesignOfExperiments doe;
  doe.inputs = inputs;
  doe.outputs.resize(20);
  for (int i = 0; i < 20; ++i)
    doe.outputs[i] = std::sin(inputs(i, 0)) * std::cos(inputs(i, 1)) +
                     0.5 * inputs(i, 0);
  const KrigingModel full = KrigingModel::fit(doe);

  // Refit each leave-one-out subset with frozen hyperparameters.
  double sum2 = 0.0;
  for (int i = 0; i < 20; ++i) {
    DesignOfExperiments sub;
    sub.inputs.resize(19, 2);
    sub.outputs.resize(19);
    int r = 0;
    for (int j = 0; j < 20; ++j) {
      if (j == i) continue;
      sub.inputs.row(r) = doe.inputs.row(j);
      sub.outputs[r] = doe.outputs[j];
      ++r;
    }
    const KrigingModel m = KrigingModel::with_hyperparameters(
        sub, TrendBasis::Constant, full.lengths(), full.process_variance());
    double mean = 0.0, variance = 0.0;
    m.predict(doe.inputs.row(i).transpose(), mean, variance);
    const double standardized =
        (doe.outputs[i] - mean) / std::sqrt(std::max(variance, 1e-300));
    sum2 += standardized * standardized;
  }
  const double variance_of_standardized = sum2 / 20.0;
  CHECK(variance_of_standardized >= 0.3);
  CHECK(variance_of_standardized <= 3.0);
}

TEST_CASE("far from the DOE the prediction reverts to the trend") {
  const auto doe = doe_1d({{0.0, 1.0}, {1.0, 2.0}, {2.0, 1.5}});
  VectorXd lengths(1);
  lengths << 0.5;
  const KrigingModel model =
      KrigingModel::with_hyperparameters(doe, TrendBasis::Constant, lengths);
  VectorXd far(1);
  far << 100.0;
  double mean = 0.0, variance = 0.0;
  model.predict(far, mean, variance);
  CHECK(mean == doctest::Approx(model.trend_coefficients()[0]).epsilon(1e-10));
  CHECK(variance >= model.process_variance());
}

TEST_CASE("permuting DOE rows leaves predictions unchanged") {
  RngStream rng(derive_seed(77, "perm"));
  DesignOfExperiments doe;
  doe.inputs.resize(12, 2);
  doe.outputs.resize(12);
  for (int i = 0; i < 12; ++i) {
    doe.inputs(i, 0) = rng.uniform(0.0, 3.0);
    doe.inputs(i, 1) = rng.uniform(0.0, 3.0);
    doe.outputs[i] = doe.inputs(i, 0) * doe.inputs(i, 1) + rng.normal() * 0.1;
  }
  DesignOfExperiments permuted;
  permuted.inputs.resize(12, 2);
  permuted.outputs.resize(12);
  const int perm[12] = {5, 2, 9, 0, 11, 7, 4, 1, 10, 3, 8, 6};
  for (int i = 0; i < 12; ++i) {
    permuted.inputs.row(i) = doe.inputs.row(perm[i]);
    permuted.outputs[i] = doe.outputs[perm[i]];
  }
  const KrigingModel a = KrigingModel::fit(doe);
  const KrigingModel b = KrigingModel::fit(permuted);
  RngStream qrng(derive_seed(78, "perm-queries"));
  for (int q = 0; q < 30; ++q) {
    VectorXd x(2);
    x << qrng.uniform(-0.5, 3.5), qrng.uniform(-0.5, 3.5);
    double ma, va, mb, vb;
    a.predict(x, ma, va);
    b.predict(x, mb, vb);
    CHECK(ma == doctest::Approx(mb).epsilon(1e-10));
    CHECK(va == doctest::Approx(vb).epsilon(1e-8));
  }
}

TEST_CASE("adding a point never increases variance (frozen hyperparameters)") {
  RngStream rng(derive_seed(99, "nested"));
  DesignOfExperiments small;
  small.inputs.resize(8, 2);
  small.outputs.resize(8);
  for (int i = 0; i < 8; ++i) {
    small.inputs(i, 0) = rng.uniform(0.0, 2.0);
    small.inputs(i, 1) = rng.uniform(0.0, 2.0);
    small.outputs[i] = std::cos(small.inputs.row(i).sum());
  }
  DesignOfExperiments big = small;
  big.inputs.conservativeResize(9, Eigen::NoChange);
  big.outputs.conservativeResize(9);
  big.inputs(8, 0) = 1.234;
  big.inputs(8, 1) = 0.567;
  big.outputs[8] = std::cos(big.inputs.row(8).sum());

  VectorXd lengths(2);
  lengths << 1.0, 1.0;
  const double sigma2 = 1.0;
  const KrigingModel ma =
      KrigingModel::with_hyperparameters(small, TrendBasis::Constant, lengths, sigma2);
  const KrigingModel mb =
      KrigingModel::with_hyperparameters(big, TrendBasis::Constant, lengths, sigma2);
  for (int q = 0; q < 200; ++q) {
    VectorXd x(2);
    x << rng.uniform(-0.5, 2.5), rng.uniform(-0.5, 2.5);
    double m1, v1, m2, v2;
    ma.predict(x, m1, v1);
    mb.predict(x, m2, v2);
    CHECK(v2 <= v1 + 1e-9 * sigma2);
  }
}

TEST_CASE("batch prediction agrees with single-point prediction") {
  RngStream rng(derive_seed(123, "batch"));
  DesignOfExperiments doe;
  doe.inputs.resize(30, 3);
  doe.outputs.resize(30);
  for (int i = 0; i < 30; ++i) {
    for (int k = 0; k < 3; ++k) doe.inputs(i, k) = rng.uniform(0.0, 1.0);
    doe.outputs[i] = doe.inputs.row(i).squaredNorm();
  }
  const KrigingModel model = KrigingModel::fit(doe);
  MatrixXd queries(500, 3);
  for (int i = 0; i < queries.rows(); ++i)
    for (int k = 0; k < 3; ++k) queries(i, k) = rng.uniform(-0.2, 1.2);
  VectorXd means, variances;
  model.predict_batch(queries, means, variances);
  // Agreement up to summation-order round-off (the residual weights of a
  // smooth near-singular system amplify last-bit differences).
  for (int i = 0; i < queries.rows(); i += 37) {
    double mean = 0.0, variance = 0.0;
    model.predict(queries.row(i).transpose(), mean, variance);
    CHECK(means[i] == doctest::Approx(mean).epsilon(1e-8));
    CHECK(variances[i] == doctest::Approx(variance).epsilon(1e-6));
    CHECK(model.predict_mean(queries.row(i).transpose()) ==
          doctest::Approx(mean).epsilon(1e-8));
  }
}

TEST_CASE("correlation factor reproduces the correlation matrix") {
  RngStream rng(derive_seed(31, "factor"));
  DesignOfExperiments doe;
  doe.inputs.resize(15, 2);
  doe.outputs.resize(15);
  for (int i = 0; i < 15; ++i) {
    doe.inputs(i, 0) = rng.uniform(0.0, 5.0);
    doe.inputs(i, 1) = rng.uniform(0.0, 5.0);
    doe.outputs[i] = std::sin(doe.inputs(i, 0));
  }
  const KrigingModel model = KrigingModel::fit(doe);
  const int m = doe.points();
  MatrixXd corr(m, m);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j)
      corr(i, j) = KrigingModel::correlation(doe.inputs.row(i).transpose(),
                                             doe.inputs.row(j).transpose(),
                                             model.lengths());
  corr.diagonal().array() += model.nugget();
  const MatrixXd rebuilt =
      model.correlation_factor() * model.correlation_factor().transpose();
  CHECK((rebuilt - corr).norm() / corr.norm() <= 1e-10);
}

TEST_CASE("snapshot save and load round trip") {
  const auto doe = doe_1d({{0.0, 0.0}, {1.0, 1.0}, {2.0, 4.0}, {3.0, 9.0}});
  const KrigingModel model = KrigingModel::fit(doe);
  const auto path = std::filesystem::temp_directory_path() / "relopt_kriging_test.txt";
  model.save(path, "deadbeef00000000");

  const KrigingModel loaded = KrigingModel::load(path, "deadbeef00000000");
  RngStream rng(derive_seed(55, "snapshot"));
  for (int q = 0; q < 20; ++q) {
    VectorXd x(1);
    x << rng.uniform(-1.0, 4.0);
    double m1, v1, m2, v2;
    model.predict(x, m1, v1);
    loaded.predict(x, m2, v2);
    CHECK(m1 == doctest::Approx(m2).epsilon(1e-14));
    CHECK(v1 == doctest::Approx(v2).epsilon(1e-12));
  }
  CHECK_THROWS((void)KrigingModel::load(path, "0123456789abcdef"));

  // Byte-stable: saving the loaded model reproduces the file.
  const auto path2 = std::filesystem::temp_directory_path() / "relopt_kriging_test2.txt";
  loaded.save(path2, "deadbeef00000000");
  std::ifstream f1(path), f2(path2);
  std::string s1((std::istreambuf_iterator<char>(f1)), std::istreambuf_iterator<char>());
  std::string s2((std::istreambuf_iterator<char>(f2)), std::istreambuf_iterator<char>());
  CHECK(s1 == s2);
  std::filesystem::remove(path);
  std::filesystem::remove(path2);
}

TEST_SUITE_END();
