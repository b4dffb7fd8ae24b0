#include "relopt/sampling.hpp"

#include <numeric>
#include <stdexcept>
#include <vector>

namespace relopt {

Eigen::MatrixXd latin_hypercube(const Eigen::VectorXd& lower,
                                const Eigen::VectorXd& upper, int count,
                                RngStream& rng) {
  const int dim = static_cast<int>(lower.size());
  if (upper.size() != dim) throw std::invalid_argument("latin_hypercube: bound size mismatch");
  if (count < 1) throw std::invalid_argument("latin_hypercube: count must be >= 1");

  Eigen::MatrixXd points(count, dim);
  std::vector<int> perm(count);
  for (int j = 0; j < dim; ++j) {
    std::iota(perm.begin(), perm.end(), 0);
    for (int i = count - 1; i > 0; --i) {
      const int k = static_cast<int>(rng.below(static_cast<uint64_t>(i) + 1));
      std::swap(perm[i], perm[k]);
    }
    for (int i = 0; i < count; ++i) {
      const double u = (perm[i] + rng.uniform01()) / count;
      points(i, j) = lower[j] + u * (upper[j] - lower[j]);
    }
  }
  return points;
}

namespace {

constexpr int kPrimes[] = {2,  3,  5,  7,  11, 13, 17, 19, 23, 29, 31, 37, 41,
                           43, 47, 53, 59, 61, 67, 71, 73, 79, 83, 89, 97};

double radical_inverse(long long n, int base) {
  double inv = 1.0 / base, q = 0.0, bk = inv;
  while (n > 0) {
    q += (n % base) * bk;
    n /= base;
    bk *= inv;
  }
  return q;
}

}  // namespace

Eigen::MatrixXd halton_points(int count, int dim, const Eigen::VectorXd& lower,
                              const Eigen::VectorXd& upper) {
  if (dim > static_cast<int>(std::size(kPrimes)))
    throw std::invalid_argument("halton_points: dimension too large");
  Eigen::MatrixXd points(count, dim);
  const long long offset = 20;
  for (int i = 0; i < count; ++i)
    for (int j = 0; j < dim; ++j)
      points(i, j) = lower[j] + radical_inverse(offset + i, kPrimes[j]) *
                                    (upper[j] - lower[j]);
  return points;
}

}  // namespace relopt
