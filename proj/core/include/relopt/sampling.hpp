#pragma once

#include <Eigen/Dense>

#include "relopt/rng.hpp"

namespace relopt {

// Latin hypercube design over the box [lower, upper]: one stratified sample
// per row, independently permuted per dimension.
Eigen::MatrixXd latin_hypercube(const Eigen::VectorXd& lower,
                                const Eigen::VectorXd& upper, int count,
                                RngStream& rng);

// Deterministic low-discrepancy points (Halton sequence, leapfrog offset to
// skip the degenerate head); used for multistart seeds.
Eigen::MatrixXd halton_points(int count, int dim, const Eigen::VectorXd& lower,
                              const Eigen::VectorXd& upper);

}  // namespace relopt
