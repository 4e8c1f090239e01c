#pragma once

#include <Eigen/Dense>
#include <random>

#include "meshless/rbffd.hpp"

namespace meshless::test {

// Jittered grid over [0,1]^d: quasi-uniform, never degenerate.
inline NodeSet quasi_uniform(int per_side, int dim, unsigned seed, double jitter = 0.3) {
    std::mt19937 rng(seed);
    std::uniform_real_distribution<double> u(-jitter, jitter);
    double s = 1.0 / (per_side - 1);
    if (dim == 1) {
        Eigen::VectorXd xs(per_side);
        for (int i = 0; i < per_side; ++i)
            xs[i] = i * s + (i == 0 || i == per_side - 1 ? 0.0 : u(rng) * s);
        return NodeSet::from_1d(xs);
    }
    Eigen::MatrixXd pts(per_side * per_side, 2);
    int r = 0;
    for (int i = 0; i < per_side; ++i)
        for (int j = 0; j < per_side; ++j) {
            pts(r, 0) = i * s + u(rng) * s * 0.5;
            pts(r, 1) = j * s + u(rng) * s * 0.5;
            ++r;
        }
    return NodeSet(std::move(pts));
}

// Random interior evaluation points within [margin, 1-margin]^d.
inline NodeSet random_interior(int count, int dim, unsigned seed, double margin = 0.15) {
    std::mt19937 rng(seed);
    std::uniform_real_distribution<double> u(margin, 1.0 - margin);
    Eigen::MatrixXd pts(count, dim);
    for (int i = 0; i < count; ++i)
        for (int d = 0; d < dim; ++d) pts(i, d) = u(rng);
    return NodeSet(std::move(pts));
}

}  // namespace meshless::test
