#pragma once

#include "layerwise/matrix.hpp"

namespace layerwise {

/// Linear read-out V (m targets x p features).
struct OutputHead {
    Matrix weights;

    Matrix predict(const Matrix& z) const { return matmul(weights, z); }
};

/// Which solver produced a head; reported for diagnostics only.
enum class HeadSolver { Cholesky, Pseudoinverse };

struct HeadSolution {
    OutputHead head;
    HeadSolver solver = HeadSolver::Cholesky;
};

/// Least-squares head: V minimizing 1/2 ||V Z - T||_F^2.
///
/// Solves V (Z Z^T) = T Z^T by Cholesky; if the factorization reports the Gram
/// matrix singular, falls back to V = T Z^+.
HeadSolution solve_head_detailed(const Matrix& z, const Matrix& t);

inline OutputHead solve_head(const Matrix& z, const Matrix& t) {
    return solve_head_detailed(z, t).head;
}

/// V = T Z^+ unconditionally.
OutputHead solve_head_pinv(const Matrix& z, const Matrix& t);

/// 1/2 * sum over samples and outputs of (V Z - T)^2.
double quadratic_cost(const OutputHead& v, const Matrix& z, const Matrix& t);

/// (1 / sample count) * sum over samples of ||V z_s - t_s||^2.
double mean_sq_error(const OutputHead& v, const Matrix& z, const Matrix& t);

/// Sample-count-normalized form of a quadratic cost: 2 * cost / N.
inline double cost_to_mse(double cost, std::size_t samples) {
    return 2.0 * cost / static_cast<double>(samples);
}

} // namespace layerwise
