#include "layerwise/output_head.hpp"

#include "layerwise/errors.hpp"

#include <fmt/format.h>

namespace layerwise {

namespace {

void require_samples_match(const Matrix& z, const Matrix& t, const char* op) {
    if (z.cols() != t.cols()) {
        throw DimensionMismatch(fmt::format("{}: features have {} samples, targets {}", op,
                                            z.cols(), t.cols()));
    }
}

double residual_sum_of_squares(const OutputHead& v, const Matrix& z, const Matrix& t,
                               const char* op) {
    require_samples_match(z, t, op);
    if (v.weights.rows() != t.rows() || v.weights.cols() != z.rows()) {
        throw DimensionMismatch(fmt::format("{}: head {}x{} for {} features, {} targets", op,
                                            v.weights.rows(), v.weights.cols(), z.rows(),
                                            t.rows()));
    }
    return sum_of_squares(v.predict(z) - t);
}

} // namespace

HeadSolution solve_head_detailed(const Matrix& z, const Matrix& t) {
    require_samples_match(z, t, "solve_head");
    if (z.empty()) throw DimensionMismatch("solve_head: empty feature matrix");
    try {
        return {OutputHead{solve_spd_right(matmul_transposed(t, z), gram(z))}, HeadSolver::Cholesky};
    } catch (const SingularMatrix&) {
        return {solve_head_pinv(z, t), HeadSolver::Pseudoinverse};
    }
}

OutputHead solve_head_pinv(const Matrix& z, const Matrix& t) {
    require_samples_match(z, t, "solve_head_pinv");
    return OutputHead{matmul(t, pseudoinverse(z))};
}

double quadratic_cost(const OutputHead& v, const Matrix& z, const Matrix& t) {
    return 0.5 * residual_sum_of_squares(v, z, t, "quadratic_cost");
}

double mean_sq_error(const OutputHead& v, const Matrix& z, const Matrix& t) {
    if (t.cols() == 0) throw DimensionMismatch("mean_sq_error: no samples");
    return residual_sum_of_squares(v, z, t, "mean_sq_error") / static_cast<double>(t.cols());
}

} // namespace layerwise
