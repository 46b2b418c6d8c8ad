#include "layerwise/matrix.hpp"

#include "layerwise/errors.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <utility>

namespace layerwise {

namespace {

void require_same_shape(const Matrix& a, const Matrix& b, const char* op) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) {
        throw DimensionMismatch(fmt::format("{}: {}x{} vs {}x{}", op, a.rows(), a.cols(),
                                            b.rows(), b.cols()));
    }
}

double dot(std::span<const double> x, std::span<const double> y) {
    double s = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) s += x[i] * y[i];
    return s;
}

// Pseudoinverse of a tall (rows >= cols) matrix. One-sided Jacobi (Hestenes):
// rotate column pairs until mutually orthogonal, accumulating the right
// singular vectors. Columns are kept contiguous to make the sweeps cheap.
Matrix pinv_tall(const Matrix& z, double tol) {
    const std::size_t m = z.rows();
    const std::size_t n = z.cols();

    Matrix a = z.transposed();          // row k of `a` is column k of z
    Matrix v = Matrix::identity(n);     // row k of `v` is right vector k

    constexpr double eps = 1e-15;
    constexpr int max_sweeps = 80;
    for (int sweep = 0; sweep < max_sweeps; ++sweep) {
        bool rotated = false;
        for (std::size_t i = 0; i + 1 < n; ++i) {
            for (std::size_t j = i + 1; j < n; ++j) {
                auto ai = a.row(i);
                auto aj = a.row(j);
                const double alpha = dot(ai, ai);
                const double beta = dot(aj, aj);
                const double gamma = dot(ai, aj);
                if (alpha == 0.0 || beta == 0.0) continue;
                if (std::abs(gamma) <= eps * std::sqrt(alpha * beta)) continue;
                rotated = true;
                const double zeta = (beta - alpha) / (2.0 * gamma);
                const double t = std::copysign(1.0, zeta) / (std::abs(zeta) + std::hypot(1.0, zeta));
                const double c = 1.0 / std::hypot(1.0, t);
                const double s = c * t;
                for (std::size_t k = 0; k < m; ++k) {
                    const double x = ai[k];
                    const double y = aj[k];
                    ai[k] = c * x - s * y;
                    aj[k] = s * x + c * y;
                }
                auto vi = v.row(i);
                auto vj = v.row(j);
                for (std::size_t k = 0; k < n; ++k) {
                    const double x = vi[k];
                    const double y = vj[k];
                    vi[k] = c * x - s * y;
                    vj[k] = s * x + c * y;
                }
            }
        }
        if (!rotated) break;
    }

    std::vector<double> sigma(n);
    double sigma_max = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        sigma[k] = std::sqrt(dot(a.row(k), a.row(k)));
        sigma_max = std::max(sigma_max, sigma[k]);
    }

    // Z+ = sum_k v_k u_k^T / sigma_k with u_k = a_k / sigma_k.
    Matrix out(n, m);
    if (sigma_max == 0.0) return out;
    for (std::size_t k = 0; k < n; ++k) {
        if (sigma[k] <= tol * sigma_max) continue;
        const double inv_sq = 1.0 / (sigma[k] * sigma[k]);
        auto vk = v.row(k);
        auto ak = a.row(k);
        for (std::size_t r = 0; r < n; ++r) {
            const double w = vk[r] * inv_sq;
            if (w == 0.0) continue;
            auto orow = out.row(r);
            for (std::size_t c = 0; c < m; ++c) orow[c] += w * ak[c];
        }
    }
    return out;
}

} // namespace

Matrix::Matrix(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
    if (data_.size() != rows_ * cols_) {
        throw DimensionMismatch(fmt::format("matrix {}x{} given {} values", rows_, cols_,
                                            data_.size()));
    }
}

Matrix::Matrix(std::initializer_list<std::initializer_list<double>> rows) {
    rows_ = rows.size();
    cols_ = rows_ == 0 ? 0 : rows.begin()->size();
    data_.reserve(rows_ * cols_);
    for (const auto& r : rows) {
        if (r.size() != cols_) throw DimensionMismatch("ragged matrix literal");
        data_.insert(data_.end(), r.begin(), r.end());
    }
}

Matrix Matrix::identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
}

Matrix Matrix::transposed() const {
    Matrix t(cols_, rows_);
    for (std::size_t r = 0; r < rows_; ++r)
        for (std::size_t c = 0; c < cols_; ++c) t(c, r) = (*this)(r, c);
    return t;
}

bool Matrix::all_finite() const noexcept {
    return std::all_of(data_.begin(), data_.end(), [](double x) { return std::isfinite(x); });
}

Matrix matmul(const Matrix& a, const Matrix& b) {
    if (a.cols() != b.rows()) {
        throw DimensionMismatch(fmt::format("matmul: {}x{} times {}x{}", a.rows(), a.cols(),
                                            b.rows(), b.cols()));
    }
    Matrix out(a.rows(), b.cols());
    for (std::size_t i = 0; i < a.rows(); ++i) {
        auto orow = out.row(i);
        for (std::size_t k = 0; k < a.cols(); ++k) {
            const double aik = a(i, k);
            if (aik == 0.0) continue;
            auto brow = b.row(k);
            for (std::size_t j = 0; j < b.cols(); ++j) orow[j] += aik * brow[j];
        }
    }
    return out;
}

Matrix matmul_transposed(const Matrix& a, const Matrix& b) {
    if (a.cols() != b.cols()) {
        throw DimensionMismatch(fmt::format("matmul_transposed: {}x{} times ({}x{})^T", a.rows(),
                                            a.cols(), b.rows(), b.cols()));
    }
    Matrix out(a.rows(), b.rows());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < b.rows(); ++j) out(i, j) = dot(a.row(i), b.row(j));
    return out;
}

Matrix transposed_matmul(const Matrix& a, const Matrix& b) {
    if (a.rows() != b.rows()) {
        throw DimensionMismatch(fmt::format("transposed_matmul: ({}x{})^T times {}x{}", a.rows(),
                                            a.cols(), b.rows(), b.cols()));
    }
    Matrix out(a.cols(), b.cols());
    for (std::size_t k = 0; k < a.rows(); ++k) {
        auto arow = a.row(k);
        auto brow = b.row(k);
        for (std::size_t i = 0; i < a.cols(); ++i) {
            const double aki = arow[i];
            if (aki == 0.0) continue;
            auto orow = out.row(i);
            for (std::size_t j = 0; j < b.cols(); ++j) orow[j] += aki * brow[j];
        }
    }
    return out;
}

Matrix gram(const Matrix& z) {
    if (z.empty()) throw DimensionMismatch("gram: empty matrix");
    const std::size_t n = z.rows();
    Matrix g(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i; j < n; ++j) {
            const double s = dot(z.row(i), z.row(j));
            g(i, j) = s;
            g(j, i) = s;
        }
    }
    return g;
}

Matrix solve_spd_right(const Matrix& b, const Matrix& a) {
    const std::size_t n = a.rows();
    if (a.cols() != n) {
        throw DimensionMismatch(fmt::format("solve_spd_right: A is {}x{}", a.rows(), a.cols()));
    }
    if (b.cols() != n) {
        throw DimensionMismatch(fmt::format("solve_spd_right: B has {} cols, A is {}x{}",
                                            b.cols(), n, n));
    }

    double max_diag = 0.0;
    for (std::size_t i = 0; i < n; ++i) max_diag = std::max(max_diag, a(i, i));
    if (!(max_diag > 0.0)) throw SingularMatrix("solve_spd_right: non-positive diagonal");
    const double floor = kCholeskyPivotTolerance * max_diag;

    Matrix l(n, n);
    for (std::size_t j = 0; j < n; ++j) {
        double d = a(j, j);
        for (std::size_t k = 0; k < j; ++k) d -= l(j, k) * l(j, k);
        if (!(d > floor)) {
            throw SingularMatrix(fmt::format("solve_spd_right: pivot {} at {} below {}", d, j, floor));
        }
        const double ljj = std::sqrt(d);
        l(j, j) = ljj;
        for (std::size_t i = j + 1; i < n; ++i) {
            double s = a(i, j);
            for (std::size_t k = 0; k < j; ++k) s -= l(i, k) * l(j, k);
            l(i, j) = s / ljj;
        }
    }

    // M A = B  <=>  A M^T = B^T; each row of B is an independent right-hand side.
    Matrix m(b.rows(), n);
    std::vector<double> y(n);
    for (std::size_t r = 0; r < b.rows(); ++r) {
        for (std::size_t i = 0; i < n; ++i) {
            double s = b(r, i);
            for (std::size_t k = 0; k < i; ++k) s -= l(i, k) * y[k];
            y[i] = s / l(i, i);
        }
        for (std::size_t ii = n; ii-- > 0;) {
            double s = y[ii];
            for (std::size_t k = ii + 1; k < n; ++k) s -= l(k, ii) * m(r, k);
            m(r, ii) = s / l(ii, ii);
        }
    }
    return m;
}

Matrix pseudoinverse(const Matrix& z, double tol) {
    if (z.empty()) throw DimensionMismatch("pseudoinverse: empty matrix");
    if (!(tol > 0.0)) throw InvalidArgument("pseudoinverse: tol must be positive");
    if (z.rows() >= z.cols()) return pinv_tall(z, tol);
    return pinv_tall(z.transposed(), tol).transposed();
}

Matrix operator+(const Matrix& a, const Matrix& b) {
    require_same_shape(a, b, "add");
    Matrix out = a;
    auto o = out.values();
    auto bv = b.values();
    for (std::size_t i = 0; i < o.size(); ++i) o[i] += bv[i];
    return out;
}

Matrix operator-(const Matrix& a, const Matrix& b) {
    require_same_shape(a, b, "subtract");
    Matrix out = a;
    auto o = out.values();
    auto bv = b.values();
    for (std::size_t i = 0; i < o.size(); ++i) o[i] -= bv[i];
    return out;
}

Matrix operator*(double s, const Matrix& a) {
    Matrix out = a;
    for (double& x : out.values()) x *= s;
    return out;
}

Matrix hadamard(const Matrix& a, const Matrix& b) {
    require_same_shape(a, b, "hadamard");
    Matrix out = a;
    auto o = out.values();
    auto bv = b.values();
    for (std::size_t i = 0; i < o.size(); ++i) o[i] *= bv[i];
    return out;
}

double sum_of_squares(const Matrix& a) {
    double s = 0.0;
    for (double x : a.values()) s += x * x;
    return s;
}

double frobenius_norm(const Matrix& a) { return std::sqrt(sum_of_squares(a)); }

double max_abs(const Matrix& a) {
    double m = 0.0;
    for (double x : a.values()) m = std::max(m, std::abs(x));
    return m;
}

Matrix select_columns(const Matrix& a, std::span<const std::size_t> cols) {
    Matrix out(a.rows(), cols.size());
    for (std::size_t j = 0; j < cols.size(); ++j) {
        if (cols[j] >= a.cols()) {
            throw DimensionMismatch(fmt::format("select_columns: index {} >= {}", cols[j], a.cols()));
        }
        for (std::size_t r = 0; r < a.rows(); ++r) out(r, j) = a(r, cols[j]);
    }
    return out;
}

} // namespace layerwise
