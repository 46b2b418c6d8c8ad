#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

namespace layerwise {

/// Dense row-major matrix of doubles.
///
/// Samples are stored as columns throughout the library: an input batch X is
/// n x N, targets T are m x N, layer outputs Z are p x N.
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0);
    Matrix(std::size_t rows, std::size_t cols, std::vector<double> data);
    Matrix(std::initializer_list<std::initializer_list<double>> rows);

    static Matrix identity(std::size_t n);

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    std::size_t size() const noexcept { return data_.size(); }
    bool empty() const noexcept { return data_.empty(); }

    double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
    double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

    std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
    std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }

    std::span<double> values() noexcept { return data_; }
    std::span<const double> values() const noexcept { return data_; }

    Matrix transposed() const;
    bool all_finite() const noexcept;

    friend bool operator==(const Matrix&, const Matrix&) = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

/// Relative singular-value cutoff used by pseudoinverse() when none is given.
inline constexpr double kDefaultPinvTolerance = 1e-10;

/// Relative pivot floor for the symmetric factorization in solve_spd_right().
inline constexpr double kCholeskyPivotTolerance = 1e-12;

Matrix matmul(const Matrix& a, const Matrix& b);

/// A * B^T without materializing the transpose.
Matrix matmul_transposed(const Matrix& a, const Matrix& b);

/// A^T * B without materializing the transpose.
Matrix transposed_matmul(const Matrix& a, const Matrix& b);

/// Z Z^T. Only the upper triangle is accumulated; the lower one is mirrored,
/// so the result is exactly symmetric.
Matrix gram(const Matrix& z);

/// Returns M with M A = B for symmetric positive definite A, via Cholesky.
/// Throws SingularMatrix when a pivot drops below
/// kCholeskyPivotTolerance * max(diag(A)).
Matrix solve_spd_right(const Matrix& b, const Matrix& a);

/// Moore-Penrose inverse via one-sided Jacobi SVD. Singular values below
/// tol * sigma_max are treated as zero.
Matrix pseudoinverse(const Matrix& z, double tol = kDefaultPinvTolerance);

Matrix operator+(const Matrix& a, const Matrix& b);
Matrix operator-(const Matrix& a, const Matrix& b);
Matrix operator*(double s, const Matrix& a);

/// Elementwise product.
Matrix hadamard(const Matrix& a, const Matrix& b);

double frobenius_norm(const Matrix& a);
double max_abs(const Matrix& a);
double sum_of_squares(const Matrix& a);

/// Copies the listed columns, in order, into a new matrix.
Matrix select_columns(const Matrix& a, std::span<const std::size_t> cols);

} // namespace layerwise
