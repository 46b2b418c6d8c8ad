#include "oracles.hpp"

#include "layerwise/errors.hpp"
#include "layerwise/matrix.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace layerwise;

TEST_CASE("matmul: identity and permutation") {
    CHECK(matmul(Matrix::identity(2), Matrix{{1}, {2}}) == Matrix{{1}, {2}});
    CHECK(matmul(Matrix{{1, 2}, {3, 4}}, Matrix{{0, 1}, {1, 0}}) == Matrix{{2, 1}, {4, 3}});
}

TEST_CASE("matmul: matches triple loop on random 3x4 by 4x2") {
    std::mt19937_64 gen(7);
    for (int trial = 0; trial < 20; ++trial) {
        const Matrix a = oracle::random_matrix(3, 4, gen);
        const Matrix b = oracle::random_matrix(4, 2, gen);
        CHECK(oracle::max_abs_diff(matmul(a, b), oracle::naive_matmul(a, b)) <= 1e-12);
        CHECK(oracle::max_abs_diff(matmul_transposed(a, b.transposed()), oracle::naive_matmul(a, b)) <= 1e-12);
        CHECK(oracle::max_abs_diff(transposed_matmul(a.transposed(), b), oracle::naive_matmul(a, b)) <= 1e-12);
    }
}

TEST_CASE("matmul: dimension mismatch") {
    CHECK_THROWS_AS(matmul(Matrix(2, 3), Matrix(2, 3)), DimensionMismatch);
    CHECK_THROWS_AS(Matrix(2, 2, std::vector<double>{1.0}), DimensionMismatch);
}

TEST_CASE("matmul: zero-column operand") {
    const Matrix out = matmul(Matrix(3, 2, 1.0), Matrix(2, 0));
    CHECK(out.rows() == 3);
    CHECK(out.cols() == 0);
}

TEST_CASE("gram: small cases") {
    CHECK(gram(Matrix::identity(2)) == Matrix::identity(2));
    CHECK(gram(Matrix{{1, 1}}) == Matrix{{2}});
    CHECK_THROWS_AS(gram(Matrix()), DimensionMismatch);
}

TEST_CASE("gram: exactly symmetric and positive semidefinite") {
    std::mt19937_64 gen(11);
    for (int trial = 0; trial < 20; ++trial) {
        const Matrix z = oracle::random_matrix(4, 10, gen);
        const Matrix g = gram(z);
        for (std::size_t i = 0; i < 4; ++i)
            for (std::size_t j = 0; j < 4; ++j) CHECK(g(i, j) == g(j, i));
        CHECK(oracle::symmetric_eigenvalues(g).minCoeff() >= -1e-10);
        CHECK(oracle::max_abs_diff(g, oracle::naive_matmul(z, oracle::naive_transpose(z))) <= 1e-12);
    }
}

TEST_CASE("solve_spd_right: scaled identity") {
    const Matrix m = solve_spd_right(Matrix{{2, 4}}, 2.0 * Matrix::identity(2));
    CHECK(m(0, 0) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(m(0, 1) == doctest::Approx(2.0).epsilon(1e-15));
}

TEST_CASE("solve_spd_right: residual on random full-row-rank systems") {
    std::mt19937_64 gen(13);
    for (int trial = 0; trial < 30; ++trial) {
        const std::size_t p = 1 + trial % 8;
        const Matrix z = oracle::random_matrix(p, 40, gen);
        const Matrix t = oracle::random_matrix(3, 40, gen);
        const Matrix a = oracle::naive_matmul(z, oracle::naive_transpose(z));
        const Matrix b = oracle::naive_matmul(t, oracle::naive_transpose(z));
        const Matrix m = solve_spd_right(b, a);
        const Matrix ma = oracle::naive_matmul(m, a);
        CHECK(oracle::max_abs_diff(ma, b) <= 1e-9 * max_abs(b));
        CHECK(oracle::frob_diff(ma, b) <= 1e-8 * (oracle::frob(a) * oracle::frob(m) + oracle::frob(b)));
    }
}

TEST_CASE("solve_spd_right: singular inputs") {
    CHECK_THROWS_AS(solve_spd_right(Matrix{{1, 1}}, Matrix{{1, 0}, {0, 0}}), SingularMatrix);
    CHECK_THROWS_AS(solve_spd_right(Matrix{{1, 1}}, Matrix{{1, 1}, {1, 1}}), SingularMatrix);
    CHECK_THROWS_AS(solve_spd_right(Matrix{{1, 1, 1}}, Matrix::identity(2)), DimensionMismatch);
    CHECK_THROWS_AS(solve_spd_right(Matrix{{1, 1}}, Matrix(2, 3)), DimensionMismatch);

    // Duplicated rows in Z make Z Z^T exactly rank deficient.
    std::mt19937_64 gen(17);
    Matrix z = oracle::random_matrix(3, 20, gen);
    for (std::size_t j = 0; j < 20; ++j) z(2, j) = z(0, j);
    CHECK_THROWS_AS(solve_spd_right(Matrix(1, 3, 1.0), gram(z)), SingularMatrix);
}

TEST_CASE("pseudoinverse: closed-form cases") {
    CHECK(oracle::max_abs_diff(pseudoinverse(Matrix::identity(3)), Matrix::identity(3)) <= 1e-15);
    const Matrix zp = pseudoinverse(Matrix{{2, 0}, {0, 0}});
    CHECK(oracle::max_abs_diff(zp, Matrix{{0.5, 0}, {0, 0}}) <= 1e-15);
    CHECK(pseudoinverse(Matrix(2, 3)) == Matrix(3, 2));
    CHECK_THROWS_AS(pseudoinverse(Matrix()), DimensionMismatch);
    CHECK_THROWS_AS(pseudoinverse(Matrix::identity(2), 0.0), InvalidArgument);
}

TEST_CASE("pseudoinverse: Penrose conditions on random matrices") {
    std::mt19937_64 gen(19);
    SUBCASE("3x8") {
        for (int trial = 0; trial < 20; ++trial) {
            const Matrix z = oracle::random_matrix(3, 8, gen);
            CHECK(oracle::penrose_violation(z, pseudoinverse(z)) <= 1e-8);
        }
    }
    SUBCASE("up to 50x200, both orientations") {
        for (std::size_t rows : {1u, 7u, 25u, 50u}) {
            const Matrix z = oracle::random_matrix(rows, 200, gen);
            CHECK(oracle::penrose_violation(z, pseudoinverse(z)) <= 1e-8);
            const Matrix zt = z.transposed();
            CHECK(oracle::penrose_violation(zt, pseudoinverse(zt)) <= 1e-8);
        }
    }
    SUBCASE("rank deficient") {
        for (std::size_t rank : {1u, 3u, 6u}) {
            const Matrix z = oracle::low_rank(10, 30, rank, gen);
            CHECK(oracle::penrose_violation(z, pseudoinverse(z)) <= 1e-8);
        }
    }
}

TEST_CASE("pseudoinverse: agrees with Eigen's SVD-based inverse") {
    std::mt19937_64 gen(23);
    const Matrix z = oracle::random_matrix(6, 15, gen);
    const Eigen::MatrixXd ref = oracle::to_eigen(z).completeOrthogonalDecomposition().pseudoInverse();
    const Matrix zp = pseudoinverse(z);
    double diff = 0.0;
    for (std::size_t i = 0; i < zp.rows(); ++i)
        for (std::size_t j = 0; j < zp.cols(); ++j) diff = std::max(diff, std::abs(zp(i, j) - ref(i, j)));
    CHECK(diff <= 1e-10 * ref.cwiseAbs().maxCoeff());
}

TEST_CASE("elementwise helpers") {
    const Matrix a{{1, -2}, {3, 4}};
    CHECK(frobenius_norm(a) == doctest::Approx(std::sqrt(30.0)));
    CHECK(max_abs(a) == 4.0);
    CHECK(hadamard(a, a) == Matrix{{1, 4}, {9, 16}});
    CHECK((a - a) == Matrix(2, 2));
    CHECK_THROWS_AS(a + Matrix(1, 2), DimensionMismatch);
    const std::size_t cols[] = {1, 0};
    CHECK(select_columns(a, cols) == Matrix{{-2, 1}, {4, 3}});
}

TEST_CASE("no NaN or Inf from finite inputs") {
    std::mt19937_64 gen(29);
    const Matrix z = oracle::low_rank(5, 12, 2, gen);
    CHECK(pseudoinverse(z).all_finite());
    CHECK(gram(z).all_finite());
    CHECK(pseudoinverse(Matrix(3, 3)).all_finite());
}
