#include <cmath>
#include <limits>

#include "attnedit/error.hpp"
#include "attnedit/matrix.hpp"
#include "attnedit/random.hpp"
#include "doctest.h"
#include "oracles.hpp"

using namespace attnedit;

TEST_SUITE("matrix") {

TEST_CASE("matmul examples") {
  Rng rng(1);
  const Matrix a = gaussian_matrix(3, 3, rng);
  CHECK(matmul(Matrix::identity(3), a) == a);

  const Matrix b = Matrix::from_rows({{1, 2}, {3, 4}});
  const Matrix p = Matrix::from_rows({{0, 1}, {1, 0}});
  CHECK(matmul(b, p) == Matrix::from_rows({{2, 1}, {4, 3}}));
}

TEST_CASE("matmul agrees with the triple-loop oracle exactly") {
  Rng rng(2);
  const Matrix a = gaussian_matrix(5, 7, rng);
  const Matrix b = gaussian_matrix(7, 3, rng);
  const Matrix expected = oracle::to_matrix(oracle::matmul(oracle::to_grid(a), oracle::to_grid(b)));
  CHECK(max_abs_diff(matmul(a, b), expected) == 0.0);
  CHECK(max_abs_diff(matmul_transpose_b(a, transpose(b)), expected) == 0.0);
}

TEST_CASE("matmul is associative to rounding") {
  Rng rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    const Matrix a = gaussian_matrix(4, 6, rng);
    const Matrix b = gaussian_matrix(6, 5, rng);
    const Matrix c = gaussian_matrix(5, 3, rng);
    const Matrix left = matmul(matmul(a, b), c);
    const Matrix right = matmul(a, matmul(b, c));
    CHECK(frobenius_norm(left - right) <= 1e-9 * frobenius_norm(left));
  }
}

TEST_CASE("dimension mismatch names both shapes") {
  const Matrix a(2, 3), b(2, 3);
  try {
    (void)matmul(a, b);
    FAIL("expected a dimension error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Dimension);
    const std::string msg = e.what();
    CHECK(msg.find("2x3") != std::string::npos);
  }
  CHECK_THROWS_AS((void)(a + Matrix(3, 2)), Error);
  CHECK_THROWS_AS((void)dot(Vector{1, 2}, Vector{1}), Error);
}

TEST_CASE("construction rejects bad shapes and non-finite data") {
  CHECK_THROWS_AS(Matrix(0, 3), Error);
  CHECK_THROWS_AS(Matrix(2, 2, {1, 2, 3}), Error);
  CHECK_THROWS_AS(Matrix(1, 2, {1, std::numeric_limits<double>::quiet_NaN()}), Error);
  CHECK_THROWS_AS(Matrix(1, 1, {std::numeric_limits<double>::infinity()}), Error);
  CHECK_THROWS_AS(Matrix::from_rows({{1, 2}, {3}}), Error);
}

TEST_CASE("transpose") {
  Rng rng(4);
  const Matrix a = gaussian_matrix(4, 6, rng);
  CHECK(transpose(transpose(a)) == a);
  const Matrix s = symmetrized(gaussian_matrix(5, 5, rng));
  CHECK(transpose(s) == s);
  CHECK(transpose(Matrix::from_rows({{1, 2, 3}, {4, 5, 6}})) ==
        Matrix::from_rows({{1, 4}, {2, 5}, {3, 6}}));
}

TEST_CASE("frobenius_norm_sq") {
  CHECK(frobenius_norm_sq(Matrix(3, 4)) == 0.0);
  CHECK(frobenius_norm_sq(Matrix::identity(7)) == 7.0);
  CHECK(frobenius_norm_sq(Matrix::from_rows({{3, 4}})) == 25.0);
}

TEST_CASE("Gram products") {
  Rng rng(5);
  const Matrix a = gaussian_matrix(6, 4, rng);
  const auto g = oracle::to_grid(a);
  const Matrix cols = gram_of_columns(a);
  const Matrix rows = gram_of_rows(a);
  CHECK(cols.rows() == 4);
  CHECK(rows.rows() == 6);
  CHECK(max_asymmetry(cols) == 0.0);
  CHECK(max_asymmetry(rows) == 0.0);
  CHECK(max_abs_diff(cols, oracle::to_matrix(oracle::matmul(oracle::transpose(g), g))) <= 1e-13);
  CHECK(max_abs_diff(rows, oracle::to_matrix(oracle::matmul(g, oracle::transpose(g)))) <= 1e-13);

  SUBCASE("symmetric input gives bit-identical Grams") {
    // Large enough to cross several cache tiles.
    const Matrix s = symmetrized(gaussian_matrix(150, 150, rng));
    CHECK(gram_of_columns(s) == gram_of_rows(s));
  }
}

TEST_CASE("symmetrized and max_asymmetry") {
  const Matrix a = Matrix::from_rows({{1, 2}, {4, 3}});
  CHECK(max_asymmetry(a) == 2.0);
  CHECK(symmetrized(a) == Matrix::from_rows({{1, 3}, {3, 3}}));
  CHECK_THROWS_AS((void)max_asymmetry(Matrix(2, 3)), Error);
}

TEST_CASE("vector helpers") {
  const Matrix a = Matrix::from_rows({{1, 2}, {3, 4}});
  CHECK(matvec(a, Vector{1, 1}) == Vector{3, 7});
  CHECK(norm2(Vector{3, 4}) == 5.0);
  CHECK(frobenius_inner(a, Matrix::identity(2)) == 5.0);
  const Matrix b = broadcast_rows(3, Vector{1, -1});
  CHECK(b == Matrix::from_rows({{1, -1}, {1, -1}, {1, -1}}));
}

}  // TEST_SUITE
