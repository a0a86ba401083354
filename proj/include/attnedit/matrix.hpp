#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

namespace attnedit {

using Vector = std::vector<double>;

/// Dense row-major matrix of doubles.
///
/// Dimensions are always positive. Constructors that take external data reject
/// non-finite entries; element access through operator() is unchecked.
class Matrix {
 public:
  /// Zero-filled rows x cols matrix.
  Matrix(std::size_t rows, std::size_t cols);
  Matrix(std::size_t rows, std::size_t cols, std::vector<double> data);

  static Matrix identity(std::size_t n);
  static Matrix diagonal(std::span<const double> diag);
  static Matrix from_rows(std::initializer_list<std::initializer_list<double>> rows);
  /// 1 x n matrix holding a copy of v.
  static Matrix row_vector(std::span<const double> v);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::size_t size() const noexcept { return data_.size(); }
  bool is_square() const noexcept { return rows_ == cols_; }

  double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

  std::span<double> row(std::size_t i) { return {data_.data() + i * cols_, cols_}; }
  std::span<const double> row(std::size_t i) const {
    return {data_.data() + i * cols_, cols_};
  }

  std::span<double> data() noexcept { return data_; }
  std::span<const double> data() const noexcept { return data_; }

  /// Throws Domain if any entry is NaN or infinite.
  void ensure_finite() const;

  std::string shape() const;

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t rows_;
  std::size_t cols_;
  std::vector<double> data_;
};

Matrix matmul(const Matrix& a, const Matrix& b);
/// a * b^T without forming the transpose.
Matrix matmul_transpose_b(const Matrix& a, const Matrix& b);
Matrix transpose(const Matrix& a);

/// a^T a, exactly symmetric.
Matrix gram_of_columns(const Matrix& a);
/// a a^T, exactly symmetric.
Matrix gram_of_rows(const Matrix& a);

Matrix operator+(const Matrix& a, const Matrix& b);
Matrix operator-(const Matrix& a, const Matrix& b);
Matrix operator*(double s, const Matrix& a);
Matrix& operator+=(Matrix& a, const Matrix& b);

double frobenius_norm_sq(const Matrix& a);
double frobenius_norm(const Matrix& a);
double max_abs_diff(const Matrix& a, const Matrix& b);
/// Largest |a(i,j) - a(j,i)|.
double max_asymmetry(const Matrix& a);
/// (a + a^T) / 2.
Matrix symmetrized(const Matrix& a);
/// sum_ij a(i,j) * b(i,j), i.e. tr(a^T b).
double frobenius_inner(const Matrix& a, const Matrix& b);

Vector matvec(const Matrix& a, std::span<const double> x);
double dot(std::span<const double> x, std::span<const double> y);
double norm2(std::span<const double> x);

/// N x d matrix whose every row is v.
Matrix broadcast_rows(std::size_t n_rows, std::span<const double> v);

}  // namespace attnedit
