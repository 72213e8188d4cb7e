#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

namespace swid {

/// Dense real vector with explicit dimension checks on every binary operation.
class Vector {
 public:
  Vector() = default;
  explicit Vector(std::size_t dim, double fill = 0.0) : data_(dim, fill) {}
  Vector(std::initializer_list<double> values) : data_(values) {}
  explicit Vector(std::vector<double> values) : data_(std::move(values)) {}

  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  double& operator[](std::size_t i) { return data_[i]; }
  double operator[](std::size_t i) const { return data_[i]; }

  std::span<const double> values() const noexcept { return data_; }
  const std::vector<double>& raw() const noexcept { return data_; }

  double norm() const;
  double max_abs() const;
  bool all_finite() const;

  Vector& operator+=(const Vector& other);
  Vector& operator-=(const Vector& other);
  Vector& operator*=(double s);

  friend bool operator==(const Vector&, const Vector&) = default;

 private:
  std::vector<double> data_;
};

Vector operator+(Vector a, const Vector& b);
Vector operator-(Vector a, const Vector& b);
Vector operator*(Vector a, double s);
Vector operator*(double s, Vector a);
double dot(const Vector& a, const Vector& b);
Vector concat(const Vector& a, const Vector& b);

/// Row-major dense matrix. Sized for the handful-of-dimensions problems in
/// this library; no blocking or vectorization.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}
  /// Builds from a row-major list; throws DimensionMismatch unless
  /// values.size() == rows * cols.
  Matrix(std::size_t rows, std::size_t cols, std::vector<double> values);
  Matrix(std::initializer_list<std::initializer_list<double>> rows);

  static Matrix identity(std::size_t n);
  static Matrix diagonal(const Vector& d);
  static Matrix outer(const Vector& a, const Vector& b);
  static Matrix column(const Vector& v);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  bool square() const noexcept { return rows_ == cols_; }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  const std::vector<double>& raw() const noexcept { return data_; }

  Vector row(std::size_t r) const;
  Vector col(std::size_t c) const;
  void set_col(std::size_t c, const Vector& v);

  Matrix transpose() const;
  double trace() const;
  double frobenius_norm() const;
  double max_abs() const;
  bool all_finite() const;
  bool is_symmetric(double tol = 1e-12) const;

  Matrix& operator+=(const Matrix& other);
  Matrix& operator-=(const Matrix& other);
  Matrix& operator*=(double s);

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

Matrix operator+(Matrix a, const Matrix& b);
Matrix operator-(Matrix a, const Matrix& b);
Matrix operator*(Matrix a, double s);
Matrix operator*(double s, Matrix a);
Matrix operator*(const Matrix& a, const Matrix& b);
Vector operator*(const Matrix& a, const Vector& x);

/// Relative pivot tolerance used for rank and singularity decisions.
inline constexpr double kDefaultRankTol = 1e-9;

/// Gauss-Jordan inverse with partial pivoting. Throws Singular when a pivot
/// falls below tol times the largest initial entry magnitude.
Matrix invert(const Matrix& m, double tol = kDefaultRankTol);

/// Solves m * x = b with partial pivoting (same singularity rule as invert).
Vector solve(const Matrix& m, const Vector& b, double tol = kDefaultRankTol);

/// Numerical rank via full-pivot elimination; pivots at or below
/// tol * (largest initial |entry|) count as zero.
std::size_t rank(const Matrix& m, double tol = kDefaultRankTol);

/// Basis of the right null space of m (columns of the result), from the
/// same full-pivot elimination as rank().
Matrix null_space(const Matrix& m, double tol = kDefaultRankTol);

/// Eigenvalues of a symmetric matrix (cyclic Jacobi), ascending.
Vector symmetric_eigenvalues(const Matrix& m);

/// Cholesky test; true when m is symmetric and strictly positive definite.
bool is_positive_definite(const Matrix& m);

/// x^T m y
double quadratic_form(const Vector& x, const Matrix& m, const Vector& y);

}  // namespace swid
