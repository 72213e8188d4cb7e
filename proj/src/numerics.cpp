#include "swid/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <utility>

#include "swid/error.hpp"

namespace swid {

namespace {

void require(bool ok, const char* what) {
  if (!ok) throw Error(ErrorKind::DimensionMismatch, what);
}

std::string shape(const Matrix& m) {
  return std::to_string(m.rows()) + "x" + std::to_string(m.cols());
}

}  // namespace

// ---------------------------------------------------------------- Vector

double Vector::norm() const {
  double s = 0.0;
  for (double v : data_) s += v * v;
  return std::sqrt(s);
}

double Vector::max_abs() const {
  double m = 0.0;
  for (double v : data_) m = std::max(m, std::abs(v));
  return m;
}

bool Vector::all_finite() const {
  return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

Vector& Vector::operator+=(const Vector& other) {
  require(size() == other.size(), "vector add: dimensions differ");
  for (std::size_t i = 0; i < size(); ++i) data_[i] += other.data_[i];
  return *this;
}

Vector& Vector::operator-=(const Vector& other) {
  require(size() == other.size(), "vector subtract: dimensions differ");
  for (std::size_t i = 0; i < size(); ++i) data_[i] -= other.data_[i];
  return *this;
}

Vector& Vector::operator*=(double s) {
  for (double& v : data_) v *= s;
  return *this;
}

Vector operator+(Vector a, const Vector& b) { return a += b; }
Vector operator-(Vector a, const Vector& b) { return a -= b; }
Vector operator*(Vector a, double s) { return a *= s; }
Vector operator*(double s, Vector a) { return a *= s; }

double dot(const Vector& a, const Vector& b) {
  require(a.size() == b.size(), "dot: dimensions differ");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

Vector concat(const Vector& a, const Vector& b) {
  std::vector<double> out(a.raw());
  out.insert(out.end(), b.raw().begin(), b.raw().end());
  return Vector(std::move(out));
}

// ---------------------------------------------------------------- Matrix

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> values)
    : rows_(rows), cols_(cols), data_(std::move(values)) {
  if (data_.size() != rows_ * cols_) {
    throw Error(ErrorKind::DimensionMismatch,
                "matrix " + std::to_string(rows) + "x" + std::to_string(cols) + " given " +
                    std::to_string(data_.size()) + " entries");
  }
}

Matrix::Matrix(std::initializer_list<std::initializer_list<double>> rows) {
  rows_ = rows.size();
  cols_ = rows_ == 0 ? 0 : rows.begin()->size();
  data_.reserve(rows_ * cols_);
  for (const auto& r : rows) {
    require(r.size() == cols_, "matrix literal: ragged rows");
    data_.insert(data_.end(), r.begin(), r.end());
  }
}

Matrix Matrix::identity(std::size_t n) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

Matrix Matrix::diagonal(const Vector& d) {
  Matrix m(d.size(), d.size());
  for (std::size_t i = 0; i < d.size(); ++i) m(i, i) = d[i];
  return m;
}

Matrix Matrix::outer(const Vector& a, const Vector& b) {
  Matrix m(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < b.size(); ++j) m(i, j) = a[i] * b[j];
  return m;
}

Matrix Matrix::column(const Vector& v) { return Matrix(v.size(), 1, v.raw()); }

Vector Matrix::row(std::size_t r) const {
  return Vector(std::vector<double>(data_.begin() + static_cast<std::ptrdiff_t>(r * cols_),
                                    data_.begin() + static_cast<std::ptrdiff_t>((r + 1) * cols_)));
}

Vector Matrix::col(std::size_t c) const {
  Vector v(rows_);
  for (std::size_t r = 0; r < rows_; ++r) v[r] = (*this)(r, c);
  return v;
}

void Matrix::set_col(std::size_t c, const Vector& v) {
  require(v.size() == rows_, "set_col: length differs from row count");
  for (std::size_t r = 0; r < rows_; ++r) (*this)(r, c) = v[r];
}

Matrix Matrix::transpose() const {
  Matrix t(cols_, rows_);
  for (std::size_t r = 0; r < rows_; ++r)
    for (std::size_t c = 0; c < cols_; ++c) t(c, r) = (*this)(r, c);
  return t;
}

double Matrix::trace() const {
  require(square(), "trace: matrix not square");
  double s = 0.0;
  for (std::size_t i = 0; i < rows_; ++i) s += (*this)(i, i);
  return s;
}

double Matrix::frobenius_norm() const {
  double s = 0.0;
  for (double v : data_) s += v * v;
  return std::sqrt(s);
}

double Matrix::max_abs() const {
  double m = 0.0;
  for (double v : data_) m = std::max(m, std::abs(v));
  return m;
}

bool Matrix::all_finite() const {
  return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

bool Matrix::is_symmetric(double tol) const {
  if (!square()) return false;
  const double scale = std::max(1.0, max_abs());
  for (std::size_t i = 0; i < rows_; ++i)
    for (std::size_t j = i + 1; j < cols_; ++j)
      if (std::abs((*this)(i, j) - (*this)(j, i)) > tol * scale) return false;
  return true;
}

Matrix& Matrix::operator+=(const Matrix& other) {
  require(rows_ == other.rows_ && cols_ == other.cols_, "matrix add: shapes differ");
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += other.data_[i];
  return *this;
}

Matrix& Matrix::operator-=(const Matrix& other) {
  require(rows_ == other.rows_ && cols_ == other.cols_, "matrix subtract: shapes differ");
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= other.data_[i];
  return *this;
}

Matrix& Matrix::operator*=(double s) {
  for (double& v : data_) v *= s;
  return *this;
}

Matrix operator+(Matrix a, const Matrix& b) { return a += b; }
Matrix operator-(Matrix a, const Matrix& b) { return a -= b; }
Matrix operator*(Matrix a, double s) { return a *= s; }
Matrix operator*(double s, Matrix a) { return a *= s; }

Matrix operator*(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows())
    throw Error(ErrorKind::DimensionMismatch, "matmul " + shape(a) + " * " + shape(b));
  Matrix out(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const double aik = a(i, k);
      if (aik == 0.0) continue;
      for (std::size_t j = 0; j < b.cols(); ++j) out(i, j) += aik * b(k, j);
    }
  return out;
}

Vector operator*(const Matrix& a, const Vector& x) {
  if (a.cols() != x.size())
    throw Error(ErrorKind::DimensionMismatch,
                "matvec " + shape(a) + " * " + std::to_string(x.size()));
  Vector out(a.rows());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < a.cols(); ++j) s += a(i, j) * x[j];
    out[i] = s;
  }
  return out;
}

// ------------------------------------------------------------ elimination

namespace {

struct Pivot {
  std::size_t row = 0;
  std::size_t col = 0;
  double magnitude = 0.0;
};

Pivot largest_in_block(const Matrix& a, std::size_t from) {
  Pivot p{from, from, -1.0};
  for (std::size_t i = from; i < a.rows(); ++i)
    for (std::size_t j = from; j < a.cols(); ++j)
      if (std::abs(a(i, j)) > p.magnitude) p = {i, j, std::abs(a(i, j))};
  return p;
}

void swap_rows(Matrix& a, std::size_t r1, std::size_t r2) {
  if (r1 == r2) return;
  for (std::size_t c = 0; c < a.cols(); ++c) std::swap(a(r1, c), a(r2, c));
}

void swap_cols(Matrix& a, std::size_t c1, std::size_t c2) {
  if (c1 == c2) return;
  for (std::size_t r = 0; r < a.rows(); ++r) std::swap(a(r, c1), a(r, c2));
}

}  // namespace

Matrix invert(const Matrix& m, double tol) {
  if (!m.square()) throw Error(ErrorKind::DimensionMismatch, "invert: " + shape(m) + " not square");
  const std::size_t n = m.rows();
  Matrix a = m;
  Matrix inv = Matrix::identity(n);
  const double threshold = tol * m.max_abs();
  std::vector<std::pair<std::size_t, std::size_t>> col_swaps;

  // Full-pivot Gauss-Jordan so that the singularity decision agrees with rank().
  for (std::size_t k = 0; k < n; ++k) {
    const Pivot p = largest_in_block(a, k);
    if (p.magnitude <= threshold || p.magnitude == 0.0)
      throw Error(ErrorKind::Singular, "invert: pivot " + std::to_string(p.magnitude) +
                                           " at step " + std::to_string(k));
    swap_rows(a, k, p.row);
    swap_rows(inv, k, p.row);
    swap_cols(a, k, p.col);
    col_swaps.emplace_back(k, p.col);

    const double pivot = a(k, k);
    for (std::size_t c = 0; c < n; ++c) {
      a(k, c) /= pivot;
      inv(k, c) /= pivot;
    }
    for (std::size_t r = 0; r < n; ++r) {
      if (r == k) continue;
      const double f = a(r, k);
      if (f == 0.0) continue;
      for (std::size_t c = 0; c < n; ++c) {
        a(r, c) -= f * a(k, c);
        inv(r, c) -= f * inv(k, c);
      }
    }
  }
  // A * P = E^{-1}  =>  A^{-1} = P * E; undo the column permutation on rows.
  for (auto it = col_swaps.rbegin(); it != col_swaps.rend(); ++it) swap_rows(inv, it->first, it->second);
  return inv;
}

Vector solve(const Matrix& m, const Vector& b, double tol) {
  if (!m.square() || m.rows() != b.size())
    throw Error(ErrorKind::DimensionMismatch, "solve: " + shape(m) + " with rhs " + std::to_string(b.size()));
  const std::size_t n = m.rows();
  Matrix a = m;
  Vector x = b;
  const double threshold = tol * m.max_abs();
  for (std::size_t k = 0; k < n; ++k) {
    std::size_t p = k;
    for (std::size_t i = k + 1; i < n; ++i)
      if (std::abs(a(i, k)) > std::abs(a(p, k))) p = i;
    if (std::abs(a(p, k)) <= threshold || a(p, k) == 0.0)
      throw Error(ErrorKind::Singular, "solve: pivot below tolerance at step " + std::to_string(k));
    swap_rows(a, k, p);
    std::swap(x[k], x[p]);
    for (std::size_t i = k + 1; i < n; ++i) {
      const double f = a(i, k) / a(k, k);
      if (f == 0.0) continue;
      for (std::size_t j = k; j < n; ++j) a(i, j) -= f * a(k, j);
      x[i] -= f * x[k];
    }
  }
  for (std::size_t k = n; k-- > 0;) {
    double s = x[k];
    for (std::size_t j = k + 1; j < n; ++j) s -= a(k, j) * x[j];
    x[k] = s / a(k, k);
  }
  return x;
}

std::size_t rank(const Matrix& m, double tol) {
  Matrix a = m;
  const double threshold = tol * m.max_abs();
  const std::size_t steps = std::min(a.rows(), a.cols());
  std::size_t r = 0;
  for (std::size_t k = 0; k < steps; ++k) {
    const Pivot p = largest_in_block(a, k);
    if (p.magnitude <= threshold || p.magnitude == 0.0) break;
    swap_rows(a, k, p.row);
    swap_cols(a, k, p.col);
    for (std::size_t i = k + 1; i < a.rows(); ++i) {
      const double f = a(i, k) / a(k, k);
      for (std::size_t j = k; j < a.cols(); ++j) a(i, j) -= f * a(k, j);
    }
    ++r;
  }
  return r;
}

Matrix null_space(const Matrix& m, double tol) {
  // Reduced row echelon form with full pivoting; free columns span the kernel.
  Matrix a = m;
  const std::size_t rows = a.rows();
  const std::size_t cols = a.cols();
  const double threshold = tol * m.max_abs();
  std::vector<std::size_t> perm(cols);
  std::iota(perm.begin(), perm.end(), 0);

  std::size_t r = 0;
  for (; r < std::min(rows, cols); ++r) {
    const Pivot p = largest_in_block(a, r);
    if (p.magnitude <= threshold || p.magnitude == 0.0) break;
    swap_rows(a, r, p.row);
    swap_cols(a, r, p.col);
    std::swap(perm[r], perm[p.col]);
    const double pivot = a(r, r);
    for (std::size_t c = 0; c < cols; ++c) a(r, c) /= pivot;
    for (std::size_t i = 0; i < rows; ++i) {
      if (i == r) continue;
      const double f = a(i, r);
      if (f == 0.0) continue;
      for (std::size_t c = 0; c < cols; ++c) a(i, c) -= f * a(r, c);
    }
  }

  Matrix basis(cols, cols - r);
  for (std::size_t f = r; f < cols; ++f) {
    Vector z(cols);
    z[perm[f]] = 1.0;
    for (std::size_t i = 0; i < r; ++i) z[perm[i]] = -a(i, f);
    basis.set_col(f - r, z);
  }
  return basis;
}

Vector symmetric_eigenvalues(const Matrix& m) {
  if (!m.square()) throw Error(ErrorKind::DimensionMismatch, "eigenvalues: " + shape(m) + " not square");
  const std::size_t n = m.rows();
  Matrix a = m;
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j) off += a(i, j) * a(i, j);
    if (off <= 1e-30 * std::max(1.0, a.frobenius_norm() * a.frobenius_norm())) break;
    for (std::size_t p = 0; p < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        if (a(p, q) == 0.0) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * a(p, q));
        const double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (std::size_t k = 0; k < n; ++k) {
          const double akp = a(k, p);
          const double akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double apk = a(p, k);
          const double aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
      }
    }
  }
  std::vector<double> eig(n);
  for (std::size_t i = 0; i < n; ++i) eig[i] = a(i, i);
  std::sort(eig.begin(), eig.end());
  return Vector(std::move(eig));
}

bool is_positive_definite(const Matrix& m) {
  if (!m.is_symmetric(1e-10)) return false;
  const std::size_t n = m.rows();
  Matrix l(n, n);
  for (std::size_t j = 0; j < n; ++j) {
    double d = m(j, j);
    for (std::size_t k = 0; k < j; ++k) d -= l(j, k) * l(j, k);
    if (!(d > 0.0)) return false;
    l(j, j) = std::sqrt(d);
    for (std::size_t i = j + 1; i < n; ++i) {
      double s = m(i, j);
      for (std::size_t k = 0; k < j; ++k) s -= l(i, k) * l(j, k);
      l(i, j) = s / l(j, j);
    }
  }
  return true;
}

double quadratic_form(const Vector& x, const Matrix& m, const Vector& y) {
  if (m.rows() != x.size() || m.cols() != y.size())
    throw Error(ErrorKind::DimensionMismatch, "quadratic form: " + shape(m) + " with " +
                                                  std::to_string(x.size()) + "/" + std::to_string(y.size()));
  return dot(x, m * y);
}

}  // namespace swid
