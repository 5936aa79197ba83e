#ifndef RKFLAB_MAT_HPP_
#define RKFLAB_MAT_HPP_

// Small dense row-major matrices and vectors templated on the scalar type.
// The filter arithmetic is written once against this interface and runs both
// on plain doubles and on autodiff tape variables; fused-node overloads for
// the tape scalar live next to the tape (autodiff.hpp) and keep the exact
// accumulation order of the generic loops, so the two paths agree bitwise.

#include <cassert>
#include <cmath>
#include <cstddef>
#include <vector>

#include "rkflab/errors.hpp"
#include "rkflab/scalar_ops.hpp"

namespace rkflab {

template <class S>
class Vec {
 public:
  Vec() = default;
  explicit Vec(int n) : a_(static_cast<std::size_t>(n)) {}
  Vec(int n, const S& fill) : a_(static_cast<std::size_t>(n), fill) {}
  Vec(std::initializer_list<S> xs) : a_(xs) {}

  int size() const { return static_cast<int>(a_.size()); }
  S& operator[](int i) { return a_[static_cast<std::size_t>(i)]; }
  const S& operator[](int i) const { return a_[static_cast<std::size_t>(i)]; }
  S* data() { return a_.data(); }
  const S* data() const { return a_.data(); }

 private:
  std::vector<S> a_;
};

template <class S>
class Mat {
 public:
  Mat() = default;
  Mat(int rows, int cols) : rows_(rows), cols_(cols), a_(static_cast<std::size_t>(rows) * cols) {}
  Mat(int rows, int cols, const S& fill)
      : rows_(rows), cols_(cols), a_(static_cast<std::size_t>(rows) * cols, fill) {}

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  S& operator()(int i, int j) { return a_[static_cast<std::size_t>(i) * cols_ + j]; }
  const S& operator()(int i, int j) const { return a_[static_cast<std::size_t>(i) * cols_ + j]; }
  S* data() { return a_.data(); }
  const S* data() const { return a_.data(); }

  static Mat identity(int n) {
    Mat m(n, n, S(0.0));
    for (int i = 0; i < n; ++i) m(i, i) = S(1.0);
    return m;
  }

 private:
  int rows_ = 0;
  int cols_ = 0;
  std::vector<S> a_;
};

using Vector = Vec<double>;
using Matrix = Mat<double>;

// ---------------------------------------------------------------------------
// Generic arithmetic. All loops accumulate in a fixed left-to-right order.

template <class S>
Mat<S> mat_mul(const Mat<S>& a, const Mat<S>& b) {
  assert(a.cols() == b.rows());
  Mat<S> out(a.rows(), b.cols());
  for (int i = 0; i < a.rows(); ++i) {
    for (int j = 0; j < b.cols(); ++j) {
      S acc = a(i, 0) * b(0, j);
      for (int k = 1; k < a.cols(); ++k) acc = acc + a(i, k) * b(k, j);
      out(i, j) = acc;
    }
  }
  return out;
}

template <class S>
Vec<S> mat_vec(const Mat<S>& a, const Vec<S>& x) {
  assert(a.cols() == x.size());
  Vec<S> out(a.rows());
  for (int i = 0; i < a.rows(); ++i) {
    S acc = a(i, 0) * x[0];
    for (int k = 1; k < a.cols(); ++k) acc = acc + a(i, k) * x[k];
    out[i] = acc;
  }
  return out;
}

template <class S>
Mat<S> mat_add(const Mat<S>& a, const Mat<S>& b) {
  assert(a.rows() == b.rows() && a.cols() == b.cols());
  Mat<S> out(a.rows(), a.cols());
  for (int i = 0; i < a.rows(); ++i)
    for (int j = 0; j < a.cols(); ++j) out(i, j) = a(i, j) + b(i, j);
  return out;
}

template <class S>
Mat<S> mat_sub(const Mat<S>& a, const Mat<S>& b) {
  assert(a.rows() == b.rows() && a.cols() == b.cols());
  Mat<S> out(a.rows(), a.cols());
  for (int i = 0; i < a.rows(); ++i)
    for (int j = 0; j < a.cols(); ++j) out(i, j) = a(i, j) - b(i, j);
  return out;
}

template <class S>
Mat<S> mat_scale(const Mat<S>& a, double c) {
  Mat<S> out(a.rows(), a.cols());
  for (int i = 0; i < a.rows(); ++i)
    for (int j = 0; j < a.cols(); ++j) out(i, j) = a(i, j) * c;
  return out;
}

template <class S>
Mat<S> transpose(const Mat<S>& a) {
  Mat<S> out(a.cols(), a.rows());
  for (int i = 0; i < a.rows(); ++i)
    for (int j = 0; j < a.cols(); ++j) out(j, i) = a(i, j);
  return out;
}

template <class S>
S trace(const Mat<S>& a) {
  assert(a.rows() == a.cols());
  S acc = a(0, 0);
  for (int i = 1; i < a.rows(); ++i) acc = acc + a(i, i);
  return acc;
}

/// (A + A^T)/2; keeps covariance recursions symmetric to the last bit.
template <class S>
Mat<S> symmetrize(const Mat<S>& a) {
  assert(a.rows() == a.cols());
  Mat<S> out(a.rows(), a.cols());
  for (int i = 0; i < a.rows(); ++i) {
    for (int j = i; j < a.cols(); ++j) {
      S s = (a(i, j) + a(j, i)) * 0.5;
      out(i, j) = s;
      out(j, i) = s;
    }
  }
  return out;
}

/// Closed-form determinant for the small scale matrices handled here.
template <class S>
S det_small(const Mat<S>& a) {
  assert(a.rows() == a.cols());
  switch (a.rows()) {
    case 1:
      return a(0, 0);
    case 2:
      return a(0, 0) * a(1, 1) - a(0, 1) * a(1, 0);
    case 3:
      return a(0, 0) * (a(1, 1) * a(2, 2) - a(1, 2) * a(2, 1)) -
             a(0, 1) * (a(1, 0) * a(2, 2) - a(1, 2) * a(2, 0)) +
             a(0, 2) * (a(1, 0) * a(2, 1) - a(1, 1) * a(2, 0));
    default:
      throw DimensionMismatch("det_small: only dimensions 1..3 supported");
  }
}

// Constant-coefficient maps. The autodiff scalar has fused overloads of these
// (autodiff.hpp) that accumulate in the same order.

/// coeffs * x (+ bias).
template <class S>
Vec<S> affine_map(const Matrix& coeffs, const Vec<S>& x, const Vector* bias) {
  assert(coeffs.cols() == x.size());
  Vec<S> out(coeffs.rows());
  for (int i = 0; i < coeffs.rows(); ++i) {
    S acc = (bias != nullptr ? (*bias)[i] : 0.0) + coeffs(i, 0) * x[0];
    for (int j = 1; j < coeffs.cols(); ++j) acc = acc + coeffs(i, j) * x[j];
    out[i] = acc;
  }
  return out;
}

template <class S>
Mat<S> mul_const_left(const Matrix& coeffs, const Mat<S>& p) {
  assert(coeffs.cols() == p.rows());
  Mat<S> out(coeffs.rows(), p.cols());
  for (int i = 0; i < coeffs.rows(); ++i) {
    for (int j = 0; j < p.cols(); ++j) {
      S acc = coeffs(i, 0) * p(0, j);
      for (int k = 1; k < coeffs.cols(); ++k) acc = acc + coeffs(i, k) * p(k, j);
      out(i, j) = acc;
    }
  }
  return out;
}

template <class S>
Mat<S> mul_const_right(const Mat<S>& a, const Matrix& coeffs) {
  assert(a.cols() == coeffs.rows());
  Mat<S> out(a.rows(), coeffs.cols());
  for (int i = 0; i < a.rows(); ++i) {
    for (int j = 0; j < coeffs.cols(); ++j) {
      S acc = a(i, 0) * coeffs(0, j);
      for (int k = 1; k < a.cols(); ++k) acc = acc + a(i, k) * coeffs(k, j);
      out(i, j) = acc;
    }
  }
  return out;
}

/// coeffs * P * coeffs^T (+ add); P symmetric, result exactly symmetric.
template <class S>
Mat<S> congruence_const(const Matrix& coeffs, const Mat<S>& p, const Matrix* add) {
  const int n = p.rows();
  const int q = coeffs.rows();
  assert(coeffs.cols() == n && p.cols() == n);
  Mat<S> out(q, q);
  for (int i = 0; i < q; ++i) {
    for (int j = i; j < q; ++j) {
      S acc = (add != nullptr ? (*add)(i, j) : 0.0) + coeffs(i, 0) * coeffs(j, 0) * p(0, 0);
      for (int k = 0; k < n; ++k)
        for (int l = 0; l < n; ++l)
          if (k != 0 || l != 0) acc = acc + coeffs(i, k) * coeffs(j, l) * p(k, l);
      out(i, j) = acc;
      out(j, i) = acc;
    }
  }
  return out;
}

template <class S>
Vec<S> const_sub_vec(const Vector& z, const Vec<S>& v) {
  assert(z.size() == v.size());
  Vec<S> out(v.size());
  for (int i = 0; i < v.size(); ++i) out[i] = z[i] - v[i];
  return out;
}

template <class S>
Mat<S> identity_minus(const Mat<S>& m) {
  assert(m.rows() == m.cols());
  Mat<S> out(m.rows(), m.cols());
  for (int i = 0; i < m.rows(); ++i)
    for (int j = 0; j < m.cols(); ++j) out(i, j) = (i == j ? 1.0 : 0.0) - m(i, j);
  return out;
}

template <class S>
Vec<S> vec_add_s(const Vec<S>& a, const Vec<S>& b) {
  assert(a.size() == b.size());
  Vec<S> out(a.size());
  for (int i = 0; i < a.size(); ++i) out[i] = a[i] + b[i];
  return out;
}

/// Scalar-node times matrix.
template <class S>
Mat<S> mat_scale_s(const Mat<S>& m, const S& c) {
  Mat<S> out(m.rows(), m.cols());
  for (int i = 0; i < m.rows(); ++i)
    for (int j = 0; j < m.cols(); ++j) out(i, j) = c * m(i, j);
  return out;
}

// ---------------------------------------------------------------------------
// Cholesky. The diagonal test reads plain values (value_of), so the factor
// attempt can fail cleanly on the tape path without throwing from sqrt.

template <class S>
bool cholesky(const Mat<S>& a, Mat<S>& lower) {
  using std::sqrt;
  const int n = a.rows();
  assert(a.cols() == n);
  // Only the lower triangle is written and only it is ever read back.
  lower = Mat<S>(n, n);
  for (int j = 0; j < n; ++j) {
    S d = a(j, j);
    for (int k = 0; k < j; ++k) d = d - lower(j, k) * lower(j, k);
    if (!(value_of(d) > 0.0)) return false;
    lower(j, j) = sqrt(d);
    for (int i = j + 1; i < n; ++i) {
      S s = a(i, j);
      for (int k = 0; k < j; ++k) s = s - lower(i, k) * lower(j, k);
      lower(i, j) = s / lower(j, j);
    }
  }
  return true;
}

/// Solve L y = b then L^T x = y for one right-hand side.
template <class S>
Vec<S> chol_solve(const Mat<S>& lower, const Vec<S>& b) {
  const int n = lower.rows();
  assert(b.size() == n);
  Vec<S> y(n);
  for (int i = 0; i < n; ++i) {
    S s = b[i];
    for (int k = 0; k < i; ++k) s = s - lower(i, k) * y[k];
    y[i] = s / lower(i, i);
  }
  Vec<S> x(n);
  for (int i = n - 1; i >= 0; --i) {
    S s = y[i];
    for (int k = i + 1; k < n; ++k) s = s - lower(k, i) * x[k];
    x[i] = s / lower(i, i);
  }
  return x;
}

/// Solve (L L^T) X = B column by column.
template <class S>
Mat<S> chol_solve_mat(const Mat<S>& lower, const Mat<S>& b) {
  const int n = lower.rows();
  assert(b.rows() == n);
  Mat<S> x(n, b.cols());
  for (int j = 0; j < b.cols(); ++j) {
    Vec<S> col(n);
    for (int i = 0; i < n; ++i) col[i] = b(i, j);
    Vec<S> sol = chol_solve(lower, col);
    for (int i = 0; i < n; ++i) x(i, j) = sol[i];
  }
  return x;
}

// Jitter escalation shared by every innovation inversion in the project:
// attempt the plain factorization, then add 1e-12*tr/m*I escalating tenfold
// up to 1e-6*tr/m, and give up with SingularInnovation past that.
template <class S>
Mat<S> cholesky_with_jitter(const Mat<S>& a) {
  const int n = a.rows();
  Mat<S> lower;
  if (cholesky(a, lower)) return lower;
  double tr = 0.0;
  for (int i = 0; i < n; ++i) tr += value_of(a(i, i));
  const double base = 1e-12 * tr / n;
  const double cap = 1e-6 * tr / n;
  for (double jit = base; jit > 0.0 && jit <= cap * (1.0 + 1e-15); jit *= 10.0) {
    Mat<S> bumped = a;
    for (int i = 0; i < n; ++i) bumped(i, i) = bumped(i, i) + jit;
    if (cholesky(bumped, lower)) return lower;
  }
  throw SingularInnovation("innovation covariance not positive definite after jitter");
}

// ---------------------------------------------------------------------------
// Double-only helpers.

/// PSD Cholesky for sampling: zero (or slightly negative, within tol) pivots
/// produce zero columns instead of failing. Not for solving.
Matrix cholesky_psd(const Matrix& a, double rel_tol = 1e-12);

/// Smallest eigenvalue of a symmetric matrix by cyclic Jacobi sweeps.
double min_eigen_sym(const Matrix& a);

double frobenius_norm(const Matrix& a);

bool all_finite(const Matrix& a);
bool all_finite(const Vector& v);

Vector vec_sub(const Vector& a, const Vector& b);
Vector vec_add(const Vector& a, const Vector& b);
double norm2(const Vector& v);
double dot(const Vector& a, const Vector& b);

}  // namespace rkflab

#endif  // RKFLAB_MAT_HPP_
