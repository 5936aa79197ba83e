#include "rkflab/autodiff.hpp"

#include <cmath>

#include "rkflab/errors.hpp"
#include "rkflab/scalar_ops.hpp"
#include "rkflab/special.hpp"

namespace rkflab {

std::size_t Tape::backward_into(const Var& loss, std::vector<double>& adjoint) const {
  assert(loss.tape == this && loss.id < values_.size());
  adjoint.assign(values_.size(), 0.0);
  adjoint[loss.id] = 1.0;
  std::size_t visited = 0;
  for (std::size_t i = values_.size(); i-- > 0;) {
    ++visited;
    const double a = adjoint[i];
    if (a == 0.0) continue;
    const NodeMeta& node = meta_[i];
    for (std::uint32_t e = node.edge_begin; e < node.edge_begin + node.edge_count; ++e)
      adjoint[edges_[e].parent] += a * edges_[e].partial;
  }
  return visited;
}

namespace {
inline Tape* same_tape(const Var& a, const Var& b) {
  assert(a.tape != nullptr && a.tape == b.tape);
  return a.tape;
}
}  // namespace

Var operator+(const Var& a, const Var& b) {
  return same_tape(a, b)->push2(Tape::Op::Add, a.value() + b.value(), a.id, 1.0, b.id, 1.0);
}
Var operator+(const Var& a, double c) {
  return a.tape->push1(Tape::Op::Add, a.value() + c, a.id, 1.0);
}
Var operator+(double c, const Var& a) { return a + c; }

Var operator-(const Var& a, const Var& b) {
  return same_tape(a, b)->push2(Tape::Op::Sub, a.value() - b.value(), a.id, 1.0, b.id, -1.0);
}
Var operator-(const Var& a, double c) {
  return a.tape->push1(Tape::Op::Sub, a.value() - c, a.id, 1.0);
}
Var operator-(double c, const Var& a) {
  return a.tape->push1(Tape::Op::Sub, c - a.value(), a.id, -1.0);
}
Var operator-(const Var& a) { return a.tape->push1(Tape::Op::Neg, -a.value(), a.id, -1.0); }

Var operator*(const Var& a, const Var& b) {
  return same_tape(a, b)->push2(Tape::Op::Mul, a.value() * b.value(), a.id, b.value(), b.id,
                                a.value());
}
Var operator*(const Var& a, double c) {
  return a.tape->push1(Tape::Op::Mul, a.value() * c, a.id, c);
}
Var operator*(double c, const Var& a) { return a * c; }

Var operator/(const Var& a, const Var& b) {
  const double bv = b.value();
  const double q = a.value() / bv;
  return same_tape(a, b)->push2(Tape::Op::Div, q, a.id, 1.0 / bv, b.id, -q / bv);
}
Var operator/(const Var& a, double c) {
  return a.tape->push1(Tape::Op::Div, a.value() / c, a.id, 1.0 / c);
}
Var operator/(double c, const Var& a) {
  const double av = a.value();
  return a.tape->push1(Tape::Op::Div, c / av, a.id, -c / (av * av));
}

Var log(const Var& a) {
  const double x = a.value();
  if (!(x > 0.0)) throw DomainError("log: argument must be positive");
  return a.tape->push1(Tape::Op::Log, std::log(x), a.id, 1.0 / x);
}

Var log1p(const Var& a) {
  const double x = a.value();
  if (!(x > -1.0)) throw DomainError("log1p: argument must exceed -1");
  return a.tape->push1(Tape::Op::Log1p, std::log1p(x), a.id, 1.0 / (1.0 + x));
}

Var sqrt(const Var& a) {
  const double x = a.value();
  if (!(x > 0.0)) throw DomainError("sqrt: argument must be positive");
  const double r = std::sqrt(x);
  return a.tape->push1(Tape::Op::Sqrt, r, a.id, 0.5 / r);
}

Var abs(const Var& a) {
  const double x = a.value();
  return a.tape->push1(Tape::Op::Abs, std::abs(x), a.id, x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0));
}

Var exp_clamped(const Var& a) {
  const double x = a.value();
  const double v = exp_clamped(x);
  const bool inside = x >= kExpClampLo && x <= kExpClampHi;
  return a.tape->push1(Tape::Op::Exp, v, a.id, inside ? v : 0.0);
}

Var shrink(const Var& a) {
  const double x = a.value();
  return a.tape->push1(Tape::Op::Shrink, shrink(x), a.id, 1.0 / (1.0 + std::abs(x)));
}

Var leaky_relu(const Var& a) {
  const double x = a.value();
  return a.tape->push1(Tape::Op::LeakyRelu, leaky_relu(x), a.id, x > 0.0 ? 1.0 : kLeakySlope);
}

Var lgamma(const Var& a) {
  const double x = a.value();
  return a.tape->push1(Tape::Op::Lgamma, lgamma_lanczos(x), a.id, digamma(x));
}

Var affine_const(const double* coeffs, const Var* xs, int k, double bias) {
  assert(k > 0);
  Tape* t = xs[0].tape;
  double acc = bias;
  for (int j = 0; j < k; ++j) acc += coeffs[j] * xs[j].value();
  Var v = t->push(Tape::Op::Affine, acc);
  for (int j = 0; j < k; ++j) t->add_edge(xs[j].id, coeffs[j]);
  return v;
}

Var affine_params(const Var& bias, const Var* ws, const Var* xs, int k) {
  Tape* t = bias.tape;
  double acc = bias.value();
  for (int j = 0; j < k; ++j) acc += ws[j].value() * xs[j].value();
  Var v = t->push(Tape::Op::Affine, acc);
  t->add_edge(bias.id, 1.0);
  for (int j = 0; j < k; ++j) {
    t->add_edge(ws[j].id, xs[j].value());
    t->add_edge(xs[j].id, ws[j].value());
  }
  return v;
}

Var dot_vars(const Var* a, const Var* b, int k) {
  assert(k > 0);
  Tape* t = a[0].tape;
  double acc = a[0].value() * b[0].value();
  for (int j = 1; j < k; ++j) acc += a[j].value() * b[j].value();
  Var v = t->push(Tape::Op::Dot, acc);
  for (int j = 0; j < k; ++j) {
    t->add_edge(a[j].id, b[j].value());
    t->add_edge(b[j].id, a[j].value());
  }
  return v;
}

Mat<Var> mat_mul(const Mat<Var>& a, const Mat<Var>& b) {
  assert(a.cols() == b.rows());
  Tape* t = a(0, 0).tape;
  Mat<Var> out(a.rows(), b.cols());
  for (int i = 0; i < a.rows(); ++i) {
    for (int j = 0; j < b.cols(); ++j) {
      double acc = a(i, 0).value() * b(0, j).value();
      for (int k = 1; k < a.cols(); ++k) acc += a(i, k).value() * b(k, j).value();
      Var v = t->push(Tape::Op::Dot, acc);
      for (int k = 0; k < a.cols(); ++k) {
        t->add_edge(a(i, k).id, b(k, j).value());
        t->add_edge(b(k, j).id, a(i, k).value());
      }
      out(i, j) = v;
    }
  }
  return out;
}

Vec<Var> mat_vec(const Mat<Var>& a, const Vec<Var>& x) {
  assert(a.cols() == x.size());
  Tape* t = x[0].tape;
  Vec<Var> out(a.rows());
  for (int i = 0; i < a.rows(); ++i) {
    double acc = a(i, 0).value() * x[0].value();
    for (int k = 1; k < a.cols(); ++k) acc += a(i, k).value() * x[k].value();
    Var v = t->push(Tape::Op::Dot, acc);
    for (int k = 0; k < a.cols(); ++k) {
      t->add_edge(a(i, k).id, x[k].value());
      t->add_edge(x[k].id, a(i, k).value());
    }
    out[i] = v;
  }
  return out;
}

Vec<Var> affine_map(const Matrix& coeffs, const Vec<Var>& x, const Vector* bias) {
  assert(coeffs.cols() == x.size());
  Tape* t = x[0].tape;
  Vec<Var> out(coeffs.rows());
  for (int i = 0; i < coeffs.rows(); ++i) {
    double acc = bias != nullptr ? (*bias)[i] : 0.0;
    for (int j = 0; j < coeffs.cols(); ++j) acc += coeffs(i, j) * x[j].value();
    Var v = t->push(Tape::Op::Affine, acc);
    for (int j = 0; j < coeffs.cols(); ++j) t->add_edge(x[j].id, coeffs(i, j));
    out[i] = v;
  }
  return out;
}

Mat<Var> mul_const_left(const Matrix& coeffs, const Mat<Var>& p) {
  assert(coeffs.cols() == p.rows());
  Tape* t = p(0, 0).tape;
  Mat<Var> out(coeffs.rows(), p.cols());
  for (int i = 0; i < coeffs.rows(); ++i) {
    for (int j = 0; j < p.cols(); ++j) {
      double acc = 0.0;
      for (int k = 0; k < coeffs.cols(); ++k) acc += coeffs(i, k) * p(k, j).value();
      Var v = t->push(Tape::Op::Affine, acc);
      for (int k = 0; k < coeffs.cols(); ++k) t->add_edge(p(k, j).id, coeffs(i, k));
      out(i, j) = v;
    }
  }
  return out;
}

Mat<Var> mul_const_right(const Mat<Var>& a, const Matrix& coeffs) {
  assert(a.cols() == coeffs.rows());
  Tape* t = a(0, 0).tape;
  Mat<Var> out(a.rows(), coeffs.cols());
  for (int i = 0; i < a.rows(); ++i) {
    for (int j = 0; j < coeffs.cols(); ++j) {
      double acc = 0.0;
      for (int k = 0; k < a.cols(); ++k) acc += a(i, k).value() * coeffs(k, j);
      Var v = t->push(Tape::Op::Affine, acc);
      for (int k = 0; k < a.cols(); ++k) t->add_edge(a(i, k).id, coeffs(k, j));
      out(i, j) = v;
    }
  }
  return out;
}

Mat<Var> congruence_const(const Matrix& coeffs, const Mat<Var>& p, const Matrix* add) {
  const int n = p.rows();
  const int q = coeffs.rows();
  assert(coeffs.cols() == n && p.cols() == n);
  Tape* t = p(0, 0).tape;
  Mat<Var> out(q, q);
  for (int i = 0; i < q; ++i) {
    for (int j = i; j < q; ++j) {
      double acc = add != nullptr ? (*add)(i, j) : 0.0;
      for (int k = 0; k < n; ++k)
        for (int l = 0; l < n; ++l) acc += coeffs(i, k) * coeffs(j, l) * p(k, l).value();
      Var v = t->push(Tape::Op::Affine, acc);
      for (int k = 0; k < n; ++k)
        for (int l = 0; l < n; ++l) t->add_edge(p(k, l).id, coeffs(i, k) * coeffs(j, l));
      out(i, j) = v;
      out(j, i) = v;
    }
  }
  return out;
}

Vec<Var> const_sub_vec(const Vector& z, const Vec<Var>& v) {
  assert(z.size() == v.size());
  Tape* t = v[0].tape;
  Vec<Var> out(v.size());
  for (int i = 0; i < v.size(); ++i)
    out[i] = t->push1(Tape::Op::Sub, z[i] - v[i].value(), v[i].id, -1.0);
  return out;
}

Mat<Var> lift(Tape& tape, const Matrix& m) {
  Mat<Var> out(m.rows(), m.cols());
  for (int i = 0; i < m.rows(); ++i)
    for (int j = 0; j < m.cols(); ++j) out(i, j) = tape.leaf(m(i, j));
  return out;
}

Vec<Var> lift(Tape& tape, const Vector& v) {
  Vec<Var> out(v.size());
  for (int i = 0; i < v.size(); ++i) out[i] = tape.leaf(v[i]);
  return out;
}

Matrix values_of(const Mat<Var>& m) {
  Matrix out(m.rows(), m.cols());
  for (int i = 0; i < m.rows(); ++i)
    for (int j = 0; j < m.cols(); ++j) out(i, j) = m(i, j).value();
  return out;
}

Vector values_of(const Vec<Var>& v) {
  Vector out(v.size());
  for (int i = 0; i < v.size(); ++i) out[i] = v[i].value();
  return out;
}

}  // namespace rkflab
