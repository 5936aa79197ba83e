#ifndef RKFLAB_AUTODIFF_HPP_
#define RKFLAB_AUTODIFF_HPP_

// Reverse-mode tape over scalars. Nodes are appended in topological order
// (parents always precede children); the backward pass is a single reverse
// sweep. Besides the usual unary/binary ops there are fused n-ary affine and
// dot nodes, which keep the graph small where the FCNN and the covariance
// recursions dominate. Fused builders accumulate in the same left-to-right
// order as the generic Mat<S> templates, so taped values match the plain
// double path bit for bit.

#include <cassert>
#include <cstdint>
#include <vector>

#include "rkflab/mat.hpp"

namespace rkflab {

class Tape;

struct Var {
  Tape* tape = nullptr;
  std::uint32_t id = 0;

  double value() const;
};

class Tape {
 public:
  enum class Op : std::uint8_t {
    Leaf, Add, Sub, Mul, Div, Neg, Log, Log1p, Exp, Sqrt, Abs, Shrink, LeakyRelu,
    Lgamma, Affine, Dot
  };

  Tape() = default;

  void reserve(std::size_t nodes, std::size_t edges) {
    values_.reserve(nodes);
    meta_.reserve(nodes);
    edges_.reserve(edges);
  }

  /// Drops all nodes but keeps the allocated capacity.
  void reset() {
    values_.clear();
    meta_.clear();
    edges_.clear();
  }

  std::size_t size() const { return values_.size(); }
  double value(std::uint32_t id) const { return values_[id]; }

  Var leaf(double value) { return push(Op::Leaf, value); }

  /// Reverse sweep, accumulating adjoints for every node; `adjoint` is resized
  /// to the tape. Returns the number of nodes visited (each exactly once).
  std::size_t backward_into(const Var& loss, std::vector<double>& adjoint) const;

  // Node builders used by the operator overloads; `partial` values are the
  // local derivatives with respect to each parent.
  Var push(Op op, double value) {
    meta_.push_back({static_cast<std::uint32_t>(edges_.size()), 0, op});
    values_.push_back(value);
    return Var{this, static_cast<std::uint32_t>(values_.size() - 1)};
  }
  Var push1(Op op, double value, std::uint32_t p, double partial) {
    Var v = push(op, value);
    add_edge(p, partial);
    return v;
  }
  Var push2(Op op, double value, std::uint32_t p0, double d0, std::uint32_t p1, double d1) {
    Var v = push(op, value);
    add_edge(p0, d0);
    add_edge(p1, d1);
    return v;
  }
  void add_edge(std::uint32_t parent, double partial) {
    edges_.push_back({parent, partial});
    ++meta_.back().edge_count;
  }

 private:
  struct Edge {
    std::uint32_t parent;
    double partial;
  };
  struct NodeMeta {
    std::uint32_t edge_begin;
    std::uint32_t edge_count;
    Op op;
  };

  std::vector<double> values_;
  std::vector<NodeMeta> meta_;
  std::vector<Edge> edges_;
};

inline double Var::value() const { return tape->value(id); }
inline double value_of(const Var& v) { return v.value(); }

// ---------------------------------------------------------------------------
// Scalar ops.

Var operator+(const Var& a, const Var& b);
Var operator+(const Var& a, double c);
Var operator+(double c, const Var& a);
Var operator-(const Var& a, const Var& b);
Var operator-(const Var& a, double c);
Var operator-(double c, const Var& a);
Var operator-(const Var& a);
Var operator*(const Var& a, const Var& b);
Var operator*(const Var& a, double c);
Var operator*(double c, const Var& a);
Var operator/(const Var& a, const Var& b);
Var operator/(const Var& a, double c);
Var operator/(double c, const Var& a);

Var log(const Var& a);
Var log1p(const Var& a);
Var sqrt(const Var& a);
Var abs(const Var& a);
Var exp_clamped(const Var& a);
Var shrink(const Var& a);
Var leaky_relu(const Var& a);
Var lgamma(const Var& a);

// Fused n-ary nodes.

/// bias + sum_j coeffs[j] * xs[j] with constant coefficients.
Var affine_const(const double* coeffs, const Var* xs, int k, double bias);

/// bias + sum_j ws[j] * xs[j] where bias, weights and inputs are all nodes.
Var affine_params(const Var& bias, const Var* ws, const Var* xs, int k);

/// sum_j a[j] * b[j].
Var dot_vars(const Var* a, const Var* b, int k);

// ---------------------------------------------------------------------------
// Fused matrix overloads mirroring the generic templates in mat.hpp.

Mat<Var> mat_mul(const Mat<Var>& a, const Mat<Var>& b);
Vec<Var> mat_vec(const Mat<Var>& a, const Vec<Var>& x);
Vec<Var> affine_map(const Matrix& coeffs, const Vec<Var>& x, const Vector* bias);
Mat<Var> mul_const_left(const Matrix& coeffs, const Mat<Var>& p);
Mat<Var> mul_const_right(const Mat<Var>& a, const Matrix& coeffs);
Mat<Var> congruence_const(const Matrix& coeffs, const Mat<Var>& p, const Matrix* add);
Vec<Var> const_sub_vec(const Vector& z, const Vec<Var>& v);

/// Lifts a constant matrix/vector onto the tape as leaves.
Mat<Var> lift(Tape& tape, const Matrix& m);
Vec<Var> lift(Tape& tape, const Vector& v);

Matrix values_of(const Mat<Var>& m);
Vector values_of(const Vec<Var>& v);

}  // namespace rkflab

#endif  // RKFLAB_AUTODIFF_HPP_
