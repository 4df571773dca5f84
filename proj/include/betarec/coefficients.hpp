#pragma once

#include <array>
#include <functional>
#include <memory>

#include "betarec/fields.hpp"
#include "betarec/geometry.hpp"

namespace betarec {

/// Symmetric matrix-valued coefficient (the diffusion matrix).  Evaluated
/// pointwise at quadrature nodes; piecewise-constant region definitions are
/// plain predicates inside the callable.
class MatrixCoefficient {
 public:
  MatrixCoefficient() : fn_([](Vec2) { return SymMat2::identity(); }) {}
  explicit MatrixCoefficient(std::function<SymMat2(Vec2)> fn) : fn_(std::move(fn)) {}
  static MatrixCoefficient identity() { return MatrixCoefficient(); }
  static MatrixCoefficient scalar(double a) {
    return MatrixCoefficient([a](Vec2) { return SymMat2{a, 0.0, a}; });
  }

  SymMat2 operator()(Vec2 x) const { return fn_(x); }

 private:
  std::function<SymMat2(Vec2)> fn_;
};

/// Scalar coefficient: a constant, an analytic/region-predicate function, or
/// a nodal field evaluated by P1 interpolation at quadrature points.
class ScalarCoefficient {
 public:
  ScalarCoefficient() : kind_(Kind::constant), constant_(0.0) {}

  static ScalarCoefficient constant(double c);
  static ScalarCoefficient from_function(std::function<double(Vec2)> fn);
  static ScalarCoefficient from_field(NodalField field);

  bool is_field() const { return kind_ == Kind::field; }
  const NodalField& field() const { return field_; }

  /// Evaluation away from any triangle context (analytic kinds only).
  double operator()(Vec2 x) const;

  /// Evaluation inside triangle `tri` at barycentric coordinates `bary`
  /// (position `x`).  Field-backed coefficients interpolate their nodal
  /// values; analytic ones ignore the triangle context.
  double eval(const Mesh& mesh, int tri, Vec2 x, const std::array<double, 3>& bary) const;

 private:
  enum class Kind { constant, function, field };
  Kind kind_;
  double constant_ = 0.0;
  std::function<double(Vec2)> fn_;
  NodalField field_;
};

}  // namespace betarec
