#include "betarec/coefficients.hpp"

#include <stdexcept>

namespace betarec {

ScalarCoefficient ScalarCoefficient::constant(double c) {
  ScalarCoefficient out;
  out.kind_ = Kind::constant;
  out.constant_ = c;
  return out;
}

ScalarCoefficient ScalarCoefficient::from_function(std::function<double(Vec2)> fn) {
  ScalarCoefficient out;
  out.kind_ = Kind::function;
  out.fn_ = std::move(fn);
  return out;
}

ScalarCoefficient ScalarCoefficient::from_field(NodalField field) {
  ScalarCoefficient out;
  out.kind_ = Kind::field;
  out.field_ = std::move(field);
  return out;
}

double ScalarCoefficient::operator()(Vec2 x) const {
  switch (kind_) {
    case Kind::constant: return constant_;
    case Kind::function: return fn_(x);
    case Kind::field:
      throw std::logic_error("ScalarCoefficient: field evaluation needs a triangle context");
  }
  return 0.0;
}

double ScalarCoefficient::eval(const Mesh& mesh, int tri, Vec2 x,
                               const std::array<double, 3>& bary) const {
  switch (kind_) {
    case Kind::constant: return constant_;
    case Kind::function: return fn_(x);
    case Kind::field: {
      const auto& t = mesh.triangles()[tri];
      return bary[0] * field_[t[0]] + bary[1] * field_[t[1]] + bary[2] * field_[t[2]];
    }
  }
  return 0.0;
}

}  // namespace betarec
