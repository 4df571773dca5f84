#pragma once

#include <functional>
#include <span>
#include <vector>

#include "betarec/mesh.hpp"

namespace betarec {

/// Continuous piecewise-linear function given by one value per mesh node.
class NodalField {
 public:
  NodalField() = default;
  NodalField(MeshPtr mesh, double constant);
  NodalField(MeshPtr mesh, std::vector<double> values);
  static NodalField from_function(const MeshPtr& mesh, const std::function<double(Vec2)>& f);

  const MeshPtr& mesh() const { return mesh_; }
  std::size_t size() const { return values_.size(); }
  double operator[](std::size_t i) const { return values_[i]; }
  double& operator[](std::size_t i) { return values_[i]; }
  const std::vector<double>& values() const { return values_; }
  std::vector<double>& values() { return values_; }

  double min_value() const;
  double max_value() const;

 private:
  MeshPtr mesh_;
  std::vector<double> values_;
};

NodalField operator+(const NodalField& a, const NodalField& b);
NodalField operator-(const NodalField& a, const NodalField& b);
NodalField operator*(double s, const NodalField& a);

/// y += s * x
void axpy(double s, const NodalField& x, NodalField& y);

/// Piecewise-constant Neumann datum: one value per boundary edge of the mesh,
/// stored in mesh.boundary_edges() order.
class EdgeFlux {
 public:
  EdgeFlux() = default;
  explicit EdgeFlux(MeshPtr mesh, double constant = 0.0);
  /// Evaluates rule(edge midpoint, side) on every boundary edge.
  static EdgeFlux from_rule(const MeshPtr& mesh,
                            const std::function<double(Vec2, Side)>& rule);

  const MeshPtr& mesh() const { return mesh_; }
  std::size_t size() const { return values_.size(); }
  double operator[](std::size_t e) const { return values_[e]; }
  double& operator[](std::size_t e) { return values_[e]; }
  const std::vector<double>& values() const { return values_; }

  /// Copy with the given region's edges zeroed (known-flux part of a mixed
  /// problem keeps only edges off the observation boundary).
  EdgeFlux masked_without(const BoundaryRegion& region) const;

 private:
  MeshPtr mesh_;
  std::vector<double> values_;
};

}  // namespace betarec
