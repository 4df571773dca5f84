#include "betarec/fields.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace betarec {

NodalField::NodalField(MeshPtr mesh, double constant)
    : mesh_(std::move(mesh)), values_(mesh_ ? mesh_->node_count() : 0, constant) {
  if (!mesh_) throw std::invalid_argument("NodalField: null mesh");
}

NodalField::NodalField(MeshPtr mesh, std::vector<double> values)
    : mesh_(std::move(mesh)), values_(std::move(values)) {
  if (!mesh_) throw std::invalid_argument("NodalField: null mesh");
  if (values_.size() != mesh_->node_count()) {
    throw std::invalid_argument("NodalField: value count does not match node count");
  }
  for (double v : values_) {
    if (!std::isfinite(v)) throw std::invalid_argument("NodalField: non-finite value");
  }
}

NodalField NodalField::from_function(const MeshPtr& mesh, const std::function<double(Vec2)>& f) {
  NodalField field(mesh, 0.0);
  const auto& nodes = mesh->nodes();
  for (std::size_t i = 0; i < nodes.size(); ++i) field[i] = f(nodes[i]);
  return field;
}

double NodalField::min_value() const {
  return *std::min_element(values_.begin(), values_.end());
}

double NodalField::max_value() const {
  return *std::max_element(values_.begin(), values_.end());
}

namespace {
void check_same_mesh(const NodalField& a, const NodalField& b) {
  if (a.mesh() != b.mesh()) {
    // Distinct objects representing the same level still count as a mismatch;
    // fields are always combined within one mesh instance.
    if (!a.mesh() || !b.mesh() || a.mesh()->level() != b.mesh()->level() ||
        a.size() != b.size()) {
      throw std::invalid_argument("NodalField: mesh mismatch");
    }
  }
}
}  // namespace

NodalField operator+(const NodalField& a, const NodalField& b) {
  check_same_mesh(a, b);
  NodalField out = a;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += b[i];
  return out;
}

NodalField operator-(const NodalField& a, const NodalField& b) {
  check_same_mesh(a, b);
  NodalField out = a;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] -= b[i];
  return out;
}

NodalField operator*(double s, const NodalField& a) {
  NodalField out = a;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] *= s;
  return out;
}

void axpy(double s, const NodalField& x, NodalField& y) {
  check_same_mesh(x, y);
  for (std::size_t i = 0; i < y.size(); ++i) y[i] += s * x[i];
}

EdgeFlux::EdgeFlux(MeshPtr mesh, double constant)
    : mesh_(std::move(mesh)), values_(mesh_ ? mesh_->boundary_edges().size() : 0, constant) {
  if (!mesh_) throw std::invalid_argument("EdgeFlux: null mesh");
}

EdgeFlux EdgeFlux::from_rule(const MeshPtr& mesh,
                             const std::function<double(Vec2, Side)>& rule) {
  EdgeFlux flux(mesh, 0.0);
  const auto& nodes = mesh->nodes();
  const auto& edges = mesh->boundary_edges();
  for (std::size_t e = 0; e < edges.size(); ++e) {
    const Vec2 mid{0.5 * (nodes[edges[e].node_a].x + nodes[edges[e].node_b].x),
                   0.5 * (nodes[edges[e].node_a].y + nodes[edges[e].node_b].y)};
    flux.values_[e] = rule(mid, edges[e].side);
  }
  return flux;
}

EdgeFlux EdgeFlux::masked_without(const BoundaryRegion& region) const {
  EdgeFlux out = *this;
  const auto& edges = mesh_->boundary_edges();
  for (std::size_t e = 0; e < edges.size(); ++e) {
    if (region.contains(edges[e].side)) out.values_[e] = 0.0;
  }
  return out;
}

}  // namespace betarec
