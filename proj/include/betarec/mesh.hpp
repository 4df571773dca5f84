#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "betarec/geometry.hpp"

namespace betarec {

enum class Side : std::uint8_t { bottom = 0, right = 1, top = 2, left = 3 };

const char* to_string(Side side);
std::optional<Side> side_from_string(std::string_view name);

struct BoundaryEdge {
  int node_a;
  int node_b;
  Side side;
};

/// Uniform criss-cross triangulation of the square (-1,1)^2.
///
/// Each axis is split into `level` segments; every grid cell is cut along its
/// bottom-left-to-top-right diagonal, giving 2*level^2 counter-clockwise
/// triangles.  Nodes are numbered row-major, lowest row (x2 = -1) first.
/// Immutable after construction and safe for concurrent reads.
class Mesh {
 public:
  static std::shared_ptr<const Mesh> square(int level);

  int level() const { return level_; }
  double mesh_size() const { return mesh_size_; }

  std::size_t node_count() const { return nodes_.size(); }
  std::size_t triangle_count() const { return triangles_.size(); }

  const std::vector<Vec2>& nodes() const { return nodes_; }
  const std::vector<std::array<int, 3>>& triangles() const { return triangles_; }
  const std::vector<BoundaryEdge>& boundary_edges() const { return boundary_edges_; }

  int node_index(int ix, int iy) const { return iy * (level_ + 1) + ix; }

 private:
  Mesh() = default;

  int level_ = 0;
  double mesh_size_ = 0.0;
  std::vector<Vec2> nodes_;
  std::vector<std::array<int, 3>> triangles_;
  std::vector<BoundaryEdge> boundary_edges_;
};

using MeshPtr = std::shared_ptr<const Mesh>;

/// Union of whole sides of the square; the observation boundary is always of
/// this form.
class BoundaryRegion {
 public:
  BoundaryRegion() = default;
  BoundaryRegion(std::initializer_list<Side> sides);
  static BoundaryRegion all();

  void insert(Side side);
  bool contains(Side side) const;
  bool empty() const { return mask_ == 0; }
  /// Sides in the fixed order bottom, right, top, left.
  std::vector<Side> sides() const;
  std::string describe() const;

  bool operator==(const BoundaryRegion&) const = default;

 private:
  std::uint8_t mask_ = 0;
};

BoundaryRegion parse_region(std::string_view comma_separated_sides);

/// Nodes on the closed union of the region's sides, each corner once,
/// ordered lexicographically by (x2, x1) (equivalently by node index).
std::vector<int> boundary_nodes(const Mesh& mesh, const BoundaryRegion& region);

/// Indices into mesh.boundary_edges() for the region's edges, ordered by edge
/// midpoint lexicographically by (x2, x1).  This order also fixes which random
/// draw perturbs which edge when synthesizing noisy flux data.
std::vector<int> region_edges(const Mesh& mesh, const BoundaryRegion& region);

class NodalField;

/// Piecewise-linear interpolation of a coarse field onto the mesh with twice
/// the subdivision count.  Values at coincident nodes are preserved bitwise.
NodalField prolongate(const NodalField& coarse, const MeshPtr& fine_mesh);

}  // namespace betarec
