#include "betarec/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "betarec/fields.hpp"

namespace betarec {

const char* to_string(Side side) {
  switch (side) {
    case Side::bottom: return "bottom";
    case Side::right: return "right";
    case Side::top: return "top";
    case Side::left: return "left";
  }
  return "?";
}

std::optional<Side> side_from_string(std::string_view name) {
  if (name == "bottom") return Side::bottom;
  if (name == "right") return Side::right;
  if (name == "top") return Side::top;
  if (name == "left") return Side::left;
  return std::nullopt;
}

std::shared_ptr<const Mesh> Mesh::square(int level) {
  if (level < 1) throw std::invalid_argument("Mesh::square: level must be >= 1");

  auto mesh = std::shared_ptr<Mesh>(new Mesh());
  mesh->level_ = level;
  mesh->mesh_size_ = std::sqrt(8.0) / level;

  const int n = level + 1;
  mesh->nodes_.reserve(static_cast<std::size_t>(n) * n);
  for (int iy = 0; iy < n; ++iy) {
    for (int ix = 0; ix < n; ++ix) {
      mesh->nodes_.push_back({-1.0 + 2.0 * ix / level, -1.0 + 2.0 * iy / level});
    }
  }

  // Two counter-clockwise triangles per cell, split along the
  // bottom-left-to-top-right diagonal.
  mesh->triangles_.reserve(2u * level * level);
  for (int iy = 0; iy < level; ++iy) {
    for (int ix = 0; ix < level; ++ix) {
      const int sw = mesh->node_index(ix, iy);
      const int se = mesh->node_index(ix + 1, iy);
      const int ne = mesh->node_index(ix + 1, iy + 1);
      const int nw = mesh->node_index(ix, iy + 1);
      mesh->triangles_.push_back({sw, se, ne});
      mesh->triangles_.push_back({sw, ne, nw});
    }
  }

  for (int i = 0; i < level; ++i) {
    mesh->boundary_edges_.push_back({mesh->node_index(i, 0), mesh->node_index(i + 1, 0), Side::bottom});
  }
  for (int i = 0; i < level; ++i) {
    mesh->boundary_edges_.push_back({mesh->node_index(level, i), mesh->node_index(level, i + 1), Side::right});
  }
  for (int i = 0; i < level; ++i) {
    mesh->boundary_edges_.push_back({mesh->node_index(i, level), mesh->node_index(i + 1, level), Side::top});
  }
  for (int i = 0; i < level; ++i) {
    mesh->boundary_edges_.push_back({mesh->node_index(0, i), mesh->node_index(0, i + 1), Side::left});
  }
  return mesh;
}

BoundaryRegion::BoundaryRegion(std::initializer_list<Side> sides) {
  for (Side s : sides) insert(s);
}

BoundaryRegion BoundaryRegion::all() {
  return {Side::bottom, Side::right, Side::top, Side::left};
}

void BoundaryRegion::insert(Side side) { mask_ |= static_cast<std::uint8_t>(1u << static_cast<unsigned>(side)); }

bool BoundaryRegion::contains(Side side) const {
  return (mask_ & (1u << static_cast<unsigned>(side))) != 0;
}

std::vector<Side> BoundaryRegion::sides() const {
  std::vector<Side> out;
  for (Side s : {Side::bottom, Side::right, Side::top, Side::left}) {
    if (contains(s)) out.push_back(s);
  }
  return out;
}

std::string BoundaryRegion::describe() const {
  std::string out;
  for (Side s : sides()) {
    if (!out.empty()) out += ",";
    out += to_string(s);
  }
  return out;
}

BoundaryRegion parse_region(std::string_view text) {
  BoundaryRegion region;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t comma = text.find(',', pos);
    const std::string_view token =
        text.substr(pos, comma == std::string_view::npos ? std::string_view::npos : comma - pos);
    if (!token.empty()) {
      const auto side = side_from_string(token);
      if (!side) {
        throw std::invalid_argument("unknown boundary side '" + std::string(token) + "'");
      }
      region.insert(*side);
    }
    if (comma == std::string_view::npos) break;
    pos = comma + 1;
  }
  if (region.empty()) throw std::invalid_argument("boundary region must name at least one side");
  return region;
}

std::vector<int> boundary_nodes(const Mesh& mesh, const BoundaryRegion& region) {
  if (region.empty()) throw std::invalid_argument("boundary_nodes: empty region");
  std::vector<char> selected(mesh.node_count(), 0);
  for (const BoundaryEdge& edge : mesh.boundary_edges()) {
    if (!region.contains(edge.side)) continue;
    selected[edge.node_a] = 1;
    selected[edge.node_b] = 1;
  }
  std::vector<int> out;
  // Node indices are row-major by (x2, x1), so ascending index order is the
  // lexicographic coordinate order.
  for (std::size_t i = 0; i < selected.size(); ++i) {
    if (selected[i]) out.push_back(static_cast<int>(i));
  }
  return out;
}

std::vector<int> region_edges(const Mesh& mesh, const BoundaryRegion& region) {
  if (region.empty()) throw std::invalid_argument("region_edges: empty region");
  std::vector<int> out;
  const auto& edges = mesh.boundary_edges();
  for (std::size_t e = 0; e < edges.size(); ++e) {
    if (region.contains(edges[e].side)) out.push_back(static_cast<int>(e));
  }
  const auto& nodes = mesh.nodes();
  auto midpoint = [&](int e) {
    const BoundaryEdge& edge = edges[e];
    return Vec2{0.5 * (nodes[edge.node_a].x + nodes[edge.node_b].x),
                0.5 * (nodes[edge.node_a].y + nodes[edge.node_b].y)};
  };
  std::sort(out.begin(), out.end(), [&](int a, int b) {
    const Vec2 ma = midpoint(a);
    const Vec2 mb = midpoint(b);
    if (ma.y != mb.y) return ma.y < mb.y;
    return ma.x < mb.x;
  });
  return out;
}

NodalField prolongate(const NodalField& coarse, const MeshPtr& fine_mesh) {
  const MeshPtr& coarse_mesh = coarse.mesh();
  if (!coarse_mesh || !fine_mesh) throw std::invalid_argument("prolongate: missing mesh");
  const int lc = coarse_mesh->level();
  const int lf = fine_mesh->level();
  if (lf != 2 * lc) {
    throw std::invalid_argument("prolongate: fine level must be exactly twice the coarse level");
  }

  NodalField fine(fine_mesh, 0.0);
  const int nf = lf + 1;
  for (int iy = 0; iy < nf; ++iy) {
    for (int ix = 0; ix < nf; ++ix) {
      const int id = fine_mesh->node_index(ix, iy);
      const int cx = ix / 2;
      const int cy = iy / 2;
      if (ix % 2 == 0 && iy % 2 == 0) {
        fine[id] = coarse[coarse_mesh->node_index(cx, cy)];
      } else if (iy % 2 == 0) {
        // midpoint of a horizontal coarse edge
        fine[id] = 0.5 * (coarse[coarse_mesh->node_index(cx, cy)] +
                          coarse[coarse_mesh->node_index(cx + 1, cy)]);
      } else if (ix % 2 == 0) {
        fine[id] = 0.5 * (coarse[coarse_mesh->node_index(cx, cy)] +
                          coarse[coarse_mesh->node_index(cx, cy + 1)]);
      } else {
        // cell center: lies on the coarse diagonal from (cx,cy) to (cx+1,cy+1)
        fine[id] = 0.5 * (coarse[coarse_mesh->node_index(cx, cy)] +
                          coarse[coarse_mesh->node_index(cx + 1, cy + 1)]);
      }
    }
  }
  return fine;
}

}  // namespace betarec
