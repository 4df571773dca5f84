#include "betarec/assembly.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace betarec {

TriangleGeometry triangle_geometry(Vec2 p0, Vec2 p1, Vec2 p2) {
  TriangleGeometry g;
  g.p = {p0, p1, p2};
  const double det = (p1.x - p0.x) * (p2.y - p0.y) - (p2.x - p0.x) * (p1.y - p0.y);
  g.area = 0.5 * det;
  if (!(g.area > 0.0)) {
    throw std::invalid_argument("triangle_geometry: nonpositive signed area");
  }
  // grad phi_i is orthogonal to the opposite edge, scaled by 1/(2 area).
  const double inv = 1.0 / det;
  g.grad[0] = {(p1.y - p2.y) * inv, (p2.x - p1.x) * inv};
  g.grad[1] = {(p2.y - p0.y) * inv, (p0.x - p2.x) * inv};
  g.grad[2] = {(p0.y - p1.y) * inv, (p1.x - p0.x) * inv};
  g.edge_midpoints = {Vec2{0.5 * (p0.x + p1.x), 0.5 * (p0.y + p1.y)},
                      Vec2{0.5 * (p1.x + p2.x), 0.5 * (p1.y + p2.y)},
                      Vec2{0.5 * (p2.x + p0.x), 0.5 * (p2.y + p0.y)}};
  return g;
}

Mat3 local_diffusion(const TriangleGeometry& tri, const MatrixCoefficient& alpha) {
  // Gradients are constant, so only alpha is sampled: the midpoint rule
  // averages the three samples with weight area/3.
  SymMat2 mean{0.0, 0.0, 0.0};
  for (const Vec2& q : tri.edge_midpoints) {
    const SymMat2 a = alpha(q);
    if (!(a.min_eigenvalue() > 0.0)) {
      throw std::invalid_argument("local_diffusion: diffusion matrix not elliptic at (" +
                                  std::to_string(q.x) + "," + std::to_string(q.y) + ")");
    }
    mean.a11 += a.a11 / 3.0;
    mean.a12 += a.a12 / 3.0;
    mean.a22 += a.a22 / 3.0;
  }
  Mat3 out{};
  for (int i = 0; i < 3; ++i) {
    const Vec2 agi = mean.apply(tri.grad[i]);
    for (int j = 0; j < 3; ++j) {
      out[i][j] = tri.area * dot(agi, tri.grad[j]);
    }
  }
  return out;
}

Mat3 local_reaction(const TriangleGeometry& tri, const std::array<double, 3>& beta_mid) {
  Mat3 out{};
  const double w = tri.area / 3.0;
  for (int q = 0; q < 3; ++q) {
    const auto& bary = kMidpointBary[q];
    const double bw = w * beta_mid[q];
    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < 3; ++j) {
        out[i][j] += bw * bary[i] * bary[j];
      }
    }
  }
  return out;
}

Mat2 local_edge_mass(double length, const std::array<double, 2>& sigma_gauss) {
  Mat2 out{};
  for (int q = 0; q < 2; ++q) {
    const double t = kEdgeGaussT[q];
    const double phi[2] = {1.0 - t, t};
    const double w = 0.5 * length * sigma_gauss[q];
    for (int i = 0; i < 2; ++i) {
      for (int j = 0; j < 2; ++j) {
        out[i][j] += w * phi[i] * phi[j];
      }
    }
  }
  return out;
}

namespace {

std::array<double, 3> beta_at_midpoints(const Mesh& mesh, int tri, const TriangleGeometry& g,
                                        const ScalarCoefficient& beta) {
  std::array<double, 3> out{};
  for (int q = 0; q < 3; ++q) {
    out[q] = beta.eval(mesh, tri, g.edge_midpoints[q], kMidpointBary[q]);
  }
  return out;
}

}  // namespace

SparseSpdMatrix assemble_stiffness(const MeshPtr& mesh, const MatrixCoefficient& alpha,
                                   const ScalarCoefficient& beta,
                                   const ScalarCoefficient& sigma) {
  const int n = static_cast<int>(mesh->node_count());
  SparseSpdMatrix::Builder builder(n);

  const auto& nodes = mesh->nodes();
  const auto& tris = mesh->triangles();
  for (std::size_t t = 0; t < tris.size(); ++t) {
    const auto& tri = tris[t];
    const TriangleGeometry g = triangle_geometry(nodes[tri[0]], nodes[tri[1]], nodes[tri[2]]);
    const std::array<double, 3> beta_mid = beta_at_midpoints(*mesh, static_cast<int>(t), g, beta);
    for (double b : beta_mid) {
      if (!(b > 0.0)) {
        throw std::invalid_argument("assemble_stiffness: reaction coefficient must be positive"
                                    " at quadrature points (got " + std::to_string(b) + ")");
      }
    }
    const Mat3 diff = local_diffusion(g, alpha);
    const Mat3 reac = local_reaction(g, beta_mid);
    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < 3; ++j) {
        builder.add(tri[i], tri[j], diff[i][j] + reac[i][j]);
      }
    }
  }

  for (const BoundaryEdge& edge : mesh->boundary_edges()) {
    const Vec2 a = nodes[edge.node_a];
    const Vec2 b = nodes[edge.node_b];
    const double length = norm(b - a);
    std::array<double, 2> sigma_gauss{};
    for (int q = 0; q < 2; ++q) {
      const double t = kEdgeGaussT[q];
      const Vec2 x = a + t * (b - a);
      const double s = sigma(x);
      if (s < 0.0) {
        throw std::invalid_argument("assemble_stiffness: sigma must be nonnegative");
      }
      sigma_gauss[q] = s;
    }
    if (sigma_gauss[0] == 0.0 && sigma_gauss[1] == 0.0) continue;
    const Mat2 em = local_edge_mass(length, sigma_gauss);
    const int id[2] = {edge.node_a, edge.node_b};
    for (int i = 0; i < 2; ++i) {
      for (int j = 0; j < 2; ++j) {
        builder.add(id[i], id[j], em[i][j]);
      }
    }
  }

  return std::move(builder).build();
}

SparseSpdMatrix assemble_mass(const MeshPtr& mesh) {
  const int n = static_cast<int>(mesh->node_count());
  SparseSpdMatrix::Builder builder(n);
  const auto& nodes = mesh->nodes();
  for (const auto& tri : mesh->triangles()) {
    const TriangleGeometry g = triangle_geometry(nodes[tri[0]], nodes[tri[1]], nodes[tri[2]]);
    const Mat3 m = local_reaction(g, {1.0, 1.0, 1.0});
    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < 3; ++j) {
        builder.add(tri[i], tri[j], m[i][j]);
      }
    }
  }
  return std::move(builder).build();
}

Vector assemble_load(const MeshPtr& mesh, const ScalarCoefficient& f, const EdgeFlux* flux) {
  Vector b(mesh->node_count(), 0.0);
  const auto& nodes = mesh->nodes();
  const auto& tris = mesh->triangles();
  for (std::size_t t = 0; t < tris.size(); ++t) {
    const auto& tri = tris[t];
    const TriangleGeometry g = triangle_geometry(nodes[tri[0]], nodes[tri[1]], nodes[tri[2]]);
    const double w = g.area / 3.0;
    for (int q = 0; q < 3; ++q) {
      const double fv = f.eval(*mesh, static_cast<int>(t), g.edge_midpoints[q], kMidpointBary[q]);
      if (fv == 0.0) continue;
      for (int i = 0; i < 3; ++i) {
        b[tri[i]] += w * fv * kMidpointBary[q][i];
      }
    }
  }
  if (flux) {
    if (flux->mesh() != mesh) throw std::invalid_argument("assemble_load: flux mesh mismatch");
    const auto& edges = mesh->boundary_edges();
    for (std::size_t e = 0; e < edges.size(); ++e) {
      const double j = (*flux)[e];
      if (j == 0.0) continue;
      const Vec2 a = nodes[edges[e].node_a];
      const Vec2 c = nodes[edges[e].node_b];
      const double half = 0.5 * norm(c - a) * j;
      // integral of a constant times a hat function over the edge: L/2 each.
      b[edges[e].node_a] += half;
      b[edges[e].node_b] += half;
    }
  }
  return b;
}

Vector assemble_product_load(const NodalField& a, const NodalField& b) {
  if (a.mesh() != b.mesh()) throw std::invalid_argument("assemble_product_load: mesh mismatch");
  const MeshPtr& mesh = a.mesh();
  Vector out(mesh->node_count(), 0.0);
  const auto& nodes = mesh->nodes();
  for (const auto& tri : mesh->triangles()) {
    const TriangleGeometry g = triangle_geometry(nodes[tri[0]], nodes[tri[1]], nodes[tri[2]]);
    const double w = g.area / 3.0;
    for (int q = 0; q < 3; ++q) {
      const auto& bary = kMidpointBary[q];
      const double av = bary[0] * a[tri[0]] + bary[1] * a[tri[1]] + bary[2] * a[tri[2]];
      const double bv = bary[0] * b[tri[0]] + bary[1] * b[tri[1]] + bary[2] * b[tri[2]];
      const double c = w * av * bv;
      for (int i = 0; i < 3; ++i) {
        out[tri[i]] += c * bary[i];
      }
    }
  }
  return out;
}

Vector DirichletSystem::reduce_rhs(const Vector& full_load,
                                   std::span<const double> values) const {
  if (values.size() != fixed_nodes.size()) {
    throw std::invalid_argument("reduce_rhs: constraint value count mismatch");
  }
  Vector out(free_nodes.size());
  for (std::size_t i = 0; i < free_nodes.size(); ++i) out[i] = full_load[free_nodes[i]];
  for (const Coupling& c : coupling) {
    out[c.free_row] -= c.value * values[c.fixed_pos];
  }
  return out;
}

NodalField DirichletSystem::reconstruct(const MeshPtr& mesh, const Vector& free_solution) const {
  return reconstruct_with(mesh, free_solution, fixed_values);
}

NodalField DirichletSystem::reconstruct_with(const MeshPtr& mesh, const Vector& free_solution,
                                             std::span<const double> values) const {
  if (free_solution.size() != free_nodes.size() || values.size() != fixed_nodes.size()) {
    throw std::invalid_argument("reconstruct: size mismatch");
  }
  NodalField field(mesh, 0.0);
  for (std::size_t i = 0; i < free_nodes.size(); ++i) field[free_nodes[i]] = free_solution[i];
  for (std::size_t i = 0; i < fixed_nodes.size(); ++i) field[fixed_nodes[i]] = values[i];
  return field;
}

DirichletSystem apply_dirichlet(const SparseSpdMatrix& A, const Vector& b,
                                std::span<const int> constrained_nodes,
                                std::span<const double> values) {
  const int n = A.dim();
  if (static_cast<int>(b.size()) != n) {
    throw std::invalid_argument("apply_dirichlet: load size mismatch");
  }
  if (constrained_nodes.size() != values.size()) {
    throw std::invalid_argument("apply_dirichlet: constraint count mismatch");
  }

  std::vector<int> position(n, -1);  // -1 free, otherwise index into fixed list
  DirichletSystem sys;
  sys.fixed_nodes.assign(constrained_nodes.begin(), constrained_nodes.end());
  sys.fixed_values.assign(values.begin(), values.end());
  for (std::size_t i = 0; i < sys.fixed_nodes.size(); ++i) {
    const int node = sys.fixed_nodes[i];
    if (node < 0 || node >= n) {
      throw std::invalid_argument("apply_dirichlet: constraint on non-existent node " +
                                  std::to_string(node));
    }
    if (position[node] != -1) {
      throw std::invalid_argument("apply_dirichlet: duplicate constraint on node " +
                                  std::to_string(node));
    }
    position[node] = static_cast<int>(i);
  }

  std::vector<int> free_index(n, -1);
  for (int i = 0; i < n; ++i) {
    if (position[i] == -1) {
      free_index[i] = static_cast<int>(sys.free_nodes.size());
      sys.free_nodes.push_back(i);
    }
  }

  const int n_free = static_cast<int>(sys.free_nodes.size());
  sys.rhs.assign(n_free, 0.0);
  for (int i = 0; i < n_free; ++i) sys.rhs[i] = b[sys.free_nodes[i]];

  if (n_free > 0) {
    SparseSpdMatrix::Builder builder(n_free);
    const auto& offsets = A.row_offsets();
    const auto& cols = A.col_indices();
    const auto& vals = A.values();
    for (int r = 0; r < n; ++r) {
      if (position[r] != -1) continue;
      const int fr = free_index[r];
      for (int k = offsets[r]; k < offsets[r + 1]; ++k) {
        const int c = cols[k];
        if (position[c] == -1) {
          builder.add(fr, free_index[c], vals[k]);
        } else {
          sys.coupling.push_back({fr, position[c], vals[k]});
          sys.rhs[fr] -= vals[k] * sys.fixed_values[position[c]];
        }
      }
    }
    sys.matrix = std::move(builder).build();
  }
  return sys;
}

double mass_inner(const SparseSpdMatrix& mass, const Vector& x, const Vector& y) {
  return dot(x, mass.multiply(y));
}

double mass_norm(const SparseSpdMatrix& mass, const Vector& x) {
  const double s = mass_inner(mass, x, x);
  return s > 0.0 ? std::sqrt(s) : 0.0;
}

double boundary_l2_norm_nodal(const Mesh& mesh, const BoundaryRegion& region,
                              std::span<const double> node_values) {
  const std::vector<int> nodes = boundary_nodes(mesh, region);
  if (node_values.size() != nodes.size()) {
    throw std::invalid_argument("boundary_l2_norm_nodal: value count mismatch");
  }
  std::vector<int> local(mesh.node_count(), -1);
  for (std::size_t i = 0; i < nodes.size(); ++i) local[nodes[i]] = static_cast<int>(i);

  double sum = 0.0;
  const auto& coords = mesh.nodes();
  for (const BoundaryEdge& edge : mesh.boundary_edges()) {
    if (!region.contains(edge.side)) continue;
    const double len = norm(coords[edge.node_b] - coords[edge.node_a]);
    const double va = node_values[local[edge.node_a]];
    const double vb = node_values[local[edge.node_b]];
    // edge mass matrix (L/6)[[2,1],[1,2]]
    sum += len / 6.0 * (2.0 * va * va + 2.0 * va * vb + 2.0 * vb * vb);
  }
  return std::sqrt(sum);
}

double boundary_l2_norm_edgewise(const Mesh& mesh, const BoundaryRegion& region,
                                 std::span<const double> edge_values) {
  const std::vector<int> edges = region_edges(mesh, region);
  if (edge_values.size() != edges.size()) {
    throw std::invalid_argument("boundary_l2_norm_edgewise: value count mismatch");
  }
  double sum = 0.0;
  const auto& coords = mesh.nodes();
  for (std::size_t i = 0; i < edges.size(); ++i) {
    const BoundaryEdge& edge = mesh.boundary_edges()[edges[i]];
    const double len = norm(coords[edge.node_b] - coords[edge.node_a]);
    sum += len * edge_values[i] * edge_values[i];
  }
  return std::sqrt(sum);
}

}  // namespace betarec
