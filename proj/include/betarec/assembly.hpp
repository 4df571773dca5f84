#pragma once

#include <array>
#include <span>
#include <vector>

#include "betarec/coefficients.hpp"
#include "betarec/fields.hpp"
#include "betarec/mesh.hpp"
#include "betarec/sparse.hpp"

namespace betarec {

using Mat3 = std::array<std::array<double, 3>, 3>;
using Mat2 = std::array<std::array<double, 2>, 2>;

/// Geometry of one triangle: signed area and the constant gradients of the
/// three hat functions.
struct TriangleGeometry {
  std::array<Vec2, 3> p;
  double area = 0.0;
  std::array<Vec2, 3> grad;
  std::array<Vec2, 3> edge_midpoints;  // m01, m12, m20
};

TriangleGeometry triangle_geometry(Vec2 p0, Vec2 p1, Vec2 p2);

/// Barycentric coordinates of the three edge midpoints, in the same order as
/// TriangleGeometry::edge_midpoints.  The midpoint rule with weights area/3 is
/// exact for quadratics and is the volume quadrature used throughout.
inline constexpr std::array<std::array<double, 3>, 3> kMidpointBary = {{
    {0.5, 0.5, 0.0},
    {0.0, 0.5, 0.5},
    {0.5, 0.0, 0.5},
}};

/// integral over T of (alpha grad phi_j) . grad phi_i, alpha sampled at edge
/// midpoints.  Throws if alpha fails the ellipticity check at any sample.
Mat3 local_diffusion(const TriangleGeometry& tri, const MatrixCoefficient& alpha);

/// integral over T of beta phi_i phi_j by the midpoint rule; beta_mid holds
/// the coefficient values at the three edge midpoints.
Mat3 local_reaction(const TriangleGeometry& tri, const std::array<double, 3>& beta_mid);

/// integral over a boundary edge of sigma phi_i phi_j by 2-point Gauss;
/// sigma_gauss holds the coefficient at the two Gauss points.
Mat2 local_edge_mass(double length, const std::array<double, 2>& sigma_gauss);

/// Relative positions of the two Gauss points along an edge.
inline constexpr std::array<double, 2> kEdgeGaussT = {
    0.5 - 0.28867513459481287,  // 1/(2 sqrt 3)
    0.5 + 0.28867513459481287,
};

/// Galerkin matrix of [u,v] = (alpha grad u, grad v) + (beta u, v) + (sigma u, v)_boundary.
/// beta must be positive at every volume quadrature point, sigma nonnegative
/// at every edge quadrature point; violations throw std::invalid_argument.
SparseSpdMatrix assemble_stiffness(const MeshPtr& mesh, const MatrixCoefficient& alpha,
                                   const ScalarCoefficient& beta,
                                   const ScalarCoefficient& sigma);

/// Consistent L2 mass matrix (ones reaction term only).
SparseSpdMatrix assemble_mass(const MeshPtr& mesh);

/// Load vector b_p = integral of f phi_p + sum over boundary edges of
/// flux phi_p.  Pass nullptr for a zero flux.
Vector assemble_load(const MeshPtr& mesh, const ScalarCoefficient& f, const EdgeFlux* flux);

/// w_p = integral (midpoint rule) of a b phi_p with a, b piecewise linear.
/// This is the quadrature-consistent representation of the products entering
/// the adjoint gradient.
Vector assemble_product_load(const NodalField& a, const NodalField& b);

/// Schur-style elimination of Dirichlet constraints: the reduced SPD system
/// over free nodes plus the data needed to rebuild the full nodal field.
/// The coupling entries allow re-lifting the same reduced matrix with other
/// boundary values or load vectors.
struct DirichletSystem {
  SparseSpdMatrix matrix;          // reduced, over free nodes
  Vector rhs;                      // load minus lifting contribution
  std::vector<int> free_nodes;     // ascending node indices
  std::vector<int> fixed_nodes;    // ascending node indices
  std::vector<double> fixed_values;

  struct Coupling {
    int free_row;   // row in the reduced system
    int fixed_pos;  // position in fixed_nodes
    double value;   // original matrix entry
  };
  std::vector<Coupling> coupling;

  /// rhs for the reduced system given a full-size load and constraint values.
  Vector reduce_rhs(const Vector& full_load, std::span<const double> values) const;
  NodalField reconstruct(const MeshPtr& mesh, const Vector& free_solution) const;
  NodalField reconstruct_with(const MeshPtr& mesh, const Vector& free_solution,
                              std::span<const double> values) const;
};

DirichletSystem apply_dirichlet(const SparseSpdMatrix& A, const Vector& b,
                                std::span<const int> constrained_nodes,
                                std::span<const double> values);

/// L2(Omega) inner product / norm via a consistent mass matrix.
double mass_inner(const SparseSpdMatrix& mass, const Vector& x, const Vector& y);
double mass_norm(const SparseSpdMatrix& mass, const Vector& x);

/// L2 norm over the region's edges of a piecewise-linear boundary function
/// given by one value per region node (boundary_nodes order).
double boundary_l2_norm_nodal(const Mesh& mesh, const BoundaryRegion& region,
                              std::span<const double> node_values);

/// L2 norm over the region's edges of a piecewise-constant edge function
/// given by one value per region edge (region_edges order).
double boundary_l2_norm_edgewise(const Mesh& mesh, const BoundaryRegion& region,
                                 std::span<const double> edge_values);

}  // namespace betarec
