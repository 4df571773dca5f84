#include "betarec/forward.hpp"

#include <stdexcept>

namespace betarec {

namespace {

NodalField solve_full(const MeshPtr& mesh, const SparseSpdMatrix& A, const Vector& load,
                      double rel_tol) {
  Vector x = solve_spd(A, load, rel_tol);
  return NodalField(mesh, std::move(x));
}

}  // namespace

NodalField solve_neumann(const MeshPtr& mesh, const ProblemCoefficients& coeffs,
                         const ScalarCoefficient& beta, const EdgeFlux& flux, double rel_tol) {
  const SparseSpdMatrix A = assemble_stiffness(mesh, coeffs.alpha, beta, coeffs.sigma);
  const Vector b = assemble_load(mesh, coeffs.f, &flux);
  return solve_full(mesh, A, b, rel_tol);
}

NodalField solve_mixed(const MeshPtr& mesh, const ProblemCoefficients& coeffs,
                       const ScalarCoefficient& beta, const EdgeFlux& flux,
                       const BoundaryRegion& gamma, std::span<const double> trace,
                       double rel_tol) {
  const SparseSpdMatrix A = assemble_stiffness(mesh, coeffs.alpha, beta, coeffs.sigma);
  const EdgeFlux masked = flux.masked_without(gamma);
  const Vector b = assemble_load(mesh, coeffs.f, &masked);
  const std::vector<int> nodes = boundary_nodes(*mesh, gamma);
  if (trace.size() != nodes.size()) {
    throw std::invalid_argument("solve_mixed: trace must cover the gamma nodes");
  }
  const DirichletSystem sys = apply_dirichlet(A, b, nodes, trace);
  if (sys.free_nodes.empty()) return sys.reconstruct(mesh, {});
  Vector x = solve_spd(sys.matrix, sys.rhs, rel_tol);
  return sys.reconstruct(mesh, x);
}

NodalField solve_dirichlet(const MeshPtr& mesh, const ProblemCoefficients& coeffs,
                           const ScalarCoefficient& beta,
                           std::span<const double> boundary_values, double rel_tol) {
  return solve_mixed(mesh, coeffs, beta, EdgeFlux(mesh, 0.0), BoundaryRegion::all(),
                     boundary_values, rel_tol);
}

NodalField solve_adjoint_neumann(const MeshPtr& mesh, const MatrixCoefficient& alpha,
                                 const ScalarCoefficient& beta, const ScalarCoefficient& sigma,
                                 const NodalField& residual, double rel_tol) {
  const SparseSpdMatrix A = assemble_stiffness(mesh, alpha, beta, sigma);
  const SparseSpdMatrix mass = assemble_mass(mesh);
  const Vector b = mass.multiply(residual.values());
  return solve_full(mesh, A, b, rel_tol);
}

NodalField solve_adjoint_mixed(const MeshPtr& mesh, const MatrixCoefficient& alpha,
                               const ScalarCoefficient& beta, const ScalarCoefficient& sigma,
                               const BoundaryRegion& gamma, const NodalField& residual,
                               double rel_tol) {
  const SparseSpdMatrix A = assemble_stiffness(mesh, alpha, beta, sigma);
  const SparseSpdMatrix mass = assemble_mass(mesh);
  const Vector b = mass.multiply(residual.values());
  const std::vector<int> nodes = boundary_nodes(*mesh, gamma);
  const std::vector<double> zeros(nodes.size(), 0.0);
  const DirichletSystem sys = apply_dirichlet(A, b, nodes, zeros);
  if (sys.free_nodes.empty()) return sys.reconstruct(mesh, {});
  Vector x = solve_spd(sys.matrix, sys.rhs, rel_tol);
  return sys.reconstruct(mesh, x);
}

NodalField directional_derivative(const MeshPtr& mesh, const MatrixCoefficient& alpha,
                                  const ScalarCoefficient& beta, const ScalarCoefficient& sigma,
                                  const NodalField& kappa, const NodalField& base,
                                  StateKind kind, const BoundaryRegion& gamma, double rel_tol) {
  const SparseSpdMatrix A = assemble_stiffness(mesh, alpha, beta, sigma);
  Vector b = assemble_product_load(kappa, base);
  for (double& v : b) v = -v;
  if (kind == StateKind::neumann) {
    return solve_full(mesh, A, b, rel_tol);
  }
  const std::vector<int> nodes = boundary_nodes(*mesh, gamma);
  const std::vector<double> zeros(nodes.size(), 0.0);
  const DirichletSystem sys = apply_dirichlet(A, b, nodes, zeros);
  if (sys.free_nodes.empty()) return sys.reconstruct(mesh, {});
  Vector x = solve_spd(sys.matrix, sys.rhs, rel_tol);
  return sys.reconstruct(mesh, x);
}

BetaOperator::BetaOperator(MeshPtr mesh, const ProblemCoefficients& coeffs,
                           const ScalarCoefficient& beta, const BoundaryRegion& gamma,
                           double rel_tol)
    : mesh_(std::move(mesh)),
      rel_tol_(rel_tol),
      full_(assemble_stiffness(mesh_, coeffs.alpha, beta, coeffs.sigma)),
      gamma_nodes_(boundary_nodes(*mesh_, gamma)) {
  const Vector zero_load(mesh_->node_count(), 0.0);
  const std::vector<double> zeros(gamma_nodes_.size(), 0.0);
  reduced_ = apply_dirichlet(full_, zero_load, gamma_nodes_, zeros);
}

NodalField BetaOperator::solve_neumann_load(const Vector& load) const {
  Vector x = solve_spd(full_, load, rel_tol_);
  return NodalField(mesh_, std::move(x));
}

NodalField BetaOperator::solve_reduced(Vector reduced_rhs,
                                       std::span<const double> trace_values) const {
  if (reduced_.free_nodes.empty()) {
    return reduced_.reconstruct_with(mesh_, {}, trace_values);
  }
  Vector x = solve_spd(reduced_.matrix, reduced_rhs, rel_tol_);
  return reduced_.reconstruct_with(mesh_, x, trace_values);
}

NodalField BetaOperator::solve_mixed_load(const Vector& load_off_gamma,
                                          std::span<const double> trace) const {
  return solve_reduced(reduced_.reduce_rhs(load_off_gamma, trace), trace);
}

NodalField BetaOperator::solve_adjoint_neumann(const SparseSpdMatrix& mass,
                                               const NodalField& residual) const {
  return solve_neumann_load(mass.multiply(residual.values()));
}

NodalField BetaOperator::solve_adjoint_mixed(const SparseSpdMatrix& mass,
                                             const NodalField& residual) const {
  const Vector load = mass.multiply(residual.values());
  const std::vector<double> zeros(gamma_nodes_.size(), 0.0);
  return solve_reduced(reduced_.reduce_rhs(load, zeros), zeros);
}

}  // namespace betarec
