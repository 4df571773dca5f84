#pragma once

#include <functional>
#include <memory>
#include <span>
#include <vector>

#include "betarec/assembly.hpp"

namespace betarec {

/// Known problem data: diffusion matrix, boundary weight and volume source.
/// The reaction coefficient is passed separately since it is the unknown.
struct ProblemCoefficients {
  MatrixCoefficient alpha;
  ScalarCoefficient sigma = ScalarCoefficient::constant(0.0);
  ScalarCoefficient f = ScalarCoefficient::constant(0.0);
};

/// One observation pair on the accessible boundary: the flux over the whole
/// boundary (measured values on gamma merged with the known flux elsewhere)
/// and the Dirichlet trace on gamma's nodes (boundary_nodes order).
struct CauchyData {
  BoundaryRegion gamma;
  EdgeFlux flux;
  std::vector<double> trace;
};

NodalField solve_neumann(const MeshPtr& mesh, const ProblemCoefficients& coeffs,
                         const ScalarCoefficient& beta, const EdgeFlux& flux,
                         double rel_tol = 1e-12);

NodalField solve_mixed(const MeshPtr& mesh, const ProblemCoefficients& coeffs,
                       const ScalarCoefficient& beta, const EdgeFlux& flux,
                       const BoundaryRegion& gamma, std::span<const double> trace,
                       double rel_tol = 1e-12);

NodalField solve_dirichlet(const MeshPtr& mesh, const ProblemCoefficients& coeffs,
                           const ScalarCoefficient& beta,
                           std::span<const double> boundary_values,
                           double rel_tol = 1e-12);

NodalField solve_adjoint_neumann(const MeshPtr& mesh, const MatrixCoefficient& alpha,
                                 const ScalarCoefficient& beta, const ScalarCoefficient& sigma,
                                 const NodalField& residual, double rel_tol = 1e-12);

NodalField solve_adjoint_mixed(const MeshPtr& mesh, const MatrixCoefficient& alpha,
                               const ScalarCoefficient& beta, const ScalarCoefficient& sigma,
                               const BoundaryRegion& gamma, const NodalField& residual,
                               double rel_tol = 1e-12);

enum class StateKind { neumann, mixed };

/// Solution of the first-order sensitivity problem
///   [d, phi] = -(kappa * base, phi)  for phi in the kind's test space,
/// with homogeneous Dirichlet values on gamma in the mixed case.
NodalField directional_derivative(const MeshPtr& mesh, const MatrixCoefficient& alpha,
                                  const ScalarCoefficient& beta, const ScalarCoefficient& sigma,
                                  const NodalField& kappa, const NodalField& base,
                                  StateKind kind, const BoundaryRegion& gamma,
                                  double rel_tol = 1e-12);

/// Discrete operator bundle for one (mesh, coefficients, gamma, beta):
/// assembles the Galerkin matrix once and serves all five solves.  Loads are
/// beta-independent and can be precomputed by the caller.
class BetaOperator {
 public:
  BetaOperator(MeshPtr mesh, const ProblemCoefficients& coeffs, const ScalarCoefficient& beta,
               const BoundaryRegion& gamma, double rel_tol);

  NodalField solve_neumann_load(const Vector& load) const;
  NodalField solve_mixed_load(const Vector& load_off_gamma, std::span<const double> trace) const;
  NodalField solve_adjoint_neumann(const SparseSpdMatrix& mass, const NodalField& residual) const;
  NodalField solve_adjoint_mixed(const SparseSpdMatrix& mass, const NodalField& residual) const;

  const SparseSpdMatrix& matrix() const { return full_; }

 private:
  NodalField solve_reduced(Vector reduced_rhs, std::span<const double> trace_values) const;

  MeshPtr mesh_;
  double rel_tol_;
  SparseSpdMatrix full_;
  std::vector<int> gamma_nodes_;
  DirichletSystem reduced_;  // assembled with zero fixed values; lifting applied per solve
};

}  // namespace betarec
