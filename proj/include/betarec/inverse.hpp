#pragma once

#include <functional>
#include <span>
#include <vector>

#include "betarec/forward.hpp"

namespace betarec {

struct SolverConfig {
  double rho = 1e-3;
  double beta_min = 0.05;
  double beta_max = 10.0;
  double mu0 = 0.75;      // initial step size control, in (0,1)
  double tau = 1e-4;      // Armijo constant
  double tau1 = 0.0;      // stopping offset, 1e-3 * h by default (set per level)
  double tau2 = 0.0;      // stopping factor, 1e-2 * h by default
  int max_iter = 600;
  double cg_tol = 1e-12;
  double mu_floor = 1e-16;
  int threads = 0;  // 0 = hardware concurrency

  void validate() const;
  /// tau1 = 1e-3 h, tau2 = 1e-2 h.
  void set_default_tolerances(double mesh_size);
};

struct IterationRecord {
  int k = 0;
  double cost = 0.0;
  double grad_norm = 0.0;
  double mu = 0.0;
  double q = 0.0;
  int halvings = 0;
};

enum class StopReason { tolerance, max_iterations };
const char* to_string(StopReason reason);

struct InversionResult {
  NodalField beta;
  std::vector<IterationRecord> history;  // row 0 is the initial state
  StopReason stop = StopReason::tolerance;
  double grad0_norm = 0.0;
  int iterations = 0;  // accepted steps
};

/// Componentwise clamp onto [lo, hi].
NodalField project(const NodalField& field, double lo, double hi);

/// Tikhonov-regularized output-least-squares problem for one mesh, one
/// observation boundary and one or more Cauchy pairs.  The functional is
///
///   J(beta) = 1/(2 I) sum_i ||N_i(beta) - M_i(beta)||^2  +  rho/2 ||beta - beta*||^2
///
/// (L2 norms via the consistent mass matrix), whose exact discrete gradient is
/// the mass-projected field  mean_i(M_i A_Mi - N_i A_Ni) + rho (beta - beta*).
class InverseProblem {
 public:
  InverseProblem(MeshPtr mesh, ProblemCoefficients coeffs, BoundaryRegion gamma,
                 std::vector<CauchyData> data, SolverConfig config, NodalField beta_star);

  double cost(const NodalField& beta) const;
  NodalField gradient(const NodalField& beta) const;
  /// ||beta - P(1/rho (N A_N - M A_M) + beta*)||_{L2}; requires rho > 0.
  double optimality_residual(const NodalField& beta) const;

  /// Gradient projection with the Armijo-type acceptance rule
  ///   Q = J(beta_k) - J(beta_hat) + tau mu ||beta_hat - beta_k||^2 >= 0,
  /// halving mu until acceptance (mu persists across iterations); stops when
  ///   ||grad J(beta_k)|| - tau1 - tau2 ||grad J(beta_0)|| <= 0
  /// or after max_iter accepted steps.  Throws on step-size underflow.
  InversionResult run(const NodalField& beta0) const;

  const SparseSpdMatrix& mass() const { return mass_; }
  double l2_norm(const NodalField& field) const;
  const SolverConfig& config() const { return config_; }
  const MeshPtr& mesh() const { return mesh_; }
  std::size_t measurement_count() const { return data_.size(); }

 private:
  struct StateSet {
    std::vector<NodalField> u;  // Neumann states, one per measurement
    std::vector<NodalField> v;  // mixed states
    double misfit_mean_sq = 0.0;
  };

  BetaOperator make_operator(const NodalField& beta) const;
  StateSet solve_states(const BetaOperator& op) const;
  double cost_from(const StateSet& states, const NodalField& beta) const;
  /// Mass-projected representation of mean_i(u_i A_Ni - v_i A_Mi).
  NodalField adjoint_product_field(const BetaOperator& op, const StateSet& states) const;

  MeshPtr mesh_;
  ProblemCoefficients coeffs_;
  BoundaryRegion gamma_;
  std::vector<CauchyData> data_;
  SolverConfig config_;
  NodalField beta_star_;
  SparseSpdMatrix mass_;
  std::vector<Vector> neumann_loads_;  // per measurement, beta-independent
  std::vector<Vector> mixed_loads_;
};

/// Per-level schedules for the coarse-to-fine continuation driver.
struct MultilevelSchedules {
  std::function<double(int level)> rho;
  std::function<double(int level, double rho)> theta;
  double beta_init = 1.5;  // first-level initial iterate and a priori guess
};

struct GeneratedData {
  std::vector<CauchyData> data;
  std::vector<double> deltas;  // realized noise level per measurement
};

using DataGenerator =
    std::function<GeneratedData(const MeshPtr& mesh, int level, double theta)>;

struct MultilevelLevelResult {
  int level = 0;
  double h = 0.0;
  double rho = 0.0;
  double theta = 0.0;
  std::vector<double> deltas;
  NodalField beta_star;  // this level's a priori estimate
  InversionResult run;
};

/// Observer invoked after each level with the level outcome and its mesh.
using LevelObserver = std::function<void(const MultilevelLevelResult&, const MeshPtr&)>;

/// Runs gradient projection level by level; each result is interpolated onto
/// the next (doubled) level as both the initial iterate and the a priori
/// estimate.  Levels must be strictly doubling.
std::vector<MultilevelLevelResult> multilevel_run(
    std::span<const int> levels, const ProblemCoefficients& coeffs, const BoundaryRegion& gamma,
    const MultilevelSchedules& schedules, const DataGenerator& generator, SolverConfig base,
    const LevelObserver& observer = {});

/// Mesh-refinement proxy for the discretization error: solves the Neumann and
/// mixed problems on the coarse mesh and on a nested reference mesh, and
/// returns the sum of L2 gaps (coarse solutions interpolated up).  Boundary
/// data come from pointwise rules so both meshes see the same problem.
double discretization_error_estimate(const ProblemCoefficients& coeffs,
                                     const ScalarCoefficient& beta,
                                     const std::function<double(Vec2, Side)>& flux_rule,
                                     const BoundaryRegion& gamma,
                                     const std::function<double(Vec2)>& trace_rule,
                                     int coarse_level, int reference_level,
                                     double rel_tol = 1e-12);

}  // namespace betarec
