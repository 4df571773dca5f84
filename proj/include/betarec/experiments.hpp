#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "betarec/inverse.hpp"

namespace betarec {

/// Benchmark problem data on (-1,1)^2: discontinuous diffusion matrix and
/// source over axis-aligned, diamond and circular regions, a discontinuous
/// elliptic-inclusion reaction coefficient, zero boundary weight, and the
/// piecewise-constant flux family parameterized by (A,B,C,D) on the bottom
/// and left sides with a fixed flux on the right and top.
struct ProblemCatalog {
  ProblemCoefficients coeffs;
  ScalarCoefficient beta_true;
  double beta_min = 0.05;
  double beta_max = 10.0;

  /// Full-boundary flux rule for the given (A,B,C,D); half-open side
  /// intervals are resolved by the edge midpoint.
  static double flux_value(Vec2 midpoint, Side side, const std::array<double, 4>& abcd);
  EdgeFlux exact_flux(const MeshPtr& mesh, const std::array<double, 4>& abcd) const;
  NodalField beta_true_interpolant(const MeshPtr& mesh) const;
};

ProblemCatalog default_catalog();

/// Exact (inverse-crime) data: the state solved on the same mesh used for
/// inversion, its trace on gamma, and the exact flux.
struct ExactData {
  NodalField phi;                // exact discrete state
  EdgeFlux flux;                 // exact flux over the whole boundary
  std::vector<double> trace;     // trace of phi on gamma nodes
  BoundaryRegion gamma;
};

ExactData synthesize_exact(const MeshPtr& mesh, const ProblemCatalog& catalog,
                           const std::array<double, 4>& abcd, const BoundaryRegion& gamma,
                           double rel_tol = 1e-12);

/// One noisy Cauchy pair plus its realized noise level
///   delta = ||j_d - j||_{L2(gamma)} + ||g_d - g||_{L2(gamma)}.
struct Measurement {
  CauchyData data;
  double theta = 0.0;
  double delta = 0.0;
  std::uint64_t seed = 0;
};

/// Adds theta * uniform(-1,1) to the flux of every gamma edge (region_edges
/// order) and to the trace at every gamma node (boundary_nodes order), all
/// drawn from one SplitMix64 stream seeded by `seed` (edges first).
Measurement add_noise(const MeshPtr& mesh, const ExactData& exact, double theta,
                      std::uint64_t seed);

enum class RhoRule { sqrt_h, h2, h2e1, h2e2, h2e3 };
enum class ThetaRule { ex1, ex2, ex3, constant };

RhoRule parse_rho_rule(const std::string& name);      // throws on unknown kind
ThetaRule parse_theta_rule(const std::string& name);  // throws on unknown kind
const char* to_string(RhoRule rule);
const char* to_string(ThetaRule rule);

double rho_schedule(RhoRule rule, int level);
double theta_schedule(ThetaRule rule, int level, double rho, double constant_theta = 0.2);

struct ErrorMetrics {
  double l2_beta = 0.0;
  double l2_n = 0.0;
  double l2_m = 0.0;
  double l2_d = 0.0;
};

/// The four reconstruction errors of the experiment tables.  State errors are
/// averaged over measurements; the Dirichlet comparison uses the noisy trace
/// on gamma merged with the exact trace elsewhere.
ErrorMetrics error_metrics(const MeshPtr& mesh, const ProblemCatalog& catalog,
                           const NodalField& beta, const std::vector<ExactData>& exact,
                           const std::vector<Measurement>& measurements,
                           double rel_tol = 1e-12);

/// Experimental order of convergence between consecutive refinements and the
/// mean of the defined entries.  Requires positive errors, >= 2 entries.
std::pair<std::vector<double>, double> eoc(std::span<const double> errors,
                                           std::span<const double> mesh_sizes);

struct ExampleOptions {
  std::uint64_t seed = 1;
  std::vector<int> levels = {4, 8, 16, 32, 64};
  std::vector<int> measurement_counts = {1, 6, 16};  // example 4 only
  std::string out_dir;                               // empty = no files written
  int max_iter = 600;
  int threads = 0;
  double cg_tol = 1e-12;
  std::optional<double> theta_override;
  std::optional<std::string> rho_rule_override;
};

struct LevelRow {
  int level = 0;
  double h = 0.0;
  double rho = 0.0;
  double theta = 0.0;
  double delta = 0.0;
  ErrorMetrics errors;
  int iterations = 0;
  StopReason stop = StopReason::tolerance;
  double final_optimality_residual = 0.0;
};

struct SweepResult {
  std::string label;                    // e.g. rho rule or measurement count
  std::vector<LevelRow> rows;           // one per level
  std::vector<IterationRecord> final_log;  // iteration history at finest level
  NodalField final_beta;                // reconstruction at the finest level
};

struct ExampleReport {
  int example_id = 0;
  std::vector<SweepResult> sweeps;  // examples 1,3: one sweep; 2: per rho rule; 4: per I
};

/// (A,B,C,D) tuples for the multi-measurement example: the first `count`
/// permutations in lexicographic order; count 6 fixes D=-4 and permutes the
/// remaining three values.
std::vector<std::array<double, 4>> measurement_tuples(int count);

ExampleReport run_example(int id, const ExampleOptions& options);

}  // namespace betarec
