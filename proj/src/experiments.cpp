#include "betarec/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <stdexcept>

#include "betarec/rng.hpp"

namespace betarec {

namespace {

bool in_square_d(Vec2 x) { return std::fabs(x.x) <= 0.5 && std::fabs(x.y) <= 0.5; }
bool in_omega11(Vec2 x) { return std::fabs(x.x) <= 0.75 && std::fabs(x.y) <= 0.75; }
bool in_omega12(Vec2 x) { return std::fabs(x.x) + std::fabs(x.y) <= 0.75; }
bool in_omega22(Vec2 x) { return x.x * x.x + x.y * x.y <= 9.0 / 16.0; }
bool in_omega0(Vec2 x) { return 4.0 * x.x * x.x + 9.0 * x.y * x.y <= 1.0; }

}  // namespace

ProblemCatalog default_catalog() {
  ProblemCatalog catalog;
  catalog.coeffs.alpha = MatrixCoefficient([](Vec2 x) {
    SymMat2 a;
    a.a11 = in_omega11(x) ? 2.0 : 1.0;
    a.a12 = in_omega12(x) ? 1.0 : 0.0;
    a.a22 = in_omega22(x) ? 3.0 : 2.0;
    return a;
  });
  catalog.coeffs.sigma = ScalarCoefficient::constant(0.0);
  catalog.coeffs.f = ScalarCoefficient::from_function(
      [](Vec2 x) { return in_square_d(x) ? 1.5 : -0.5; });
  catalog.beta_true = ScalarCoefficient::from_function(
      [](Vec2 x) { return in_omega0(x) ? 3.0 : 1.0; });
  return catalog;
}

double ProblemCatalog::flux_value(Vec2 midpoint, Side side,
                                  const std::array<double, 4>& abcd) {
  switch (side) {
    case Side::bottom: return midpoint.x > 0.0 ? abcd[0] : abcd[1];
    case Side::left: return midpoint.y <= 0.0 ? abcd[2] : abcd[3];
    case Side::right: return midpoint.y <= 0.0 ? 4.0 : -3.0;
    case Side::top: return midpoint.x > 0.0 ? 2.0 : -1.0;
  }
  return 0.0;
}

EdgeFlux ProblemCatalog::exact_flux(const MeshPtr& mesh,
                                    const std::array<double, 4>& abcd) const {
  return EdgeFlux::from_rule(
      mesh, [&abcd](Vec2 mid, Side side) { return flux_value(mid, side, abcd); });
}

NodalField ProblemCatalog::beta_true_interpolant(const MeshPtr& mesh) const {
  return NodalField::from_function(mesh, [this](Vec2 x) { return beta_true(x); });
}

ExactData synthesize_exact(const MeshPtr& mesh, const ProblemCatalog& catalog,
                           const std::array<double, 4>& abcd, const BoundaryRegion& gamma,
                           double rel_tol) {
  ExactData out;
  out.gamma = gamma;
  out.flux = catalog.exact_flux(mesh, abcd);
  out.phi = solve_neumann(mesh, catalog.coeffs, catalog.beta_true, out.flux, rel_tol);
  const std::vector<int> nodes = boundary_nodes(*mesh, gamma);
  out.trace.resize(nodes.size());
  for (std::size_t i = 0; i < nodes.size(); ++i) out.trace[i] = out.phi[nodes[i]];
  return out;
}

Measurement add_noise(const MeshPtr& mesh, const ExactData& exact, double theta,
                      std::uint64_t seed) {
  if (theta < 0.0) throw std::invalid_argument("add_noise: theta must be >= 0");
  Measurement m;
  m.theta = theta;
  m.seed = seed;
  m.data.gamma = exact.gamma;
  m.data.flux = exact.flux;
  m.data.trace = exact.trace;

  SplitMix64 rng(seed);
  const std::vector<int> edges = region_edges(*mesh, exact.gamma);
  std::vector<double> flux_noise(edges.size());
  for (std::size_t e = 0; e < edges.size(); ++e) {
    flux_noise[e] = theta * rng.uniform_symmetric();
    m.data.flux[edges[e]] += flux_noise[e];
  }
  std::vector<double> trace_noise(m.data.trace.size());
  for (std::size_t i = 0; i < trace_noise.size(); ++i) {
    trace_noise[i] = theta * rng.uniform_symmetric();
    m.data.trace[i] += trace_noise[i];
  }
  m.delta = boundary_l2_norm_edgewise(*mesh, exact.gamma, flux_noise) +
            boundary_l2_norm_nodal(*mesh, exact.gamma, trace_noise);
  return m;
}

RhoRule parse_rho_rule(const std::string& name) {
  if (name == "sqrt") return RhoRule::sqrt_h;
  if (name == "h2") return RhoRule::h2;
  if (name == "h2e-1") return RhoRule::h2e1;
  if (name == "h2e-2") return RhoRule::h2e2;
  if (name == "h2e-3") return RhoRule::h2e3;
  throw std::invalid_argument("unknown rho rule '" + name + "'");
}

ThetaRule parse_theta_rule(const std::string& name) {
  if (name == "ex1") return ThetaRule::ex1;
  if (name == "ex2") return ThetaRule::ex2;
  if (name == "ex3") return ThetaRule::ex3;
  if (name == "const") return ThetaRule::constant;
  throw std::invalid_argument("unknown theta rule '" + name + "'");
}

const char* to_string(RhoRule rule) {
  switch (rule) {
    case RhoRule::sqrt_h: return "sqrt";
    case RhoRule::h2: return "h2";
    case RhoRule::h2e1: return "h2e-1";
    case RhoRule::h2e2: return "h2e-2";
    case RhoRule::h2e3: return "h2e-3";
  }
  return "?";
}

const char* to_string(ThetaRule rule) {
  switch (rule) {
    case ThetaRule::ex1: return "ex1";
    case ThetaRule::ex2: return "ex2";
    case ThetaRule::ex3: return "ex3";
    case ThetaRule::constant: return "const";
  }
  return "?";
}

double rho_schedule(RhoRule rule, int level) {
  if (level < 1) throw std::invalid_argument("rho_schedule: level must be >= 1");
  const double h = std::sqrt(8.0) / level;
  switch (rule) {
    case RhoRule::sqrt_h: return 1e-3 * std::sqrt(h);
    case RhoRule::h2: return h * h;
    case RhoRule::h2e1: return 0.1 * h * h;
    case RhoRule::h2e2: return 0.01 * h * h;
    case RhoRule::h2e3: return 0.001 * h * h;
  }
  throw std::invalid_argument("rho_schedule: unknown rule");
}

double theta_schedule(ThetaRule rule, int level, double rho, double constant_theta) {
  if (level < 1) throw std::invalid_argument("theta_schedule: level must be >= 1");
  const double h = std::sqrt(8.0) / level;
  switch (rule) {
    case ThetaRule::ex1: return h * std::sqrt(10.0 * rho);
    case ThetaRule::ex2: return 1e-2 * h * std::sqrt(rho);
    case ThetaRule::ex3: return 0.5 * h * std::sqrt(10.0 * rho);
    case ThetaRule::constant: return constant_theta;
  }
  throw std::invalid_argument("theta_schedule: unknown rule");
}

namespace {

/// integral over the mesh of (I_h beta - beta_ref(x))^2 by the midpoint rule,
/// with beta_ref evaluated by its defining predicate at quadrature points.
double l2_error_vs_coefficient(const MeshPtr& mesh, const NodalField& beta,
                               const ScalarCoefficient& beta_ref) {
  double acc = 0.0;
  const auto& nodes = mesh->nodes();
  const auto& tris = mesh->triangles();
  for (std::size_t t = 0; t < tris.size(); ++t) {
    const auto& tri = tris[t];
    const TriangleGeometry g = triangle_geometry(nodes[tri[0]], nodes[tri[1]], nodes[tri[2]]);
    const double w = g.area / 3.0;
    for (int q = 0; q < 3; ++q) {
      const auto& bary = kMidpointBary[q];
      const double bh =
          bary[0] * beta[tri[0]] + bary[1] * beta[tri[1]] + bary[2] * beta[tri[2]];
      const double bt = beta_ref.eval(*mesh, static_cast<int>(t), g.edge_midpoints[q], bary);
      acc += w * (bh - bt) * (bh - bt);
    }
  }
  return std::sqrt(acc);
}

std::vector<double> merge_boundary_values(const Mesh& mesh, const NodalField& phi,
                                          const BoundaryRegion& gamma,
                                          std::span<const double> gamma_values) {
  const std::vector<int> all_nodes = boundary_nodes(mesh, BoundaryRegion::all());
  const std::vector<int> gamma_nodes = boundary_nodes(mesh, gamma);
  std::vector<double> merged(all_nodes.size());
  std::map<int, double> on_gamma;
  for (std::size_t i = 0; i < gamma_nodes.size(); ++i) on_gamma[gamma_nodes[i]] = gamma_values[i];
  for (std::size_t i = 0; i < all_nodes.size(); ++i) {
    const auto it = on_gamma.find(all_nodes[i]);
    merged[i] = it != on_gamma.end() ? it->second : phi[all_nodes[i]];
  }
  return merged;
}

}  // namespace

ErrorMetrics error_metrics(const MeshPtr& mesh, const ProblemCatalog& catalog,
                           const NodalField& beta, const std::vector<ExactData>& exact,
                           const std::vector<Measurement>& measurements, double rel_tol) {
  if (exact.empty() || exact.size() != measurements.size()) {
    throw std::invalid_argument("error_metrics: exact data and measurements must pair up");
  }
  ErrorMetrics out;
  out.l2_beta = l2_error_vs_coefficient(mesh, beta, catalog.beta_true);

  const SparseSpdMatrix mass = assemble_mass(mesh);
  const ScalarCoefficient beta_field = ScalarCoefficient::from_field(beta);
  auto gap = [&](const NodalField& a, const NodalField& b) {
    Vector diff(a.size());
    for (std::size_t p = 0; p < diff.size(); ++p) diff[p] = a[p] - b[p];
    return mass_norm(mass, diff);
  };

  for (std::size_t i = 0; i < exact.size(); ++i) {
    const ExactData& ex = exact[i];
    const Measurement& me = measurements[i];
    const BoundaryRegion& gamma = ex.gamma;

    const NodalField n_rec =
        solve_neumann(mesh, catalog.coeffs, beta_field, me.data.flux, rel_tol);
    // Same discretization generated the data, so phi doubles as both exact
    // reference states; the mixed reference is re-solved as defined.
    const NodalField m_rec = solve_mixed(mesh, catalog.coeffs, beta_field, me.data.flux, gamma,
                                         me.data.trace, rel_tol);
    const NodalField m_ref = solve_mixed(mesh, catalog.coeffs, catalog.beta_true, ex.flux,
                                         gamma, ex.trace, rel_tol);

    const std::vector<double> g_noisy =
        merge_boundary_values(*mesh, ex.phi, gamma, me.data.trace);
    const std::vector<double> g_exact = merge_boundary_values(*mesh, ex.phi, gamma, ex.trace);
    const NodalField d_rec =
        solve_dirichlet(mesh, catalog.coeffs, beta_field, g_noisy, rel_tol);
    const NodalField d_ref =
        solve_dirichlet(mesh, catalog.coeffs, catalog.beta_true, g_exact, rel_tol);

    out.l2_n += gap(n_rec, ex.phi);
    out.l2_m += gap(m_rec, m_ref);
    out.l2_d += gap(d_rec, d_ref);
  }
  const double inv = 1.0 / static_cast<double>(exact.size());
  out.l2_n *= inv;
  out.l2_m *= inv;
  out.l2_d *= inv;
  return out;
}

std::pair<std::vector<double>, double> eoc(std::span<const double> errors,
                                           std::span<const double> mesh_sizes) {
  if (errors.size() != mesh_sizes.size() || errors.size() < 2) {
    throw std::invalid_argument("eoc: need matching lists with at least two entries");
  }
  for (double e : errors) {
    if (!(e > 0.0)) throw std::invalid_argument("eoc: errors must be positive");
  }
  for (double h : mesh_sizes) {
    if (!(h > 0.0)) throw std::invalid_argument("eoc: mesh sizes must be positive");
  }
  std::vector<double> rates;
  rates.reserve(errors.size() - 1);
  double sum = 0.0;
  for (std::size_t i = 1; i < errors.size(); ++i) {
    const double r = (std::log(errors[i - 1]) - std::log(errors[i])) /
                     (std::log(mesh_sizes[i - 1]) - std::log(mesh_sizes[i]));
    rates.push_back(r);
    sum += r;
  }
  return {rates, sum / static_cast<double>(rates.size())};
}

std::vector<std::array<double, 4>> measurement_tuples(int count) {
  if (count < 1 || count > 24) {
    throw std::invalid_argument("measurement_tuples: count must be in [1, 24]");
  }
  if (count == 1) return {{1.0, -2.0, 3.0, -4.0}};
  if (count == 6) {
    std::array<double, 3> abc = {-2.0, 1.0, 3.0};  // ascending start
    std::vector<std::array<double, 4>> out;
    do {
      out.push_back({abc[0], abc[1], abc[2], -4.0});
    } while (std::next_permutation(abc.begin(), abc.end()));
    return out;
  }
  std::array<double, 4> abcd = {-4.0, -2.0, 1.0, 3.0};
  std::vector<std::array<double, 4>> out;
  do {
    out.push_back(abcd);
    if (static_cast<int>(out.size()) == count) break;
  } while (std::next_permutation(abcd.begin(), abcd.end()));
  return out;
}

namespace {

struct LevelCache {
  std::vector<ExactData> exact;
  std::vector<Measurement> measurements;
};

SweepResult run_sweep(const std::string& label, const ProblemCatalog& catalog,
                      const BoundaryRegion& gamma,
                      const std::vector<std::array<double, 4>>& tuples, RhoRule rho_rule,
                      ThetaRule theta_rule, const ExampleOptions& options) {
  auto cache = std::make_shared<std::map<int, LevelCache>>();

  DataGenerator generator = [&, cache](const MeshPtr& mesh, int level,
                                       double theta) -> GeneratedData {
    LevelCache& lc = (*cache)[level];
    lc.exact.clear();
    lc.measurements.clear();
    GeneratedData generated;
    for (std::size_t i = 0; i < tuples.size(); ++i) {
      ExactData exact = synthesize_exact(mesh, catalog, tuples[i], gamma, options.cg_tol);
      Measurement m =
          add_noise(mesh, exact, theta, derive_seed(options.seed, level, i));
      generated.data.push_back(m.data);
      generated.deltas.push_back(m.delta);
      lc.exact.push_back(std::move(exact));
      lc.measurements.push_back(std::move(m));
    }
    return generated;
  };

  MultilevelSchedules schedules;
  schedules.rho = [rho_rule](int level) { return rho_schedule(rho_rule, level); };
  schedules.theta = [theta_rule, &options](int level, double rho) {
    return theta_schedule(theta_rule, level, rho,
                          options.theta_override.value_or(0.2));
  };

  SolverConfig base;
  base.max_iter = options.max_iter;
  base.threads = options.threads;
  base.cg_tol = options.cg_tol;

  SweepResult sweep;
  sweep.label = label;

  LevelObserver observer = [&](const MultilevelLevelResult& entry, const MeshPtr& mesh) {
    const LevelCache& lc = cache->at(entry.level);
    LevelRow row;
    row.level = entry.level;
    row.h = entry.h;
    row.rho = entry.rho;
    row.theta = entry.theta;
    double dsum = 0.0;
    for (double d : entry.deltas) dsum += d;
    row.delta = dsum / static_cast<double>(entry.deltas.size());
    row.errors = error_metrics(mesh, catalog, entry.run.beta, lc.exact, lc.measurements,
                               options.cg_tol);
    row.iterations = entry.run.iterations;
    row.stop = entry.run.stop;

    SolverConfig cfg = base;
    cfg.rho = entry.rho;
    cfg.set_default_tolerances(mesh->mesh_size());
    std::vector<CauchyData> data;
    for (const Measurement& m : lc.measurements) data.push_back(m.data);
    InverseProblem problem(mesh, catalog.coeffs, gamma, std::move(data), cfg,
                           entry.beta_star);
    row.final_optimality_residual = problem.optimality_residual(entry.run.beta);
    sweep.rows.push_back(row);
  };

  const std::vector<MultilevelLevelResult> levels_out =
      multilevel_run(options.levels, catalog.coeffs, gamma, schedules, generator, base,
                     observer);

  sweep.final_log = levels_out.back().run.history;
  sweep.final_beta = levels_out.back().run.beta;
  return sweep;
}

}  // namespace

ExampleReport run_example(int id, const ExampleOptions& options) {
  if (id < 1 || id > 4) throw std::invalid_argument("run_example: id must be 1..4");
  if (options.levels.empty()) throw std::invalid_argument("run_example: no levels");

  const ProblemCatalog catalog = default_catalog();
  ExampleReport report;
  report.example_id = id;

  const BoundaryRegion gamma = (id <= 2) ? BoundaryRegion{Side::bottom}
                                         : BoundaryRegion{Side::bottom, Side::left};
  const std::vector<std::array<double, 4>> single_tuple = {{1.0, -2.0, 3.0, -4.0}};

  switch (id) {
    case 1:
    case 3: {
      const RhoRule rho_rule = options.rho_rule_override
                                   ? parse_rho_rule(*options.rho_rule_override)
                                   : RhoRule::sqrt_h;
      const ThetaRule theta_rule = (id == 1) ? ThetaRule::ex1 : ThetaRule::ex3;
      report.sweeps.push_back(
          run_sweep("default", catalog, gamma, single_tuple, rho_rule, theta_rule, options));
      break;
    }
    case 2: {
      std::vector<RhoRule> rules = {RhoRule::h2, RhoRule::h2e1, RhoRule::h2e2, RhoRule::h2e3};
      if (options.rho_rule_override) rules = {parse_rho_rule(*options.rho_rule_override)};
      for (RhoRule rule : rules) {
        report.sweeps.push_back(run_sweep(to_string(rule), catalog, gamma, single_tuple, rule,
                                          ThetaRule::ex2, options));
      }
      break;
    }
    case 4: {
      for (int count : options.measurement_counts) {
        report.sweeps.push_back(run_sweep("I=" + std::to_string(count), catalog, gamma,
                                          measurement_tuples(count), RhoRule::sqrt_h,
                                          ThetaRule::constant, options));
      }
      break;
    }
  }
  return report;
}

}  // namespace betarec
