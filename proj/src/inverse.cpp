#include "betarec/inverse.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <optional>
#include <stdexcept>
#include <string>
#include <thread>

namespace betarec {

namespace {

template <typename Fn>
void for_each_index(std::size_t count, int threads, Fn&& fn) {
  const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  const unsigned limit = threads > 0 ? static_cast<unsigned>(threads) : hw;
  if (count <= 1 || limit <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::vector<std::future<void>> futures;
  futures.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    futures.push_back(std::async(std::launch::async, [&fn, i] { fn(i); }));
  }
  for (auto& f : futures) f.get();
}

}  // namespace

void SolverConfig::validate() const {
  if (!(rho >= 0.0)) throw std::invalid_argument("SolverConfig: rho must be >= 0");
  if (!(beta_min > 0.0 && beta_min <= beta_max)) {
    throw std::invalid_argument("SolverConfig: bounds must satisfy 0 < beta_min <= beta_max");
  }
  if (!(mu0 > 0.0 && mu0 < 1.0)) throw std::invalid_argument("SolverConfig: mu0 must be in (0,1)");
  if (!(tau > 0.0 && tau1 >= 0.0 && tau2 >= 0.0)) {
    throw std::invalid_argument("SolverConfig: tau, tau1, tau2 must be positive");
  }
  if (max_iter < 0) throw std::invalid_argument("SolverConfig: max_iter must be >= 0");
  if (!(cg_tol > 0.0 && cg_tol < 1.0)) throw std::invalid_argument("SolverConfig: bad cg_tol");
}

void SolverConfig::set_default_tolerances(double mesh_size) {
  tau1 = 1e-3 * mesh_size;
  tau2 = 1e-2 * mesh_size;
}

const char* to_string(StopReason reason) {
  switch (reason) {
    case StopReason::tolerance: return "tolerance";
    case StopReason::max_iterations: return "max_iterations";
  }
  return "?";
}

NodalField project(const NodalField& field, double lo, double hi) {
  NodalField out = field;
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = std::max(lo, std::min(out[i], hi));
  }
  return out;
}

InverseProblem::InverseProblem(MeshPtr mesh, ProblemCoefficients coeffs, BoundaryRegion gamma,
                               std::vector<CauchyData> data, SolverConfig config,
                               NodalField beta_star)
    : mesh_(std::move(mesh)),
      coeffs_(std::move(coeffs)),
      gamma_(gamma),
      data_(std::move(data)),
      config_(config),
      beta_star_(std::move(beta_star)) {
  config_.validate();
  if (data_.empty()) throw std::invalid_argument("InverseProblem: at least one measurement");
  const std::size_t n_gamma = boundary_nodes(*mesh_, gamma_).size();
  for (const CauchyData& d : data_) {
    if (!(d.gamma == gamma_)) {
      throw std::invalid_argument("InverseProblem: measurements disagree on the observation boundary");
    }
    if (d.trace.size() != n_gamma) {
      throw std::invalid_argument("InverseProblem: trace size does not match gamma nodes");
    }
    if (d.flux.mesh() != mesh_) {
      throw std::invalid_argument("InverseProblem: measurement on a different mesh");
    }
  }
  if (beta_star_.mesh() != mesh_) {
    throw std::invalid_argument("InverseProblem: beta_star on a different mesh");
  }
  mass_ = assemble_mass(mesh_);
  neumann_loads_.reserve(data_.size());
  mixed_loads_.reserve(data_.size());
  for (const CauchyData& d : data_) {
    neumann_loads_.push_back(assemble_load(mesh_, coeffs_.f, &d.flux));
    const EdgeFlux masked = d.flux.masked_without(gamma_);
    mixed_loads_.push_back(assemble_load(mesh_, coeffs_.f, &masked));
  }
}

double InverseProblem::l2_norm(const NodalField& field) const {
  return mass_norm(mass_, field.values());
}

BetaOperator InverseProblem::make_operator(const NodalField& beta) const {
  const double slack = 1e-10;
  if (beta.min_value() < config_.beta_min - slack ||
      beta.max_value() > config_.beta_max + slack) {
    throw std::invalid_argument("InverseProblem: beta violates the admissible bounds [" +
                                std::to_string(config_.beta_min) + ", " +
                                std::to_string(config_.beta_max) + "]");
  }
  return BetaOperator(mesh_, coeffs_, ScalarCoefficient::from_field(beta), gamma_,
                      config_.cg_tol);
}

InverseProblem::StateSet InverseProblem::solve_states(const BetaOperator& op) const {
  StateSet out;
  out.u.resize(data_.size());
  out.v.resize(data_.size());
  for_each_index(data_.size(), config_.threads, [&](std::size_t i) {
    out.u[i] = op.solve_neumann_load(neumann_loads_[i]);
    out.v[i] = op.solve_mixed_load(mixed_loads_[i], data_[i].trace);
  });
  double acc = 0.0;
  Vector diff(mesh_->node_count());
  for (std::size_t i = 0; i < data_.size(); ++i) {
    for (std::size_t p = 0; p < diff.size(); ++p) diff[p] = out.u[i][p] - out.v[i][p];
    const double nrm = norm2(diff);  // prototype: euclidean misfit
    acc += nrm * nrm;
  }
  out.misfit_mean_sq = acc / static_cast<double>(data_.size());
  return out;
}

double InverseProblem::cost_from(const StateSet& states, const NodalField& beta) const {
  Vector dev(mesh_->node_count());
  for (std::size_t p = 0; p < dev.size(); ++p) dev[p] = beta[p] - beta_star_[p];
  const double reg = mass_norm(mass_, dev);
  return 0.5 * states.misfit_mean_sq + 0.5 * config_.rho * reg * reg;
}

double InverseProblem::cost(const NodalField& beta) const {
  const BetaOperator op = make_operator(beta);
  return cost_from(solve_states(op), beta);
}

NodalField InverseProblem::adjoint_product_field(const BetaOperator& op,
                                                 const StateSet& states) const {
  // Quadrature-consistent load of mean_i(u_i A_Ni - v_i A_Mi), then the mass
  // solve gives its Riesz representative in the P1 space.  This is the exact
  // discrete derivative of the misfit half, so the fixed-point identity
  //   beta = P(1/rho * field + beta*)
  // holds at interior stationary points without quadrature slack.
  const std::size_t count = data_.size();
  std::vector<Vector> contributions(count);
  for_each_index(count, config_.threads, [&](std::size_t i) {
    const NodalField residual = states.u[i] - states.v[i];
    const NodalField an = op.solve_adjoint_neumann(mass_, residual);
    const NodalField am = op.solve_adjoint_mixed(mass_, residual);
    Vector w = assemble_product_load(states.u[i], an);
    const Vector wm = assemble_product_load(states.v[i], am);
    for (std::size_t p = 0; p < w.size(); ++p) w[p] -= wm[p];
    contributions[i] = std::move(w);
  });
  Vector total(mesh_->node_count(), 0.0);
  for (const Vector& c : contributions) {
    for (std::size_t p = 0; p < total.size(); ++p) total[p] += c[p];
  }
  const double inv = 1.0 / static_cast<double>(count);
  for (double& v : total) v *= inv;
  Vector riesz = solve_spd(mass_, total, config_.cg_tol);
  return NodalField(mesh_, std::move(riesz));
}

NodalField InverseProblem::gradient(const NodalField& beta) const {
  const BetaOperator op = make_operator(beta);
  const StateSet states = solve_states(op);
  const NodalField w = adjoint_product_field(op, states);
  NodalField g(mesh_, 0.0);
  for (std::size_t p = 0; p < g.size(); ++p) {
    g[p] = -w[p] + config_.rho * (beta[p] - beta_star_[p]);
  }
  return g;
}

double InverseProblem::optimality_residual(const NodalField& beta) const {
  if (!(config_.rho > 0.0)) {
    throw std::invalid_argument("optimality_residual: requires rho > 0");
  }
  const BetaOperator op = make_operator(beta);
  const StateSet states = solve_states(op);
  const NodalField w = adjoint_product_field(op, states);
  NodalField candidate(mesh_, 0.0);
  for (std::size_t p = 0; p < candidate.size(); ++p) {
    candidate[p] = w[p] / config_.rho + beta_star_[p];
  }
  const NodalField projected = project(candidate, config_.beta_min, config_.beta_max);
  Vector diff(beta.size());
  for (std::size_t p = 0; p < diff.size(); ++p) diff[p] = beta[p] - projected[p];
  return mass_norm(mass_, diff);
}

InversionResult InverseProblem::run(const NodalField& beta0) const {
  InversionResult result;
  double mu = config_.mu0;

  NodalField beta = project(beta0, config_.beta_min, config_.beta_max);
  BetaOperator op = make_operator(beta);
  StateSet states = solve_states(op);
  double cost_k = cost_from(states, beta);

  auto gradient_at = [&](const BetaOperator& o, const StateSet& s,
                         const NodalField& b) -> NodalField {
    const NodalField w = adjoint_product_field(o, s);
    NodalField g(mesh_, 0.0);
    for (std::size_t p = 0; p < g.size(); ++p) {
      g[p] = -w[p] + config_.rho * (b[p] - beta_star_[p]);
    }
    return g;
  };

  NodalField grad = gradient_at(op, states, beta);
  double grad_norm = l2_norm(grad);
  result.grad0_norm = grad_norm;
  result.history.push_back({0, cost_k, grad_norm, mu, 0.0, 0});

  int k = 0;
  while (true) {
    const double tolerance = grad_norm - config_.tau1 - config_.tau2 * result.grad0_norm;
    if (tolerance <= 0.0) {
      result.stop = StopReason::tolerance;
      break;
    }
    if (k >= config_.max_iter) {
      result.stop = StopReason::max_iterations;
      break;
    }

    int halvings = 0;
    NodalField beta_hat;
    StateSet states_hat;
    std::optional<BetaOperator> op_hat;
    double cost_hat = 0.0;
    double q = 0.0;
    while (true) {
      NodalField trial(mesh_, 0.0);
      for (std::size_t p = 0; p < trial.size(); ++p) trial[p] = beta[p] - mu * grad[p];
      beta_hat = project(trial, config_.beta_min, config_.beta_max);
      op_hat.emplace(make_operator(beta_hat));
      states_hat = solve_states(*op_hat);
      cost_hat = cost_from(states_hat, beta_hat);

      Vector step(beta.size());
      for (std::size_t p = 0; p < step.size(); ++p) step[p] = beta_hat[p] - beta[p];
      const double step_norm = mass_norm(mass_, step);
      q = cost_k - cost_hat + config_.tau * mu * step_norm * step_norm;
      if (q >= 0.0) break;
      mu *= 0.5;
      ++halvings;
      if (mu < config_.mu_floor) {
        throw std::runtime_error(
            "gradient_projection: step size underflow (mu < " +
            std::to_string(config_.mu_floor) + ") without an accepted step at iteration " +
            std::to_string(k));
      }
    }

    beta = std::move(beta_hat);
    op = std::move(*op_hat);
    states = std::move(states_hat);
    cost_k = cost_hat;
    ++k;

    grad = gradient_at(op, states, beta);
    grad_norm = l2_norm(grad);
    result.history.push_back({k, cost_k, grad_norm, mu, q, halvings});
  }

  result.beta = std::move(beta);
  result.iterations = k;
  return result;
}

std::vector<MultilevelLevelResult> multilevel_run(std::span<const int> levels,
                                                  const ProblemCoefficients& coeffs,
                                                  const BoundaryRegion& gamma,
                                                  const MultilevelSchedules& schedules,
                                                  const DataGenerator& generator,
                                                  SolverConfig base,
                                                  const LevelObserver& observer) {
  if (levels.empty()) throw std::invalid_argument("multilevel_run: no levels");
  if (levels.front() < 1) throw std::invalid_argument("multilevel_run: levels must be >= 1");
  for (std::size_t i = 1; i < levels.size(); ++i) {
    if (levels[i] != 2 * levels[i - 1]) {
      throw std::invalid_argument("multilevel_run: each level must double the previous one");
    }
  }
  if (!schedules.rho || !schedules.theta) {
    throw std::invalid_argument("multilevel_run: schedules not set");
  }

  std::vector<MultilevelLevelResult> results;
  results.reserve(levels.size());
  NodalField carried;  // previous level's reconstruction

  for (std::size_t li = 0; li < levels.size(); ++li) {
    const int level = levels[li];
    const MeshPtr mesh = Mesh::square(level);
    const double rho = schedules.rho(level);
    const double theta = schedules.theta(level, rho);

    GeneratedData generated = generator(mesh, level, theta);

    SolverConfig cfg = base;
    cfg.rho = rho;
    cfg.set_default_tolerances(mesh->mesh_size());

    NodalField beta0 = (li == 0) ? NodalField(mesh, schedules.beta_init)
                                 : prolongate(carried, mesh);
    NodalField beta_star = beta0;

    InverseProblem problem(mesh, coeffs, gamma, std::move(generated.data), cfg, beta_star);
    InversionResult run = problem.run(beta0);
    carried = run.beta;

    MultilevelLevelResult entry;
    entry.level = level;
    entry.h = mesh->mesh_size();
    entry.rho = rho;
    entry.theta = theta;
    entry.deltas = std::move(generated.deltas);
    entry.beta_star = std::move(beta_star);
    entry.run = std::move(run);
    results.push_back(std::move(entry));
    if (observer) observer(results.back(), mesh);
  }
  return results;
}

double discretization_error_estimate(const ProblemCoefficients& coeffs,
                                     const ScalarCoefficient& beta,
                                     const std::function<double(Vec2, Side)>& flux_rule,
                                     const BoundaryRegion& gamma,
                                     const std::function<double(Vec2)>& trace_rule,
                                     int coarse_level, int reference_level, double rel_tol) {
  if (coarse_level < 1) {
    throw std::invalid_argument("discretization_error_estimate: coarse level must be >= 1");
  }
  if (beta.is_field()) {
    throw std::invalid_argument(
        "discretization_error_estimate: beta must be an analytic coefficient usable on both meshes");
  }
  int steps = 0;
  int l = coarse_level;
  while (l < reference_level) {
    l *= 2;
    ++steps;
  }
  if (l != reference_level) {
    throw std::invalid_argument(
        "discretization_error_estimate: reference level must be coarse * 2^k");
  }

  auto solve_pair = [&](const MeshPtr& mesh) -> std::pair<NodalField, NodalField> {
    const EdgeFlux flux = EdgeFlux::from_rule(mesh, flux_rule);
    NodalField n = solve_neumann(mesh, coeffs, beta, flux, rel_tol);
    const std::vector<int> nodes = boundary_nodes(*mesh, gamma);
    std::vector<double> g(nodes.size());
    for (std::size_t i = 0; i < nodes.size(); ++i) g[i] = trace_rule(mesh->nodes()[nodes[i]]);
    NodalField m = solve_mixed(mesh, coeffs, beta, flux, gamma, g, rel_tol);
    return {std::move(n), std::move(m)};
  };

  const MeshPtr coarse = Mesh::square(coarse_level);
  auto [n_coarse, m_coarse] = solve_pair(coarse);

  const MeshPtr reference = Mesh::square(reference_level);
  auto [n_ref, m_ref] = solve_pair(reference);

  NodalField n_up = std::move(n_coarse);
  NodalField m_up = std::move(m_coarse);
  int lvl = coarse_level;
  for (int s = 0; s < steps; ++s) {
    lvl *= 2;
    const MeshPtr target = (lvl == reference_level) ? reference : Mesh::square(lvl);
    n_up = prolongate(n_up, target);
    m_up = prolongate(m_up, target);
  }

  const SparseSpdMatrix mass = assemble_mass(reference);
  Vector diff(reference->node_count());
  for (std::size_t p = 0; p < diff.size(); ++p) diff[p] = n_ref[p] - n_up[p];
  const double gap_n = mass_norm(mass, diff);
  for (std::size_t p = 0; p < diff.size(); ++p) diff[p] = m_ref[p] - m_up[p];
  const double gap_m = mass_norm(mass, diff);
  return gap_n + gap_m;
}

}  // namespace betarec
