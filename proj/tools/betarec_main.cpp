#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "betarec/experiments.hpp"
#include "betarec/io.hpp"
#include "betarec/rng.hpp"

namespace fs = std::filesystem;
using namespace betarec;

namespace {

std::vector<int> split_ints(const std::string& text) {
  std::vector<int> out;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t comma = text.find(',', pos);
    const std::string token =
        text.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
    if (!token.empty()) out.push_back(std::stoi(token));
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  return out;
}

std::array<double, 4> parse_abcd(const std::string& text) {
  std::array<double, 4> out{};
  std::size_t pos = 0;
  int i = 0;
  while (pos <= text.size() && i < 4) {
    const std::size_t comma = text.find(',', pos);
    const std::string token =
        text.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
    if (!token.empty()) out[i++] = std::stod(token);
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  if (i != 4) throw std::invalid_argument("--abcd needs four comma-separated values");
  return out;
}

/// Reads a field dump ("x y value" per node, mesh node order) back in.
NodalField read_field_dump(const fs::path& path, const MeshPtr& mesh) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open field file " + path.string());
  std::vector<double> values;
  values.reserve(mesh->node_count());
  double x, y, v;
  while (in >> x >> y >> v) values.push_back(v);
  if (values.size() != mesh->node_count()) {
    throw std::runtime_error("field file " + path.string() + " has " +
                             std::to_string(values.size()) + " values, expected " +
                             std::to_string(mesh->node_count()));
  }
  return NodalField(mesh, std::move(values));
}

ScalarCoefficient beta_from_spec(const std::string& spec, const ProblemCatalog& catalog,
                                 const MeshPtr& mesh) {
  if (spec == "true") return catalog.beta_true;
  try {
    std::size_t consumed = 0;
    const double value = std::stod(spec, &consumed);
    if (consumed == spec.size()) return ScalarCoefficient::constant(value);
  } catch (const std::exception&) {
    // fall through to file handling
  }
  return ScalarCoefficient::from_field(read_field_dump(spec, mesh));
}

/// Injects config-file values as synthetic arguments right after the
/// subcommand token; every option takes the last occurrence, so explicit
/// flags win over the file.
std::vector<std::string> merge_config_args(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  std::string config_path;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) {
      config_path = args[i + 1];
    } else if (args[i].rfind("--config=", 0) == 0) {
      config_path = args[i].substr(9);
    }
  }
  if (config_path.empty() || args.empty()) return args;

  std::ifstream in(config_path);
  if (!in) throw std::runtime_error("cannot open config file " + config_path);
  nlohmann::json j;
  in >> j;
  if (!j.is_object()) throw std::runtime_error("config file must hold a JSON object");

  std::vector<std::string> injected;
  for (const auto& [key, value] : j.items()) {
    std::string text;
    if (value.is_string()) {
      text = value.get<std::string>();
    } else if (value.is_boolean()) {
      if (!value.get<bool>()) continue;
      injected.push_back("--" + key);
      continue;
    } else if (value.is_array()) {
      for (const auto& item : value) {
        if (!text.empty()) text += ",";
        text += item.is_string() ? item.get<std::string>() : item.dump();
      }
    } else {
      text = value.dump();
    }
    injected.push_back("--" + key + "=" + text);
  }

  std::vector<std::string> merged;
  merged.push_back(args.front());  // subcommand
  merged.insert(merged.end(), injected.begin(), injected.end());
  merged.insert(merged.end(), args.begin() + 1, args.end());
  return merged;
}

struct CommonOptions {
  int level = 4;
  std::uint64_t seed = 1;
  std::string gamma = "bottom";
  std::string out = "out";
  double tol = 1e-12;
  int threads = 0;
  std::string config;  // handled by merge_config_args; declared for help text
};

void add_common(CLI::App* cmd, CommonOptions& opts, bool with_level = true) {
  if (with_level) cmd->add_option("--level", opts.level, "mesh subdivisions per axis");
  cmd->add_option("--seed", opts.seed, "random seed");
  cmd->add_option("--gamma", opts.gamma, "observation sides, comma separated");
  cmd->add_option("--out", opts.out, "output directory");
  cmd->add_option("--tol", opts.tol, "linear solver relative tolerance");
  cmd->add_option("--threads", opts.threads, "worker threads (0 = auto)");
  cmd->add_option("--config", opts.config, "JSON config file; flags override its values");
}

int cmd_forward(const CommonOptions& common, const std::string& beta_spec,
                const std::string& abcd_text, bool dump_mesh) {
  const MeshPtr mesh = Mesh::square(common.level);
  const ProblemCatalog catalog = default_catalog();
  const BoundaryRegion gamma = parse_region(common.gamma);
  const std::array<double, 4> abcd = parse_abcd(abcd_text);
  const ScalarCoefficient beta = beta_from_spec(beta_spec, catalog, mesh);

  const ExactData exact = synthesize_exact(mesh, catalog, abcd, gamma, common.tol);
  const NodalField n = solve_neumann(mesh, catalog.coeffs, beta, exact.flux, common.tol);
  const NodalField m =
      solve_mixed(mesh, catalog.coeffs, beta, exact.flux, gamma, exact.trace, common.tol);
  const std::vector<int> all_nodes = boundary_nodes(*mesh, BoundaryRegion::all());
  std::vector<double> full_trace(all_nodes.size());
  for (std::size_t i = 0; i < all_nodes.size(); ++i) full_trace[i] = exact.phi[all_nodes[i]];
  const NodalField d = solve_dirichlet(mesh, catalog.coeffs, beta, full_trace, common.tol);

  const fs::path out(common.out);
  write_field_dump(out / "N.txt", n);
  write_field_dump(out / "M.txt", m);
  write_field_dump(out / "D.txt", d);
  write_field_dump(out / "phi_exact.txt", exact.phi);
  if (dump_mesh) write_mesh_dump(out / "mesh.txt", *mesh);
  std::printf("forward: level=%d nodes=%zu dumps written to %s\n", common.level,
              mesh->node_count(), out.string().c_str());
  return 0;
}

int cmd_gradcheck(const CommonOptions& common, int directions, double theta_flag,
                  double rho_flag, bool at_truth, bool corrupt_sign) {
  const MeshPtr mesh = Mesh::square(common.level);
  const ProblemCatalog catalog = default_catalog();
  const BoundaryRegion gamma = parse_region(common.gamma);
  const std::array<double, 4> abcd = {1.0, -2.0, 3.0, -4.0};

  const double rho = rho_flag >= 0.0 ? rho_flag : rho_schedule(RhoRule::sqrt_h, common.level);
  const double theta =
      theta_flag >= 0.0 ? theta_flag : theta_schedule(ThetaRule::ex1, common.level, rho);

  SolverConfig cfg;
  cfg.rho = rho;
  cfg.cg_tol = common.tol;
  cfg.threads = common.threads;
  cfg.set_default_tolerances(mesh->mesh_size());

  if (at_truth) {
    // Consistent, noiseless data generated at the interpolated truth: the
    // misfit residual then vanishes discretely and so must the gradient.
    cfg.rho = 0.0;
    const NodalField beta_truth = catalog.beta_true_interpolant(mesh);
    const EdgeFlux flux = catalog.exact_flux(mesh, abcd);
    const NodalField n_truth = solve_neumann(
        mesh, catalog.coeffs, ScalarCoefficient::from_field(beta_truth), flux, common.tol);
    const std::vector<int> gnodes = boundary_nodes(*mesh, gamma);
    std::vector<double> trace(gnodes.size());
    for (std::size_t i = 0; i < gnodes.size(); ++i) trace[i] = n_truth[gnodes[i]];
    InverseProblem problem(mesh, catalog.coeffs, gamma, {CauchyData{gamma, flux, trace}}, cfg,
                           beta_truth);
    const double gnorm = problem.l2_norm(problem.gradient(beta_truth));
    std::printf("gradcheck(at-truth): |grad| = %.3e (rho = 0, consistent data)\n", gnorm);
    return gnorm <= 1e-9 ? 0 : 1;
  }

  const ExactData exact = synthesize_exact(mesh, catalog, abcd, gamma, common.tol);
  const Measurement noisy =
      add_noise(mesh, exact, theta, derive_seed(common.seed, common.level, 0));
  InverseProblem problem(mesh, catalog.coeffs, gamma, {noisy.data}, cfg,
                         NodalField(mesh, 1.5));

  // Interior base point: safely away from the box so central differences stay
  // admissible.
  SplitMix64 rng(derive_seed(common.seed, 77));
  NodalField beta(mesh, 0.0);
  for (std::size_t p = 0; p < beta.size(); ++p) {
    beta[p] = 1.5 + 0.4 * rng.uniform_symmetric();
  }

  NodalField grad = problem.gradient(beta);
  if (corrupt_sign) {
    for (std::size_t p = 0; p < grad.size(); ++p) {
      grad[p] = 2.0 * cfg.rho * (beta[p] - 1.5) - grad[p];
    }
  }
  const Vector mass_grad = problem.mass().multiply(grad.values());

  const double t = 1e-5;
  bool ok = true;
  for (int k = 0; k < directions; ++k) {
    SplitMix64 dir_rng(derive_seed(common.seed, 1000 + k));
    NodalField kappa(mesh, 0.0);
    for (std::size_t p = 0; p < kappa.size(); ++p) kappa[p] = dir_rng.uniform_symmetric();

    NodalField plus = beta;
    NodalField minus = beta;
    axpy(t, kappa, plus);
    axpy(-t, kappa, minus);
    const double fd = (problem.cost(plus) - problem.cost(minus)) / (2.0 * t);
    const double pairing = dot(mass_grad, kappa.values());
    const double rel = std::fabs(pairing - fd) / std::max(std::fabs(fd), 1e-14);
    std::printf("gradcheck: direction %d adjoint=% .12e fd=% .12e rel_err=%.3e\n", k, pairing,
                fd, rel);
    if (!(rel <= 1e-4)) ok = false;
  }
  std::printf("gradcheck: %s\n", ok ? "PASS" : "FAIL");
  return ok ? 0 : 1;
}

int cmd_invert(const CommonOptions& common, const std::string& rho_rule, double rho_flag,
               const std::string& theta_rule, double theta_flag, int max_iter,
               double beta0_value) {
  const MeshPtr mesh = Mesh::square(common.level);
  const ProblemCatalog catalog = default_catalog();
  const BoundaryRegion gamma = parse_region(common.gamma);
  const std::array<double, 4> abcd = {1.0, -2.0, 3.0, -4.0};

  const double rho =
      rho_flag >= 0.0 ? rho_flag : rho_schedule(parse_rho_rule(rho_rule), common.level);
  const double theta = theta_flag >= 0.0
                           ? theta_flag
                           : theta_schedule(parse_theta_rule(theta_rule), common.level, rho);

  const ExactData exact = synthesize_exact(mesh, catalog, abcd, gamma, common.tol);
  const Measurement noisy =
      add_noise(mesh, exact, theta, derive_seed(common.seed, common.level, 0));

  SolverConfig cfg;
  cfg.rho = rho;
  cfg.max_iter = max_iter;
  cfg.cg_tol = common.tol;
  cfg.threads = common.threads;
  cfg.set_default_tolerances(mesh->mesh_size());

  const NodalField beta_star(mesh, beta0_value);
  InverseProblem problem(mesh, catalog.coeffs, gamma, {noisy.data}, cfg, beta_star);
  const InversionResult result = problem.run(beta_star);

  const ErrorMetrics metrics =
      error_metrics(mesh, catalog, result.beta, {exact}, {noisy}, common.tol);

  const fs::path out(common.out);
  write_iteration_log(out / "iterations.csv", result.history);
  write_field_dump(out / "beta_final.txt", result.beta);

  nlohmann::json manifest;
  manifest["level"] = common.level;
  manifest["seed"] = common.seed;
  manifest["rho"] = rho;
  manifest["theta"] = theta;
  manifest["delta"] = noisy.delta;
  manifest["gamma"] = common.gamma;
  manifest["iterations"] = result.iterations;
  manifest["stop"] = to_string(result.stop);
  manifest["L2_beta"] = metrics.l2_beta;
  manifest["L2_N"] = metrics.l2_n;
  manifest["L2_M"] = metrics.l2_m;
  manifest["L2_D"] = metrics.l2_d;
  atomic_write_text(out / "manifest.json", manifest.dump(2) + "\n");

  std::printf("invert: level=%d iterations=%d stop=%s L2_beta=%.4e delta=%.4e\n", common.level,
              result.iterations, to_string(result.stop), metrics.l2_beta, noisy.delta);
  return 0;
}

int cmd_example(const CommonOptions& common, int id, const std::string& levels_text,
                const std::string& counts_text, int max_iter, double theta_flag,
                const std::string& rho_rule) {
  ExampleOptions options;
  options.seed = common.seed;
  options.levels = split_ints(levels_text);
  options.max_iter = max_iter;
  options.threads = common.threads;
  options.cg_tol = common.tol;
  if (!counts_text.empty()) options.measurement_counts = split_ints(counts_text);
  if (theta_flag >= 0.0) options.theta_override = theta_flag;
  if (!rho_rule.empty()) options.rho_rule_override = rho_rule;
  options.out_dir = common.out;

  const ExampleReport report = run_example(id, options);
  write_example_report(common.out, report, options);

  for (const SweepResult& sweep : report.sweeps) {
    for (const LevelRow& row : sweep.rows) {
      std::printf("example %d [%s] level=%d rho=%.4e delta=%.4e L2_beta=%.4e L2_N=%.4e "
                  "L2_M=%.4e L2_D=%.4e iters=%d stop=%s\n",
                  id, sweep.label.c_str(), row.level, row.rho, row.delta, row.errors.l2_beta,
                  row.errors.l2_n, row.errors.l2_m, row.errors.l2_d, row.iterations,
                  to_string(row.stop));
    }
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Reaction-coefficient reconstruction from boundary Cauchy data"};
  app.require_subcommand(1);
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);

  CommonOptions fwd_common;
  std::string fwd_beta = "true";
  std::string fwd_abcd = "1,-2,3,-4";
  bool fwd_dump_mesh = false;
  CLI::App* fwd = app.add_subcommand("forward", "solve the three boundary value problems");
  add_common(fwd, fwd_common);
  fwd->add_option("--beta", fwd_beta, "constant value, 'true', or a field dump file");
  fwd->add_option("--abcd", fwd_abcd, "flux constants A,B,C,D");
  fwd->add_flag("--dump-mesh", fwd_dump_mesh, "also write the mesh dump");

  CommonOptions gc_common;
  int gc_directions = 5;
  double gc_theta = -1.0;
  double gc_rho = -1.0;
  bool gc_at_truth = false;
  bool gc_corrupt = false;
  CLI::App* gc = app.add_subcommand("gradcheck", "adjoint gradient vs finite differences");
  add_common(gc, gc_common);
  gc->add_option("--directions", gc_directions, "number of random directions");
  gc->add_option("--theta", gc_theta, "noise amplitude (default: example 1 schedule)");
  gc->add_option("--rho", gc_rho, "regularization weight (default: sqrt rule)");
  gc->add_flag("--at-truth", gc_at_truth, "check the zero gradient at the true coefficient");
  gc->add_flag("--corrupt-sign", gc_corrupt, "negative control: flip the misfit term sign");

  CommonOptions inv_common;
  std::string inv_rho_rule = "sqrt";
  double inv_rho = -1.0;
  std::string inv_theta_rule = "ex1";
  double inv_theta = -1.0;
  int inv_max_iter = 600;
  double inv_beta0 = 1.5;
  CLI::App* inv = app.add_subcommand("invert", "single-level reconstruction");
  add_common(inv, inv_common);
  inv->add_option("--rho-rule", inv_rho_rule, "rho schedule: sqrt,h2,h2e-1,h2e-2,h2e-3");
  inv->add_option("--rho", inv_rho, "explicit regularization weight");
  inv->add_option("--theta-rule", inv_theta_rule, "theta schedule: ex1,ex2,ex3,const");
  inv->add_option("--theta", inv_theta, "explicit noise amplitude");
  inv->add_option("--max-iter", inv_max_iter, "iteration cap");
  inv->add_option("--beta0", inv_beta0, "initial iterate and a priori estimate");

  CommonOptions ex_common;
  int ex_id = 1;
  std::string ex_levels = "4,8,16,32,64";
  std::string ex_counts;
  int ex_max_iter = 600;
  double ex_theta = -1.0;
  std::string ex_rho_rule;
  CLI::App* ex = app.add_subcommand("example", "reproduce a numbered experiment");
  add_common(ex, ex_common, /*with_level=*/false);
  ex->add_option("id", ex_id, "example number 1..4")->required();
  ex->add_option("--levels", ex_levels, "comma-separated refinement levels");
  ex->add_option("--I", ex_counts, "measurement counts for example 4");
  ex->add_option("--max-iter", ex_max_iter, "iteration cap per level");
  ex->add_option("--theta", ex_theta, "override the noise amplitude");
  ex->add_option("--rho-rule", ex_rho_rule, "override the rho schedule");

  try {
    const std::vector<std::string> merged = merge_config_args(argc, argv);
    // CLI11 parses reversed argument vectors.
    std::vector<std::string> reversed(merged.rbegin(), merged.rend());
    app.parse(reversed);

    if (fwd->parsed()) return cmd_forward(fwd_common, fwd_beta, fwd_abcd, fwd_dump_mesh);
    if (gc->parsed()) {
      return cmd_gradcheck(gc_common, gc_directions, gc_theta, gc_rho, gc_at_truth, gc_corrupt);
    }
    if (inv->parsed()) {
      return cmd_invert(inv_common, inv_rho_rule, inv_rho, inv_theta_rule, inv_theta,
                        inv_max_iter, inv_beta0);
    }
    if (ex->parsed()) {
      return cmd_example(ex_common, ex_id, ex_levels, ex_counts, ex_max_iter, ex_theta,
                         ex_rho_rule);
    }
    return 1;
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}
