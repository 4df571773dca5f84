#include "betarec/io.hpp"

#include <cstdio>
#include <fstream>
#include <stdexcept>

#include "json.hpp"

namespace betarec {

namespace {

std::string fmt(const char* format, double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), format, v);
  return buf;
}

std::string sci(double v) { return fmt("%.4e", v); }   // 5 significant digits
std::string full(double v) { return fmt("%.17g", v); }  // round-trip exact

}  // namespace

void atomic_write_text(const std::filesystem::path& path, const std::string& content) {
  const std::filesystem::path dir = path.parent_path();
  if (!dir.empty()) std::filesystem::create_directories(dir);
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open " + tmp.string() + " for writing");
    out << content;
    if (!out) throw std::runtime_error("write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

std::string format_field_dump(const NodalField& field) {
  std::string out;
  const auto& nodes = field.mesh()->nodes();
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    out += full(nodes[i].x);
    out += ' ';
    out += full(nodes[i].y);
    out += ' ';
    out += full(field[i]);
    out += '\n';
  }
  return out;
}

void write_field_dump(const std::filesystem::path& path, const NodalField& field) {
  atomic_write_text(path, format_field_dump(field));
}

std::string format_mesh_dump(const Mesh& mesh) {
  std::string out;
  for (const Vec2& p : mesh.nodes()) {
    out += "v " + full(p.x) + ' ' + full(p.y) + '\n';
  }
  for (const auto& t : mesh.triangles()) {
    out += "t " + std::to_string(t[0]) + ' ' + std::to_string(t[1]) + ' ' +
           std::to_string(t[2]) + '\n';
  }
  for (const BoundaryEdge& e : mesh.boundary_edges()) {
    out += "e " + std::to_string(e.node_a) + ' ' + std::to_string(e.node_b) + ' ' +
           to_string(e.side) + '\n';
  }
  return out;
}

void write_mesh_dump(const std::filesystem::path& path, const Mesh& mesh) {
  atomic_write_text(path, format_mesh_dump(mesh));
}

std::string format_iteration_log(std::span<const IterationRecord> history) {
  std::string out = "k,J,grad_norm,mu,Q,halvings\n";
  for (const IterationRecord& r : history) {
    out += std::to_string(r.k) + ',' + sci(r.cost) + ',' + sci(r.grad_norm) + ',' +
           sci(r.mu) + ',' + sci(r.q) + ',' + std::to_string(r.halvings) + '\n';
  }
  return out;
}

void write_iteration_log(const std::filesystem::path& path,
                         std::span<const IterationRecord> history) {
  atomic_write_text(path, format_iteration_log(history));
}

void write_example_report(const std::filesystem::path& out_dir, const ExampleReport& report,
                          const ExampleOptions& options) {
  std::filesystem::create_directories(out_dir);

  for (const SweepResult& sweep : report.sweeps) {
    const std::string tag = sweep.label == "default" ? "" : "_" + sweep.label;

    std::string errors_csv = "level,h,rho,theta,delta,L2_beta,L2_N,L2_M,L2_D,iterations,stop\n";
    for (const LevelRow& row : sweep.rows) {
      errors_csv += std::to_string(row.level) + ',' + sci(row.h) + ',' + sci(row.rho) + ',' +
                    sci(row.theta) + ',' + sci(row.delta) + ',' + sci(row.errors.l2_beta) +
                    ',' + sci(row.errors.l2_n) + ',' + sci(row.errors.l2_m) + ',' +
                    sci(row.errors.l2_d) + ',' + std::to_string(row.iterations) + ',' +
                    to_string(row.stop) + '\n';
    }
    atomic_write_text(out_dir / ("errors" + tag + ".csv"), errors_csv);

    if (sweep.rows.size() >= 2) {
      std::vector<double> hs;
      std::vector<double> e_beta, e_n, e_m, e_d;
      for (const LevelRow& row : sweep.rows) {
        hs.push_back(row.h);
        e_beta.push_back(row.errors.l2_beta);
        e_n.push_back(row.errors.l2_n);
        e_m.push_back(row.errors.l2_m);
        e_d.push_back(row.errors.l2_d);
      }
      auto all_positive = [](const std::vector<double>& v) {
        for (double x : v) {
          if (!(x > 0.0)) return false;
        }
        return true;
      };
      if (all_positive(e_beta) && all_positive(e_n) && all_positive(e_m) &&
          all_positive(e_d)) {
        const auto [r_beta, mean_beta] = eoc(e_beta, hs);
        const auto [r_n, mean_n] = eoc(e_n, hs);
        const auto [r_m, mean_m] = eoc(e_m, hs);
        const auto [r_d, mean_d] = eoc(e_d, hs);
        std::string eoc_csv = "level,EOC_L2_beta,EOC_L2_N,EOC_L2_M,EOC_L2_D\n";
        for (std::size_t i = 0; i + 1 < sweep.rows.size(); ++i) {
          eoc_csv += std::to_string(sweep.rows[i + 1].level) + ',' + sci(r_beta[i]) + ',' +
                     sci(r_n[i]) + ',' + sci(r_m[i]) + ',' + sci(r_d[i]) + '\n';
        }
        eoc_csv += "mean," + sci(mean_beta) + ',' + sci(mean_n) + ',' + sci(mean_m) + ',' +
                   sci(mean_d) + '\n';
        atomic_write_text(out_dir / ("eoc" + tag + ".csv"), eoc_csv);
      }
    }

    write_iteration_log(out_dir / ("iterations" + tag + ".csv"), sweep.final_log);
    write_field_dump(out_dir / ("beta_final" + tag + ".txt"), sweep.final_beta);
  }

  if (!report.sweeps.empty()) {
    const NodalField& beta = report.sweeps.front().final_beta;
    write_field_dump(out_dir / "beta_true_interpolant.txt",
                     default_catalog().beta_true_interpolant(beta.mesh()));
  }

  nlohmann::json manifest;
  manifest["example"] = report.example_id;
  manifest["seed"] = options.seed;
  manifest["levels"] = options.levels;
  manifest["max_iter"] = options.max_iter;
  manifest["cg_tol"] = options.cg_tol;
  if (options.theta_override) manifest["theta_override"] = *options.theta_override;
  if (options.rho_rule_override) manifest["rho_rule_override"] = *options.rho_rule_override;
  if (report.example_id == 4) {
    manifest["measurement_counts"] = options.measurement_counts;
    nlohmann::json tuples = nlohmann::json::array();
    for (int count : options.measurement_counts) {
      nlohmann::json group = nlohmann::json::array();
      for (const auto& t : measurement_tuples(count)) {
        group.push_back({t[0], t[1], t[2], t[3]});
      }
      tuples.push_back({{"I", count}, {"abcd", group}});
    }
    manifest["tuples"] = tuples;
  }
  manifest["gamma"] = (report.example_id <= 2) ? "bottom" : "bottom,left";
  nlohmann::json sweeps = nlohmann::json::array();
  for (const SweepResult& sweep : report.sweeps) {
    nlohmann::json s;
    s["label"] = sweep.label;
    nlohmann::json rows = nlohmann::json::array();
    for (const LevelRow& row : sweep.rows) {
      rows.push_back({{"level", row.level},
                      {"rho", row.rho},
                      {"theta", row.theta},
                      {"delta", row.delta},
                      {"L2_beta", row.errors.l2_beta},
                      {"L2_N", row.errors.l2_n},
                      {"L2_M", row.errors.l2_m},
                      {"L2_D", row.errors.l2_d},
                      {"iterations", row.iterations},
                      {"stop", to_string(row.stop)},
                      {"optimality_residual", row.final_optimality_residual}});
    }
    s["rows"] = rows;
    sweeps.push_back(s);
  }
  manifest["sweeps"] = sweeps;
  atomic_write_text(out_dir / "manifest.json", manifest.dump(2) + "\n");
}

}  // namespace betarec
