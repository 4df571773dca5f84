#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "betarec/experiments.hpp"

namespace betarec {

/// Writes content to path via a temporary file and rename, creating parent
/// directories as needed.
void atomic_write_text(const std::filesystem::path& path, const std::string& content);

/// "x y value" per node, 17 significant digits, mesh node order.
std::string format_field_dump(const NodalField& field);
void write_field_dump(const std::filesystem::path& path, const NodalField& field);

/// "v x y" / "t i j k" / "e i j side" lines.
std::string format_mesh_dump(const Mesh& mesh);
void write_mesh_dump(const std::filesystem::path& path, const Mesh& mesh);

/// Iteration log CSV with header "k,J,grad_norm,mu,Q,halvings".
std::string format_iteration_log(std::span<const IterationRecord> history);
void write_iteration_log(const std::filesystem::path& path,
                         std::span<const IterationRecord> history);

/// Example report files: one CSV per table plus a JSON manifest.
void write_example_report(const std::filesystem::path& out_dir, const ExampleReport& report,
                          const ExampleOptions& options);

}  // namespace betarec
