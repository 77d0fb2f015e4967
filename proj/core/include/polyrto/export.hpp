#pragma once

#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>

#include <nlohmann/json.hpp>

#include "polyrto/mesh.hpp"

namespace polyrto {

/// Legacy VTK polydata; `density` (one value per element) becomes cell data when non-empty.
void write_vtk(const PolyMesh& mesh, std::span<const double> density, std::ostream& out);

/// One filled polygon per element, gray level 1 − ρ̄ (white void, black solid), y axis up.
void write_svg(const PolyMesh& mesh, std::span<const double> density, std::ostream& out);

/// `element,density` rows.
void write_density_csv(std::span<const double> density, std::ostream& out);

struct ResultSummary {
  double mu_c = 0.0;
  double sigma_c = 0.0;
  double w = 0.0;
  std::string mode;
  int iterations = 0;
  std::size_t fe_solves = 0;
  double wall_seconds = 0.0;
  bool converged = false;
};

nlohmann::ordered_json to_json(const ResultSummary& r);
ResultSummary result_from_json(const nlohmann::ordered_json& j);
void save_result(const ResultSummary& r, const std::filesystem::path& path);
ResultSummary load_result(const std::filesystem::path& path);

/// Writes `text` to `path`, throwing Error on failure.
void write_text(const std::filesystem::path& path, const std::string& text);

}  // namespace polyrto
