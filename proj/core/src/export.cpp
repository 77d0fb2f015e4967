#include "polyrto/export.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <fstream>
#include <ostream>
#include <sstream>

#include "polyrto/error.hpp"

namespace polyrto {

namespace {

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void check_density(const PolyMesh& mesh, std::span<const double> density) {
  if (!density.empty() && density.size() != mesh.num_elements())
    throw Error("density has " + std::to_string(density.size()) + " entries, mesh has " +
                std::to_string(mesh.num_elements()) + " elements");
}

}  // namespace

void write_vtk(const PolyMesh& mesh, std::span<const double> density, std::ostream& out) {
  check_density(mesh, density);
  std::size_t conn = 0;
  for (const auto& e : mesh.elements()) conn += e.size() + 1;
  out << "# vtk DataFile Version 3.0\npolyrto\nASCII\nDATASET POLYDATA\n";
  out << "POINTS " << mesh.num_nodes() << " double\n";
  for (const auto& p : mesh.nodes()) out << num(p.x()) << ' ' << num(p.y()) << " 0\n";
  out << "POLYGONS " << mesh.num_elements() << ' ' << conn << '\n';
  for (const auto& e : mesh.elements()) {
    out << e.size();
    for (int n : e) out << ' ' << n;
    out << '\n';
  }
  if (!density.empty()) {
    out << "CELL_DATA " << mesh.num_elements() << "\nSCALARS density double 1\nLOOKUP_TABLE default\n";
    for (double d : density) out << num(d) << '\n';
  }
}

void write_svg(const PolyMesh& mesh, std::span<const double> density, std::ostream& out) {
  check_density(mesh, density);
  Vec2 lo = Vec2::Constant(std::numeric_limits<double>::infinity());
  Vec2 hi = -lo;
  for (const auto& p : mesh.nodes()) {
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  }
  const Vec2 size = hi - lo;
  const double scale = 800.0 / std::max(size.x(), size.y());
  const double width = size.x() * scale;
  const double height = size.y() * scale;
  char buf[64];
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" << width << "\" height=\"" << height
      << "\" viewBox=\"0 0 " << width << ' ' << height << "\">\n";
  for (std::size_t e = 0; e < mesh.num_elements(); ++e) {
    const double rho = density.empty() ? 0.0 : std::clamp(density[e], 0.0, 1.0);
    const int g = static_cast<int>(std::lround(255.0 * (1.0 - rho)));
    out << "<polygon points=\"";
    bool first = true;
    for (int n : mesh.element(e)) {
      const Vec2 p = mesh.nodes()[n];
      std::snprintf(buf, sizeof buf, "%s%.3f,%.3f", first ? "" : " ", (p.x() - lo.x()) * scale,
                    (hi.y() - p.y()) * scale);
      out << buf;
      first = false;
    }
    std::snprintf(buf, sizeof buf, "\" fill=\"rgb(%d,%d,%d)\"/>\n", g, g, g);
    out << buf;
  }
  out << "</svg>\n";
}

void write_density_csv(std::span<const double> density, std::ostream& out) {
  out << "element,density\n";
  for (std::size_t e = 0; e < density.size(); ++e) out << e << ',' << num(density[e]) << '\n';
}

nlohmann::ordered_json to_json(const ResultSummary& r) {
  nlohmann::ordered_json j;
  j["mu_c"] = r.mu_c;
  j["sigma_c"] = r.sigma_c;
  j["w"] = r.w;
  j["mode"] = r.mode;
  j["iterations"] = r.iterations;
  j["fe_solves"] = r.fe_solves;
  j["wall_seconds"] = r.wall_seconds;
  j["converged"] = r.converged;
  return j;
}

ResultSummary result_from_json(const nlohmann::ordered_json& j) {
  try {
    ResultSummary r;
    r.mu_c = j.at("mu_c").get<double>();
    r.sigma_c = j.at("sigma_c").get<double>();
    r.w = j.at("w").get<double>();
    r.mode = j.at("mode").get<std::string>();
    r.iterations = j.at("iterations").get<int>();
    r.fe_solves = j.at("fe_solves").get<std::size_t>();
    r.wall_seconds = j.at("wall_seconds").get<double>();
    r.converged = j.at("converged").get<bool>();
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw Error(std::string("result: ") + e.what());
  }
}

void save_result(const ResultSummary& r, const std::filesystem::path& path) {
  write_text(path, to_json(r).dump(2) + "\n");
}

ResultSummary load_result(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot read " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  try {
    return result_from_json(nlohmann::ordered_json::parse(ss.str()));
  } catch (const Error& e) {
    throw Error(path.string() + ": " + e.what());
  } catch (const nlohmann::json::exception& e) {
    throw Error(path.string() + ": " + e.what());
  }
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << text;
  if (!out) throw Error("write failed: " + path.string());
}

}  // namespace polyrto
