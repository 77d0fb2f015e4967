#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "polyrto/fem.hpp"
#include "polyrto/mesh.hpp"
#include "polyrto/rto.hpp"

namespace polyrto {

using Json = nlohmann::ordered_json;

inline constexpr const char* kSchema = "polyrto/1";

struct DomainConfig {
  std::string kind = "rectangle";  // rectangle | polygon
  double width = 1.0;
  double height = 1.0;
  std::vector<Vec2> vertices;
};

struct RegionConfig {
  std::string name;
  std::string kind = "segment";  // segment | point
  Vec2 a = Vec2::Zero();
  Vec2 b = Vec2::Zero();
  double tol = 0.0;  // 0 → domain default
};

struct MeshConfig {
  std::size_t n_elements = 1;
  std::uint64_t seed = 1;
  std::size_t lloyd_iterations = 100;
  std::string symmetry = "none";  // none | mirror_x
};

struct FixedConfig {
  std::string region;
  std::string components = "xy";  // x | y | xy
};

struct PointLoadConfig {
  std::string region;
  Vec2 force = Vec2::Zero();
};

struct DistributedLoadConfig {
  std::string region;
  Vec2 load_per_length = Vec2::Zero();
};

struct VariableConfig {
  std::string distribution = "uniform";  // uniform(lo, hi) | normal(mean, std) | gumbel(mean, std)
  double a = 0.0;
  double b = 1.0;
  std::string meaning;
};

struct MagnitudeConfig {
  std::string region;
  Vec2 direction = Vec2(0.0, -1.0);
  int variable = 0;
};

struct AngleConfig {
  std::string region;
  double magnitude = 1.0;
  int variable = 0;
};

struct FieldConfig {
  std::string region;
  Vec2 direction = Vec2(0.0, -1.0);
  double mean = 1.0;
  std::string correlation = "exponential";  // constant | exponential
  double sigma_f = 0.09;
  bool sigma_is_variance = true;
  double l_corr = 1.0;
  bool fully_correlated = false;
  int nu_kl = 0;
  double tau = 0.9;
};

struct LoadModelConfig {
  std::string kind = "deterministic";  // deterministic | random_magnitudes | random_angles | random_field
  std::vector<MagnitudeConfig> magnitudes;
  std::vector<AngleConfig> angles;
  std::optional<FieldConfig> field;
};

struct StochasticConfig {
  std::vector<VariableConfig> variables;
  int p_pc = 5;
  int nodes_per_dim = 0;
  std::string mode = "gpc";  // gpc | mc
  std::size_t n_mc = 10000;
  std::uint64_t seed = 1;
};

struct OutputConfig {
  std::string dir = "out";
  std::string prefix = "result";
};

/// In-memory form of a problem config document.
struct ProblemConfig {
  std::string name = "problem";
  DomainConfig domain;
  std::vector<RegionConfig> regions;
  MeshConfig mesh;
  Material material;
  std::vector<FixedConfig> fixed;
  std::vector<PointLoadConfig> point_loads;
  std::vector<DistributedLoadConfig> distributed_loads;
  LoadModelConfig load_model;
  StochasticConfig stochastic;
  SimpParams simp;
  double filter_radius = 1.5;
  double volume_fraction = 0.3;
  double weight_w = 1.0;
  int passive_top_rows = 0;
  OptimizerConfig optimizer;
  OutputConfig output;
};

/// Parses and validates; errors name the offending JSON path.
ProblemConfig config_from_json(const Json& j);
Json config_to_json(const ProblemConfig& c);
ProblemConfig parse_config(const std::string& text);
ProblemConfig load_config(const std::filesystem::path& path);
std::string dump_config(const ProblemConfig& c);

Domain2D build_domain(const ProblemConfig& c);
PolyMesh build_mesh(const ProblemConfig& c, unsigned threads = 0);
/// Mesh, supports, loads, germ and optimizer settings ready for the drivers.
RtoProblem build_problem(const ProblemConfig& c, PolyMesh mesh);

/// Ready-to-run configs for the benchmark problems (see `preset_names`).
ProblemConfig preset(const std::string& name);
std::vector<std::string> preset_names();

}  // namespace polyrto
