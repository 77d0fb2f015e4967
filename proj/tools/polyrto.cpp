#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "polyrto/error.hpp"
#include "polyrto/pipeline.hpp"

namespace {

struct Source {
  std::string config;
  std::string preset;
};

void add_source(CLI::App* cmd, Source& s) {
  auto* c = cmd->add_option("--config", s.config, "problem config (JSON)")->check(CLI::ExistingFile);
  auto* p = cmd->add_option("--preset", s.preset, "built-in problem (see `polyrto presets`)");
  c->excludes(p);
}

polyrto::ProblemConfig resolve(const Source& s) {
  if (!s.config.empty()) return polyrto::load_config(s.config);
  if (!s.preset.empty()) return polyrto::preset(s.preset);
  throw polyrto::Error("one of --config or --preset is required");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Robust topology optimization on polygonal meshes"};
  app.require_subcommand(1);

  Source src;
  unsigned threads = 0;
  std::string out_dir;
  std::string mode;
  bool json = false;
  std::string preset_name;
  std::vector<std::string> results;

  auto* mesh = app.add_subcommand("mesh", "generate the CVT mesh, write .mesh and .vtk");
  add_source(mesh, src);
  mesh->add_option("--out", out_dir, "output directory (default: config output.dir)");
  mesh->add_option("--threads", threads, "worker cap (0 = all cores)");

  auto* opt = app.add_subcommand("optimize", "run a topology optimization");
  add_source(opt, src);
  opt->add_option("--mode", mode, "det | rto-gpc | rto-mc | nonrobust-propagate")
      ->check(CLI::IsMember({"det", "rto-gpc", "rto-mc", "nonrobust-propagate"}));
  opt->add_option("--out", out_dir, "output directory (default: config output.dir)");
  opt->add_option("--threads", threads, "worker cap (0 = all cores)");

  auto* stats = app.add_subcommand("stats", "tabulate result JSON files");
  stats->add_option("results", results, "result files")->required();
  stats->add_flag("--json", json, "machine-readable output");

  auto* presets = app.add_subcommand("presets", "list presets or print one as a config");
  presets->add_option("name", preset_name, "preset to print");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (*mesh) {
      const auto c = resolve(src);
      return polyrto::cmd_mesh(c, out_dir.empty() ? c.output.dir : out_dir, threads, std::cout);
    }
    if (*opt) {
      const auto c = resolve(src);
      const auto m = mode.empty() ? polyrto::default_run_mode(c) : polyrto::parse_run_mode(mode);
      return polyrto::cmd_optimize(c, m, out_dir.empty() ? c.output.dir : out_dir, threads, std::cout, std::cerr);
    }
    if (*stats) {
      std::vector<std::filesystem::path> paths(results.begin(), results.end());
      return polyrto::cmd_stats(paths, json, std::cout);
    }
    if (*presets) return polyrto::cmd_presets(preset_name, std::cout);
  } catch (const std::exception& e) {
    std::cerr << "polyrto: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
