#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "polyrto/config.hpp"
#include "polyrto/export.hpp"
#include "polyrto/rto.hpp"

namespace polyrto {

enum class RunMode { det, rto_gpc, rto_mc, nonrobust_propagate };

RunMode parse_run_mode(const std::string& s);
std::string to_string(RunMode m);
/// The mode a config asks for when no override is given.
RunMode default_run_mode(const ProblemConfig& c);

struct RunOutput {
  PolyMesh mesh;
  RtoProblem problem;
  RtoResult result;
  ResultSummary summary;
};

/// Mesh, problem assembly and the optimization driver for one mode.
RunOutput run(const ProblemConfig& c, RunMode mode, unsigned threads = 0);

/// Files written by `cmd_optimize`, relative to the output directory.
struct OutputFiles {
  std::filesystem::path result, density, vtk, svg, history, kl;
};
OutputFiles output_files(const ProblemConfig& c, const std::filesystem::path& dir);

void write_outputs(const RunOutput& r, const ProblemConfig& c, const std::filesystem::path& dir);

// Commands return the process exit code; data goes to `out`, diagnostics to `err`.
int cmd_mesh(const ProblemConfig& c, const std::filesystem::path& dir, unsigned threads, std::ostream& out);
/// 0 on convergence, 2 when the iteration cap was hit (files are written either way).
int cmd_optimize(const ProblemConfig& c, RunMode mode, const std::filesystem::path& dir, unsigned threads,
                 std::ostream& out, std::ostream& err);
int cmd_stats(const std::vector<std::filesystem::path>& results, bool json, std::ostream& out);
/// Lists preset names, or prints one preset config.
int cmd_presets(const std::string& name, std::ostream& out);

}  // namespace polyrto
