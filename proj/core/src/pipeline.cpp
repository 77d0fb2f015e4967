#include "polyrto/pipeline.hpp"

#include <algorithm>
#include <cstdio>
#include <ostream>
#include <sstream>

#include "polyrto/error.hpp"

namespace polyrto {

RunMode parse_run_mode(const std::string& s) {
  if (s == "det") return RunMode::det;
  if (s == "rto-gpc") return RunMode::rto_gpc;
  if (s == "rto-mc") return RunMode::rto_mc;
  if (s == "nonrobust-propagate") return RunMode::nonrobust_propagate;
  throw Error("unknown mode '" + s + "' (det, rto-gpc, rto-mc, nonrobust-propagate)");
}

std::string to_string(RunMode m) {
  switch (m) {
    case RunMode::det: return "det";
    case RunMode::rto_gpc: return "rto-gpc";
    case RunMode::rto_mc: return "rto-mc";
    case RunMode::nonrobust_propagate: return "nonrobust-propagate";
  }
  return "?";
}

RunMode default_run_mode(const ProblemConfig& c) {
  if (c.load_model.kind == "deterministic") return RunMode::det;
  return c.stochastic.mode == "mc" ? RunMode::rto_mc : RunMode::rto_gpc;
}

RunOutput run(const ProblemConfig& c, RunMode mode, unsigned threads) {
  RunOutput r;
  r.mesh = build_mesh(c, threads);
  r.problem = build_problem(c, r.mesh);
  r.problem.threads = threads;
  switch (mode) {
    case RunMode::det: r.result = deterministic_to(r.problem); break;
    case RunMode::rto_gpc: r.result = run_rto(r.problem, RtoMode::gpc); break;
    case RunMode::rto_mc: r.result = run_rto(r.problem, RtoMode::mc); break;
    case RunMode::nonrobust_propagate:
      r.result = run_nonrobust_then_propagate(r.problem, c.stochastic.n_mc, c.stochastic.seed);
      break;
  }
  r.summary.mu_c = r.result.mean;
  r.summary.sigma_c = r.result.std;
  r.summary.w = r.result.w;
  r.summary.mode = to_string(mode);
  r.summary.iterations = r.result.iterations;
  r.summary.fe_solves = r.result.fe_solves;
  r.summary.wall_seconds = r.result.wall_seconds;
  r.summary.converged = r.result.converged;
  return r;
}

OutputFiles output_files(const ProblemConfig& c, const std::filesystem::path& dir) {
  const std::string p = c.output.prefix;
  return {dir / (p + ".json"),        dir / (p + "_density.csv"), dir / (p + ".vtk"),
          dir / (p + ".svg"),         dir / (p + "_history.csv"), dir / (p + "_kl.csv")};
}

void write_outputs(const RunOutput& r, const ProblemConfig& c, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error("cannot create " + dir.string() + ": " + ec.message());
  const OutputFiles f = output_files(c, dir);
  const std::span<const double> rho(r.result.physical.data(), static_cast<std::size_t>(r.result.physical.size()));
  save_result(r.summary, f.result);
  auto emit = [](const std::filesystem::path& path, auto&& writer) {
    std::ostringstream s;
    writer(s);
    write_text(path, s.str());
  };
  emit(f.density, [&](std::ostream& s) { write_density_csv(rho, s); });
  emit(f.vtk, [&](std::ostream& s) { write_vtk(r.mesh, rho, s); });
  emit(f.svg, [&](std::ostream& s) { write_svg(r.mesh, rho, s); });
  emit(f.history, [&](std::ostream& s) { write_history_csv(r.result.history, s); });
  if (r.problem.loads.kind == LoadModel::Kind::random_field && !r.problem.loads.field.fully_correlated) {
    const StochasticLoad loads(r.mesh, r.problem.bcs, r.problem.loads);
    emit(f.kl, [&](std::ostream& s) { write_kl_csv(loads.kl(), s); });
  }
}

int cmd_mesh(const ProblemConfig& c, const std::filesystem::path& dir, unsigned threads, std::ostream& out) {
  const PolyMesh mesh = build_mesh(c, threads);
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error("cannot create " + dir.string() + ": " + ec.message());
  save_mesh(mesh, dir / (c.output.prefix + ".mesh"));
  std::ostringstream vtk;
  write_vtk(mesh, {}, vtk);
  write_text(dir / (c.output.prefix + "_mesh.vtk"), vtk.str());
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10g", mesh.total_area());
  out << "elements: " << mesh.num_elements() << "\nnodes: " << mesh.num_nodes() << "\narea: " << buf << '\n';
  return 0;
}

int cmd_optimize(const ProblemConfig& c, RunMode mode, const std::filesystem::path& dir, unsigned threads,
                 std::ostream& out, std::ostream& err) {
  const RunOutput r = run(c, mode, threads);
  write_outputs(r, c, dir);
  out << to_json(r.summary).dump(2) << '\n';
  if (!r.summary.converged) {
    err << "polyrto: stopped at the iteration limit (" << r.summary.iterations << ") without converging\n";
    return 2;
  }
  return 0;
}

int cmd_stats(const std::vector<std::filesystem::path>& results, bool json, std::ostream& out) {
  if (results.empty()) throw Error("stats: no result files given");
  std::vector<std::pair<std::string, ResultSummary>> rows;
  for (const auto& p : results) rows.emplace_back(p.stem().string(), load_result(p));

  if (json) {
    nlohmann::ordered_json arr = nlohmann::ordered_json::array();
    for (const auto& [name, r] : rows) {
      nlohmann::ordered_json j;
      j["case"] = name;
      const auto fields = to_json(r);
      for (const auto& [k, v] : fields.items()) j[k] = v;
      arr.push_back(j);
    }
    out << arr.dump(2) << '\n';
    return 0;
  }

  const std::vector<std::string> head = {"case", "mode", "w", "mu_C", "sigma_C", "iterations", "solves", "time [s]"};
  std::vector<std::vector<std::string>> table = {head};
  char buf[64];
  auto fmt = [&](const char* f, auto v) {
    std::snprintf(buf, sizeof buf, f, v);
    return std::string(buf);
  };
  for (const auto& [name, r] : rows)
    table.push_back({name, r.mode, fmt("%g", r.w), fmt("%.4g", r.mu_c), fmt("%.4g", r.sigma_c),
                     std::to_string(r.iterations), std::to_string(r.fe_solves), fmt("%.1f", r.wall_seconds)});
  std::vector<std::size_t> width(head.size(), 0);
  for (const auto& row : table)
    for (std::size_t i = 0; i < row.size(); ++i) width[i] = std::max(width[i], row[i].size());
  for (const auto& row : table) {
    std::string line;
    for (std::size_t i = 0; i < row.size(); ++i) {
      const std::string pad(width[i] - row[i].size(), ' ');
      // text columns flush left, numbers flush right
      line += i < 2 ? row[i] + pad : pad + row[i];
      if (i + 1 < row.size()) line += "  ";
    }
    while (!line.empty() && line.back() == ' ') line.pop_back();
    out << line << '\n';
  }
  return 0;
}

int cmd_presets(const std::string& name, std::ostream& out) {
  if (name.empty()) {
    for (const auto& n : preset_names()) out << n << '\n';
    return 0;
  }
  out << dump_config(preset(name));
  return 0;
}

}  // namespace polyrto
