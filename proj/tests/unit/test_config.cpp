#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "polyrto/config.hpp"
#include "polyrto/error.hpp"
#include "polyrto/export.hpp"
#include "polyrto/pipeline.hpp"

using namespace polyrto;
namespace fs = std::filesystem;

namespace {

std::string error_of(const std::string& text) {
  try {
    parse_config(text);
  } catch (const Error& e) {
    return e.what();
  }
  return {};
}

ProblemConfig tiny(std::size_t n = 40) {
  ProblemConfig c = preset("cantilever-u10-small");
  c.mesh.n_elements = n;
  c.mesh.lloyd_iterations = 10;
  c.stochastic.p_pc = 2;
  c.optimizer.max_iterations = 20;
  return c;
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("polyrto_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_SUITE("config") {

TEST_CASE("every preset round-trips byte for byte") {
  const auto names = preset_names();
  CHECK(names.size() == 16);
  for (const auto& n : names) {
    CAPTURE(n);
    const std::string once = dump_config(preset(n));
    const std::string twice = dump_config(parse_config(once));
    CHECK(once == twice);
  }
}

TEST_CASE("preset constants") {
  const ProblemConfig c = preset("cantilever-u10");
  CHECK(c.mesh.n_elements == 7200);
  REQUIRE(c.stochastic.variables.size() == 2);
  for (const auto& v : c.stochastic.variables) {
    CHECK(v.distribution == "uniform");
    CHECK(v.a == doctest::Approx(0.9));
    CHECK(v.b == doctest::Approx(1.1));
  }
  CHECK(c.volume_fraction == 0.3);
  CHECK(c.filter_radius == 1.5);
  CHECK(c.simp.penal == 3.0);
  CHECK(preset("cantilever-u10-small").mesh.n_elements == 1800);

  const ProblemConfig m = preset("michell-normal");
  CHECK(m.domain.width == 120.0);
  CHECK(m.domain.height == 50.0);
  for (const auto& v : m.stochastic.variables) {
    CHECK(v.distribution == "normal");
    CHECK(v.a == -90.0);
    CHECK(v.b == 10.0);
  }
  CHECK(m.load_model.angles.size() == 3);
  CHECK(m.load_model.angles[1].magnitude == 2.0);
  CHECK(preset("michell-uniform").stochastic.variables[0].a == -100.0);
  CHECK(preset("michell-gumbel").stochastic.variables[2].distribution == "gumbel");

  const ProblemConfig b = preset("bridge-kl");
  REQUIRE(b.load_model.field);
  CHECK(b.load_model.field->l_corr == 120.0);
  CHECK(b.load_model.field->nu_kl == 7);
  CHECK(b.filter_radius == 3.0);
  CHECK(b.passive_top_rows == 2);
  CHECK(b.mesh.n_elements == 10000);
  CHECK(preset("bridge-kl-small").stochastic.nodes_per_dim == 3);
  CHECK(preset("bridge-full").load_model.field->fully_correlated);
  CHECK_THROWS_AS(preset("bridge"), Error);
}

TEST_CASE("validation errors name the JSON path") {
  Json j = config_to_json(tiny());
  auto with = [&](auto&& edit) {
    Json k = j;
    edit(k);
    return error_of(k.dump());
  };
  CHECK(error_of("{ not json") .find("malformed JSON") != std::string::npos);
  CHECK(with([](Json& k) { k["mesh"]["extra"] = 1; }).find("$.mesh.extra: unknown key") != std::string::npos);
  CHECK(with([](Json& k) { k["surprise"] = true; }).find("$.surprise: unknown key") != std::string::npos);
  CHECK(with([](Json& k) { k["mesh"]["n_elements"] = "many"; }).find("$.mesh.n_elements") != std::string::npos);
  CHECK(with([](Json& k) { k["mesh"]["n_elements"] = 0; }).find("$.mesh.n_elements") != std::string::npos);
  CHECK(with([](Json& k) { k["volume_fraction"] = 0.0; }).find("$.volume_fraction") != std::string::npos);
  CHECK(with([](Json& k) { k["schema"] = "polyrto/0"; }).find("$.schema") != std::string::npos);
  CHECK(with([](Json& k) { k.erase("mesh"); }).find("$.mesh: missing required key") != std::string::npos);
  CHECK(with([](Json& k) { k["stochastic"]["variables"][1]["hi"] = 0.1; })
            .find("$.stochastic.variables[1]") != std::string::npos);
  CHECK(with([](Json& k) { k["load_model"]["magnitudes"][0]["variable"] = 5; })
            .find("$.load_model.magnitudes[0].variable") != std::string::npos);
  CHECK(with([](Json& k) { k["regions"][2]["kind"] = "circle"; }).find("$.regions[2].kind") != std::string::npos);
  CHECK(with([](Json& k) { k["optimizer"]["kind"] = "sgd"; }).find("$.optimizer.kind") != std::string::npos);
  CHECK(with([](Json& k) { k["material"]["nu"] = 0.5; }).find("$.material") != std::string::npos);
  CHECK(with([](Json& k) { k["domain"]["width"] = -1; }).find("$.domain.width") != std::string::npos);
}

TEST_CASE("problem assembly checks region names") {
  ProblemConfig c = tiny();
  c.fixed[0].region = "nowhere";
  CHECK_THROWS_WITH_AS(build_problem(c, build_mesh(tiny())), doctest::Contains("unknown region 'nowhere'"), Error);
  ProblemConfig ok = tiny();
  const RtoProblem p = build_problem(ok, build_mesh(ok));
  CHECK(p.loads.variables.size() == 2);
  CHECK(p.simp.eps == ok.material.Emin / ok.material.E0);
  CHECK(p.mesh.num_elements() == 40);
}

TEST_CASE("export formats") {
  const PolyMesh mesh = build_mesh(tiny(12));
  std::vector<double> rho(12);
  for (std::size_t e = 0; e < 12; ++e) rho[e] = e / 11.0;

  std::ostringstream svg;
  write_svg(mesh, rho, svg);
  const std::string s = svg.str();
  std::size_t polys = 0;
  for (auto pos = s.find("<polygon"); pos != std::string::npos; pos = s.find("<polygon", pos + 1)) ++polys;
  CHECK(polys == 12);
  CHECK(s.find("fill=\"rgb(255,255,255)\"") != std::string::npos);  // ρ = 0
  CHECK(s.find("fill=\"rgb(0,0,0)\"") != std::string::npos);        // ρ = 1

  std::ostringstream csv;
  write_density_csv(rho, csv);
  CHECK(csv.str().rfind("element,density\n0,0\n1,0.090909090909090912\n", 0) == 0);

  std::ostringstream vtk;
  write_vtk(mesh, rho, vtk);
  CHECK(vtk.str().find("CELL_DATA 12") != std::string::npos);
  CHECK(vtk.str().find("POLYGONS 12") != std::string::npos);
  CHECK_THROWS_AS(write_vtk(mesh, std::vector<double>(3), vtk), Error);

  ResultSummary r{1.5, 0.25, 1.0, "rto-gpc", 12, 432, 0.5, true};
  const Json j = to_json(r);
  std::vector<std::string> keys;
  for (const auto& [k, v] : j.items()) keys.push_back(k);
  CHECK(keys == std::vector<std::string>{"mu_c", "sigma_c", "w", "mode", "iterations", "fe_solves", "wall_seconds",
                                         "converged"});
  const ResultSummary back = result_from_json(j);
  CHECK(back.fe_solves == 432);
  CHECK(back.mode == "rto-gpc");
}

TEST_CASE("mesh command") {
  ProblemConfig c = tiny();
  c.domain.width = 1.0;
  c.domain.height = 1.0;
  c.regions.clear();
  c.mesh.n_elements = 1;
  const fs::path dir = scratch("mesh");
  std::ostringstream out;
  CHECK(cmd_mesh(c, dir, 1, out) == 0);
  CHECK(out.str().find("elements: 1\n") != std::string::npos);
  CHECK(out.str().find("area: 1\n") != std::string::npos);
  CHECK(load_mesh(dir / (c.output.prefix + ".mesh")).num_elements() == 1);
}

TEST_CASE("optimize command writes every artifact, stats tabulates them") {
  const fs::path dir = scratch("optimize");
  ProblemConfig c = tiny();
  c.output.prefix = "tiny";
  std::ostringstream out, err;
  const int code = cmd_optimize(c, RunMode::rto_gpc, dir, 1, out, err);
  const ResultSummary r = load_result(dir / "tiny.json");
  CHECK(code == (r.converged ? 0 : 2));
  CHECK(r.mode == "rto-gpc");
  CHECK(r.fe_solves == static_cast<std::size_t>(r.iterations) * 9);
  for (const char* f : {"tiny_density.csv", "tiny.vtk", "tiny.svg", "tiny_history.csv"}) CHECK(fs::exists(dir / f));
  CHECK_FALSE(fs::exists(dir / "tiny_kl.csv"));

  ProblemConfig capped = c;
  capped.optimizer.max_iterations = 2;
  capped.output.prefix = "capped";
  std::ostringstream err2;
  CHECK(cmd_optimize(capped, RunMode::det, dir, 1, out, err2) == 2);
  CHECK(err2.str().find("iteration limit") != std::string::npos);
  CHECK(load_result(dir / "capped.json").mode == "det");

  std::ostringstream table;
  CHECK(cmd_stats({dir / "tiny.json", dir / "capped.json"}, false, table) == 0);
  std::istringstream lines(table.str());
  std::vector<std::string> rows;
  for (std::string l; std::getline(lines, l);) rows.push_back(l);
  REQUIRE(rows.size() == 3);
  CHECK(rows[0].rfind("case", 0) == 0);
  CHECK(rows[1].rfind("tiny ", 0) == 0);

  std::ostringstream js;
  cmd_stats({dir / "tiny.json"}, true, js);
  const Json arr = Json::parse(js.str());
  CHECK(arr.size() == 1);
  CHECK(arr[0]["case"] == "tiny");
  CHECK_THROWS_WITH_AS(cmd_stats({dir / "absent.json"}, false, table), doctest::Contains("absent.json"), Error);
}

TEST_CASE("deterministic run at full volume fraction is all solid") {
  ProblemConfig c = tiny();
  c.volume_fraction = 1.0;
  const RunOutput r = run(c, RunMode::det, 1);
  CHECK(r.result.physical.minCoeff() == doctest::Approx(1.0));
  CHECK(r.summary.sigma_c == 0.0);
  CHECK(r.summary.w == 0.0);
}

TEST_CASE("run modes") {
  CHECK(parse_run_mode("rto-mc") == RunMode::rto_mc);
  CHECK(to_string(RunMode::nonrobust_propagate) == "nonrobust-propagate");
  CHECK_THROWS_AS(parse_run_mode("robust"), Error);
  ProblemConfig c = tiny();
  CHECK(default_run_mode(c) == RunMode::rto_gpc);
  c.stochastic.mode = "mc";
  CHECK(default_run_mode(c) == RunMode::rto_mc);
  c.load_model.kind = "deterministic";
  CHECK(default_run_mode(c) == RunMode::det);
}

}
