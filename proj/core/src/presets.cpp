#include <algorithm>

#include "polyrto/config.hpp"
#include "polyrto/error.hpp"

namespace polyrto {

namespace {

constexpr std::uint64_t kMeshSeed = 7;

ProblemConfig base(const std::string& name, double width, double height, std::size_t n) {
  ProblemConfig c;
  c.name = name;
  c.domain.kind = "rectangle";
  c.domain.width = width;
  c.domain.height = height;
  c.mesh.n_elements = n;
  c.mesh.seed = kMeshSeed;
  c.mesh.lloyd_iterations = 100;
  c.volume_fraction = 0.3;
  c.filter_radius = 1.5;
  c.weight_w = 1.0;
  c.simp.penal = 3.0;
  c.output.prefix = name;
  return c;
}

RegionConfig point(const std::string& name, Vec2 at, double tol = 0.0) {
  RegionConfig r;
  r.name = name;
  r.kind = "point";
  r.a = at;
  r.tol = tol;
  return r;
}

RegionConfig segment(const std::string& name, Vec2 a, Vec2 b) {
  RegionConfig r;
  r.name = name;
  r.a = a;
  r.b = b;
  return r;
}

// Two opposite unit forces at the free corners, clamped left edge.
ProblemConfig cantilever(const std::string& name, double half_width, bool small) {
  ProblemConfig c = base(name, 60.0, 30.0, small ? 1800 : 7200);
  c.regions = {segment("support", {0.0, 0.0}, {0.0, 30.0}), point("top", {60.0, 30.0}),
               point("bottom", {60.0, 0.0})};
  c.fixed = {{"support", "xy"}};
  c.load_model.kind = "random_magnitudes";
  c.load_model.magnitudes = {{"top", Vec2(0.0, -1.0), 0}, {"bottom", Vec2(0.0, 1.0), 1}};
  for (const char* m : {"F1", "F2"}) c.stochastic.variables.push_back({"uniform", 1.0 - half_width, 1.0 + half_width, m});
  c.stochastic.p_pc = 5;
  return c;
}

// Three loads on the bottom edge with random angles, pinned bottom corners.
ProblemConfig michell(const std::string& name, const std::string& distribution, bool small) {
  ProblemConfig c = base(name, 120.0, 50.0, small ? 3000 : 12000);
  c.mesh.symmetry = "mirror_x";
  const double tol = small ? 1.5 : 1.0;
  c.regions = {point("left", {0.0, 0.0}), point("right", {120.0, 0.0}), point("load1", {30.0, 0.0}, tol),
               point("load2", {60.0, 0.0}, tol), point("load3", {90.0, 0.0}, tol)};
  c.fixed = {{"left", "xy"}, {"right", "xy"}};
  c.load_model.kind = "random_angles";
  const double magnitudes[] = {1.0, 2.0, 1.0};
  for (int i = 0; i < 3; ++i) {
    const std::string load = "load" + std::to_string(i + 1);
    c.load_model.angles.push_back({load, magnitudes[i], i});
    const std::string meaning = "angle " + load + " [deg]";
    if (distribution == "uniform") c.stochastic.variables.push_back({"uniform", -100.0, -80.0, meaning});
    else c.stochastic.variables.push_back({distribution, -90.0, 10.0, meaning});
  }
  c.stochastic.p_pc = 5;
  return c;
}

// Gaussian load field on the deck, two passive rows under it, pinned bottom corners.
ProblemConfig bridge(const std::string& name, bool fully_correlated, bool small) {
  ProblemConfig c = base(name, 120.0, 40.0, small ? 2500 : 10000);
  c.filter_radius = 3.0;
  c.passive_top_rows = 2;
  c.regions = {point("left", {0.0, 0.0}), point("right", {120.0, 0.0}), segment("deck", {0.0, 40.0}, {120.0, 40.0})};
  c.fixed = {{"left", "xy"}, {"right", "xy"}};
  c.load_model.kind = "random_field";
  FieldConfig f;
  f.region = "deck";
  f.direction = Vec2(0.0, -1.0);
  f.mean = 1.0;
  f.sigma_f = 0.09;
  f.sigma_is_variance = true;
  if (fully_correlated) {
    f.correlation = "constant";
    f.fully_correlated = true;
    f.l_corr = 120.0;
  } else {
    f.correlation = "exponential";
    f.l_corr = 120.0;
    f.nu_kl = 7;
  }
  c.load_model.field = f;
  c.stochastic.p_pc = 5;
  if (!fully_correlated && small) {
    c.stochastic.p_pc = 2;
    c.stochastic.nodes_per_dim = 3;
  }
  return c;
}

}  // namespace

std::vector<std::string> preset_names() {
  std::vector<std::string> out;
  for (const char* n : {"cantilever-u05", "cantilever-u10", "cantilever-u20", "michell-normal", "michell-uniform",
                        "michell-gumbel", "bridge-full", "bridge-kl"}) {
    out.emplace_back(n);
    out.push_back(std::string(n) + "-small");
  }
  return out;
}

ProblemConfig preset(const std::string& name) {
  const bool small = name.ends_with("-small");
  const std::string stem = small ? name.substr(0, name.size() - 6) : name;
  if (stem == "cantilever-u05") return cantilever(name, 0.05, small);
  if (stem == "cantilever-u10") return cantilever(name, 0.10, small);
  if (stem == "cantilever-u20") return cantilever(name, 0.20, small);
  if (stem == "michell-normal") return michell(name, "normal", small);
  if (stem == "michell-uniform") return michell(name, "uniform", small);
  if (stem == "michell-gumbel") return michell(name, "gumbel", small);
  if (stem == "bridge-full") return bridge(name, true, small);
  if (stem == "bridge-kl") return bridge(name, false, small);
  std::string list;
  for (const auto& n : preset_names()) list += (list.empty() ? "" : ", ") + n;
  throw Error("unknown preset '" + name + "' (available: " + list + ")");
}

}  // namespace polyrto
