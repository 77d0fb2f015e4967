#include "polyrto/config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "polyrto/error.hpp"

namespace polyrto {

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& what) {
  throw Error("config: " + path + ": " + what);
}

// Typed access to one JSON object; remembers which keys were read so that
// unknown keys can be reported.
class Obj {
 public:
  Obj(const Json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j.is_object()) fail(path_, "expected an object");
  }
  ~Obj() = default;

  bool has(const std::string& key) const { return j_.contains(key); }
  std::string at(const std::string& key) const { return path_ + "." + key; }

  const Json& raw(const std::string& key) {
    used_.insert(key);
    if (!j_.contains(key)) fail(at(key), "missing required key");
    return j_.at(key);
  }

  double number(const std::string& key) {
    const Json& v = raw(key);
    if (!v.is_number()) fail(at(key), "expected a number");
    const double d = v.get<double>();
    if (!std::isfinite(d)) fail(at(key), "must be finite");
    return d;
  }
  double number(const std::string& key, double def) { return has(key) ? number(key) : (used_.insert(key), def); }

  long long integer(const std::string& key) {
    const Json& v = raw(key);
    if (!v.is_number_integer()) fail(at(key), "expected an integer");
    return v.get<long long>();
  }
  long long integer(const std::string& key, long long def) { return has(key) ? integer(key) : (used_.insert(key), def); }
  std::size_t count(const std::string& key, long long min) {
    const long long v = integer(key);
    if (v < min) fail(at(key), "must be >= " + std::to_string(min));
    return static_cast<std::size_t>(v);
  }
  std::size_t count(const std::string& key, long long min, std::size_t def) {
    return has(key) ? count(key, min) : (used_.insert(key), def);
  }
  std::uint64_t unsigned_integer(const std::string& key, std::uint64_t def) {
    if (!has(key)) return used_.insert(key), def;
    const Json& v = raw(key);
    if (!v.is_number_unsigned()) fail(at(key), "expected a non-negative integer");
    return v.get<std::uint64_t>();
  }

  bool boolean(const std::string& key, bool def) {
    if (!has(key)) return used_.insert(key), def;
    const Json& v = raw(key);
    if (!v.is_boolean()) fail(at(key), "expected true or false");
    return v.get<bool>();
  }

  std::string string(const std::string& key) {
    const Json& v = raw(key);
    if (!v.is_string()) fail(at(key), "expected a string");
    return v.get<std::string>();
  }
  std::string string(const std::string& key, const std::string& def) {
    return has(key) ? string(key) : (used_.insert(key), def);
  }
  std::string choice(const std::string& key, const std::string& def, std::initializer_list<const char*> options) {
    std::string s = string(key, def);
    for (const char* o : options)
      if (s == o) return s;
    std::string list;
    for (const char* o : options) list += std::string(list.empty() ? "" : ", ") + o;
    fail(at(key), "'" + s + "' is not one of: " + list);
  }

  Vec2 vec2(const std::string& key) {
    const Json& v = raw(key);
    if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number())
      fail(at(key), "expected [x, y]");
    const Vec2 p(v[0].get<double>(), v[1].get<double>());
    if (!p.allFinite()) fail(at(key), "must be finite");
    return p;
  }
  Vec2 vec2(const std::string& key, const Vec2& def) { return has(key) ? vec2(key) : (used_.insert(key), def); }

  const Json& array(const std::string& key) {
    const Json& v = raw(key);
    if (!v.is_array()) fail(at(key), "expected an array");
    return v;
  }
  const Json* optional_array(const std::string& key) {
    if (!has(key)) return used_.insert(key), nullptr;
    return &array(key);
  }

  void finish() const {
    for (const auto& [k, v] : j_.items())
      if (!used_.count(k)) fail(at(k), "unknown key");
  }

 private:
  const Json& j_;
  std::string path_;
  std::set<std::string> used_;
};

std::string item(const std::string& path, std::size_t i) { return path + "[" + std::to_string(i) + "]"; }

Json vec_json(const Vec2& v) { return Json::array({v.x(), v.y()}); }

}  // namespace

// ---------------------------------------------------------------- parse

ProblemConfig config_from_json(const Json& root) {
  ProblemConfig c;
  Obj top(root, "$");
  if (top.string("schema") != kSchema) fail("$.schema", std::string("expected \"") + kSchema + "\"");
  c.name = top.string("name", c.name);

  {
    Obj d(top.raw("domain"), "$.domain");
    c.domain.kind = d.choice("kind", "rectangle", {"rectangle", "polygon"});
    if (c.domain.kind == "rectangle") {
      c.domain.width = d.number("width");
      c.domain.height = d.number("height");
      if (!(c.domain.width > 0.0)) fail("$.domain.width", "must be positive");
      if (!(c.domain.height > 0.0)) fail("$.domain.height", "must be positive");
    } else {
      const Json& vs = d.array("vertices");
      for (std::size_t i = 0; i < vs.size(); ++i) {
        const Json& p = vs[i];
        if (!p.is_array() || p.size() != 2 || !p[0].is_number() || !p[1].is_number())
          fail(item("$.domain.vertices", i), "expected [x, y]");
        c.domain.vertices.emplace_back(p[0].get<double>(), p[1].get<double>());
      }
      if (c.domain.vertices.size() < 3) fail("$.domain.vertices", "need at least 3 vertices");
    }
    d.finish();
  }

  if (const Json* rs = top.optional_array("regions")) {
    for (std::size_t i = 0; i < rs->size(); ++i) {
      const std::string path = item("$.regions", i);
      Obj r((*rs)[i], path);
      RegionConfig rc;
      rc.name = r.string("name");
      rc.kind = r.choice("kind", "segment", {"segment", "point"});
      if (rc.kind == "segment") {
        rc.a = r.vec2("a");
        rc.b = r.vec2("b");
      } else {
        rc.a = r.vec2("at");
      }
      rc.tol = r.number("tol", 0.0);
      if (rc.tol < 0.0) fail(path + ".tol", "must be non-negative");
      r.finish();
      c.regions.push_back(std::move(rc));
    }
  }

  {
    Obj m(top.raw("mesh"), "$.mesh");
    c.mesh.n_elements = m.count("n_elements", 1);
    c.mesh.seed = m.unsigned_integer("seed", c.mesh.seed);
    c.mesh.lloyd_iterations = m.count("lloyd_iterations", 0, c.mesh.lloyd_iterations);
    c.mesh.symmetry = m.choice("symmetry", "none", {"none", "mirror_x"});
    m.finish();
  }

  if (top.has("material")) {
    Obj m(top.raw("material"), "$.material");
    c.material.E0 = m.number("E0", c.material.E0);
    c.material.nu = m.number("nu", c.material.nu);
    c.material.Emin = m.number("Emin", c.material.Emin);
    c.material.plane = m.choice("plane", "stress", {"stress", "strain"}) == "stress" ? PlaneAssumption::stress
                                                                                      : PlaneAssumption::strain;
    m.finish();
    try {
      c.material.validate();
    } catch (const Error& e) {
      fail("$.material", e.what());
    }
  } else {
    top.raw("material");
  }

  if (top.has("bcs")) {
    Obj b(top.raw("bcs"), "$.bcs");
    if (const Json* fs = b.optional_array("fixed"))
      for (std::size_t i = 0; i < fs->size(); ++i) {
        Obj f((*fs)[i], item("$.bcs.fixed", i));
        c.fixed.push_back({f.string("region"), f.choice("components", "xy", {"x", "y", "xy"})});
        f.finish();
      }
    if (const Json* ps = b.optional_array("point_loads"))
      for (std::size_t i = 0; i < ps->size(); ++i) {
        Obj p((*ps)[i], item("$.bcs.point_loads", i));
        c.point_loads.push_back({p.string("region"), p.vec2("force")});
        p.finish();
      }
    if (const Json* ds = b.optional_array("distributed_loads"))
      for (std::size_t i = 0; i < ds->size(); ++i) {
        Obj p((*ds)[i], item("$.bcs.distributed_loads", i));
        c.distributed_loads.push_back({p.string("region"), p.vec2("load_per_length")});
        p.finish();
      }
    b.finish();
  } else {
    top.raw("bcs");
  }

  if (top.has("stochastic")) {
    Obj s(top.raw("stochastic"), "$.stochastic");
    if (const Json* vs = s.optional_array("variables"))
      for (std::size_t i = 0; i < vs->size(); ++i) {
        const std::string path = item("$.stochastic.variables", i);
        Obj v((*vs)[i], path);
        VariableConfig vc;
        vc.distribution = v.choice("distribution", "uniform", {"uniform", "normal", "gumbel"});
        if (vc.distribution == "uniform") {
          vc.a = v.number("lo");
          vc.b = v.number("hi");
          if (!(vc.a <= vc.b)) fail(path, "lo must not exceed hi");
        } else {
          vc.a = v.number("mean");
          vc.b = v.number("std");
          if (!(vc.b >= 0.0)) fail(path + ".std", "must be non-negative");
        }
        vc.meaning = v.string("meaning", "");
        v.finish();
        c.stochastic.variables.push_back(std::move(vc));
      }
    c.stochastic.p_pc = static_cast<int>(s.count("p_pc", 0, static_cast<std::size_t>(c.stochastic.p_pc)));
    c.stochastic.nodes_per_dim = static_cast<int>(s.count("nodes_per_dim", 0, 0));
    c.stochastic.mode = s.choice("mode", "gpc", {"gpc", "mc"});
    c.stochastic.n_mc = s.count("n_mc", 2, c.stochastic.n_mc);
    c.stochastic.seed = s.unsigned_integer("seed", c.stochastic.seed);
    s.finish();
  }

  if (top.has("load_model")) {
    Obj l(top.raw("load_model"), "$.load_model");
    auto& lm = c.load_model;
    lm.kind = l.choice("kind", "deterministic", {"deterministic", "random_magnitudes", "random_angles", "random_field"});
    const auto nvar = static_cast<long long>(c.stochastic.variables.size());
    auto variable = [&](Obj& o, const std::string& path) {
      const long long v = o.integer("variable");
      if (v < 0 || v >= nvar) fail(path + ".variable", "no such entry in $.stochastic.variables");
      return static_cast<int>(v);
    };
    if (const Json* ms = l.optional_array("magnitudes"))
      for (std::size_t i = 0; i < ms->size(); ++i) {
        const std::string path = item("$.load_model.magnitudes", i);
        Obj m((*ms)[i], path);
        MagnitudeConfig mc;
        mc.region = m.string("region");
        mc.direction = m.vec2("direction");
        mc.variable = variable(m, path);
        m.finish();
        lm.magnitudes.push_back(std::move(mc));
      }
    if (const Json* as = l.optional_array("angles"))
      for (std::size_t i = 0; i < as->size(); ++i) {
        const std::string path = item("$.load_model.angles", i);
        Obj a((*as)[i], path);
        AngleConfig ac;
        ac.region = a.string("region");
        ac.magnitude = a.number("magnitude");
        ac.variable = variable(a, path);
        a.finish();
        lm.angles.push_back(std::move(ac));
      }
    if (l.has("field")) {
      Obj f(l.raw("field"), "$.load_model.field");
      FieldConfig fc;
      fc.region = f.string("region");
      fc.direction = f.vec2("direction", fc.direction);
      fc.mean = f.number("mean", fc.mean);
      fc.correlation = f.choice("correlation", "exponential", {"constant", "exponential"});
      fc.sigma_f = f.number("sigma_f", fc.sigma_f);
      fc.sigma_is_variance = f.boolean("sigma_is_variance", fc.sigma_is_variance);
      fc.l_corr = f.number("l_corr", fc.l_corr);
      fc.fully_correlated = f.boolean("fully_correlated", fc.fully_correlated);
      fc.nu_kl = static_cast<int>(f.count("nu_kl", 0, 0));
      fc.tau = f.number("tau", fc.tau);
      if (!(fc.sigma_f > 0.0)) fail("$.load_model.field.sigma_f", "must be positive");
      if (!(fc.l_corr > 0.0)) fail("$.load_model.field.l_corr", "must be positive");
      if (!(fc.tau > 0.0 && fc.tau <= 1.0)) fail("$.load_model.field.tau", "must lie in (0,1]");
      f.finish();
      lm.field = std::move(fc);
    } else {
      l.optional_array("field");
    }
    l.finish();
    if (lm.kind == "random_magnitudes" && lm.magnitudes.empty()) fail("$.load_model.magnitudes", "must not be empty");
    if (lm.kind == "random_angles" && lm.angles.empty()) fail("$.load_model.angles", "must not be empty");
    if (lm.kind == "random_field" && !lm.field) fail("$.load_model.field", "missing required key");
  }

  if (top.has("simp")) {
    Obj s(top.raw("simp"), "$.simp");
    c.simp.penal = s.number("penal", c.simp.penal);
    if (!(c.simp.penal >= 1.0)) fail("$.simp.penal", "must be >= 1");
    if (const Json* cs = s.optional_array("continuation"))
      for (std::size_t i = 0; i < cs->size(); ++i) {
        const Json& e = (*cs)[i];
        if (!e.is_array() || e.size() != 2 || !e[0].is_number_integer() || !e[1].is_number())
          fail(item("$.simp.continuation", i), "expected [iteration, penal]");
        c.simp.continuation.emplace_back(e[0].get<int>(), e[1].get<double>());
      }
    s.finish();
  }

  c.filter_radius = top.number("filter_radius", c.filter_radius);
  if (!(c.filter_radius >= 0.0)) fail("$.filter_radius", "must be non-negative");
  c.volume_fraction = top.number("volume_fraction", c.volume_fraction);
  if (!(c.volume_fraction > 0.0 && c.volume_fraction <= 1.0)) fail("$.volume_fraction", "must lie in (0, 1]");
  c.weight_w = top.number("weight_w", c.weight_w);
  if (!(c.weight_w >= 0.0)) fail("$.weight_w", "must be non-negative");

  if (top.has("passive")) {
    Obj p(top.raw("passive"), "$.passive");
    c.passive_top_rows = static_cast<int>(p.count("top_rows", 0, 0));
    p.finish();
  }

  if (top.has("optimizer")) {
    Obj o(top.raw("optimizer"), "$.optimizer");
    auto& oc = c.optimizer;
    oc.kind = o.choice("kind", "mma", {"oc", "mma"}) == "oc" ? OptimizerKind::oc : OptimizerKind::mma;
    oc.move = o.number("move", oc.move);
    oc.max_iterations = static_cast<int>(o.count("max_iterations", 1, static_cast<std::size_t>(oc.max_iterations)));
    oc.tolerance = o.number("tolerance", oc.tolerance);
    oc.mma.asyinit = o.number("asyinit", oc.mma.asyinit);
    oc.mma.asyincr = o.number("asyincr", oc.mma.asyincr);
    oc.mma.asydecr = o.number("asydecr", oc.mma.asydecr);
    o.finish();
    try {
      oc.validate();
    } catch (const Error& e) {
      fail("$.optimizer", e.what());
    }
  }

  if (top.has("output")) {
    Obj o(top.raw("output"), "$.output");
    c.output.dir = o.string("dir", c.output.dir);
    c.output.prefix = o.string("prefix", c.output.prefix);
    o.finish();
  }
  top.finish();
  return c;
}

// ---------------------------------------------------------------- emit

Json config_to_json(const ProblemConfig& c) {
  Json j;
  j["schema"] = kSchema;
  j["name"] = c.name;
  Json d;
  d["kind"] = c.domain.kind;
  if (c.domain.kind == "rectangle") {
    d["width"] = c.domain.width;
    d["height"] = c.domain.height;
  } else {
    d["vertices"] = Json::array();
    for (const auto& v : c.domain.vertices) d["vertices"].push_back(vec_json(v));
  }
  j["domain"] = d;

  j["regions"] = Json::array();
  for (const auto& r : c.regions) {
    Json o;
    o["name"] = r.name;
    o["kind"] = r.kind;
    if (r.kind == "segment") {
      o["a"] = vec_json(r.a);
      o["b"] = vec_json(r.b);
    } else {
      o["at"] = vec_json(r.a);
    }
    o["tol"] = r.tol;
    j["regions"].push_back(o);
  }

  j["mesh"] = {{"n_elements", c.mesh.n_elements},
               {"seed", c.mesh.seed},
               {"lloyd_iterations", c.mesh.lloyd_iterations},
               {"symmetry", c.mesh.symmetry}};
  j["material"] = {{"E0", c.material.E0},
                   {"nu", c.material.nu},
                   {"Emin", c.material.Emin},
                   {"plane", c.material.plane == PlaneAssumption::stress ? "stress" : "strain"}};

  Json bcs;
  bcs["fixed"] = Json::array();
  for (const auto& f : c.fixed) bcs["fixed"].push_back({{"region", f.region}, {"components", f.components}});
  bcs["point_loads"] = Json::array();
  for (const auto& p : c.point_loads) bcs["point_loads"].push_back({{"region", p.region}, {"force", vec_json(p.force)}});
  bcs["distributed_loads"] = Json::array();
  for (const auto& p : c.distributed_loads)
    bcs["distributed_loads"].push_back({{"region", p.region}, {"load_per_length", vec_json(p.load_per_length)}});
  j["bcs"] = bcs;

  Json lm;
  lm["kind"] = c.load_model.kind;
  lm["magnitudes"] = Json::array();
  for (const auto& m : c.load_model.magnitudes)
    lm["magnitudes"].push_back({{"region", m.region}, {"direction", vec_json(m.direction)}, {"variable", m.variable}});
  lm["angles"] = Json::array();
  for (const auto& a : c.load_model.angles)
    lm["angles"].push_back({{"region", a.region}, {"magnitude", a.magnitude}, {"variable", a.variable}});
  if (c.load_model.field) {
    const auto& f = *c.load_model.field;
    lm["field"] = {{"region", f.region},
                   {"direction", vec_json(f.direction)},
                   {"mean", f.mean},
                   {"correlation", f.correlation},
                   {"sigma_f", f.sigma_f},
                   {"sigma_is_variance", f.sigma_is_variance},
                   {"l_corr", f.l_corr},
                   {"fully_correlated", f.fully_correlated},
                   {"nu_kl", f.nu_kl},
                   {"tau", f.tau}};
  }
  j["load_model"] = lm;

  Json st;
  st["variables"] = Json::array();
  for (const auto& v : c.stochastic.variables) {
    Json o;
    o["distribution"] = v.distribution;
    if (v.distribution == "uniform") {
      o["lo"] = v.a;
      o["hi"] = v.b;
    } else {
      o["mean"] = v.a;
      o["std"] = v.b;
    }
    o["meaning"] = v.meaning;
    st["variables"].push_back(o);
  }
  st["p_pc"] = c.stochastic.p_pc;
  st["nodes_per_dim"] = c.stochastic.nodes_per_dim;
  st["mode"] = c.stochastic.mode;
  st["n_mc"] = c.stochastic.n_mc;
  st["seed"] = c.stochastic.seed;
  j["stochastic"] = st;

  Json simp;
  simp["penal"] = c.simp.penal;
  simp["continuation"] = Json::array();
  for (const auto& [it, p] : c.simp.continuation) simp["continuation"].push_back(Json::array({it, p}));
  j["simp"] = simp;
  j["filter_radius"] = c.filter_radius;
  j["volume_fraction"] = c.volume_fraction;
  j["weight_w"] = c.weight_w;
  j["passive"] = {{"top_rows", c.passive_top_rows}};
  j["optimizer"] = {{"kind", c.optimizer.kind == OptimizerKind::oc ? "oc" : "mma"},
                    {"move", c.optimizer.move},
                    {"max_iterations", c.optimizer.max_iterations},
                    {"tolerance", c.optimizer.tolerance},
                    {"asyinit", c.optimizer.mma.asyinit},
                    {"asyincr", c.optimizer.mma.asyincr},
                    {"asydecr", c.optimizer.mma.asydecr}};
  j["output"] = {{"dir", c.output.dir}, {"prefix", c.output.prefix}};
  return j;
}

ProblemConfig parse_config(const std::string& text) {
  Json j;
  try {
    j = Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw Error(std::string("config: malformed JSON: ") + e.what());
  }
  return config_from_json(j);
}

ProblemConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot read " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string dump_config(const ProblemConfig& c) { return config_to_json(c).dump(2) + "\n"; }

// ---------------------------------------------------------------- build

Domain2D build_domain(const ProblemConfig& c) {
  Domain2D d = c.domain.kind == "rectangle" ? Domain2D::rectangle(c.domain.width, c.domain.height)
                                            : Domain2D::polygon(c.domain.vertices);
  for (const auto& r : c.regions) {
    Region reg;
    reg.name = r.name;
    reg.kind = r.kind == "segment" ? Region::Kind::segment : Region::Kind::point;
    reg.a = r.a;
    reg.b = r.b;
    reg.tol = r.tol;
    d.add_region(std::move(reg));
  }
  return d;
}

PolyMesh build_mesh(const ProblemConfig& c, unsigned threads) {
  const Domain2D domain = build_domain(c);
  CvtOptions o;
  o.n_elements = c.mesh.n_elements;
  o.seed = c.mesh.seed;
  o.lloyd_iterations = c.mesh.lloyd_iterations;
  o.symmetry = c.mesh.symmetry == "mirror_x" ? MeshSymmetry::mirror_x : MeshSymmetry::none;
  return tag_boundary(generate_cvt(domain, o, threads).mesh, domain);
}

RtoProblem build_problem(const ProblemConfig& c, PolyMesh mesh) {
  RtoProblem p;
  p.mesh = std::move(mesh);
  p.material = c.material;
  for (const auto& f : c.fixed)
    p.bcs.fixed.push_back({f.region, f.components.find('x') != std::string::npos,
                           f.components.find('y') != std::string::npos});
  for (const auto& l : c.point_loads) p.bcs.point_loads.push_back({l.region, l.force});
  for (const auto& l : c.distributed_loads) {
    const Vec2 q = l.load_per_length;
    p.bcs.distributed.push_back({l.region, [q](const Vec2&) { return q; }});
  }
  auto require_region = [&](const std::string& name, const std::string& where) {
    if (!p.mesh.has_region(name)) throw Error("config: " + where + ": unknown region '" + name + "'");
  };
  for (const auto& f : p.bcs.fixed) require_region(f.region, "$.bcs.fixed");
  for (const auto& l : p.bcs.point_loads) require_region(l.region, "$.bcs.point_loads");
  for (const auto& l : p.bcs.distributed) require_region(l.region, "$.bcs.distributed_loads");

  for (const auto& v : c.stochastic.variables) {
    if (v.distribution == "uniform") p.loads.variables.push_back(RandomVariableSpec::uniform(v.a, v.b, v.meaning));
    else if (v.distribution == "normal") p.loads.variables.push_back(RandomVariableSpec::normal(v.a, v.b, v.meaning));
    else p.loads.variables.push_back(RandomVariableSpec::gumbel(v.a, v.b, v.meaning));
  }
  const auto& lm = c.load_model;
  if (lm.kind == "random_magnitudes") {
    p.loads.kind = LoadModel::Kind::random_magnitudes;
    for (const auto& m : lm.magnitudes) {
      require_region(m.region, "$.load_model.magnitudes");
      p.loads.magnitudes.push_back({m.region, m.direction, m.variable});
    }
  } else if (lm.kind == "random_angles") {
    p.loads.kind = LoadModel::Kind::random_angles;
    for (const auto& a : lm.angles) {
      require_region(a.region, "$.load_model.angles");
      p.loads.angles.push_back({a.region, a.magnitude, a.variable});
    }
  } else if (lm.kind == "random_field") {
    p.loads.kind = LoadModel::Kind::random_field;
    const auto& f = *lm.field;
    require_region(f.region, "$.load_model.field");
    auto& pf = p.loads.field;
    pf.region = f.region;
    pf.direction = f.direction;
    pf.mean = f.mean;
    pf.correlation = f.correlation == "constant" ? CorrelationModel::Kind::constant : CorrelationModel::Kind::exponential;
    pf.sigma_f = f.sigma_f;
    pf.sigma_is_variance = f.sigma_is_variance;
    pf.l_corr = f.l_corr;
    pf.fully_correlated = f.fully_correlated;
    pf.nu_kl = f.nu_kl;
    pf.tau = f.tau;
  } else {
    p.loads.kind = LoadModel::Kind::deterministic;
  }

  p.simp = c.simp;
  p.simp.eps = c.material.eps();
  p.filter_radius = c.filter_radius;
  p.volume_fraction = c.volume_fraction;
  p.w = c.weight_w;
  p.p_pc = c.stochastic.p_pc;
  p.nodes_per_dim = c.stochastic.nodes_per_dim;
  p.n_mc = c.stochastic.n_mc;
  p.seed = c.stochastic.seed;
  p.optimizer = c.optimizer;
  p.passive = top_row_elements(p.mesh, c.passive_top_rows);
  p.validate();
  return p;
}

}  // namespace polyrto
