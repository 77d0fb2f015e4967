#include <cstdio>
#include <fstream>
#include <sstream>

#include "polyrto/error.hpp"
#include "polyrto/mesh.hpp"

namespace polyrto {

namespace {

std::string format17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

class LineReader {
 public:
  explicit LineReader(std::istream& in) : in_(in) {}

  // next non-empty line, tokenized
  std::vector<std::string> next(const char* expecting) {
    std::string line;
    while (std::getline(in_, line)) {
      ++line_no_;
      std::istringstream ss(line);
      std::vector<std::string> tok;
      for (std::string t; ss >> t;) tok.push_back(t);
      if (!tok.empty()) return tok;
    }
    throw ParseError(std::string("unexpected end of file, expecting ") + expecting, line_no_ + 1);
  }
  std::size_t line() const { return line_no_; }

  long long to_int(const std::string& s) const {
    std::size_t pos = 0;
    long long v = 0;
    try {
      v = std::stoll(s, &pos);
    } catch (const std::exception&) {
      pos = 0;
    }
    if (pos != s.size()) throw ParseError("expected integer, got '" + s + "'", line_no_);
    return v;
  }
  double to_double(const std::string& s) const {
    std::size_t pos = 0;
    double v = 0;
    try {
      v = std::stod(s, &pos);
    } catch (const std::exception&) {
      pos = 0;
    }
    if (pos != s.size()) throw ParseError("expected number, got '" + s + "'", line_no_);
    return v;
  }
  std::size_t section(const std::string& name) {
    auto tok = next(name.c_str());
    if (tok.size() != 2 || tok[0] != name) throw ParseError("expected '" + name + " <count>'", line_no_);
    const long long n = to_int(tok[1]);
    if (n < 0) throw ParseError("negative count", line_no_);
    return static_cast<std::size_t>(n);
  }

 private:
  std::istream& in_;
  std::size_t line_no_ = 0;
};

}  // namespace

void write_mesh(const PolyMesh& mesh, std::ostream& out) {
  out << "polymesh v1\n";
  out << "NODES " << mesh.num_nodes() << '\n';
  for (const auto& p : mesh.nodes()) out << format17(p.x()) << ' ' << format17(p.y()) << '\n';
  out << "ELEMENTS " << mesh.num_elements() << '\n';
  for (const auto& el : mesh.elements()) {
    out << el.size();
    for (int i : el) out << ' ' << i;
    out << '\n';
  }
  out << "REGIONS " << mesh.regions().size() << '\n';
  for (const auto& [name, ids] : mesh.regions()) {
    out << name << ' ' << ids.size() << '\n';
    for (std::size_t k = 0; k < ids.size(); ++k) out << (k ? " " : "") << ids[k];
    out << '\n';
  }
}

PolyMesh read_mesh(std::istream& in) {
  LineReader r(in);
  auto header = r.next("header");
  if (header.size() != 2 || header[0] != "polymesh" || header[1] != "v1")
    throw ParseError("missing 'polymesh v1' header", r.line());

  const std::size_t nn = r.section("NODES");
  std::vector<Vec2> nodes(nn);
  for (std::size_t i = 0; i < nn; ++i) {
    auto tok = r.next("node coordinates");
    if (tok.size() != 2) throw ParseError("node line needs 2 coordinates", r.line());
    nodes[i] = Vec2(r.to_double(tok[0]), r.to_double(tok[1]));
  }

  const std::size_t ne = r.section("ELEMENTS");
  std::vector<std::vector<int>> elements(ne);
  for (std::size_t e = 0; e < ne; ++e) {
    auto tok = r.next("element connectivity");
    const long long k = r.to_int(tok[0]);
    if (k < 3 || static_cast<std::size_t>(k) + 1 != tok.size())
      throw ParseError("element line must be 'k i1 ... ik' with k >= 3", r.line());
    Polygon poly;
    for (long long j = 1; j <= k; ++j) {
      const long long id = r.to_int(tok[j]);
      if (id < 0 || static_cast<std::size_t>(id) >= nn)
        throw ParseError("node index " + tok[j] + " out of range", r.line());
      elements[e].push_back(static_cast<int>(id));
      poly.push_back(nodes[id]);
    }
    if (!(signed_area(poly) > 0.0)) throw ParseError("element has non-positive signed area", r.line());
  }

  const std::size_t nr = r.section("REGIONS");
  std::map<std::string, std::vector<int>> regions;
  for (std::size_t k = 0; k < nr; ++k) {
    auto tok = r.next("region header");
    if (tok.size() != 2) throw ParseError("region header must be 'name count'", r.line());
    const long long c = r.to_int(tok[1]);
    if (c < 0) throw ParseError("negative region size", r.line());
    std::vector<int> ids;
    while (ids.size() < static_cast<std::size_t>(c)) {
      for (const auto& t : r.next("region node indices")) {
        const long long id = r.to_int(t);
        if (id < 0 || static_cast<std::size_t>(id) >= nn)
          throw ParseError("node index " + t + " out of range", r.line());
        ids.push_back(static_cast<int>(id));
      }
    }
    if (ids.size() != static_cast<std::size_t>(c)) throw ParseError("region size mismatch", r.line());
    regions[tok[0]] = std::move(ids);
  }
  try {
    return PolyMesh(std::move(nodes), std::move(elements), std::move(regions));
  } catch (const Error& e) {
    throw ParseError(e.what(), r.line());
  }
}

void save_mesh(const PolyMesh& mesh, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  write_mesh(mesh, out);
  if (!out) throw Error("write failed for " + path.string());
}

PolyMesh load_mesh(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot read " + path.string());
  return read_mesh(in);
}

}  // namespace polyrto
