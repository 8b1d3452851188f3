#include "csmci/graph.hpp"

#include <algorithm>
#include <charconv>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>

#include "csmci/error.hpp"

namespace csmci {

Region::Region(std::initializer_list<Vertex> members)
    : Region(std::vector<Vertex>(members)) {}

Region::Region(std::vector<Vertex> members) : members_(std::move(members)) {
  std::sort(members_.begin(), members_.end());
  members_.erase(std::unique(members_.begin(), members_.end()), members_.end());
}

bool Region::contains(Vertex v) const noexcept {
  return std::binary_search(members_.begin(), members_.end(), v);
}

std::optional<std::size_t> Region::position(Vertex v) const noexcept {
  auto it = std::lower_bound(members_.begin(), members_.end(), v);
  if (it == members_.end() || *it != v) return std::nullopt;
  return static_cast<std::size_t>(it - members_.begin());
}

bool Region::is_subset_of(const Region& other) const noexcept {
  return std::includes(other.members_.begin(), other.members_.end(),
                       members_.begin(), members_.end());
}

Region region_union(const Region& a, const Region& b) {
  std::vector<Vertex> out;
  out.reserve(a.size() + b.size());
  std::set_union(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return Region(std::move(out));
}

std::string to_string(const Region& region) {
  std::string out = "{";
  for (std::size_t k = 0; k < region.size(); ++k) {
    if (k) out += ",";
    out += std::to_string(region[k]);
  }
  return out + "}";
}

Graph::Graph(std::size_t n, std::span<const Edge> edges,
             std::optional<LatticeLayout> layout)
    : adjacency_(n), layout_(layout) {
  if (layout_ && layout_->rows * layout_->cols != n)
    fail(ErrorKind::InvalidDimension, "lattice layout does not match vertex count");
  std::set<std::pair<Vertex, Vertex>> seen;
  edges_.reserve(edges.size());
  for (const Edge& e : edges) {
    if (e.u >= n || e.v >= n)
      fail(ErrorKind::Configuration, "edge endpoint out of range");
    if (e.u == e.v) fail(ErrorKind::Configuration, "self-loop at vertex " + std::to_string(e.u));
    const Edge canon{std::min(e.u, e.v), std::max(e.u, e.v)};
    if (!seen.emplace(canon.u, canon.v).second)
      fail(ErrorKind::Configuration, "duplicate edge (" + std::to_string(canon.u) + "," +
                                         std::to_string(canon.v) + ")");
    adjacency_[canon.u].push_back({canon.v, edges_.size()});
    adjacency_[canon.v].push_back({canon.u, edges_.size()});
    edges_.push_back(canon);
  }
}

std::optional<std::size_t> Graph::edge_index(Vertex a, Vertex b) const {
  if (a >= num_vertices()) return std::nullopt;
  for (const Incidence& inc : adjacency_[a])
    if (inc.vertex == b) return inc.edge;
  return std::nullopt;
}

std::optional<Vertex> Graph::lattice_step(Vertex v, int dr, int dc) const {
  if (!layout_) fail(ErrorKind::UnsupportedTemplate, "graph has no lattice layout");
  const auto rows = static_cast<long>(layout_->rows);
  const auto cols = static_cast<long>(layout_->cols);
  long r = static_cast<long>(v) / cols + dr;
  long c = static_cast<long>(v) % cols + dc;
  if (layout_->periodic) {
    r = (r + rows) % rows;
    c = (c + cols) % cols;
  } else if (r < 0 || r >= rows || c < 0 || c >= cols) {
    return std::nullopt;
  }
  return static_cast<Vertex>(r * cols + c);
}

bool Graph::same_topology(const Graph& other) const noexcept {
  if (num_vertices() != other.num_vertices() || num_edges() != other.num_edges())
    return false;
  for (const Edge& e : edges_)
    if (!other.edge_index(e.u, e.v)) return false;
  return true;
}

namespace {

void check_dims(std::size_t rows, std::size_t cols, std::size_t minimum) {
  if (rows < minimum || cols < minimum)
    fail(ErrorKind::InvalidDimension, "lattice dimensions must be at least " +
                                          std::to_string(minimum) + ", got " +
                                          std::to_string(rows) + "x" + std::to_string(cols));
}

}  // namespace

Graph build_torus(std::size_t rows, std::size_t cols) {
  check_dims(rows, cols, 2);
  std::set<std::pair<Vertex, Vertex>> unique;
  auto id = [cols](std::size_t r, std::size_t c) { return static_cast<Vertex>(r * cols + c); };
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) {
      const Vertex a = id(r, c);
      const Vertex right = id(r, (c + 1) % cols);
      const Vertex down = id((r + 1) % rows, c);
      unique.emplace(std::min(a, right), std::max(a, right));
      unique.emplace(std::min(a, down), std::max(a, down));
    }
  }
  std::vector<Edge> edges;
  for (auto [u, v] : unique) edges.push_back({u, v});
  return Graph(rows * cols, edges, LatticeLayout{rows, cols, true});
}

Graph build_lattice_free(std::size_t rows, std::size_t cols) {
  check_dims(rows, cols, 1);
  std::vector<Edge> edges;
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) {
      const auto a = static_cast<Vertex>(r * cols + c);
      if (c + 1 < cols) edges.push_back({a, a + 1});
      if (r + 1 < rows) edges.push_back({a, static_cast<Vertex>(a + cols)});
    }
  }
  return Graph(rows * cols, edges, LatticeLayout{rows, cols, false});
}

void validate_region(const Graph& g, const Region& u) {
  if (!u.empty() && u.members().back() >= g.num_vertices())
    fail(ErrorKind::InvalidRegion, "region " + to_string(u) + " exceeds vertex count " +
                                       std::to_string(g.num_vertices()));
}

Region boundary_region(const Graph& g, const Region& u) {
  validate_region(g, u);
  std::vector<Vertex> out;
  for (Vertex i : u)
    for (const Incidence& inc : g.neighbors(i))
      if (!u.contains(inc.vertex)) out.push_back(inc.vertex);
  return Region(std::move(out));
}

RegionTemplate parse_template(std::string_view text) {
  static constexpr std::string_view names[] = {"I", "II", "III", "IV", "V", "VI", "VII"};
  for (std::size_t k = 0; k < kTemplateCount; ++k)
    if (text == names[k]) return static_cast<RegionTemplate>(k);
  fail(ErrorKind::UnsupportedTemplate, "unknown region template '" + std::string(text) + "'");
}

std::string_view to_string(RegionTemplate t) noexcept {
  static constexpr std::string_view names[] = {"I", "II", "III", "IV", "V", "VI", "VII"};
  return names[static_cast<std::size_t>(t)];
}

std::vector<RegionTemplate> parse_template_list(std::string_view text) {
  std::vector<RegionTemplate> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    const std::size_t stop = std::min(text.find_first_of(",+", start), text.size());
    out.push_back(parse_template(text.substr(start, stop - start)));
    start = stop + 1;
  }
  return out;
}

namespace {

std::vector<Vertex> step_all(const Graph& g, std::initializer_list<Vertex> from, int dr, int dc) {
  std::vector<Vertex> out;
  for (Vertex v : from)
    if (auto w = g.lattice_step(v, dr, dc)) out.push_back(*w);
  return out;
}

Region with(const Region& target, std::vector<Vertex> extra) {
  extra.insert(extra.end(), target.begin(), target.end());
  return Region(std::move(extra));
}

Region single_vertex_template(const Graph& g, Vertex i, RegionTemplate t) {
  const Region target{i};
  auto join = [&](std::vector<Vertex> a, const std::vector<Vertex>& b) {
    a.insert(a.end(), b.begin(), b.end());
    return with(target, std::move(a));
  };
  switch (t) {
    case RegionTemplate::I: return join(step_all(g, {i}, -1, 0), step_all(g, {i}, 1, 0));
    case RegionTemplate::II: return join(step_all(g, {i}, 0, -1), step_all(g, {i}, 0, 1));
    case RegionTemplate::III: return target;
    case RegionTemplate::IV: return with(target, step_all(g, {i}, -1, 0));
    case RegionTemplate::V: return with(target, step_all(g, {i}, 1, 0));
    case RegionTemplate::VI: return with(target, step_all(g, {i}, 0, -1));
    case RegionTemplate::VII: return with(target, step_all(g, {i}, 0, 1));
  }
  return target;
}

Region pair_template(const Graph& g, const Region& target, RegionTemplate t) {
  Vertex first = target[0];
  Vertex second = target[1];
  bool vertical;
  if (g.lattice_step(first, 1, 0) == second) {
    vertical = true;
  } else if (g.lattice_step(second, 1, 0) == first) {
    vertical = true;
    std::swap(first, second);
  } else if (g.lattice_step(first, 0, 1) == second) {
    vertical = false;
  } else if (g.lattice_step(second, 0, 1) == first) {
    vertical = false;
    std::swap(first, second);
  } else {
    fail(ErrorKind::UnsupportedTemplate,
         "pair target " + to_string(target) + " is not a lattice edge");
  }
  // first is above (vertical) or left of (horizontal) second.
  auto concat = [](std::vector<Vertex> a, const std::vector<Vertex>& b) {
    a.insert(a.end(), b.begin(), b.end());
    return a;
  };
  switch (t) {
    case RegionTemplate::I:
      if (vertical)
        return with(target, concat(step_all(g, {first}, -1, 0), step_all(g, {second}, 1, 0)));
      return with(target, concat(step_all(g, {first, second}, -1, 0),
                                 step_all(g, {first, second}, 1, 0)));
    case RegionTemplate::II:
      if (vertical)
        return with(target, concat(step_all(g, {first, second}, 0, -1),
                                   step_all(g, {first, second}, 0, 1)));
      return with(target, concat(step_all(g, {first}, 0, -1), step_all(g, {second}, 0, 1)));
    case RegionTemplate::III:
      return target;
    default:
      fail(ErrorKind::UnsupportedTemplate, "template " + std::string(to_string(t)) +
                                               " is only defined for single-vertex targets");
  }
}

}  // namespace

Region instantiate_template(const Graph& g, const Region& target, RegionTemplate t) {
  validate_region(g, target);
  if (!g.layout())
    fail(ErrorKind::UnsupportedTemplate, "region templates require a lattice graph");
  if (target.size() == 1) return single_vertex_template(g, target[0], t);
  if (target.size() == 2) return pair_template(g, target, t);
  fail(ErrorKind::UnsupportedTemplate, "templates need a single-vertex or pair target, got " +
                                           to_string(target));
}

namespace {

std::size_t parse_size(std::string_view text, std::string_view what) {
  std::size_t value = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size())
    fail(ErrorKind::Parse, "bad " + std::string(what) + " '" + std::string(text) + "'");
  return value;
}

}  // namespace

Graph parse_graph_spec(std::string_view spec) {
  const auto colon = spec.find(':');
  const auto x = spec.find('x', colon == std::string_view::npos ? 0 : colon);
  if (colon == std::string_view::npos || x == std::string_view::npos)
    fail(ErrorKind::Parse, "graph spec must look like torus:RxC or lattice:RxC, got '" +
                               std::string(spec) + "'");
  const auto kind = spec.substr(0, colon);
  const auto rows = parse_size(spec.substr(colon + 1, x - colon - 1), "row count");
  const auto cols = parse_size(spec.substr(x + 1), "column count");
  if (kind == "torus") return build_torus(rows, cols);
  if (kind == "lattice") return build_lattice_free(rows, cols);
  fail(ErrorKind::Parse, "unknown graph kind '" + std::string(kind) + "'");
}

Graph read_graph(std::istream& in) {
  std::size_t n = 0, m = 0;
  if (!(in >> n >> m)) fail(ErrorKind::Parse, "graph file: missing 'n m' header");
  std::vector<Edge> edges(m);
  for (std::size_t k = 0; k < m; ++k)
    if (!(in >> edges[k].u >> edges[k].v))
      fail(ErrorKind::Parse, "graph file: expected " + std::to_string(m) + " edges, read " +
                                 std::to_string(k));
  return Graph(n, edges);
}

void write_graph(std::ostream& out, const Graph& g) {
  out << g.num_vertices() << ' ' << g.num_edges() << '\n';
  for (const Edge& e : g.edges()) out << e.u << ' ' << e.v << '\n';
}

}  // namespace csmci
