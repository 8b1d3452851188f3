#pragma once

#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <iosfwd>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace csmci {

using Vertex = std::uint32_t;

/// Undirected edge, stored with u < v.
struct Edge {
  Vertex u;
  Vertex v;
  friend bool operator==(const Edge&, const Edge&) = default;
};

/// Adjacency entry: the neighbouring vertex and the index of the shared edge.
struct Incidence {
  Vertex vertex;
  std::size_t edge;
};

/// Row/column layout of a square-grid graph. Vertex (r, c) has index r*cols+c.
struct LatticeLayout {
  std::size_t rows;
  std::size_t cols;
  bool periodic;
};

/// Sorted, duplicate-free vertex subset.
class Region {
 public:
  Region() = default;
  Region(std::initializer_list<Vertex> members);
  explicit Region(std::vector<Vertex> members);

  std::size_t size() const noexcept { return members_.size(); }
  bool empty() const noexcept { return members_.empty(); }
  std::span<const Vertex> members() const noexcept { return members_; }
  Vertex operator[](std::size_t k) const { return members_[k]; }
  auto begin() const noexcept { return members_.begin(); }
  auto end() const noexcept { return members_.end(); }

  bool contains(Vertex v) const noexcept;
  /// Position of v within the sorted members, if present.
  std::optional<std::size_t> position(Vertex v) const noexcept;
  bool is_subset_of(const Region& other) const noexcept;

  friend bool operator==(const Region&, const Region&) = default;
  friend auto operator<=>(const Region& a, const Region& b) {
    return a.members_ <=> b.members_;
  }

 private:
  std::vector<Vertex> members_;
};

Region region_union(const Region& a, const Region& b);
std::string to_string(const Region& region);

class Graph {
 public:
  /// Builds a general graph. Rejects self-loops, out-of-range endpoints and
  /// duplicate edges; (i,j) and (j,i) count as the same edge.
  Graph(std::size_t n, std::span<const Edge> edges,
        std::optional<LatticeLayout> layout = std::nullopt);

  std::size_t num_vertices() const noexcept { return adjacency_.size(); }
  std::size_t num_edges() const noexcept { return edges_.size(); }
  std::span<const Edge> edges() const noexcept { return edges_; }
  std::span<const Incidence> neighbors(Vertex v) const { return adjacency_[v]; }
  std::size_t degree(Vertex v) const { return adjacency_[v].size(); }
  std::optional<std::size_t> edge_index(Vertex a, Vertex b) const;

  const std::optional<LatticeLayout>& layout() const noexcept { return layout_; }

  /// Lattice neighbour in a direction (dr, dc) in {-1,0,1}; nullopt when it
  /// falls off a free boundary. Requires a lattice layout.
  std::optional<Vertex> lattice_step(Vertex v, int dr, int dc) const;

  bool same_topology(const Graph& other) const noexcept;

 private:
  std::vector<Edge> edges_;
  std::vector<std::vector<Incidence>> adjacency_;
  std::optional<LatticeLayout> layout_;
};

using GraphPtr = std::shared_ptr<const Graph>;

/// Periodic rows x cols grid. Wrap edges on a 2-wide axis coincide with the
/// direct edges and are merged.
Graph build_torus(std::size_t rows, std::size_t cols);
/// Free-boundary rows x cols grid.
Graph build_lattice_free(std::size_t rows, std::size_t cols);

/// ∂U: vertices outside U adjacent to some vertex of U.
Region boundary_region(const Graph& g, const Region& u);

void validate_region(const Graph& g, const Region& u);

/// Sum-region shapes for a single-vertex target (I..VII) or an adjacent pair
/// (I..III). I extends vertically, II horizontally, III is the target itself,
/// IV..VII add the top, bottom, left or right neighbour respectively.
enum class RegionTemplate { I, II, III, IV, V, VI, VII };

inline constexpr std::size_t kTemplateCount = 7;

RegionTemplate parse_template(std::string_view text);
std::string_view to_string(RegionTemplate t) noexcept;
std::vector<RegionTemplate> parse_template_list(std::string_view text);

/// Sum region of template t around target, clipped to the vertex set.
Region instantiate_template(const Graph& g, const Region& target, RegionTemplate t);

/// "torus:RxC" or "lattice:RxC".
Graph parse_graph_spec(std::string_view spec);

/// Plain text: first line "n m", then m lines "i j" with 0-based indices.
Graph read_graph(std::istream& in);
void write_graph(std::ostream& out, const Graph& g);

}  // namespace csmci
