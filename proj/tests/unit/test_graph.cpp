#include <doctest.h>

#include <sstream>

#include "csmci/error.hpp"
#include "csmci/graph.hpp"
#include "helpers.hpp"

using namespace csmci;

namespace {

ErrorKind kind_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected an error");
  return ErrorKind::Unsupported;
}

}  // namespace

TEST_CASE("torus sizes") {
  const Graph g45 = build_torus(4, 5);
  CHECK(g45.num_vertices() == 20);
  CHECK(g45.num_edges() == 40);
  const Graph g33 = build_torus(3, 3);
  CHECK(g33.num_edges() == 18);
  for (Vertex v = 0; v < 9; ++v) CHECK(g33.degree(v) == 4);
  const Graph g23 = build_torus(2, 3);
  CHECK(g23.num_vertices() == 6);
  CHECK(g23.num_edges() == 9);
  CHECK(kind_of([] { build_torus(1, 5); }) == ErrorKind::InvalidDimension);
}

TEST_CASE("free lattice sizes") {
  CHECK(build_lattice_free(12, 12).num_edges() == 264);
  CHECK(build_lattice_free(12, 12).num_vertices() == 144);
  CHECK(build_lattice_free(1, 1).num_edges() == 0);
  CHECK(build_lattice_free(2, 2).num_edges() == 4);
  CHECK(kind_of([] { build_lattice_free(0, 3); }) == ErrorKind::InvalidDimension);
}

TEST_CASE("graph construction rejects bad edges") {
  std::vector<Edge> loop{{1, 1}};
  CHECK(kind_of([&] { Graph(3, loop); }) == ErrorKind::Configuration);
  std::vector<Edge> out_of_range{{0, 3}};
  CHECK_THROWS_AS(Graph(3, out_of_range), Error);
  std::vector<Edge> dup{{0, 1}, {1, 0}};
  CHECK_THROWS_AS(Graph(3, dup), Error);
}

TEST_CASE("regions are sorted sets") {
  const Region r{5, 1, 3, 1};
  CHECK(r.size() == 3);
  CHECK(r[0] == 1);
  CHECK(r.contains(3));
  CHECK_FALSE(r.contains(2));
  CHECK(r.position(5) == 2u);
  CHECK(Region{1, 3}.is_subset_of(r));
  CHECK(region_union(Region{1, 2}, Region{2, 9}) == Region{1, 2, 9});
}

TEST_CASE("boundary region") {
  const Graph g = build_torus(4, 5);
  Region all;
  {
    std::vector<Vertex> v(20);
    for (Vertex i = 0; i < 20; ++i) v[i] = i;
    all = Region(v);
  }
  CHECK(boundary_region(g, all).empty());
  // vertex 7 = (1,2): up 2, down 12, left 6, right 8
  CHECK(boundary_region(g, Region{7}) == Region{2, 6, 8, 12});
  // corner 0 wraps
  CHECK(boundary_region(g, Region{0}) == Region{1, 4, 5, 15});
  CHECK_THROWS_AS(boundary_region(g, Region{20}), Error);

  // The region sketch: a path 1..5 with each i hanging a leaf i+5.
  std::vector<Edge> e{{1, 2}, {2, 3}, {3, 4}, {4, 5}, {1, 6}, {2, 7}, {3, 8}, {4, 9}, {5, 10}, {0, 6}};
  const Graph sketch(11, e);
  CHECK(boundary_region(sketch, Region{1, 2, 3, 4, 5}) == Region{6, 7, 8, 9, 10});
}

TEST_CASE("single vertex templates on a free lattice") {
  const Graph g = build_lattice_free(12, 12);
  const Vertex interior = 5 * 12 + 6;
  CHECK(instantiate_template(g, Region{interior}, RegionTemplate::III) == Region{interior});
  CHECK(instantiate_template(g, Region{interior}, RegionTemplate::I) ==
        Region{interior - 12, interior, interior + 12});
  CHECK(instantiate_template(g, Region{interior}, RegionTemplate::II) ==
        Region{interior - 1, interior, interior + 1});
  CHECK(instantiate_template(g, Region{interior}, RegionTemplate::IV) == Region{interior - 12, interior});
  CHECK(instantiate_template(g, Region{interior}, RegionTemplate::V) == Region{interior, interior + 12});
  CHECK(instantiate_template(g, Region{interior}, RegionTemplate::VI) == Region{interior - 1, interior});
  CHECK(instantiate_template(g, Region{interior}, RegionTemplate::VII) == Region{interior, interior + 1});
  // top row: overhang clipped
  CHECK(instantiate_template(g, Region{3}, RegionTemplate::I) == Region{3, 15});
  CHECK(instantiate_template(g, Region{0}, RegionTemplate::II) == Region{0, 1});
  CHECK(instantiate_template(g, Region{0}, RegionTemplate::IV) == Region{0});
}

TEST_CASE("templates wrap on the torus") {
  const Graph g = build_torus(4, 5);
  CHECK(instantiate_template(g, Region{0}, RegionTemplate::I) == Region{0, 5, 15});
  CHECK(instantiate_template(g, Region{0}, RegionTemplate::II) == Region{0, 1, 4});
  CHECK(instantiate_template(g, Region{0}, RegionTemplate::VI) == Region{0, 4});
  // IV ∪ V = I and VI ∪ VII = II
  for (Vertex v = 0; v < 20; ++v) {
    const Region t{v};
    CHECK(region_union(instantiate_template(g, t, RegionTemplate::IV),
                       instantiate_template(g, t, RegionTemplate::V)) ==
          instantiate_template(g, t, RegionTemplate::I));
    CHECK(region_union(instantiate_template(g, t, RegionTemplate::VI),
                       instantiate_template(g, t, RegionTemplate::VII)) ==
          instantiate_template(g, t, RegionTemplate::II));
  }
}

TEST_CASE("pair templates") {
  const Graph g = build_torus(4, 5);
  // vertical pair 7 (1,2) and 12 (2,2)
  CHECK(instantiate_template(g, Region{7, 12}, RegionTemplate::I) == Region{2, 7, 12, 17});
  CHECK(instantiate_template(g, Region{7, 12}, RegionTemplate::II) == Region{6, 7, 8, 11, 12, 13});
  CHECK(instantiate_template(g, Region{7, 12}, RegionTemplate::III) == Region{7, 12});
  // horizontal pair 7, 8
  CHECK(instantiate_template(g, Region{7, 8}, RegionTemplate::I) == Region{2, 3, 7, 8, 12, 13});
  CHECK(instantiate_template(g, Region{7, 8}, RegionTemplate::II) == Region{6, 7, 8, 9});
  CHECK(kind_of([&] { instantiate_template(g, Region{7, 8}, RegionTemplate::IV); }) ==
        ErrorKind::UnsupportedTemplate);
  CHECK_THROWS_AS(instantiate_template(g, Region{7, 9}, RegionTemplate::I), Error);
}

TEST_CASE("templates need a lattice layout") {
  const auto g = test::chain(4);
  CHECK(kind_of([&] { instantiate_template(*g, Region{1}, RegionTemplate::I); }) ==
        ErrorKind::UnsupportedTemplate);
}

TEST_CASE("template names") {
  CHECK(parse_template("VII") == RegionTemplate::VII);
  CHECK(to_string(RegionTemplate::IV) == "IV");
  const auto list = parse_template_list("I+II+III");
  REQUIRE(list.size() == 3);
  CHECK(list[2] == RegionTemplate::III);
  CHECK(parse_template_list("I,II").size() == 2);
  CHECK(kind_of([] { parse_template("VIII"); }) == ErrorKind::UnsupportedTemplate);
}

TEST_CASE("graph specs and files") {
  CHECK(parse_graph_spec("torus:4x5").num_edges() == 40);
  CHECK(parse_graph_spec("lattice:12x12").num_edges() == 264);
  CHECK_THROWS_AS(parse_graph_spec("ring:5"), Error);
  const Graph g = build_torus(3, 4);
  std::stringstream io;
  write_graph(io, g);
  const Graph back = read_graph(io);
  CHECK(back.same_topology(g));
  std::istringstream bad("3 1\n0 7\n");
  CHECK_THROWS_AS(read_graph(bad), Error);
}

TEST_CASE("edge lookup") {
  const Graph g = build_torus(4, 5);
  CHECK(g.edge_index(0, 1).has_value());
  CHECK(g.edge_index(1, 0) == g.edge_index(0, 1));
  CHECK_FALSE(g.edge_index(0, 6).has_value());
}
