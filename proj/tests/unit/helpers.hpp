#pragma once

#include <memory>
#include <vector>

#include "csmci/graph.hpp"
#include "csmci/ising.hpp"

namespace test {

inline csmci::GraphPtr torus(std::size_t r, std::size_t c) {
  return std::make_shared<const csmci::Graph>(csmci::build_torus(r, c));
}

inline csmci::GraphPtr lattice(std::size_t r, std::size_t c) {
  return std::make_shared<const csmci::Graph>(csmci::build_lattice_free(r, c));
}

inline csmci::GraphPtr graph(std::size_t n, std::vector<csmci::Edge> edges) {
  return std::make_shared<const csmci::Graph>(n, edges);
}

inline csmci::GraphPtr chain(std::size_t n) {
  std::vector<csmci::Edge> edges;
  for (std::size_t i = 0; i + 1 < n; ++i)
    edges.push_back({static_cast<csmci::Vertex>(i), static_cast<csmci::Vertex>(i + 1)});
  return graph(n, edges);
}

// Spin configuration from ±1 values.
inline csmci::Configuration spins(std::initializer_list<int> values) {
  csmci::Configuration x;
  for (int v : values) x.push_back(v > 0 ? 1 : 0);
  return x;
}

}  // namespace test
