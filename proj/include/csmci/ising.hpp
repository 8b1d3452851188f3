#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string_view>
#include <vector>

#include "csmci/graph.hpp"

namespace csmci {

/// Index of a value within the alphabet X.
using State = std::uint8_t;
/// One alphabet index per vertex (or per region member, in sorted order).
using Configuration = std::vector<State>;

/// Largest number of jointly enumerated binary variables; for general
/// alphabets the state count is capped at 2^20.
inline constexpr std::size_t kEnumerationCap = 20;
inline constexpr std::uint64_t kMaxEnumeratedStates = std::uint64_t{1} << kEnumerationCap;

/// |X|^vars, or an enumeration-limit error when it exceeds the cap.
std::uint64_t enumerated_state_count(std::size_t alphabet_size, std::size_t vars);

/// Finite ordered sample space X of a single spin.
class Alphabet {
 public:
  /// {-1, +1}
  Alphabet();
  explicit Alphabet(std::vector<double> values);

  std::size_t size() const noexcept { return values_.size(); }
  double value(State s) const noexcept { return values_[s]; }
  std::span<const double> values() const noexcept { return values_; }
  bool is_spin() const noexcept { return spin_; }

  friend bool operator==(const Alphabet& a, const Alphabet& b) { return a.values_ == b.values_; }

 private:
  std::vector<double> values_;
  bool spin_ = true;
};

/// Fields h (per vertex) and couplings J (per edge, in graph edge order).
class IsingParams {
 public:
  IsingParams(GraphPtr graph, std::vector<double> h, std::vector<double> j,
              Alphabet alphabet = Alphabet());

  /// All-zero parameters.
  static IsingParams zeros(GraphPtr graph, Alphabet alphabet = Alphabet());

  const Graph& graph() const noexcept { return *graph_; }
  const GraphPtr& graph_ptr() const noexcept { return graph_; }
  const Alphabet& alphabet() const noexcept { return alphabet_; }
  std::span<const double> h() const noexcept { return h_; }
  std::span<const double> j() const noexcept { return j_; }
  double h(Vertex i) const { return h_[i]; }
  double coupling(std::size_t edge) const { return j_[edge]; }

  std::size_t num_vertices() const noexcept { return h_.size(); }
  std::size_t num_edges() const noexcept { return j_.size(); }

  /// Same graph and alphabet, new parameter values.
  IsingParams with_values(std::vector<double> h, std::vector<double> j) const;

  /// h_i + sum_{j in ∂i} J_ij x_j for a full configuration x.
  double local_field(Vertex i, std::span<const State> x) const;

 private:
  GraphPtr graph_;
  std::vector<double> h_;
  std::vector<double> j_;
  Alphabet alphabet_;
};

/// h and J drawn independently from U[-half_width, +half_width]. With
/// zero_field the fields are fixed at 0 and only J is drawn.
IsingParams random_uniform_params(GraphPtr graph, double half_width, std::uint64_t seed,
                                  bool zero_field = false);

/// -sum_i h_i x_i - sum_(i,j) J_ij x_i x_j
double energy(const IsingParams& p, std::span<const State> x);

/// f(x_T): either the monomial prod_{i in T} x_i or a value table over X^|T|
/// indexed in mixed radix with the first (smallest) member least significant.
class TargetFunction {
 public:
  static TargetFunction monomial() { return TargetFunction(); }
  static TargetFunction table(std::vector<double> values);

  bool is_monomial() const noexcept { return table_.empty(); }
  double evaluate(std::span<const State> target_states, const Alphabet& alphabet) const;

  friend bool operator==(const TargetFunction&, const TargetFunction&) = default;

 private:
  TargetFunction() = default;
  std::vector<double> table_;
};

/// P(x_U | x_∂U) for a fixed sum region. The boundary-independent part of
/// the exponent (couplings inside U) is tabulated once; only the local
/// fields depend on the boundary configuration.
class ConditionalModel {
 public:
  ConditionalModel(const IsingParams& p, Region sum_region);

  const Region& sum_region() const noexcept { return sum_region_; }
  const Region& boundary() const noexcept { return boundary_; }
  std::size_t state_count() const noexcept { return internal_.size(); }
  const Alphabet& alphabet() const noexcept { return alphabet_; }

  /// Alphabet index of member k in U-state s.
  State digit(std::size_t s, std::size_t k) const noexcept;

  /// b_u = h_u + sum over boundary neighbours of J_uj x_j, for u in U.
  void local_fields(std::span<const State> boundary_states, std::span<double> out) const;

  /// Normalized table over X^|U| (log-sum-exp).
  std::vector<double> distribution(std::span<const State> boundary_states) const;

  /// sum_{x_U} values[x_U] P(x_U | boundary), values tabulated over X^|U|.
  double expectation(std::span<const double> values, std::span<const State> boundary_states) const;

  /// Gathers x_∂U from a full configuration.
  void gather_boundary(std::span<const State> full, std::span<State> out) const;

 private:
  struct BoundaryLink {
    std::size_t member;    // position in U
    std::size_t boundary;  // position in ∂U
    double coupling;
  };

  Region sum_region_;
  Region boundary_;
  Alphabet alphabet_;
  std::vector<double> fields_;             // h_u
  std::vector<BoundaryLink> links_;
  std::vector<double> internal_;           // per U-state: sum of J x x inside U
  std::vector<double> member_values_;      // per U-state, per member: x_u
};

std::vector<double> conditional_distribution(const IsingParams& p, const Region& u,
                                             std::span<const State> boundary_states);

/// Exhaustive joint distribution of a small model (|X|^n within the cap).
/// State index is mixed radix with vertex 0 least significant.
class ExactDistribution {
 public:
  explicit ExactDistribution(const IsingParams& p);

  double log_partition() const noexcept { return log_z_; }
  std::span<const double> probabilities() const noexcept { return probs_; }
  const IsingParams& params() const noexcept { return params_; }

  /// Marginal table over X^|W| (W's first member least significant).
  std::vector<double> marginal(const Region& w) const;

  double expectation(const TargetFunction& f, const Region& t) const;

  /// E[x_i] for every vertex and E[x_i x_j] for every edge.
  struct Moments {
    std::vector<double> vertex;
    std::vector<double> edge;
  };
  Moments moments() const;

 private:
  IsingParams params_;
  std::vector<double> probs_;
  double log_z_ = 0.0;
};

double exact_log_partition(const IsingParams& p);
double exact_partition(const IsingParams& p);
double exact_expectation(const IsingParams& p, const TargetFunction& f, const Region& t);

/// Text model file: "n m |X|", alphabet line, n lines "i h_i", m lines "i j J_ij".
IsingParams read_model(std::istream& in);
void write_model(std::ostream& out, const IsingParams& p);

/// "uniform:<half_width>:<seed>" (optionally ":zero-field").
IsingParams parse_random_model(GraphPtr graph, std::string_view spec);

}  // namespace csmci
