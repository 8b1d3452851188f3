#include "csmci/ising.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <istream>
#include <limits>
#include <ostream>
#include <set>
#include <string>

#include <Eigen/Dense>

#include "csmci/error.hpp"
#include "csmci/rng.hpp"

namespace csmci {

std::uint64_t enumerated_state_count(std::size_t alphabet_size, std::size_t vars) {
  std::uint64_t count = 1;
  for (std::size_t k = 0; k < vars; ++k) {
    count *= alphabet_size;
    if (count > kMaxEnumeratedStates)
      fail(ErrorKind::EnumerationLimit,
           std::to_string(vars) + " variables over an alphabet of size " +
               std::to_string(alphabet_size) + " exceed the enumeration cap of 2^" +
               std::to_string(kEnumerationCap) + " states");
  }
  return count;
}

Alphabet::Alphabet() : values_{-1.0, 1.0}, spin_(true) {}

Alphabet::Alphabet(std::vector<double> values) : values_(std::move(values)) {
  if (values_.empty()) fail(ErrorKind::Configuration, "alphabet must be non-empty");
  if (values_.size() > std::numeric_limits<State>::max())
    fail(ErrorKind::Unsupported, "alphabet too large");
  for (double v : values_)
    if (!std::isfinite(v))
      fail(ErrorKind::Unsupported, "alphabet values must be finite; continuous spaces are not supported");
  std::set<double> unique(values_.begin(), values_.end());
  if (unique.size() != values_.size())
    fail(ErrorKind::Configuration, "alphabet values must be distinct");
  spin_ = values_.size() == 2 && values_[0] == -1.0 && values_[1] == 1.0;
}

IsingParams::IsingParams(GraphPtr graph, std::vector<double> h, std::vector<double> j,
                         Alphabet alphabet)
    : graph_(std::move(graph)), h_(std::move(h)), j_(std::move(j)), alphabet_(std::move(alphabet)) {
  if (!graph_) fail(ErrorKind::Configuration, "model needs a graph");
  if (h_.size() != graph_->num_vertices())
    fail(ErrorKind::Configuration, "expected " + std::to_string(graph_->num_vertices()) +
                                       " fields, got " + std::to_string(h_.size()));
  if (j_.size() != graph_->num_edges())
    fail(ErrorKind::Configuration, "expected " + std::to_string(graph_->num_edges()) +
                                       " couplings, got " + std::to_string(j_.size()));
  for (double v : h_)
    if (!std::isfinite(v)) fail(ErrorKind::Configuration, "fields must be finite");
  for (double v : j_)
    if (!std::isfinite(v)) fail(ErrorKind::Configuration, "couplings must be finite");
}

IsingParams IsingParams::zeros(GraphPtr graph, Alphabet alphabet) {
  const auto n = graph->num_vertices();
  const auto m = graph->num_edges();
  return IsingParams(std::move(graph), std::vector<double>(n), std::vector<double>(m),
                     std::move(alphabet));
}

IsingParams IsingParams::with_values(std::vector<double> h, std::vector<double> j) const {
  return IsingParams(graph_, std::move(h), std::move(j), alphabet_);
}

double IsingParams::local_field(Vertex i, std::span<const State> x) const {
  double b = h_[i];
  for (const Incidence& inc : graph_->neighbors(i))
    b += j_[inc.edge] * alphabet_.value(x[inc.vertex]);
  return b;
}

IsingParams random_uniform_params(GraphPtr graph, double half_width, std::uint64_t seed,
                                  bool zero_field) {
  Philox4x32 rng(seed);
  auto draw = [&] { return half_width * (2.0 * rng.uniform() - 1.0); };
  std::vector<double> h(graph->num_vertices());
  std::vector<double> j(graph->num_edges());
  for (double& v : h) v = draw();
  if (zero_field) std::fill(h.begin(), h.end(), 0.0);
  for (double& v : j) v = draw();
  return IsingParams(std::move(graph), std::move(h), std::move(j));
}

double energy(const IsingParams& p, std::span<const State> x) {
  if (x.size() != p.num_vertices())
    fail(ErrorKind::Configuration, "configuration has " + std::to_string(x.size()) +
                                       " entries, graph has " + std::to_string(p.num_vertices()));
  const Alphabet& a = p.alphabet();
  double e = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (x[i] >= a.size()) fail(ErrorKind::Configuration, "state outside the alphabet");
    e -= p.h(static_cast<Vertex>(i)) * a.value(x[i]);
  }
  const auto edges = p.graph().edges();
  for (std::size_t k = 0; k < edges.size(); ++k)
    e -= p.coupling(k) * a.value(x[edges[k].u]) * a.value(x[edges[k].v]);
  return e;
}

TargetFunction TargetFunction::table(std::vector<double> values) {
  if (values.empty()) fail(ErrorKind::Configuration, "target function table is empty");
  TargetFunction f;
  f.table_ = std::move(values);
  return f;
}

double TargetFunction::evaluate(std::span<const State> target_states,
                                const Alphabet& alphabet) const {
  if (table_.empty()) {
    double prod = 1.0;
    for (State s : target_states) prod *= alphabet.value(s);
    return prod;
  }
  std::size_t index = 0;
  std::size_t stride = 1;
  for (State s : target_states) {
    index += s * stride;
    stride *= alphabet.size();
  }
  if (stride != table_.size())
    fail(ErrorKind::Configuration, "target function table has " + std::to_string(table_.size()) +
                                       " entries, target needs " + std::to_string(stride));
  return table_[index];
}

// ---------------------------------------------------------------------------

ConditionalModel::ConditionalModel(const IsingParams& p, Region sum_region)
    : sum_region_(std::move(sum_region)), alphabet_(p.alphabet()) {
  const Graph& g = p.graph();
  if (sum_region_.empty()) fail(ErrorKind::InvalidRegion, "sum region is empty");
  validate_region(g, sum_region_);
  const std::size_t m = sum_region_.size();
  const std::size_t count = enumerated_state_count(alphabet_.size(), m);
  boundary_ = boundary_region(g, sum_region_);

  struct InternalEdge {
    std::size_t a, b;
    double coupling;
  };
  std::vector<InternalEdge> internal_edges;
  fields_.resize(m);
  for (std::size_t k = 0; k < m; ++k) {
    const Vertex u = sum_region_[k];
    fields_[k] = p.h(u);
    for (const Incidence& inc : g.neighbors(u)) {
      if (auto pos = sum_region_.position(inc.vertex)) {
        if (*pos > k) internal_edges.push_back({k, *pos, p.coupling(inc.edge)});
      } else {
        links_.push_back({k, *boundary_.position(inc.vertex), p.coupling(inc.edge)});
      }
    }
  }

  internal_.resize(count);
  member_values_.resize(count * m);
  for (std::size_t s = 0; s < count; ++s) {
    for (std::size_t k = 0; k < m; ++k) member_values_[s * m + k] = alphabet_.value(digit(s, k));
    double acc = 0.0;
    for (const auto& e : internal_edges)
      acc += e.coupling * member_values_[s * m + e.a] * member_values_[s * m + e.b];
    internal_[s] = acc;
  }
}

State ConditionalModel::digit(std::size_t s, std::size_t k) const noexcept {
  const std::size_t q = alphabet_.size();
  for (std::size_t i = 0; i < k; ++i) s /= q;
  return static_cast<State>(s % q);
}

void ConditionalModel::local_fields(std::span<const State> boundary_states,
                                    std::span<double> out) const {
  if (boundary_states.size() != boundary_.size())
    fail(ErrorKind::Configuration, "boundary configuration has " +
                                       std::to_string(boundary_states.size()) + " entries, ∂U has " +
                                       std::to_string(boundary_.size()));
  std::copy(fields_.begin(), fields_.end(), out.begin());
  for (const BoundaryLink& link : links_)
    out[link.member] += link.coupling * alphabet_.value(boundary_states[link.boundary]);
}

std::vector<double> ConditionalModel::distribution(std::span<const State> boundary_states) const {
  const std::size_t m = sum_region_.size();
  std::array<double, kEnumerationCap> b{};
  local_fields(boundary_states, std::span<double>(b.data(), m));
  std::vector<double> out(internal_.size());
  double top = -std::numeric_limits<double>::infinity();
  for (std::size_t s = 0; s < out.size(); ++s) {
    double w = internal_[s];
    for (std::size_t k = 0; k < m; ++k) w += b[k] * member_values_[s * m + k];
    out[s] = w;
    top = std::max(top, w);
  }
  double total = 0.0;
  for (double& w : out) total += (w = std::exp(w - top));
  for (double& w : out) w /= total;
  return out;
}

double ConditionalModel::expectation(std::span<const double> values,
                                     std::span<const State> boundary_states) const {
  const std::size_t m = sum_region_.size();
  std::array<double, kEnumerationCap> b{};
  local_fields(boundary_states, std::span<double>(b.data(), m));
  thread_local std::vector<double> log_weights;
  log_weights.resize(internal_.size());
  double top = -std::numeric_limits<double>::infinity();
  for (std::size_t s = 0; s < internal_.size(); ++s) {
    double w = internal_[s];
    const double* xs = &member_values_[s * m];
    for (std::size_t k = 0; k < m; ++k) w += b[k] * xs[k];
    log_weights[s] = w;
    top = std::max(top, w);
  }
  double total = 0.0;
  double weighted = 0.0;
  for (std::size_t s = 0; s < internal_.size(); ++s) {
    const double w = std::exp(log_weights[s] - top);
    total += w;
    weighted += w * values[s];
  }
  return weighted / total;
}

void ConditionalModel::gather_boundary(std::span<const State> full, std::span<State> out) const {
  for (std::size_t k = 0; k < boundary_.size(); ++k) out[k] = full[boundary_[k]];
}

std::vector<double> conditional_distribution(const IsingParams& p, const Region& u,
                                             std::span<const State> boundary_states) {
  return ConditionalModel(p, u).distribution(boundary_states);
}

// ---------------------------------------------------------------------------

namespace {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// State index = hi * lo_count + lo, with vertices [0, n_lo) in lo.
struct SplitIndex {
  std::size_t n_lo = 0, n_hi = 0;
  std::size_t lo_count = 1, hi_count = 1;
  Eigen::MatrixXd x_lo, x_hi;  // states x vertex values

  SplitIndex(std::size_t n, const Alphabet& a) {
    const std::size_t q = a.size();
    n_lo = (n + 1) / 2;
    n_hi = n - n_lo;
    for (std::size_t k = 0; k < n_lo; ++k) lo_count *= q;
    for (std::size_t k = 0; k < n_hi; ++k) hi_count *= q;
    x_lo = values(lo_count, n_lo, a);
    x_hi = values(hi_count, n_hi, a);
  }

  static Eigen::MatrixXd values(std::size_t count, std::size_t width, const Alphabet& a) {
    Eigen::MatrixXd x(count, width);
    for (std::size_t s = 0; s < count; ++s) {
      std::size_t rest = s;
      for (std::size_t k = 0; k < width; ++k) {
        x(s, k) = a.value(static_cast<State>(rest % a.size()));
        rest /= a.size();
      }
    }
    return x;
  }
};

}  // namespace

ExactDistribution::ExactDistribution(const IsingParams& p) : params_(p) {
  const Graph& g = p.graph();
  const std::size_t n = p.num_vertices();
  const std::uint64_t count = enumerated_state_count(p.alphabet().size(), n);
  const SplitIndex split(n, p.alphabet());
  const std::size_t n_lo = split.n_lo;

  // -E = a_lo(lo) + a_hi(hi) + x_hi C x_loᵀ
  Eigen::VectorXd h_lo(n_lo), h_hi(split.n_hi);
  for (std::size_t v = 0; v < n; ++v) (v < n_lo ? h_lo(v) : h_hi(v - n_lo)) = p.h(static_cast<Vertex>(v));
  Eigen::MatrixXd j_lo = Eigen::MatrixXd::Zero(n_lo, n_lo);
  Eigen::MatrixXd j_hi = Eigen::MatrixXd::Zero(split.n_hi, split.n_hi);
  Eigen::MatrixXd cross = Eigen::MatrixXd::Zero(split.n_hi, n_lo);
  const auto edges = g.edges();
  for (std::size_t e = 0; e < edges.size(); ++e) {
    const std::size_t u = std::min(edges[e].u, edges[e].v);
    const std::size_t v = std::max(edges[e].u, edges[e].v);
    if (v < n_lo) j_lo(u, v) += p.coupling(e);
    else if (u >= n_lo) j_hi(u - n_lo, v - n_lo) += p.coupling(e);
    else cross(v - n_lo, u) += p.coupling(e);
  }
  const Eigen::VectorXd a_lo =
      split.x_lo * h_lo + (split.x_lo * j_lo).cwiseProduct(split.x_lo).rowwise().sum();
  const Eigen::VectorXd a_hi =
      split.x_hi * h_hi + (split.x_hi * j_hi).cwiseProduct(split.x_hi).rowwise().sum();

  std::vector<double> weights(count);
  Eigen::Map<RowMatrix> w(weights.data(), static_cast<Eigen::Index>(split.hi_count),
                          static_cast<Eigen::Index>(split.lo_count));
  const Eigen::MatrixXd y = split.x_hi * cross;
  const std::span<const double> alphabet = p.alphabet().values();
  const std::size_t q = alphabet.size();

  // Row hi factorises: exp(a_hi) exp(a_lo) prod_k exp(y_k x_k). Each factor
  // is scaled to at most one and the log offsets are tracked per row.
  const double lo_top = a_lo.maxCoeff();
  const Eigen::RowVectorXd lo_factor = (a_lo.array() - lo_top).exp().matrix().transpose();
  Eigen::VectorXd row_offset(static_cast<Eigen::Index>(split.hi_count));
  std::vector<double> digit_factor(q);
  for (std::size_t hi = 0; hi < split.hi_count; ++hi) {
    double* row = weights.data() + hi * split.lo_count;
    double offset = a_hi(static_cast<Eigen::Index>(hi)) + lo_top;
    row[0] = 1.0;
    std::size_t filled = 1;
    for (std::size_t k = 0; k < n_lo; ++k) {
      const double yk = y(static_cast<Eigen::Index>(hi), static_cast<Eigen::Index>(k));
      double top = -std::numeric_limits<double>::infinity();
      for (double v : alphabet) top = std::max(top, yk * v);
      for (std::size_t d = 0; d < q; ++d) digit_factor[d] = std::exp(yk * alphabet[d] - top);
      offset += top;
      for (std::size_t d = q - 1; d > 0; --d)
        for (std::size_t s = 0; s < filled; ++s) row[d * filled + s] = row[s] * digit_factor[d];
      for (std::size_t s = 0; s < filled; ++s) row[s] *= digit_factor[0];
      filled *= q;
    }
    w.row(static_cast<Eigen::Index>(hi)).array() *= lo_factor.array();
    row_offset(static_cast<Eigen::Index>(hi)) = offset;
  }
  double top = row_offset.maxCoeff();
  w.array().colwise() *= (row_offset.array() - top).exp();
  double total = w.sum();

  if (!(total > 1e-200) || !std::isfinite(total)) {
    w.noalias() = y * split.x_lo.transpose();
    w.colwise() += a_hi;
    w.rowwise() += a_lo.transpose();
    top = w.maxCoeff();
    w = (w.array() - top).exp().matrix();
    total = w.sum();
  }
  log_z_ = top + std::log(total);
  w /= total;
  probs_ = std::move(weights);
}

std::vector<double> ExactDistribution::marginal(const Region& w) const {
  const Graph& g = params_.graph();
  validate_region(g, w);
  const std::size_t n = g.num_vertices();
  const std::size_t q = params_.alphabet().size();
  std::vector<std::uint64_t> stride(n, 0);
  std::uint64_t out_size = 1;
  for (Vertex v : w) {
    stride[v] = out_size;
    out_size *= q;
  }
  std::vector<double> out(out_size, 0.0);
  Configuration x(n, 0);
  std::uint64_t widx = 0;
  for (double prob : probs_) {
    out[widx] += prob;
    for (std::size_t k = 0; k < n; ++k) {
      if (static_cast<std::size_t>(x[k]) + 1 < q) {
        ++x[k];
        widx += stride[k];
        break;
      }
      widx -= stride[k] * x[k];
      x[k] = 0;
    }
  }
  return out;
}

double ExactDistribution::expectation(const TargetFunction& f, const Region& t) const {
  const auto table = marginal(t);
  const Alphabet& a = params_.alphabet();
  Configuration states(t.size(), 0);
  double acc = 0.0;
  for (std::size_t s = 0; s < table.size(); ++s) {
    std::size_t rest = s;
    for (std::size_t k = 0; k < t.size(); ++k) {
      states[k] = static_cast<State>(rest % a.size());
      rest /= a.size();
    }
    acc += table[s] * f.evaluate(states, a);
  }
  return acc;
}

ExactDistribution::Moments ExactDistribution::moments() const {
  const Graph& g = params_.graph();
  const std::size_t n = g.num_vertices();
  const SplitIndex split(n, params_.alphabet());
  const std::size_t n_lo = split.n_lo;
  const Eigen::Map<const RowMatrix> p(probs_.data(), static_cast<Eigen::Index>(split.hi_count),
                                      static_cast<Eigen::Index>(split.lo_count));
  const Eigen::VectorXd lo_marg = p.colwise().sum().transpose();
  const Eigen::VectorXd hi_marg = p.rowwise().sum();

  const Eigen::MatrixXd lo_second = split.x_lo.transpose() * lo_marg.asDiagonal() * split.x_lo;
  const Eigen::MatrixXd hi_second = split.x_hi.transpose() * hi_marg.asDiagonal() * split.x_hi;
  const Eigen::MatrixXd cross = split.x_hi.transpose() * (p * split.x_lo);
  const Eigen::VectorXd lo_first = split.x_lo.transpose() * lo_marg;
  const Eigen::VectorXd hi_first = split.x_hi.transpose() * hi_marg;

  Moments out;
  out.vertex.resize(n);
  for (std::size_t v = 0; v < n; ++v) out.vertex[v] = v < n_lo ? lo_first(v) : hi_first(v - n_lo);
  const auto edges = g.edges();
  out.edge.resize(edges.size());
  for (std::size_t e = 0; e < edges.size(); ++e) {
    const std::size_t u = std::min(edges[e].u, edges[e].v);
    const std::size_t v = std::max(edges[e].u, edges[e].v);
    if (v < n_lo) out.edge[e] = lo_second(u, v);
    else if (u >= n_lo) out.edge[e] = hi_second(u - n_lo, v - n_lo);
    else out.edge[e] = cross(v - n_lo, u);
  }
  return out;
}

double exact_log_partition(const IsingParams& p) { return ExactDistribution(p).log_partition(); }

double exact_partition(const IsingParams& p) { return std::exp(exact_log_partition(p)); }

double exact_expectation(const IsingParams& p, const TargetFunction& f, const Region& t) {
  return ExactDistribution(p).expectation(f, t);
}

// ---------------------------------------------------------------------------

IsingParams read_model(std::istream& in) {
  std::size_t n = 0, m = 0, q = 0;
  if (!(in >> n >> m >> q)) fail(ErrorKind::Parse, "model file: missing 'n m |X|' header");
  std::vector<double> alphabet(q);
  for (double& v : alphabet)
    if (!(in >> v)) fail(ErrorKind::Parse, "model file: short alphabet line");
  std::vector<double> h(n, 0.0);
  std::vector<bool> seen(n, false);
  for (std::size_t k = 0; k < n; ++k) {
    std::size_t i = 0;
    double value = 0.0;
    if (!(in >> i >> value)) fail(ErrorKind::Parse, "model file: expected field line " + std::to_string(k));
    if (i >= n || seen[i]) fail(ErrorKind::Parse, "model file: bad or repeated field index " + std::to_string(i));
    seen[i] = true;
    h[i] = value;
  }
  std::vector<Edge> edges(m);
  std::vector<double> j(m);
  for (std::size_t k = 0; k < m; ++k)
    if (!(in >> edges[k].u >> edges[k].v >> j[k]))
      fail(ErrorKind::Parse, "model file: expected coupling line " + std::to_string(k));
  auto graph = std::make_shared<const Graph>(n, edges);
  // Graph stores edges in file order, so couplings line up one-to-one.
  return IsingParams(std::move(graph), std::move(h), std::move(j), Alphabet(std::move(alphabet)));
}

void write_model(std::ostream& out, const IsingParams& p) {
  const auto precision = out.precision(std::numeric_limits<double>::max_digits10);
  const Graph& g = p.graph();
  out << g.num_vertices() << ' ' << g.num_edges() << ' ' << p.alphabet().size() << '\n';
  for (std::size_t k = 0; k < p.alphabet().size(); ++k)
    out << (k ? " " : "") << p.alphabet().value(static_cast<State>(k));
  out << '\n';
  for (std::size_t i = 0; i < g.num_vertices(); ++i) out << i << ' ' << p.h(static_cast<Vertex>(i)) << '\n';
  for (std::size_t e = 0; e < g.num_edges(); ++e)
    out << g.edges()[e].u << ' ' << g.edges()[e].v << ' ' << p.coupling(e) << '\n';
  out.precision(precision);
}

IsingParams parse_random_model(GraphPtr graph, std::string_view spec) {
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  while (start <= spec.size()) {
    const auto stop = std::min(spec.find(':', start), spec.size());
    parts.push_back(spec.substr(start, stop - start));
    start = stop + 1;
  }
  if (parts.size() < 3 || parts.size() > 4 || parts[0] != "uniform")
    fail(ErrorKind::Parse, "random model must look like uniform:<1/T>:<seed>[:zero-field], got '" +
                               std::string(spec) + "'");
  double width = 0.0;
  std::uint64_t seed = 0;
  auto [p1, e1] = std::from_chars(parts[1].data(), parts[1].data() + parts[1].size(), width);
  auto [p2, e2] = std::from_chars(parts[2].data(), parts[2].data() + parts[2].size(), seed);
  if (e1 != std::errc() || e2 != std::errc() || width < 0.0)
    fail(ErrorKind::Parse, "bad random model spec '" + std::string(spec) + "'");
  bool zero_field = false;
  if (parts.size() == 4) {
    if (parts[3] != "zero-field") fail(ErrorKind::Parse, "unknown random model option '" + std::string(parts[3]) + "'");
    zero_field = true;
  }
  return random_uniform_params(std::move(graph), width, seed, zero_field);
}

}  // namespace csmci
