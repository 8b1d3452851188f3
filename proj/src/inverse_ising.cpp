#include "csmci/inverse_ising.hpp"

#include <algorithm>
#include <cmath>

#include "csmci/error.hpp"
#include "csmci/gls.hpp"
#include "csmci/parallel.hpp"

namespace csmci {

Dataset::Dataset(GraphPtr graph, SampleSet points)
    : graph_(std::move(graph)), points_(std::move(points)) {
  if (points_.num_vertices() != graph_->num_vertices())
    fail(ErrorKind::GraphMismatch, "dataset width does not match the graph");
  const Alphabet& a = points_.alphabet();
  const auto edges = graph_->edges();
  vertex_means_.assign(graph_->num_vertices(), 0.0);
  pair_means_.assign(edges.size(), 0.0);
  for (std::size_t mu = 0; mu < points_.size(); ++mu) {
    const auto x = points_.point(mu);
    for (std::size_t i = 0; i < x.size(); ++i) vertex_means_[i] += a.value(x[i]);
    for (std::size_t e = 0; e < edges.size(); ++e)
      pair_means_[e] += a.value(x[edges[e].u]) * a.value(x[edges[e].v]);
  }
  const double m = static_cast<double>(points_.size());
  for (double& v : vertex_means_) v /= m;
  for (double& v : pair_means_) v /= m;
}

namespace {

// ψ(θ) = Σ h_i <x_i>_D + Σ J_e <x_u x_v>_D - ln Z, since the energy is linear in θ.
double likelihood_from(const IsingParams& p, const Dataset& d, double log_z) {
  double acc = 0.0;
  for (std::size_t i = 0; i < p.num_vertices(); ++i) acc += p.h()[i] * d.vertex_means()[i];
  for (std::size_t e = 0; e < p.num_edges(); ++e) acc += p.j()[e] * d.pair_means()[e];
  return acc - log_z;
}

}  // namespace

double log_likelihood(const IsingParams& p, const Dataset& d) {
  if (!p.graph().same_topology(d.graph()))
    fail(ErrorKind::GraphMismatch, "model and dataset graphs differ");
  return likelihood_from(p, d, exact_log_partition(p));
}

double Gradient::max_norm() const noexcept {
  double m = 0.0;
  for (double v : h) m = std::max(m, std::abs(v));
  for (double v : j) m = std::max(m, std::abs(v));
  return m;
}

Gradient gradient(const IsingParams& p, const Dataset& d, const Moments& estimates) {
  if (estimates.vertex.size() != p.num_vertices() || estimates.edge.size() != p.num_edges())
    fail(ErrorKind::IncompleteMoments, "moment estimates must cover every vertex and edge");
  Gradient g;
  g.h.resize(p.num_vertices());
  g.j.resize(p.num_edges());
  for (std::size_t i = 0; i < g.h.size(); ++i) g.h[i] = d.vertex_means()[i] - estimates.vertex[i];
  for (std::size_t e = 0; e < g.j.size(); ++e) g.j[e] = d.pair_means()[e] - estimates.edge[e];
  return g;
}

MomentPolicy parse_policy(std::string_view text) {
  if (text == "mci") return MomentPolicy::Mci;
  if (text == "smci-I") return MomentPolicy::SmciI;
  if (text == "smci-II") return MomentPolicy::SmciII;
  if (text == "smci-III") return MomentPolicy::SmciIII;
  if (text == "qcsmci-I+II") return MomentPolicy::QcsmciI_II;
  if (text == "qcsmci-all") return MomentPolicy::QcsmciAll;
  if (text == "exact") return MomentPolicy::Exact;
  fail(ErrorKind::Parse, "unknown moment policy '" + std::string(text) + "'");
}

std::string_view to_string(MomentPolicy policy) noexcept {
  switch (policy) {
    case MomentPolicy::Mci: return "mci";
    case MomentPolicy::SmciI: return "smci-I";
    case MomentPolicy::SmciII: return "smci-II";
    case MomentPolicy::SmciIII: return "smci-III";
    case MomentPolicy::QcsmciI_II: return "qcsmci-I+II";
    case MomentPolicy::QcsmciAll: return "qcsmci-all";
    case MomentPolicy::Exact: return "exact";
  }
  return "unknown";
}

std::vector<RegionTemplate> policy_templates(MomentPolicy policy) {
  switch (policy) {
    case MomentPolicy::SmciI: return {RegionTemplate::I};
    case MomentPolicy::SmciII: return {RegionTemplate::II};
    case MomentPolicy::SmciIII: return {RegionTemplate::III};
    case MomentPolicy::QcsmciI_II: return {RegionTemplate::I, RegionTemplate::II};
    case MomentPolicy::QcsmciAll:
      return {RegionTemplate::I, RegionTemplate::II, RegionTemplate::III};
    default: return {};
  }
}

std::vector<EstimatorSpec> policy_specs(const Graph& g, const Region& target, MomentPolicy policy) {
  std::vector<EstimatorSpec> out;
  for (RegionTemplate t : policy_templates(policy)) {
    if (t == RegionTemplate::III) out.push_back({target, TargetFunction::monomial(), target});
    else out.push_back(template_spec(g, target, t));
  }
  return out;
}

double policy_estimate(const IsingParams& p, const std::vector<EstimatorSpec>& specs,
                       const SampleSet& s) {
  if (specs.size() == 1) return SmciEstimator(p, specs[0]).evaluate(s).mean;
  return CompositeSmci(p, specs).estimate(s, SigmaPolicy::Sample).value;
}

MomentEstimator::MomentEstimator(GraphPtr graph, MomentPolicy policy, bool vertex_moments)
    : graph_(std::move(graph)), policy_(policy), vertex_moments_(vertex_moments) {
  if (policy_ == MomentPolicy::Mci || policy_ == MomentPolicy::Exact) return;
  if (vertex_moments_)
    for (std::size_t i = 0; i < graph_->num_vertices(); ++i)
      vertex_specs_.push_back(policy_specs(*graph_, Region{static_cast<Vertex>(i)}, policy_));
  for (const Edge& e : graph_->edges())
    edge_specs_.push_back(policy_specs(*graph_, Region{e.u, e.v}, policy_));
}

Moments MomentEstimator::estimate(const IsingParams& p, const SampleSet& s,
                                  std::size_t threads) const {
  const Graph& g = p.graph();
  Moments out;
  out.vertex.assign(g.num_vertices(), 0.0);
  out.edge.assign(g.num_edges(), 0.0);
  if (policy_ == MomentPolicy::Exact) {
    auto exact = ExactDistribution(p).moments();
    if (!vertex_moments_) std::fill(exact.vertex.begin(), exact.vertex.end(), 0.0);
    return exact;
  }
  if (policy_ == MomentPolicy::Mci) {
    const auto monomial = TargetFunction::monomial();
    if (vertex_moments_)
      for (std::size_t i = 0; i < g.num_vertices(); ++i)
        out.vertex[i] = mci_estimate(monomial, Region{static_cast<Vertex>(i)}, s);
    for (std::size_t e = 0; e < g.num_edges(); ++e)
      out.edge[e] = mci_estimate(monomial, Region{g.edges()[e].u, g.edges()[e].v}, s);
    return out;
  }
  const std::size_t nv = vertex_specs_.size();
  parallel_for(nv + edge_specs_.size(), threads, [&](std::size_t k) {
    if (k < nv) out.vertex[k] = policy_estimate(p, vertex_specs_[k], s);
    else out.edge[k - nv] = policy_estimate(p, edge_specs_[k - nv], s);
  });
  return out;
}

void TrainConfig::validate() const {
  if (!(eta >= 0.0) || !std::isfinite(eta)) fail(ErrorKind::InvalidConfig, "learning rate must be finite and >= 0");
  if (epochs == 0) fail(ErrorKind::InvalidConfig, "epochs must be at least 1");
  if (chains == 0) fail(ErrorKind::InvalidConfig, "chain count must be at least 1");
  if (kappa == 0) fail(ErrorKind::InvalidConfig, "kappa must be at least 1");
}

std::pair<double, double> parameter_mae(const IsingParams& p, const IsingParams& ref) {
  if (!p.graph().same_topology(ref.graph()))
    fail(ErrorKind::GraphMismatch, "parameter sets live on different graphs");
  double h_err = 0.0, j_err = 0.0;
  for (std::size_t i = 0; i < p.num_vertices(); ++i) h_err += std::abs(p.h()[i] - ref.h()[i]);
  for (std::size_t e = 0; e < p.num_edges(); ++e) j_err += std::abs(p.j()[e] - ref.j()[e]);
  const double n = static_cast<double>(p.num_vertices());
  const double m = static_cast<double>(p.num_edges());
  return {n > 0 ? h_err / n : 0.0, m > 0 ? j_err / m : 0.0};
}

Trajectory train(GraphPtr graph, const Dataset& d, const TrainConfig& cfg,
                 const IsingParams* reference) {
  cfg.validate();
  if (!graph->same_topology(d.graph())) fail(ErrorKind::GraphMismatch, "dataset graph differs");
  IsingParams theta = IsingParams::zeros(graph, d.points().alphabet());
  std::vector<double> h(theta.h().begin(), theta.h().end());
  std::vector<double> j(theta.j().begin(), theta.j().end());

  Trajectory out;
  auto record = [&] {
    out.h.push_back(h);
    out.j.push_back(j);
    if (reference) {
      const auto [hm, jm] = parameter_mae(theta, *reference);
      out.h_mae.push_back(hm);
      out.j_mae.push_back(jm);
    }
  };
  record();

  const MomentEstimator estimator(graph, cfg.policy, !cfg.clamp_fields);
  std::optional<ChainBank> bank;
  if (cfg.policy != MomentPolicy::Exact)
    bank.emplace(cfg.chains, graph->num_vertices(), d.points().alphabet(), cfg.seed);

  for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
    Moments moments;
    if (bank) {
      const SampleSet s = persistent_step(theta, *bank, cfg.kappa, cfg.threads);
      moments = estimator.estimate(theta, s, cfg.threads);
    } else {
      moments = estimator.estimate(theta, SampleSet(graph->num_vertices(), d.points().alphabet(),
                                                    Configuration(graph->num_vertices(), 0)));
    }
    const Gradient g = gradient(theta, d, moments);
    for (std::size_t i = 0; i < h.size(); ++i)
      if (!cfg.clamp_fields) h[i] += cfg.eta * g.h[i];
    for (std::size_t e = 0; e < j.size(); ++e) j[e] += cfg.eta * g.j[e];
    for (double v : h)
      if (!(std::abs(v) <= kDivergenceLimit))
        fail(ErrorKind::DivergedTraining, "field diverged at epoch " + std::to_string(epoch));
    for (double v : j)
      if (!(std::abs(v) <= kDivergenceLimit))
        fail(ErrorKind::DivergedTraining, "coupling diverged at epoch " + std::to_string(epoch));
    theta = theta.with_values(h, j);
    record();
  }
  return out;
}

MlResult exact_ml(GraphPtr graph, const Dataset& d, double eta, const MlOptions& options) {
  if (!(eta > 0.0)) fail(ErrorKind::InvalidConfig, "learning rate must be positive");
  if (!graph->same_topology(d.graph())) fail(ErrorKind::GraphMismatch, "dataset graph differs");
  IsingParams theta = IsingParams::zeros(graph, d.points().alphabet());
  auto dist = std::make_unique<ExactDistribution>(theta);
  double psi = likelihood_from(theta, d, dist->log_partition());
  Gradient g = gradient(theta, d, dist->moments());
  if (options.clamp_fields) std::fill(g.h.begin(), g.h.end(), 0.0);

  MlResult result{theta, 0, g.max_norm(), false};
  double step = eta;
  while (result.iterations < options.max_iterations) {
    if (g.max_norm() < options.tolerance) {
      result.converged = true;
      break;
    }
    std::vector<double> h(theta.h().begin(), theta.h().end());
    std::vector<double> j(theta.j().begin(), theta.j().end());
    for (std::size_t i = 0; i < h.size(); ++i) h[i] += step * g.h[i];
    for (std::size_t e = 0; e < j.size(); ++e) j[e] += step * g.j[e];
    IsingParams candidate = theta.with_values(std::move(h), std::move(j));
    auto next = std::make_unique<ExactDistribution>(candidate);
    const double next_psi = likelihood_from(candidate, d, next->log_partition());
    ++result.iterations;
    if (next_psi < psi - 1e-14 * std::max(1.0, std::abs(psi))) {
      step *= 0.5;
      if (step < 1e-12) break;
      continue;
    }
    theta = std::move(candidate);
    dist = std::move(next);
    psi = next_psi;
    g = gradient(theta, d, dist->moments());
    if (options.clamp_fields) std::fill(g.h.begin(), g.h.end(), 0.0);
  }
  result.params = theta;
  result.gradient_norm = g.max_norm();
  return result;
}

}  // namespace csmci
