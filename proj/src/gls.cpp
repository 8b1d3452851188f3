#include "csmci/gls.hpp"

#include <cmath>
#include <limits>

#include "csmci/error.hpp"

namespace csmci {

double omega(const Eigen::MatrixXd& a) { return a.sum(); }

CovarianceMatrix sample_covariance(std::span<const ComponentTrace> traces) {
  if (traces.empty()) fail(ErrorKind::EmptyInput, "no component traces");
  const std::size_t n = traces[0].size();
  for (const auto& t : traces)
    if (t.size() != n) fail(ErrorKind::TraceMismatch, "component traces have different lengths");
  if (n < 2) fail(ErrorKind::InsufficientSamples, "sample covariance needs N >= 2");
  const auto k = static_cast<Eigen::Index>(traces.size());
  Eigen::MatrixXd residuals(static_cast<Eigen::Index>(n), k);
  for (Eigen::Index c = 0; c < k; ++c) {
    const auto& t = traces[static_cast<std::size_t>(c)];
    for (std::size_t mu = 0; mu < n; ++mu)
      residuals(static_cast<Eigen::Index>(mu), c) = t.values[mu] - t.mean;
  }
  const double nd = static_cast<double>(n);
  Eigen::MatrixXd sigma = (residuals.transpose() * residuals) / ((nd - 1.0) * nd);
  sigma = 0.5 * (sigma + sigma.transpose()).eval();
  return {std::move(sigma), CovarianceKind::Sample};
}

CovarianceMatrix exact_covariance(const ExactDistribution& dist,
                                  std::span<const EstimatorSpec> specs, std::size_t n_points) {
  if (specs.empty()) fail(ErrorKind::EmptyInput, "no estimator specs");
  if (n_points == 0) fail(ErrorKind::InsufficientSamples, "N must be positive");
  const IsingParams& p = dist.params();
  for (const auto& s : specs)
    if (s.target != specs[0].target || !(s.f == specs[0].f))
      fail(ErrorKind::Configuration, "covariance components must share target and function");

  std::vector<SmciEstimator> estimators;
  Region joint;
  for (const auto& s : specs) {
    estimators.emplace_back(p, s);
    joint = region_union(joint, estimators.back().boundary());
  }
  const auto marginal = dist.marginal(joint);
  const double truth = dist.expectation(specs[0].f, specs[0].target);
  const std::size_t q = p.alphabet().size();
  const auto k_count = static_cast<Eigen::Index>(specs.size());

  // Where each component's boundary sits inside the joint boundary.
  std::vector<std::vector<std::size_t>> positions(specs.size());
  for (std::size_t k = 0; k < specs.size(); ++k)
    for (Vertex v : estimators[k].boundary()) positions[k].push_back(*joint.position(v));

  Eigen::MatrixXd sigma = Eigen::MatrixXd::Zero(k_count, k_count);
  Configuration joint_states(joint.size());
  Configuration local;
  Eigen::VectorXd deviation(k_count);
  for (std::size_t w = 0; w < marginal.size(); ++w) {
    if (marginal[w] == 0.0) continue;
    std::size_t rest = w;
    for (auto& s : joint_states) {
      s = static_cast<State>(rest % q);
      rest /= q;
    }
    for (std::size_t k = 0; k < specs.size(); ++k) {
      local.resize(positions[k].size());
      for (std::size_t b = 0; b < local.size(); ++b) local[b] = joint_states[positions[k][b]];
      deviation(static_cast<Eigen::Index>(k)) = estimators[k].conditional_expectation(local) - truth;
    }
    sigma.noalias() += marginal[w] * deviation * deviation.transpose();
  }
  sigma /= static_cast<double>(n_points);
  sigma = 0.5 * (sigma + sigma.transpose()).eval();
  return {std::move(sigma), CovarianceKind::Exact};
}

CovarianceMatrix exact_covariance(const IsingParams& p, std::span<const EstimatorSpec> specs,
                                  std::size_t n_points) {
  return exact_covariance(ExactDistribution(p), specs, n_points);
}

double exact_function_variance(const ExactDistribution& dist, const TargetFunction& f,
                               const Region& t) {
  const auto table = dist.marginal(t);
  const Alphabet& a = dist.params().alphabet();
  Configuration states(t.size());
  double first = 0.0, second = 0.0;
  for (std::size_t s = 0; s < table.size(); ++s) {
    std::size_t rest = s;
    for (auto& st : states) {
      st = static_cast<State>(rest % a.size());
      rest /= a.size();
    }
    const double v = f.evaluate(states, a);
    first += table[s] * v;
    second += table[s] * v * v;
  }
  return second - first * first;
}

namespace {

// Solves Σx = 1 by Cholesky; succeeds only with a finite, positive Ω.
bool try_cholesky(const Eigen::MatrixXd& sigma, Weights& out) {
  Eigen::LLT<Eigen::MatrixXd> llt(sigma);
  if (llt.info() != Eigen::Success) return false;
  const Eigen::VectorXd x = llt.solve(Eigen::VectorXd::Ones(sigma.rows()));
  const double om = x.sum();
  if (!x.allFinite() || !std::isfinite(om) || om <= 0.0) return false;
  out.c = x / om;
  out.omega = om;
  out.conditioning.rcond = llt.rcond();
  return true;
}

}  // namespace

Weights gls_weights(const CovarianceMatrix& sigma) {
  const auto k = sigma.entries.rows();
  if (k == 0) fail(ErrorKind::EmptyInput, "empty covariance matrix");
  if (sigma.entries.cols() != k) fail(ErrorKind::ShapeMismatch, "covariance matrix is not square");
  Weights out;
  if (try_cholesky(sigma.entries, out)) return out;

  const double ridge = kRidgeEpsilon * sigma.entries.trace() / static_cast<double>(k);
  if (ridge > 0.0 && std::isfinite(ridge)) {
    Eigen::MatrixXd conditioned = sigma.entries;
    conditioned.diagonal().array() += ridge;
    if (try_cholesky(conditioned, out)) {
      out.conditioning.ridge_applied = true;
      out.conditioning.ridge = ridge;
      out.conditioning.notes.push_back("ridge applied to non positive-definite covariance");
      return out;
    }
  }

  out.c = Eigen::VectorXd::Constant(k, 1.0 / static_cast<double>(k));
  const double total = omega(sigma.entries);
  out.omega = total > 0.0 ? static_cast<double>(k * k) / total
                          : std::numeric_limits<double>::infinity();
  out.conditioning.fallback_uniform = true;
  out.conditioning.notes.push_back("covariance irrecoverably singular; uniform weights used");
  return out;
}

Eigen::VectorXd lagrange_weights(const CovarianceMatrix& sigma) {
  const auto k = sigma.entries.rows();
  if (k == 0) fail(ErrorKind::EmptyInput, "empty covariance matrix");
  // Stationarity of wᵀΣw - λ(1ᵀw - 1):  2Σw - λ1 = 0,  1ᵀw = 1.
  Eigen::MatrixXd kkt = Eigen::MatrixXd::Zero(k + 1, k + 1);
  kkt.topLeftCorner(k, k) = 2.0 * sigma.entries;
  kkt.topRightCorner(k, 1).setConstant(-1.0);
  kkt.bottomLeftCorner(1, k).setConstant(1.0);
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(k + 1);
  rhs(k) = 1.0;
  Eigen::FullPivLU<Eigen::MatrixXd> lu(kkt);
  if (!lu.isInvertible()) return Eigen::VectorXd::Constant(k, 1.0 / static_cast<double>(k));
  return lu.solve(rhs).head(k);
}

double fisher_information(const CovarianceMatrix& sigma) {
  Weights w;
  if (!try_cholesky(sigma.entries, w))
    fail(ErrorKind::SingularCovariance, "covariance is not positive definite");
  return w.omega;
}

CompositeEstimate compose(std::span<const ComponentTrace> traces, CovarianceMatrix sigma) {
  if (traces.empty()) fail(ErrorKind::EmptyInput, "no component traces");
  if (sigma.size() != traces.size())
    fail(ErrorKind::ShapeMismatch, "covariance size does not match component count");
  CompositeEstimate out;
  out.components.resize(static_cast<Eigen::Index>(traces.size()));
  for (std::size_t k = 0; k < traces.size(); ++k)
    out.components(static_cast<Eigen::Index>(k)) = traces[k].mean;
  Weights w = gls_weights(sigma);
  out.weights = std::move(w.c);
  out.value = out.weights.dot(out.components);
  out.variance = w.conditioning.fallback_uniform
                     ? out.weights.dot(sigma.entries * out.weights)
                     : 1.0 / w.omega;
  out.conditioning = std::move(w.conditioning);
  out.covariance = std::move(sigma);
  return out;
}

CompositeEstimate compose(std::span<const ComponentTrace> traces, SigmaPolicy policy,
                          const ExactDistribution* dist, std::span<const EstimatorSpec> specs) {
  if (policy == SigmaPolicy::Sample) return compose(traces, sample_covariance(traces));
  if (!dist) fail(ErrorKind::Configuration, "exact covariance needs the model distribution");
  if (specs.size() != traces.size())
    fail(ErrorKind::ShapeMismatch, "exact covariance needs one spec per trace");
  if (traces.empty()) fail(ErrorKind::EmptyInput, "no component traces");
  return compose(traces, exact_covariance(*dist, specs, traces[0].size()));
}

CompositeSmci::CompositeSmci(const IsingParams& p, std::vector<EstimatorSpec> specs) {
  if (specs.empty()) fail(ErrorKind::EmptyInput, "no estimator specs");
  for (auto& spec : specs) {
    bool duplicate = false;
    for (const auto& e : estimators_)
      if (e.spec() == spec) duplicate = true;
    if (duplicate) {
      ++duplicates_removed_;
      continue;
    }
    estimators_.emplace_back(p, std::move(spec));
    if (!exact_index_ && estimators_.back().boundary().empty())
      exact_index_ = estimators_.size() - 1;
  }
}

std::vector<EstimatorSpec> CompositeSmci::specs() const {
  std::vector<EstimatorSpec> out;
  for (const auto& e : estimators_) out.push_back(e.spec());
  return out;
}

std::vector<ComponentTrace> CompositeSmci::traces(const SampleSet& s) const {
  std::vector<ComponentTrace> out;
  out.reserve(estimators_.size());
  for (const auto& e : estimators_) out.push_back(e.evaluate(s));
  return out;
}

CompositeEstimate CompositeSmci::estimate(const SampleSet& s, SigmaPolicy policy,
                                          const ExactDistribution* dist) const {
  const auto component_traces = traces(s);
  if (exact_index_) {
    CompositeEstimate out;
    const auto k = static_cast<Eigen::Index>(estimators_.size());
    out.components.resize(k);
    for (Eigen::Index c = 0; c < k; ++c)
      out.components(c) = component_traces[static_cast<std::size_t>(c)].mean;
    out.weights = Eigen::VectorXd::Zero(k);
    out.weights(static_cast<Eigen::Index>(*exact_index_)) = 1.0;
    out.value = out.components(static_cast<Eigen::Index>(*exact_index_));
    out.variance = 0.0;
    if (s.size() >= 2) out.covariance = sample_covariance(component_traces);
    out.conditioning.exact_component = true;
    out.conditioning.notes.push_back("component with empty sample region is exact");
    out.conditioning.duplicates_removed = duplicates_removed_;
    return out;
  }
  CompositeEstimate out = policy == SigmaPolicy::Sample
                              ? compose(component_traces, SigmaPolicy::Sample)
                              : compose(component_traces, SigmaPolicy::Exact, dist, specs());
  out.conditioning.duplicates_removed = duplicates_removed_;
  if (duplicates_removed_ > 0) out.conditioning.notes.push_back("duplicate sum regions removed");
  return out;
}

}  // namespace csmci
