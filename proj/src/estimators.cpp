#include "csmci/estimators.hpp"

#include <cmath>
#include <limits>
#include <numeric>
#include <unordered_map>

#include "csmci/error.hpp"

namespace csmci {

void validate_spec(const Graph& g, const EstimatorSpec& spec) {
  if (spec.target.empty()) fail(ErrorKind::InvalidRegion, "target region is empty");
  validate_region(g, spec.target);
  validate_region(g, spec.sum_region);
  if (!spec.target.is_subset_of(spec.sum_region))
    fail(ErrorKind::InvalidRegion, "target " + to_string(spec.target) +
                                       " is not contained in sum region " + to_string(spec.sum_region));
}

EstimatorSpec template_spec(const Graph& g, const Region& target, RegionTemplate t,
                            TargetFunction f) {
  return EstimatorSpec{target, std::move(f), instantiate_template(g, target, t)};
}

ComponentTrace ComponentTrace::from_values(std::vector<double> values) {
  ComponentTrace trace;
  trace.mean = values.empty() ? 0.0
                              : std::accumulate(values.begin(), values.end(), 0.0) /
                                    static_cast<double>(values.size());
  trace.values = std::move(values);
  return trace;
}

double ComponentTrace::variance_of_mean() const {
  const auto n = values.size();
  if (n < 2) return 0.0;
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  return ss / static_cast<double>(n - 1) / static_cast<double>(n);
}

SmciEstimator::SmciEstimator(const IsingParams& p, EstimatorSpec spec)
    : spec_((validate_spec(p.graph(), spec), std::move(spec))), model_(p, spec_.sum_region) {
  const Alphabet& a = p.alphabet();
  const std::size_t m = spec_.sum_region.size();
  std::vector<std::size_t> target_pos;
  for (Vertex v : spec_.target) target_pos.push_back(*spec_.sum_region.position(v));
  f_values_.resize(model_.state_count());
  Configuration target_states(spec_.target.size());
  for (std::size_t s = 0; s < f_values_.size(); ++s) {
    for (std::size_t k = 0; k < target_pos.size(); ++k) target_states[k] = model_.digit(s, target_pos[k]);
    f_values_[s] = spec_.f.evaluate(target_states, a);
  }
  closed_form_ = a.is_spin() && m == 1 && spec_.f.is_monomial();
}

double SmciEstimator::conditional_expectation(std::span<const State> boundary_states) const {
  if (closed_form_) {
    double b = 0.0;
    model_.local_fields(boundary_states, std::span<double>(&b, 1));
    return std::tanh(b);
  }
  return model_.expectation(f_values_, boundary_states);
}

double SmciEstimator::conditional_expectation_enumerated(
    std::span<const State> boundary_states) const {
  return model_.expectation(f_values_, boundary_states);
}

double SmciEstimator::at(std::span<const State> configuration) const {
  Configuration boundary(model_.boundary().size());
  model_.gather_boundary(configuration, boundary);
  return conditional_expectation(boundary);
}

ComponentTrace SmciEstimator::evaluate(const SampleSet& s) const {
  if (s.size() == 0) fail(ErrorKind::EmptyInput, "sample set is empty");
  const Region& boundary = model_.boundary();
  if (s.num_vertices() <= model_.sum_region().members().back() ||
      (!boundary.empty() && s.num_vertices() <= boundary.members().back()))
    fail(ErrorKind::Configuration, "sample set does not cover the sum region");
  const std::size_t q = s.alphabet().size();
  const std::size_t width = boundary.size();

  // Pattern count q^|∂U|, saturating once it no longer fits a key.
  std::uint64_t patterns = 1;
  bool keyable = true;
  for (std::size_t k = 0; k < width && keyable; ++k) {
    if (patterns > std::numeric_limits<std::uint64_t>::max() / q) keyable = false;
    else patterns *= q;
  }
  const std::size_t n_points = s.size();
  const bool dense = keyable && patterns <= std::max<std::uint64_t>(1024, 4 * n_points);

  std::vector<double> values(n_points);
  Configuration states(width);
  std::vector<double> dense_cache;
  std::unordered_map<std::uint64_t, double> sparse_cache;
  if (dense) dense_cache.assign(patterns, std::numeric_limits<double>::quiet_NaN());
  else if (keyable) sparse_cache.reserve(n_points);

  for (std::size_t mu = 0; mu < n_points; ++mu) {
    const auto x = s.point(mu);
    std::uint64_t key = 0;
    std::uint64_t stride = 1;
    for (std::size_t k = 0; k < width; ++k) {
      states[k] = x[boundary[k]];
      if (keyable) {
        key += states[k] * stride;
        stride *= q;
      }
    }
    if (dense) {
      double& slot = dense_cache[key];
      if (std::isnan(slot)) slot = conditional_expectation(states);
      values[mu] = slot;
    } else if (keyable) {
      auto [it, inserted] = sparse_cache.try_emplace(key, 0.0);
      if (inserted) it->second = conditional_expectation(states);
      values[mu] = it->second;
    } else {
      values[mu] = conditional_expectation(states);
    }
  }
  return ComponentTrace::from_values(std::move(values));
}

ComponentTrace mci_trace(const TargetFunction& f, const Region& t, const SampleSet& s) {
  if (s.size() == 0) fail(ErrorKind::EmptyInput, "sample set is empty");
  if (t.empty() || t.members().back() >= s.num_vertices())
    fail(ErrorKind::InvalidRegion, "target " + to_string(t) + " is not within the sampled graph");
  std::vector<double> values(s.size());
  Configuration states(t.size());
  for (std::size_t mu = 0; mu < s.size(); ++mu) {
    const auto x = s.point(mu);
    for (std::size_t k = 0; k < t.size(); ++k) states[k] = x[t[k]];
    values[mu] = f.evaluate(states, s.alphabet());
  }
  return ComponentTrace::from_values(std::move(values));
}

double mci_estimate(const TargetFunction& f, const Region& t, const SampleSet& s) {
  return mci_trace(f, t, s).mean;
}

double conditional_expectation(const IsingParams& p, const EstimatorSpec& spec,
                               std::span<const State> boundary_states) {
  return SmciEstimator(p, spec).conditional_expectation(boundary_states);
}

ComponentTrace smci_estimate(const IsingParams& p, const EstimatorSpec& spec, const SampleSet& s) {
  if (s.num_vertices() != p.num_vertices())
    fail(ErrorKind::GraphMismatch, "sample set and model have different vertex counts");
  return SmciEstimator(p, spec).evaluate(s);
}

}  // namespace csmci
