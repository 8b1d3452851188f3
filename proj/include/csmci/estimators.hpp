#pragma once

#include <span>
#include <vector>

#include "csmci/gibbs.hpp"
#include "csmci/graph.hpp"
#include "csmci/ising.hpp"

namespace csmci {

/// What to estimate (f over target T) and where to sum exactly (U ⊇ T).
struct EstimatorSpec {
  Region target;
  TargetFunction f = TargetFunction::monomial();
  Region sum_region;

  friend bool operator==(const EstimatorSpec&, const EstimatorSpec&) = default;
};

void validate_spec(const Graph& g, const EstimatorSpec& spec);

/// Spec whose sum region is the template t instantiated around target.
EstimatorSpec template_spec(const Graph& g, const Region& target, RegionTemplate t,
                            TargetFunction f = TargetFunction::monomial());

/// Per-sample values of an estimator and their mean.
struct ComponentTrace {
  std::vector<double> values;
  double mean = 0.0;

  static ComponentTrace from_values(std::vector<double> values);
  std::size_t size() const noexcept { return values.size(); }
  /// Unbiased sample variance of the values divided by N.
  double variance_of_mean() const;
};

/// Conditional expectation f_{T,U}(x_∂U) for one spec under fixed parameters.
class SmciEstimator {
 public:
  SmciEstimator(const IsingParams& p, EstimatorSpec spec);

  const EstimatorSpec& spec() const noexcept { return spec_; }
  const Region& boundary() const noexcept { return model_.boundary(); }
  bool uses_closed_form() const noexcept { return closed_form_; }

  /// sum_{x_U} f(x_T) P(x_U | boundary). Uses tanh(b_i) for U = T = {i}
  /// with a ±1 alphabet and f = x_i.
  double conditional_expectation(std::span<const State> boundary_states) const;
  /// Always enumerates X^|U|, bypassing the closed form.
  double conditional_expectation_enumerated(std::span<const State> boundary_states) const;

  /// f_{T,U} evaluated at the boundary of a full configuration.
  double at(std::span<const State> configuration) const;

  /// Values for every sample point. Repeated boundary patterns are computed
  /// once; results are identical to evaluating each point directly.
  ComponentTrace evaluate(const SampleSet& s) const;

 private:
  EstimatorSpec spec_;
  ConditionalModel model_;
  std::vector<double> f_values_;  // f(x_T) for each state of U
  bool closed_form_ = false;
};

double mci_estimate(const TargetFunction& f, const Region& t, const SampleSet& s);
/// Per-sample f(s_T) values, the MCI analogue of a component trace.
ComponentTrace mci_trace(const TargetFunction& f, const Region& t, const SampleSet& s);

double conditional_expectation(const IsingParams& p, const EstimatorSpec& spec,
                               std::span<const State> boundary_states);
ComponentTrace smci_estimate(const IsingParams& p, const EstimatorSpec& spec, const SampleSet& s);

}  // namespace csmci
