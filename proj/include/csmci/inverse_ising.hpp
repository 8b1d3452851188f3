#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string_view>
#include <utility>
#include <vector>

#include "csmci/estimators.hpp"
#include "csmci/gibbs.hpp"
#include "csmci/ising.hpp"

namespace csmci {

using Moments = ExactDistribution::Moments;

/// Training data with cached first moments and per-edge pair moments.
class Dataset {
 public:
  Dataset(GraphPtr graph, SampleSet points);

  const Graph& graph() const noexcept { return *graph_; }
  const SampleSet& points() const noexcept { return points_; }
  std::size_t size() const noexcept { return points_.size(); }
  std::span<const double> vertex_means() const noexcept { return vertex_means_; }
  std::span<const double> pair_means() const noexcept { return pair_means_; }

 private:
  GraphPtr graph_;
  SampleSet points_;
  std::vector<double> vertex_means_;
  std::vector<double> pair_means_;
};

/// M⁻¹ Σ_μ ln P(d_μ), with exact ln Z.
double log_likelihood(const IsingParams& p, const Dataset& d);

struct Gradient {
  std::vector<double> h;
  std::vector<double> j;
  double max_norm() const noexcept;
};

/// Data moments minus the supplied model-moment estimates.
Gradient gradient(const IsingParams& p, const Dataset& d, const Moments& estimates);

enum class MomentPolicy { Mci, SmciI, SmciII, SmciIII, QcsmciI_II, QcsmciAll, Exact };

MomentPolicy parse_policy(std::string_view text);
std::string_view to_string(MomentPolicy policy) noexcept;

/// The template ladder a sampling policy composes; empty for mci and exact.
std::vector<RegionTemplate> policy_templates(MomentPolicy policy);

/// One spec per ladder rung for f = monomial. Rung III needs no lattice layout.
std::vector<EstimatorSpec> policy_specs(const Graph& g, const Region& target, MomentPolicy policy);

/// SMCI for a single spec, qCSMCI with sample covariance otherwise.
double policy_estimate(const IsingParams& p, const std::vector<EstimatorSpec>& specs,
                       const SampleSet& s);

/// Estimates E[x_i] for every vertex and E[x_i x_j] for every edge from a
/// sample set, using one template ladder per vertex and per edge built once.
class MomentEstimator {
 public:
  MomentEstimator(GraphPtr graph, MomentPolicy policy, bool vertex_moments = true);

  MomentPolicy policy() const noexcept { return policy_; }
  /// Vertex moments are zero when disabled.
  Moments estimate(const IsingParams& p, const SampleSet& s, std::size_t threads = 1) const;

 private:
  GraphPtr graph_;
  MomentPolicy policy_;
  bool vertex_moments_;
  std::vector<std::vector<EstimatorSpec>> vertex_specs_;
  std::vector<std::vector<EstimatorSpec>> edge_specs_;
};

struct TrainConfig {
  MomentPolicy policy = MomentPolicy::QcsmciAll;
  double eta = 0.02;
  std::size_t epochs = 100;
  std::size_t chains = 1000;
  std::size_t kappa = 1;
  std::uint64_t seed = 0;
  /// Keep h at zero (zero-field models); only J is learned.
  bool clamp_fields = false;
  std::size_t threads = 1;

  void validate() const;
};

/// θ^(0..epochs) and, when a reference was given, MAEs per epoch.
struct Trajectory {
  std::vector<std::vector<double>> h;
  std::vector<std::vector<double>> j;
  std::vector<double> h_mae;
  std::vector<double> j_mae;

  std::size_t size() const noexcept { return h.size(); }
};

inline constexpr double kDivergenceLimit = 1e3;

/// Gradient ascent from θ = 0 with persistent chains; throws
/// diverged-training when any parameter exceeds kDivergenceLimit.
Trajectory train(GraphPtr graph, const Dataset& d, const TrainConfig& cfg,
                 const IsingParams* reference = nullptr);

struct MlResult {
  IsingParams params;
  std::size_t iterations = 0;
  double gradient_norm = 0.0;
  bool converged = false;
};

struct MlOptions {
  double tolerance = 1e-8;
  std::size_t max_iterations = 1'000'000;
  bool clamp_fields = false;
};

/// Exact-moment gradient ascent. The step starts at eta and is halved
/// whenever a step would lower the likelihood.
MlResult exact_ml(GraphPtr graph, const Dataset& d, double eta, const MlOptions& options = {});

/// (mean |h - h_ref| over vertices, mean |J - J_ref| over edges)
std::pair<double, double> parameter_mae(const IsingParams& p, const IsingParams& ref);

}  // namespace csmci
