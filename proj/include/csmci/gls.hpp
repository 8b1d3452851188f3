#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "csmci/estimators.hpp"
#include "csmci/ising.hpp"

namespace csmci {

enum class CovarianceKind { Exact, Sample };
enum class SigmaPolicy { Exact, Sample };

/// Covariance of K component estimators that share one sample set.
struct CovarianceMatrix {
  Eigen::MatrixXd entries;
  CovarianceKind kind = CovarianceKind::Sample;

  std::size_t size() const noexcept { return static_cast<std::size_t>(entries.rows()); }
};

/// Relative ridge ε: Σ + ε·(tr Σ / K)·I is tried when Σ itself does not
/// factor as positive definite.
inline constexpr double kRidgeEpsilon = 1e-10;

struct Conditioning {
  bool ridge_applied = false;
  double ridge = 0.0;
  bool fallback_uniform = false;
  /// A component with empty sample region was exact and returned directly.
  bool exact_component = false;
  std::size_t duplicates_removed = 0;
  /// Reciprocal condition estimate of the factored matrix (0 when unfactored).
  double rcond = 0.0;
  std::vector<std::string> notes;
};

struct Weights {
  Eigen::VectorXd c;
  /// Ω(Σ⁻¹) = 1ᵀΣ⁻¹1; for the uniform fallback, K² / 1ᵀΣ1.
  double omega = 0.0;
  Conditioning conditioning;
};

struct CompositeEstimate {
  Eigen::VectorXd components;
  Eigen::VectorXd weights;
  double value = 0.0;
  /// Ω(Σ⁻¹)⁻¹, or cᵀΣc under the uniform fallback.
  double variance = 0.0;
  CovarianceMatrix covariance;
  Conditioning conditioning;
};

/// Sum of all entries, 1ᵀA1.
double omega(const Eigen::MatrixXd& a);

/// N⁻¹ (N-1)⁻¹ Σ_μ r_μ r_μᵀ with r_{μ,k} = values_k[μ] - mean_k.
CovarianceMatrix sample_covariance(std::span<const ComponentTrace> traces);

/// Σ_{k,k'} = N⁻¹ E[(f_{T,U_k} - m)(f_{T,U_k'} - m)] by enumeration. All specs
/// must share the same target and function.
CovarianceMatrix exact_covariance(const ExactDistribution& dist,
                                  std::span<const EstimatorSpec> specs, std::size_t n_points);
CovarianceMatrix exact_covariance(const IsingParams& p, std::span<const EstimatorSpec> specs,
                                  std::size_t n_points);

/// Var[f(x_T)], the per-sample variance of plain Monte Carlo.
double exact_function_variance(const ExactDistribution& dist, const TargetFunction& f,
                               const Region& t);

/// c = Σ⁻¹1 / Ω(Σ⁻¹) via Cholesky, with the ridge-then-uniform fallback.
Weights gls_weights(const CovarianceMatrix& sigma);

/// Minimizer of wᵀΣw subject to 1ᵀw = 1, from the bordered KKT system.
Eigen::VectorXd lagrange_weights(const CovarianceMatrix& sigma);

/// Ω(Σ⁻¹); throws singular-covariance if Σ is not positive definite.
double fisher_information(const CovarianceMatrix& sigma);

CompositeEstimate compose(std::span<const ComponentTrace> traces, CovarianceMatrix sigma);

/// Sample policy uses the traces alone; exact policy needs the model and the
/// specs that produced the traces.
CompositeEstimate compose(std::span<const ComponentTrace> traces, SigmaPolicy policy,
                          const ExactDistribution* dist = nullptr,
                          std::span<const EstimatorSpec> specs = {});

/// K SMCI estimators for one target, deduplicated by sum region, evaluated on a
/// shared sample set and fused.
class CompositeSmci {
 public:
  CompositeSmci(const IsingParams& p, std::vector<EstimatorSpec> specs);

  std::size_t size() const noexcept { return estimators_.size(); }
  std::size_t duplicates_removed() const noexcept { return duplicates_removed_; }
  const SmciEstimator& component(std::size_t k) const { return estimators_[k]; }
  std::vector<EstimatorSpec> specs() const;

  std::vector<ComponentTrace> traces(const SampleSet& s) const;
  CompositeEstimate estimate(const SampleSet& s, SigmaPolicy policy,
                             const ExactDistribution* dist = nullptr) const;

 private:
  std::vector<SmciEstimator> estimators_;
  std::optional<std::size_t> exact_index_;
  std::size_t duplicates_removed_ = 0;
};

}  // namespace csmci
