#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "csmci/ising.hpp"

namespace csmci {

enum class ExperimentKind { Expectation, Covariance, Learning };

ExperimentKind parse_experiment_kind(std::string_view text);
std::string_view to_string(ExperimentKind kind) noexcept;

struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::Expectation;
  std::string graph = "torus:4x5";
  std::vector<double> inv_temperatures{0.3};
  /// N: sample points, or persistent chains when learning.
  std::vector<std::size_t> sample_sizes{100};
  /// r: burn-in and interval sweeps for the sample sets.
  std::vector<std::size_t> intervals{50};
  /// Number of composed sum regions, taken in ladder order I, II, ..., VII.
  std::vector<std::size_t> k_ladder{3};
  std::vector<std::size_t> kappas{1};
  std::vector<std::string> methods{"smci-I", "smci-II", "smci-III", "qcsmci-I+II", "qcsmci-all"};
  std::size_t trials = 100;
  std::uint64_t seed = 0;
  std::string output;
  bool zero_field = false;
  std::size_t epochs = 100;
  std::size_t data_size = 1000;
  std::size_t data_interval = 50;
  double eta = 0.02;
  /// Emit one row per epoch instead of the final epoch only.
  bool curve = false;
  std::size_t threads = 1;

  void validate() const;
};

/// key = value lines; '#' starts a comment; lists are comma separated.
ExperimentConfig parse_config(std::istream& in);
void write_config(std::ostream& out, const ExperimentConfig& cfg);

std::vector<std::string> preset_names();
ExperimentConfig preset(std::string_view name, bool full_scale = false);

struct ReportRow {
  std::string setting;
  std::string method;
  double mean_mae = 0.0;
  double stderr_mae = 0.0;
  std::size_t trials = 0;
};

struct ExperimentReport {
  ExperimentConfig config;
  std::vector<ReportRow> rows;
  double wall_seconds = 0.0;
  std::string version;

  /// setting,method,mean_mae,stderr,trials
  void write_csv(std::ostream& out) const;
  /// Config echo, wall time and library version as JSON.
  void write_metadata(std::ostream& out) const;
  const ReportRow* find(std::string_view setting, std::string_view method) const;
};

std::string library_version();

ExperimentReport run_experiment(const ExperimentConfig& cfg);

/// n⁻¹ Σ_i |E[x_i] - estimate_i|. Zero-field spin models use E[x_i] = 0.
double expectation_mae(const IsingParams& p, std::span<const double> estimates);

/// n⁻¹ Σ_i K⁻² ‖Σ⁽ⁱ⁾ - Σ_app⁽ⁱ⁾‖₁
double covariance_mae(std::span<const Eigen::MatrixXd> exact, std::span<const Eigen::MatrixXd> approx);

/// Least-squares slope of ln(mae) against ln(N).
double fit_loglog_slope(std::span<const std::pair<double, double>> points);

}  // namespace csmci
