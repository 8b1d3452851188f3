#include "csmci/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <type_traits>

#include <json.hpp>

#include "csmci/error.hpp"
#include "csmci/gibbs.hpp"
#include "csmci/gls.hpp"
#include "csmci/inverse_ising.hpp"
#include "csmci/parallel.hpp"
#include "csmci/rng.hpp"

#ifndef CSMCI_VERSION
#define CSMCI_VERSION "0.0.0"
#endif

namespace csmci {

ExperimentKind parse_experiment_kind(std::string_view text) {
  if (text == "expectation") return ExperimentKind::Expectation;
  if (text == "covariance") return ExperimentKind::Covariance;
  if (text == "learning") return ExperimentKind::Learning;
  fail(ErrorKind::InvalidConfig, "unknown experiment kind '" + std::string(text) + "'");
}

std::string_view to_string(ExperimentKind kind) noexcept {
  switch (kind) {
    case ExperimentKind::Expectation: return "expectation";
    case ExperimentKind::Covariance: return "covariance";
    case ExperimentKind::Learning: return "learning";
  }
  return "unknown";
}

std::string library_version() { return CSMCI_VERSION; }

namespace {

std::string format_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_list(std::string_view s) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= s.size()) {
    const auto comma = s.find(',', start);
    const auto piece = trim(s.substr(start, comma == std::string_view::npos ? s.npos : comma - start));
    if (!piece.empty()) out.push_back(piece);
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

double to_double(const std::string& key, const std::string& s) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used == s.size()) return v;
  } catch (const std::exception&) {
  }
  fail(ErrorKind::InvalidConfig, key + ": '" + s + "' is not a number");
}

std::uint64_t to_unsigned(const std::string& key, const std::string& s) {
  if (!s.empty() && s.find_first_not_of("0123456789") == std::string::npos) {
    try {
      return std::stoull(s);
    } catch (const std::exception&) {
    }
  }
  fail(ErrorKind::InvalidConfig, key + ": '" + s + "' is not a non-negative integer");
}

bool to_bool(const std::string& key, const std::string& s) {
  if (s == "true" || s == "1" || s == "yes") return true;
  if (s == "false" || s == "0" || s == "no") return false;
  fail(ErrorKind::InvalidConfig, key + ": '" + s + "' is not a boolean");
}

template <typename T, typename Convert>
std::vector<T> to_list(const std::string& key, const std::string& s, Convert convert) {
  std::vector<T> out;
  for (const auto& piece : split_list(s)) out.push_back(static_cast<T>(convert(key, piece)));
  return out;
}

template <typename T>
std::string join(const std::vector<T>& values) {
  std::string out;
  for (std::size_t k = 0; k < values.size(); ++k) {
    if (k) out += ',';
    if constexpr (std::is_same_v<T, double>) out += format_number(values[k]);
    else if constexpr (std::is_same_v<T, std::string>) out += values[k];
    else out += std::to_string(values[k]);
  }
  return out;
}

}  // namespace

void ExperimentConfig::validate() const {
  if (inv_temperatures.empty()) fail(ErrorKind::InvalidConfig, "inv_t sweep is empty");
  if (sample_sizes.empty()) fail(ErrorKind::InvalidConfig, "N sweep is empty");
  if (trials == 0) fail(ErrorKind::InvalidConfig, "trials must be at least 1");
  for (double b : inv_temperatures)
    if (!std::isfinite(b) || b < 0.0) fail(ErrorKind::InvalidConfig, "inv_t values must be finite and >= 0");
  for (std::size_t n : sample_sizes)
    if (n == 0) fail(ErrorKind::InvalidConfig, "N values must be at least 1");
  (void)parse_graph_spec(graph);
  switch (kind) {
    case ExperimentKind::Expectation:
      if (intervals.empty()) fail(ErrorKind::InvalidConfig, "r sweep is empty");
      if (methods.empty()) fail(ErrorKind::InvalidConfig, "method list is empty");
      for (const auto& m : methods)
        if (parse_policy(m) == MomentPolicy::Exact)
          fail(ErrorKind::InvalidConfig, "exact is not a sampling estimator");
      break;
    case ExperimentKind::Covariance:
      if (intervals.empty()) fail(ErrorKind::InvalidConfig, "r sweep is empty");
      if (k_ladder.empty()) fail(ErrorKind::InvalidConfig, "K ladder is empty");
      for (std::size_t k : k_ladder)
        if (k < 1 || k > kTemplateCount) fail(ErrorKind::InvalidConfig, "K must lie in 1..7");
      for (std::size_t n : sample_sizes)
        if (n < 2) fail(ErrorKind::InvalidConfig, "covariance experiments need N >= 2");
      break;
    case ExperimentKind::Learning:
      if (kappas.empty()) fail(ErrorKind::InvalidConfig, "kappa sweep is empty");
      if (methods.empty()) fail(ErrorKind::InvalidConfig, "method list is empty");
      for (const auto& m : methods) (void)parse_policy(m);
      if (epochs == 0) fail(ErrorKind::InvalidConfig, "epochs must be at least 1");
      if (data_size == 0) fail(ErrorKind::InvalidConfig, "data_size must be at least 1");
      if (!(eta > 0.0) || !std::isfinite(eta)) fail(ErrorKind::InvalidConfig, "eta must be positive");
      for (std::size_t k : kappas)
        if (k == 0) fail(ErrorKind::InvalidConfig, "kappa values must be at least 1");
      break;
  }
}

ExperimentConfig parse_config(std::istream& in) {
  ExperimentConfig cfg;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const std::string body = trim(line);
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string::npos)
      fail(ErrorKind::InvalidConfig, "line " + std::to_string(line_no) + ": expected key = value");
    const std::string key = trim(std::string_view(body).substr(0, eq));
    const std::string value = trim(std::string_view(body).substr(eq + 1));
    if (key == "kind") cfg.kind = parse_experiment_kind(value);
    else if (key == "graph") cfg.graph = value;
    else if (key == "inv_t") cfg.inv_temperatures = to_list<double>(key, value, to_double);
    else if (key == "N") cfg.sample_sizes = to_list<std::size_t>(key, value, to_unsigned);
    else if (key == "r") cfg.intervals = to_list<std::size_t>(key, value, to_unsigned);
    else if (key == "K") cfg.k_ladder = to_list<std::size_t>(key, value, to_unsigned);
    else if (key == "kappa") cfg.kappas = to_list<std::size_t>(key, value, to_unsigned);
    else if (key == "methods") cfg.methods = split_list(value);
    else if (key == "trials") cfg.trials = to_unsigned(key, value);
    else if (key == "seed") cfg.seed = to_unsigned(key, value);
    else if (key == "out") cfg.output = value;
    else if (key == "zero_field") cfg.zero_field = to_bool(key, value);
    else if (key == "epochs") cfg.epochs = to_unsigned(key, value);
    else if (key == "data_size") cfg.data_size = to_unsigned(key, value);
    else if (key == "data_interval") cfg.data_interval = to_unsigned(key, value);
    else if (key == "eta") cfg.eta = to_double(key, value);
    else if (key == "curve") cfg.curve = to_bool(key, value);
    else if (key == "threads") cfg.threads = to_unsigned(key, value);
    else fail(ErrorKind::InvalidConfig, "line " + std::to_string(line_no) + ": unknown key '" + key + "'");
  }
  cfg.validate();
  return cfg;
}

void write_config(std::ostream& out, const ExperimentConfig& cfg) {
  out << "kind = " << to_string(cfg.kind) << '\n'
      << "graph = " << cfg.graph << '\n'
      << "inv_t = " << join(cfg.inv_temperatures) << '\n'
      << "N = " << join(cfg.sample_sizes) << '\n'
      << "r = " << join(cfg.intervals) << '\n'
      << "K = " << join(cfg.k_ladder) << '\n'
      << "kappa = " << join(cfg.kappas) << '\n'
      << "methods = " << join(cfg.methods) << '\n'
      << "trials = " << cfg.trials << '\n'
      << "seed = " << cfg.seed << '\n'
      << "zero_field = " << (cfg.zero_field ? "true" : "false") << '\n'
      << "epochs = " << cfg.epochs << '\n'
      << "data_size = " << cfg.data_size << '\n'
      << "data_interval = " << cfg.data_interval << '\n'
      << "eta = " << format_number(cfg.eta) << '\n'
      << "curve = " << (cfg.curve ? "true" : "false") << '\n'
      << "threads = " << cfg.threads << '\n';
  if (!cfg.output.empty()) out << "out = " << cfg.output << '\n';
}

std::vector<std::string> preset_names() {
  return {"fig3", "fig4", "fig5", "fig6", "fig7", "fig8", "fig9", "fig10", "fig11", "fig12", "fig13"};
}

ExperimentConfig preset(std::string_view name, bool full_scale) {
  ExperimentConfig cfg;
  const std::vector<double> temperature_sweep{0.05, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6};
  const std::vector<std::string> learners{"smci-I", "smci-II", "smci-III", "qcsmci-I+II", "qcsmci-all"};
  if (name == "fig3") {
    cfg.inv_temperatures = temperature_sweep;
    cfg.sample_sizes = {100, 10000};
    cfg.trials = full_scale ? 1000 : 100;
  } else if (name == "fig4") {
    cfg.inv_temperatures = {0.05, 0.3};
    cfg.sample_sizes = {100, 300, 1000, 3000, 10000};
    cfg.trials = full_scale ? 1000 : 100;
  } else if (name == "fig5") {
    cfg.inv_temperatures = {0.05, 0.3};
    cfg.sample_sizes = {1000};
    cfg.intervals = {1, 2, 3, 5, 10, 20, 50};
    cfg.trials = full_scale ? 1000 : 100;
  } else if (name == "fig6") {
    cfg.kind = ExperimentKind::Covariance;
    cfg.inv_temperatures = {0.05, 0.3};
    cfg.sample_sizes = {100, 300, 1000, 3000, 10000};
    cfg.k_ladder = {2, 3, 4, 5, 6, 7};
    cfg.methods = {"qcsmci"};
    cfg.trials = full_scale ? 100 : 20;
  } else if (name == "fig7") {
    cfg.graph = "lattice:12x12";
    cfg.zero_field = true;
    cfg.inv_temperatures = temperature_sweep;
    cfg.sample_sizes = {100, 10000};
    cfg.trials = full_scale ? 100 : 10;
  } else if (name == "fig8" || name == "fig9") {
    cfg.kind = ExperimentKind::Learning;
    cfg.inv_temperatures = {name == "fig8" ? 0.05 : 0.3};
    cfg.sample_sizes = {1000};
    cfg.methods = learners;
    cfg.curve = true;
    cfg.trials = full_scale ? 500 : 10;
  } else if (name == "fig10" || name == "fig11") {
    cfg.kind = ExperimentKind::Learning;
    cfg.inv_temperatures = {name == "fig10" ? 0.05 : 0.3};
    cfg.sample_sizes = {10, 30, 100, 300, 1000};
    cfg.methods = learners;
    cfg.trials = full_scale ? 500 : 10;
  } else if (name == "fig12" || name == "fig13") {
    cfg.kind = ExperimentKind::Learning;
    cfg.inv_temperatures = {name == "fig12" ? 0.05 : 0.3};
    cfg.sample_sizes = {1000};
    cfg.kappas = {1, 2, 3, 5, 10};
    cfg.methods = learners;
    cfg.trials = full_scale ? 100 : 10;
  } else {
    fail(ErrorKind::InvalidConfig, "unknown preset '" + std::string(name) + "'");
  }
  cfg.validate();
  return cfg;
}

void ExperimentReport::write_csv(std::ostream& out) const {
  out << "setting,method,mean_mae,stderr,trials\n";
  for (const auto& row : rows) {
    char mean[32], se[32];
    std::snprintf(mean, sizeof mean, "%.12e", row.mean_mae);
    std::snprintf(se, sizeof se, "%.12e", row.stderr_mae);
    out << row.setting << ',' << row.method << ',' << mean << ',' << se << ',' << row.trials << '\n';
  }
}

void ExperimentReport::write_metadata(std::ostream& out) const {
  std::ostringstream cfg_text;
  write_config(cfg_text, config);
  nlohmann::json j;
  j["version"] = version;
  j["wall_seconds"] = wall_seconds;
  j["kind"] = std::string(to_string(config.kind));
  j["graph"] = config.graph;
  j["inv_t"] = config.inv_temperatures;
  j["N"] = config.sample_sizes;
  j["r"] = config.intervals;
  j["K"] = config.k_ladder;
  j["kappa"] = config.kappas;
  j["methods"] = config.methods;
  j["trials"] = config.trials;
  j["seed"] = config.seed;
  j["zero_field"] = config.zero_field;
  j["epochs"] = config.epochs;
  j["data_size"] = config.data_size;
  j["data_interval"] = config.data_interval;
  j["eta"] = config.eta;
  j["curve"] = config.curve;
  j["threads"] = config.threads;
  j["rows"] = rows.size();
  out << j.dump(2) << '\n';
}

const ReportRow* ExperimentReport::find(std::string_view setting, std::string_view method) const {
  for (const auto& row : rows)
    if (row.setting == setting && row.method == method) return &row;
  return nullptr;
}

namespace {

bool symmetric_zero_field(const IsingParams& p) {
  if (!p.alphabet().is_spin()) return false;
  return std::all_of(p.h().begin(), p.h().end(), [](double v) { return v == 0.0; });
}

std::vector<double> exact_vertex_means(const IsingParams& p) {
  if (symmetric_zero_field(p)) return std::vector<double>(p.num_vertices(), 0.0);
  return ExactDistribution(p).moments().vertex;
}

double mae_against(std::span<const double> exact, std::span<const double> estimates) {
  double acc = 0.0;
  for (std::size_t i = 0; i < exact.size(); ++i) acc += std::abs(exact[i] - estimates[i]);
  return acc / static_cast<double>(exact.size());
}

struct Grid {
  std::vector<std::string> settings;
  std::vector<std::string> methods;
  std::size_t cells() const { return settings.size() * methods.size(); }
};

std::vector<ReportRow> aggregate(const Grid& grid, const std::vector<std::vector<double>>& per_trial) {
  std::vector<ReportRow> rows;
  const std::size_t t = per_trial.size();
  for (std::size_t s = 0; s < grid.settings.size(); ++s) {
    for (std::size_t m = 0; m < grid.methods.size(); ++m) {
      const std::size_t cell = s * grid.methods.size() + m;
      double mean = 0.0;
      for (const auto& trial : per_trial) mean += trial[cell];
      mean /= static_cast<double>(t);
      double ss = 0.0;
      for (const auto& trial : per_trial) ss += (trial[cell] - mean) * (trial[cell] - mean);
      const double se = t > 1 ? std::sqrt(ss / static_cast<double>(t - 1)) / std::sqrt(static_cast<double>(t)) : 0.0;
      rows.push_back({grid.settings[s], grid.methods[m], mean, se, t});
    }
  }
  return rows;
}

std::string setting_name(std::initializer_list<std::pair<const char*, std::string>> parts) {
  std::string out;
  for (const auto& [k, v] : parts) {
    if (!out.empty()) out += ';';
    out += k;
    out += '=';
    out += v;
  }
  return out;
}

std::vector<double> run_expectation_trial(const ExperimentConfig& cfg, const GraphPtr& graph,
                                          const std::vector<MomentPolicy>& policies,
                                          const std::vector<std::vector<std::vector<EstimatorSpec>>>& specs,
                                          std::uint64_t trial_seed) {
  const std::size_t n = graph->num_vertices();
  std::vector<double> out;
  std::vector<double> estimates(n);
  const auto monomial = TargetFunction::monomial();
  for (std::size_t a = 0; a < cfg.inv_temperatures.size(); ++a) {
    const IsingParams p = random_uniform_params(graph, cfg.inv_temperatures[a],
                                                derive_seed(trial_seed, 0, a), cfg.zero_field);
    const auto exact = exact_vertex_means(p);
    for (std::size_t b = 0; b < cfg.sample_sizes.size(); ++b) {
      for (std::size_t c = 0; c < cfg.intervals.size(); ++c) {
        const SampleSet s = draw_sample_set(p, cfg.sample_sizes[b], cfg.intervals[c],
                                            derive_seed(trial_seed, 1 + a, b * cfg.intervals.size() + c));
        for (std::size_t m = 0; m < policies.size(); ++m) {
          for (std::size_t i = 0; i < n; ++i) {
            estimates[i] = policies[m] == MomentPolicy::Mci
                               ? mci_estimate(monomial, Region{static_cast<Vertex>(i)}, s)
                               : policy_estimate(p, specs[m][i], s);
          }
          out.push_back(mae_against(exact, estimates));
        }
      }
    }
  }
  return out;
}

std::vector<double> run_covariance_trial(const ExperimentConfig& cfg, const GraphPtr& graph,
                                         const std::vector<std::vector<EstimatorSpec>>& ladders,
                                         std::size_t k_max, std::uint64_t trial_seed) {
  const std::size_t n = graph->num_vertices();
  std::vector<double> out;
  for (std::size_t a = 0; a < cfg.inv_temperatures.size(); ++a) {
    const IsingParams p = random_uniform_params(graph, cfg.inv_temperatures[a],
                                                derive_seed(trial_seed, 0, a), cfg.zero_field);
    const ExactDistribution dist(p);
    std::vector<Eigen::MatrixXd> unit_sigma(n);
    std::vector<std::vector<SmciEstimator>> estimators(n);
    for (std::size_t i = 0; i < n; ++i) {
      unit_sigma[i] = exact_covariance(dist, ladders[i], 1).entries;
      for (std::size_t k = 0; k < k_max; ++k) estimators[i].emplace_back(p, ladders[i][k]);
    }
    for (std::size_t b = 0; b < cfg.sample_sizes.size(); ++b) {
      const double big_n = static_cast<double>(cfg.sample_sizes[b]);
      for (std::size_t c = 0; c < cfg.intervals.size(); ++c) {
        const SampleSet s = draw_sample_set(p, cfg.sample_sizes[b], cfg.intervals[c],
                                            derive_seed(trial_seed, 1 + a, b * cfg.intervals.size() + c));
        std::vector<std::vector<ComponentTrace>> traces(n);
        for (std::size_t i = 0; i < n; ++i)
          for (const auto& e : estimators[i]) traces[i].push_back(e.evaluate(s));
        for (std::size_t k : cfg.k_ladder) {
          std::vector<Eigen::MatrixXd> exact(n), approx(n);
          for (std::size_t i = 0; i < n; ++i) {
            const auto kk = static_cast<Eigen::Index>(k);
            exact[i] = unit_sigma[i].topLeftCorner(kk, kk) / big_n;
            approx[i] = sample_covariance(std::span(traces[i]).first(k)).entries;
          }
          out.push_back(covariance_mae(exact, approx));
        }
      }
    }
  }
  return out;
}

std::vector<double> run_learning_trial(const ExperimentConfig& cfg, const GraphPtr& graph,
                                       const std::vector<MomentPolicy>& policies, std::uint64_t trial_seed) {
  std::vector<double> out;
  const std::vector<std::size_t> recorded = [&] {
    std::vector<std::size_t> e;
    if (cfg.curve)
      for (std::size_t t = 0; t <= cfg.epochs; ++t) e.push_back(t);
    else e.push_back(cfg.epochs);
    return e;
  }();
  for (std::size_t a = 0; a < cfg.inv_temperatures.size(); ++a) {
    const IsingParams truth = random_uniform_params(graph, cfg.inv_temperatures[a],
                                                    derive_seed(trial_seed, 0, a), cfg.zero_field);
    const Dataset data(graph, draw_sample_set(truth, cfg.data_size, cfg.data_interval,
                                              derive_seed(trial_seed, 1, a)));
    MlOptions options;
    options.clamp_fields = cfg.zero_field;
    const MlResult ml = exact_ml(graph, data, 1.0, options);
    // cell layout per (N, kappa): [epoch][param][method]
    for (std::size_t b = 0; b < cfg.sample_sizes.size(); ++b) {
      for (std::size_t c = 0; c < cfg.kappas.size(); ++c) {
        std::vector<Trajectory> runs;
        for (MomentPolicy policy : policies) {
          TrainConfig tc;
          tc.policy = policy;
          tc.eta = cfg.eta;
          tc.epochs = cfg.epochs;
          tc.chains = cfg.sample_sizes[b];
          tc.kappa = cfg.kappas[c];
          tc.seed = derive_seed(trial_seed, 2 + a, b * cfg.kappas.size() + c);
          tc.clamp_fields = cfg.zero_field;
          runs.push_back(train(graph, data, tc, &ml.params));
        }
        for (std::size_t epoch : recorded) {
          if (!cfg.zero_field)
            for (const auto& run : runs) out.push_back(run.h_mae[epoch]);
          for (const auto& run : runs) out.push_back(run.j_mae[epoch]);
        }
      }
    }
  }
  return out;
}

}  // namespace

ExperimentReport run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  const auto started = std::chrono::steady_clock::now();
  const auto graph = std::make_shared<const Graph>(parse_graph_spec(cfg.graph));
  const std::size_t n = graph->num_vertices();

  Grid grid;
  std::function<std::vector<double>(std::uint64_t)> trial;
  std::vector<MomentPolicy> policies;
  std::vector<std::vector<std::vector<EstimatorSpec>>> specs;
  std::vector<std::vector<EstimatorSpec>> ladders;

  switch (cfg.kind) {
    case ExperimentKind::Expectation: {
      if (n > kEnumerationCap && !cfg.zero_field)
        fail(ErrorKind::EnumerationLimit, "exact expectations need n <= 20 or a zero-field model");
      grid.methods = cfg.methods;
      for (const auto& m : cfg.methods) {
        policies.push_back(parse_policy(m));
        std::vector<std::vector<EstimatorSpec>> per_vertex;
        for (std::size_t i = 0; i < n; ++i)
          per_vertex.push_back(policy_specs(*graph, Region{static_cast<Vertex>(i)}, policies.back()));
        specs.push_back(std::move(per_vertex));
      }
      for (double b : cfg.inv_temperatures)
        for (std::size_t big_n : cfg.sample_sizes)
          for (std::size_t r : cfg.intervals)
            grid.settings.push_back(setting_name({{"inv_t", format_number(b)},
                                                  {"N", std::to_string(big_n)},
                                                  {"r", std::to_string(r)}}));
      trial = [&](std::uint64_t seed) { return run_expectation_trial(cfg, graph, policies, specs, seed); };
      break;
    }
    case ExperimentKind::Covariance: {
      if (n > kEnumerationCap) fail(ErrorKind::EnumerationLimit, "exact covariances need n <= 20");
      grid.methods = {"qcsmci"};
      const std::size_t k_max = *std::max_element(cfg.k_ladder.begin(), cfg.k_ladder.end());
      for (std::size_t i = 0; i < n; ++i) {
        std::vector<EstimatorSpec> ladder;
        for (std::size_t k = 0; k < k_max; ++k)
          ladder.push_back(template_spec(*graph, Region{static_cast<Vertex>(i)}, static_cast<RegionTemplate>(k)));
        ladders.push_back(std::move(ladder));
      }
      for (double b : cfg.inv_temperatures)
        for (std::size_t big_n : cfg.sample_sizes)
          for (std::size_t r : cfg.intervals)
            for (std::size_t k : cfg.k_ladder)
              grid.settings.push_back(setting_name({{"inv_t", format_number(b)},
                                                    {"N", std::to_string(big_n)},
                                                    {"r", std::to_string(r)},
                                                    {"K", std::to_string(k)}}));
      trial = [&, k_max](std::uint64_t seed) { return run_covariance_trial(cfg, graph, ladders, k_max, seed); };
      break;
    }
    case ExperimentKind::Learning: {
      if (n > kEnumerationCap) fail(ErrorKind::EnumerationLimit, "exact ML references need n <= 20");
      grid.methods = cfg.methods;
      for (const auto& m : cfg.methods) policies.push_back(parse_policy(m));
      for (double b : cfg.inv_temperatures)
        for (std::size_t big_n : cfg.sample_sizes)
          for (std::size_t kappa : cfg.kappas) {
            auto add = [&](std::size_t epoch) {
              for (const char* param : {"h", "J"}) {
                if (cfg.zero_field && param[0] == 'h') continue;
                grid.settings.push_back(setting_name({{"inv_t", format_number(b)},
                                                      {"N", std::to_string(big_n)},
                                                      {"kappa", std::to_string(kappa)},
                                                      {"epoch", std::to_string(epoch)},
                                                      {"param", param}}));
              }
            };
            if (cfg.curve)
              for (std::size_t t = 0; t <= cfg.epochs; ++t) add(t);
            else add(cfg.epochs);
          }
      trial = [&](std::uint64_t seed) { return run_learning_trial(cfg, graph, policies, seed); };
      break;
    }
  }

  std::vector<std::vector<double>> per_trial(cfg.trials);
  parallel_for(cfg.trials, cfg.threads, [&](std::size_t t) {
    per_trial[t] = trial(derive_seed(cfg.seed, t));
    if (per_trial[t].size() != grid.cells())
      fail(ErrorKind::Configuration, "internal: trial produced an unexpected number of cells");
  });

  ExperimentReport report;
  report.config = cfg;
  report.rows = aggregate(grid, per_trial);
  report.version = library_version();
  report.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  return report;
}

double expectation_mae(const IsingParams& p, std::span<const double> estimates) {
  if (estimates.size() != p.num_vertices())
    fail(ErrorKind::ShapeMismatch, "one estimate per vertex is required");
  if (!symmetric_zero_field(p) && p.num_vertices() > kEnumerationCap)
    fail(ErrorKind::EnumerationLimit, "exact expectations need n <= 20 or a zero-field model");
  const auto exact = exact_vertex_means(p);
  return mae_against(exact, estimates);
}

double covariance_mae(std::span<const Eigen::MatrixXd> exact, std::span<const Eigen::MatrixXd> approx) {
  if (exact.size() != approx.size() || exact.empty())
    fail(ErrorKind::ShapeMismatch, "matching non-empty lists of matrices are required");
  double acc = 0.0;
  for (std::size_t i = 0; i < exact.size(); ++i) {
    if (exact[i].rows() != approx[i].rows() || exact[i].cols() != approx[i].cols() ||
        exact[i].rows() != exact[i].cols() || exact[i].rows() == 0)
      fail(ErrorKind::ShapeMismatch, "matrix " + std::to_string(i) + " shapes differ or are not square");
    const double k = static_cast<double>(exact[i].rows());
    acc += (exact[i] - approx[i]).cwiseAbs().sum() / (k * k);
  }
  return acc / static_cast<double>(exact.size());
}

double fit_loglog_slope(std::span<const std::pair<double, double>> points) {
  if (points.size() < 3) fail(ErrorKind::InsufficientSamples, "slope fit needs at least 3 points");
  double sx = 0.0, sy = 0.0;
  for (const auto& [x, y] : points) {
    if (!(x > 0.0) || !(y > 0.0)) fail(ErrorKind::InvalidConfig, "slope fit needs positive values");
    sx += std::log(x);
    sy += std::log(y);
  }
  const double m = static_cast<double>(points.size());
  const double mx = sx / m, my = sy / m;
  double sxy = 0.0, sxx = 0.0;
  for (const auto& [x, y] : points) {
    const double dx = std::log(x) - mx;
    sxy += dx * (std::log(y) - my);
    sxx += dx * dx;
  }
  if (sxx == 0.0) fail(ErrorKind::InvalidConfig, "slope fit needs distinct N values");
  return sxy / sxx;
}

}  // namespace csmci
