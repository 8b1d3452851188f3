#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "csmci/error.hpp"
#include "csmci/estimators.hpp"
#include "csmci/experiment.hpp"
#include "csmci/gibbs.hpp"
#include "csmci/gls.hpp"
#include "csmci/inverse_ising.hpp"
#include "csmci/ising.hpp"
#include "csmci/parallel.hpp"

using namespace csmci;
using nlohmann::json;

namespace {

struct ModelSource {
  std::string graph_spec;
  std::string graph_file;
  std::string model_file;
  std::string random_model;

  void attach(CLI::App* cmd, bool model_required) {
    auto* g = cmd->add_option("--graph", graph_spec, "torus:RxC or lattice:RxC");
    auto* gf = cmd->add_option("--graph-file", graph_file, "edge list file");
    g->excludes(gf);
    auto* m = cmd->add_option("--model", model_file, "model file (includes its graph)");
    auto* r = cmd->add_option("--random-model", random_model, "uniform:<1/T>:<seed>[:zero-field]");
    m->excludes(r);
    m->excludes(g);
    m->excludes(gf);
    if (model_required) cmd->callback([m, r] {
        if (m->count() + r->count() == 0) throw CLI::RequiredError("--model or --random-model");
      });
  }

  GraphPtr graph() const {
    if (!graph_spec.empty()) return std::make_shared<const Graph>(parse_graph_spec(graph_spec));
    if (!graph_file.empty()) {
      std::ifstream in(graph_file);
      if (!in) fail(ErrorKind::Parse, "cannot open graph file " + graph_file);
      return std::make_shared<const Graph>(read_graph(in));
    }
    fail(ErrorKind::Configuration, "a graph is required (--graph or --graph-file)");
  }

  IsingParams model() const {
    if (!model_file.empty()) {
      std::ifstream in(model_file);
      if (!in) fail(ErrorKind::Parse, "cannot open model file " + model_file);
      return read_model(in);
    }
    return parse_random_model(graph(), random_model);
  }
};

Region parse_region(const std::string& text) {
  std::vector<Vertex> members;
  std::stringstream ss(text);
  std::string piece;
  while (std::getline(ss, piece, ',')) {
    try {
      std::size_t used = 0;
      const unsigned long v = std::stoul(piece, &used);
      if (used != piece.size()) throw std::invalid_argument(piece);
      members.push_back(static_cast<Vertex>(v));
    } catch (const std::exception&) {
      fail(ErrorKind::Parse, "'" + piece + "' is not a vertex index");
    }
  }
  return Region(std::move(members));
}

std::vector<double> parse_doubles(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string piece;
  while (std::getline(ss, piece, ',')) {
    try {
      out.push_back(std::stod(piece));
    } catch (const std::exception&) {
      fail(ErrorKind::Parse, "'" + piece + "' is not a number");
    }
  }
  return out;
}

json vector_json(const Eigen::VectorXd& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

json conditioning_json(const Conditioning& c) {
  return {{"ridge_applied", c.ridge_applied}, {"ridge", c.ridge},
          {"fallback_uniform", c.fallback_uniform}, {"exact_component", c.exact_component},
          {"duplicates_removed", c.duplicates_removed}, {"rcond", c.rcond}, {"notes", c.notes}};
}

void write_text(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorKind::Configuration, "cannot write " + path);
  out << text;
}

SampleSet load_or_draw(const IsingParams& p, const std::string& samples_file, std::size_t n,
                       std::size_t r, std::uint64_t seed) {
  if (!samples_file.empty()) {
    std::ifstream in(samples_file);
    if (!in) fail(ErrorKind::Parse, "cannot open samples file " + samples_file);
    SampleSet s = read_samples_csv(in, p.alphabet());
    if (s.num_vertices() != p.num_vertices())
      fail(ErrorKind::GraphMismatch, "samples have " + std::to_string(s.num_vertices()) +
                                         " columns but the model has " + std::to_string(p.num_vertices()) + " vertices");
    return s;
  }
  return draw_sample_set(p, n, r, seed);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Composite spatial Monte Carlo integration for Ising models"};
  app.require_subcommand(1);
  app.set_version_flag("--version", library_version());

  // estimate
  auto* estimate = app.add_subcommand("estimate", "estimate E[f(x_T)] by MCI, SMCI or (q)CSMCI");
  ModelSource est_src;
  est_src.attach(estimate, true);
  std::string est_samples, est_target, est_template, est_compose, est_sum_region, est_table;
  std::string est_sigma = "sample";
  std::size_t est_n = 1000, est_r = 50;
  std::uint64_t est_seed = 0;
  bool est_mci = false, est_exact = false;
  estimate->add_option("--samples", est_samples, "sample CSV (otherwise drawn by Gibbs sampling)");
  estimate->add_option("--n", est_n, "sample points to draw")->check(CLI::PositiveNumber);
  estimate->add_option("--r", est_r, "sweeps of burn-in and between points");
  estimate->add_option("--seed", est_seed, "sampler seed");
  estimate->add_option("--target", est_target, "target vertices, e.g. 3 or 3,4")->required();
  auto* o_tpl = estimate->add_option("--template", est_template, "sum region template I..VII");
  auto* o_sum = estimate->add_option("--sum-region", est_sum_region, "explicit sum region vertices");
  auto* o_cmp = estimate->add_option("--compose", est_compose, "template list for (q)CSMCI, e.g. I+II+III");
  auto* o_mci = estimate->add_flag("--mci", est_mci, "plain sample average");
  o_tpl->excludes(o_sum)->excludes(o_cmp)->excludes(o_mci);
  o_sum->excludes(o_cmp)->excludes(o_mci);
  o_cmp->excludes(o_mci);
  estimate->add_option("--sigma", est_sigma, "covariance for composition")
      ->check(CLI::IsMember({"sample", "exact"}));
  estimate->add_option("--table", est_table, "f as a value table over the target states");
  estimate->add_flag("--exact", est_exact, "also report the enumerated expectation");

  // sample
  auto* sample = app.add_subcommand("sample", "draw a Gibbs sample set as CSV");
  ModelSource smp_src;
  smp_src.attach(sample, true);
  std::size_t smp_n = 1000, smp_r = 50;
  std::uint64_t smp_seed = 0;
  std::string smp_out;
  sample->add_option("--n", smp_n, "sample points")->check(CLI::PositiveNumber);
  sample->add_option("--r", smp_r, "sweeps of burn-in and between points");
  sample->add_option("--seed", smp_seed, "sampler seed");
  sample->add_option("--out", smp_out, "output CSV (stdout when omitted)");

  // learn
  auto* learn = app.add_subcommand("learn", "inverse Ising learning by gradient ascent");
  ModelSource lrn_src;
  lrn_src.attach(learn, false);
  std::string lrn_data, lrn_policy = "qcsmci-all", lrn_out;
  std::size_t lrn_m = 1000, lrn_data_r = 50, lrn_epochs = 100, lrn_chains = 1000, lrn_kappa = 1;
  std::size_t lrn_threads = 1;
  double lrn_eta = 0.02;
  std::uint64_t lrn_seed = 0;
  bool lrn_zero = false, lrn_ml = false, lrn_trajectory = false;
  learn->add_option("--data", lrn_data, "training data CSV");
  learn->add_option("--data-size", lrn_m, "points drawn from the generative model when --data is absent");
  learn->add_option("--data-interval", lrn_data_r, "sweeps between drawn data points");
  learn->add_option("--policy", lrn_policy, "mci, smci-I, smci-II, smci-III, qcsmci-I+II, qcsmci-all, exact");
  learn->add_option("--eta", lrn_eta, "learning rate");
  learn->add_option("--epochs", lrn_epochs, "parameter updates");
  learn->add_option("--chains", lrn_chains, "persistent chains N");
  learn->add_option("--kappa", lrn_kappa, "sweeps per epoch");
  learn->add_option("--seed", lrn_seed, "seed for data and chains");
  learn->add_option("--threads", lrn_threads, "worker threads");
  learn->add_flag("--zero-field", lrn_zero, "keep all fields at zero");
  learn->add_flag("--exact-ml", lrn_ml, "also compute the exact ML estimate and MAEs against it");
  learn->add_flag("--trajectory", lrn_trajectory, "include per-epoch MAEs");
  learn->add_option("--out", lrn_out, "write the learned model file");

  // experiment
  auto* experiment = app.add_subcommand("experiment", "run a figure protocol and emit CSV");
  std::string exp_preset, exp_config, exp_out;
  std::optional<std::uint64_t> exp_seed;
  std::optional<std::size_t> exp_trials, exp_threads;
  bool exp_full = false;
  auto* o_preset = experiment->add_option("--preset", exp_preset, "fig3 .. fig13");
  auto* o_config = experiment->add_option("--config", exp_config, "key = value config file");
  o_preset->excludes(o_config);
  experiment->add_flag("--full-scale", exp_full, "use the large trial counts");
  experiment->add_option("--seed", exp_seed, "master seed");
  experiment->add_option("--trials", exp_trials, "override the trial count");
  experiment->add_option("--threads", exp_threads, "worker threads");
  experiment->add_option("--out", exp_out, "CSV path; metadata goes to <out>.json");
  experiment->callback([o_preset, o_config] {
    if (o_preset->count() + o_config->count() == 0) throw CLI::RequiredError("--preset or --config");
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (*estimate) {
      const IsingParams p = est_src.model();
      const Region target = parse_region(est_target);
      const TargetFunction f = est_table.empty() ? TargetFunction::monomial()
                                                 : TargetFunction::table(parse_doubles(est_table));
      const SampleSet s = load_or_draw(p, est_samples, est_n, est_r, est_seed);
      json out{{"target", std::vector<Vertex>(target.begin(), target.end())}, {"samples", s.size()}};
      if (est_mci) {
        const auto trace = mci_trace(f, target, s);
        out["method"] = "mci";
        out["estimate"] = trace.mean;
        out["variance"] = trace.variance_of_mean();
      } else if (!est_compose.empty()) {
        std::vector<EstimatorSpec> specs;
        for (RegionTemplate t : parse_template_list(est_compose)) specs.push_back(template_spec(p.graph(), target, t, f));
        const CompositeSmci composite(p, specs);
        std::unique_ptr<ExactDistribution> dist;
        SigmaPolicy policy = SigmaPolicy::Sample;
        if (est_sigma == "exact") {
          policy = SigmaPolicy::Exact;
          dist = std::make_unique<ExactDistribution>(p);
        }
        const auto r = composite.estimate(s, policy, dist.get());
        out["method"] = est_sigma == "exact" ? "csmci" : "qcsmci";
        out["estimate"] = r.value;
        out["variance"] = r.variance;
        out["components"] = vector_json(r.components);
        out["weights"] = vector_json(r.weights);
        out["conditioning"] = conditioning_json(r.conditioning);
      } else {
        Region sum_region = target;
        if (!est_sum_region.empty()) sum_region = parse_region(est_sum_region);
        else if (!est_template.empty()) sum_region = instantiate_template(p.graph(), target, parse_template(est_template));
        const auto trace = SmciEstimator(p, EstimatorSpec{target, f, sum_region}).evaluate(s);
        out["method"] = "smci";
        out["sum_region"] = std::vector<Vertex>(sum_region.begin(), sum_region.end());
        out["estimate"] = trace.mean;
        out["variance"] = trace.variance_of_mean();
      }
      if (est_exact) out["exact"] = exact_expectation(p, f, target);
      std::cout << out.dump() << '\n';
    } else if (*sample) {
      const IsingParams p = smp_src.model();
      std::ostringstream text;
      write_samples_csv(text, draw_sample_set(p, smp_n, smp_r, smp_seed));
      write_text(smp_out, text.str());
    } else if (*learn) {
      const GraphPtr graph = lrn_src.model_file.empty() && lrn_src.random_model.empty()
                                 ? lrn_src.graph()
                                 : lrn_src.model().graph_ptr();
      std::optional<IsingParams> truth;
      std::optional<Dataset> data;
      if (!lrn_data.empty()) {
        std::ifstream in(lrn_data);
        if (!in) fail(ErrorKind::Parse, "cannot open data file " + lrn_data);
        data.emplace(graph, read_samples_csv(in));
      } else {
        if (lrn_src.model_file.empty() && lrn_src.random_model.empty())
          fail(ErrorKind::Configuration, "learning needs --data or a generative model");
        truth.emplace(lrn_src.model());
        data.emplace(graph, draw_sample_set(*truth, lrn_m, lrn_data_r, derive_seed(lrn_seed, 1)));
      }
      TrainConfig cfg;
      cfg.policy = parse_policy(lrn_policy);
      cfg.eta = lrn_eta;
      cfg.epochs = lrn_epochs;
      cfg.chains = lrn_chains;
      cfg.kappa = lrn_kappa;
      cfg.seed = derive_seed(lrn_seed, 2);
      cfg.clamp_fields = lrn_zero;
      cfg.threads = lrn_threads == 0 ? default_thread_count() : lrn_threads;
      std::optional<MlResult> ml;
      if (lrn_ml) {
        MlOptions options;
        options.clamp_fields = lrn_zero;
        ml = exact_ml(graph, *data, 1.0, options);
        if (!ml->converged)
          std::cerr << "warning: exact ML did not converge (gradient norm " << ml->gradient_norm << ")\n";
      }
      const Trajectory traj = train(graph, *data, cfg, ml ? &ml->params : nullptr);
      const IsingParams learned =
          IsingParams(graph, traj.h.back(), traj.j.back(), data->points().alphabet());
      json out{{"policy", std::string(to_string(cfg.policy))}, {"epochs", cfg.epochs},
               {"h", traj.h.back()}, {"J", traj.j.back()}};
      if (ml) {
        out["ml"] = {{"h", std::vector<double>(ml->params.h().begin(), ml->params.h().end())},
                     {"J", std::vector<double>(ml->params.j().begin(), ml->params.j().end())},
                     {"iterations", ml->iterations},
                     {"converged", ml->converged}};
        out["h_mae"] = traj.h_mae.back();
        out["J_mae"] = traj.j_mae.back();
        if (lrn_trajectory) {
          out["h_mae_trajectory"] = traj.h_mae;
          out["J_mae_trajectory"] = traj.j_mae;
        }
      }
      if (!lrn_out.empty()) {
        std::ostringstream text;
        write_model(text, learned);
        write_text(lrn_out, text.str());
      }
      std::cout << out.dump() << '\n';
    } else if (*experiment) {
      ExperimentConfig cfg;
      if (!exp_preset.empty()) {
        cfg = preset(exp_preset, exp_full);
      } else {
        std::ifstream in(exp_config);
        if (!in) fail(ErrorKind::InvalidConfig, "cannot open config file " + exp_config);
        cfg = parse_config(in);
      }
      if (exp_seed) cfg.seed = *exp_seed;
      if (exp_trials) cfg.trials = *exp_trials;
      if (exp_threads) cfg.threads = *exp_threads == 0 ? default_thread_count() : *exp_threads;
      if (!exp_out.empty()) cfg.output = exp_out;
      const ExperimentReport report = run_experiment(cfg);
      std::ostringstream csv;
      report.write_csv(csv);
      write_text(cfg.output, csv.str());
      if (!cfg.output.empty() && cfg.output != "-") {
        std::ostringstream meta;
        report.write_metadata(meta);
        write_text(cfg.output + ".json", meta.str());
      }
    }
  } catch (const Error& e) {
    std::cerr << json{{"error", std::string(to_string(e.kind()))}, {"message", e.what()}}.dump() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << json{{"error", "internal"}, {"message", e.what()}}.dump() << '\n';
    return 3;
  }
  return 0;
}
