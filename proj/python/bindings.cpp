#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/numpy.h>

#include <algorithm>
#include <sstream>

#include "csmci/error.hpp"
#include "csmci/estimators.hpp"
#include "csmci/experiment.hpp"
#include "csmci/gibbs.hpp"
#include "csmci/gls.hpp"
#include "csmci/graph.hpp"
#include "csmci/inverse_ising.hpp"
#include "csmci/ising.hpp"

namespace py = pybind11;
using namespace csmci;

namespace {

GraphPtr share(Graph g) { return std::make_shared<const Graph>(std::move(g)); }

py::array_t<double> to_array(std::span<const double> v) {
  py::array_t<double> out(static_cast<py::ssize_t>(v.size()));
  std::copy(v.begin(), v.end(), out.mutable_data());
  return out;
}

Region to_region(const std::vector<Vertex>& members) { return Region(members); }

SampleSet samples_from_array(const py::array_t<double, py::array::c_style | py::array::forcecast>& a,
                             const Alphabet& alphabet) {
  if (a.ndim() != 2) fail(ErrorKind::ShapeMismatch, "samples must be a 2-d array");
  const auto rows = static_cast<std::size_t>(a.shape(0));
  const auto cols = static_cast<std::size_t>(a.shape(1));
  std::ostringstream csv;
  csv.precision(17);
  auto r = a.unchecked<2>();
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t k = 0; k < cols; ++k) csv << (k ? "," : "") << r(i, k);
    csv << '\n';
  }
  std::istringstream in(csv.str());
  return read_samples_csv(in, alphabet);
}

py::array_t<double> samples_to_array(const SampleSet& s) {
  py::array_t<double> out({static_cast<py::ssize_t>(s.size()), static_cast<py::ssize_t>(s.num_vertices())});
  auto w = out.mutable_unchecked<2>();
  for (std::size_t mu = 0; mu < s.size(); ++mu) {
    auto x = s.point(mu);
    for (std::size_t i = 0; i < x.size(); ++i) w(mu, i) = s.alphabet().value(x[i]);
  }
  return out;
}

std::vector<EstimatorSpec> specs_for(const IsingParams& p, const std::vector<Vertex>& target,
                                     const std::string& templates) {
  std::vector<EstimatorSpec> specs;
  for (RegionTemplate t : parse_template_list(templates))
    specs.push_back(template_spec(p.graph(), to_region(target), t));
  return specs;
}

}  // namespace

PYBIND11_MODULE(_csmci, m) {
  m.attr("__version__") = library_version();

  static py::exception<Error> error_type(m, "Error");
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      py::object inst = py::reinterpret_borrow<py::object>(error_type.ptr())(std::string(e.what()));
      inst.attr("kind") = std::string(to_string(e.kind()));
      PyErr_SetObject(error_type.ptr(), inst.ptr());
    }
  });

  py::class_<Graph, std::shared_ptr<Graph>>(m, "Graph")
      .def(py::init([](std::size_t n, const std::vector<std::pair<Vertex, Vertex>>& edges) {
             std::vector<Edge> list;
             for (auto [a, b] : edges) list.push_back({a, b});
             return std::make_shared<Graph>(n, list);
           }),
           py::arg("n"), py::arg("edges"))
      .def_static("torus", [](std::size_t r, std::size_t c) { return std::make_shared<Graph>(build_torus(r, c)); })
      .def_static("lattice", [](std::size_t r, std::size_t c) {
        return std::make_shared<Graph>(build_lattice_free(r, c));
      })
      .def_static("parse", [](const std::string& s) { return std::make_shared<Graph>(parse_graph_spec(s)); })
      .def_property_readonly("num_vertices", &Graph::num_vertices)
      .def_property_readonly("num_edges", &Graph::num_edges)
      .def_property_readonly("edges", [](const Graph& g) {
        std::vector<std::pair<Vertex, Vertex>> out;
        for (const Edge& e : g.edges()) out.emplace_back(e.u, e.v);
        return out;
      })
      .def("boundary", [](const Graph& g, const std::vector<Vertex>& u) {
        const Region b = boundary_region(g, to_region(u));
        return std::vector<Vertex>(b.begin(), b.end());
      })
      .def("template_region", [](const Graph& g, const std::vector<Vertex>& target, const std::string& t) {
        const Region r = instantiate_template(g, to_region(target), parse_template(t));
        return std::vector<Vertex>(r.begin(), r.end());
      });

  py::class_<IsingParams>(m, "IsingModel")
      .def(py::init([](const std::shared_ptr<Graph>& g, std::vector<double> h, std::vector<double> j) {
             return IsingParams(g, std::move(h), std::move(j));
           }),
           py::arg("graph"), py::arg("h"), py::arg("j"))
      .def_static("random", [](const std::shared_ptr<Graph>& g, const std::string& spec) {
        return parse_random_model(g, spec);
      })
      .def_property_readonly("h", [](const IsingParams& p) { return to_array(p.h()); })
      .def_property_readonly("j", [](const IsingParams& p) { return to_array(p.j()); })
      .def_property_readonly("num_vertices", &IsingParams::num_vertices)
      .def("energy", [](const IsingParams& p, const std::vector<int>& spins) {
        Configuration x(spins.size());
        const auto vals = p.alphabet().values();
        for (std::size_t i = 0; i < spins.size(); ++i) {
          auto it = std::find(vals.begin(), vals.end(), static_cast<double>(spins[i]));
          if (it == vals.end()) fail(ErrorKind::Configuration, "value outside the alphabet");
          x[i] = static_cast<State>(it - vals.begin());
        }
        return energy(p, x);
      })
      .def("log_partition", [](const IsingParams& p) { return exact_log_partition(p); })
      .def("exact_expectation", [](const IsingParams& p, const std::vector<Vertex>& target) {
        return exact_expectation(p, TargetFunction::monomial(), to_region(target));
      })
      .def("exact_moments", [](const IsingParams& p) {
        const auto mo = ExactDistribution(p).moments();
        return py::make_tuple(to_array(mo.vertex), to_array(mo.edge));
      })
      .def("sample", [](const IsingParams& p, std::size_t n, std::size_t r, std::uint64_t seed) {
        return samples_to_array(draw_sample_set(p, n, r, seed));
      }, py::arg("n"), py::arg("r"), py::arg("seed") = 0);

  m.def("mci_estimate", [](const py::array_t<double>& samples, const std::vector<Vertex>& target) {
    return mci_estimate(TargetFunction::monomial(), to_region(target), samples_from_array(samples, Alphabet()));
  }, py::arg("samples"), py::arg("target"));

  m.def("smci_estimate", [](const IsingParams& p, const py::array_t<double>& samples,
                            const std::vector<Vertex>& target, const std::string& t) {
    EstimatorSpec spec = template_spec(p.graph(), to_region(target), parse_template(t));
    return smci_estimate(p, spec, samples_from_array(samples, p.alphabet())).mean;
  }, py::arg("model"), py::arg("samples"), py::arg("target"), py::arg("template") = "I");

  m.def("csmci_estimate", [](const IsingParams& p, const py::array_t<double>& samples,
                             const std::vector<Vertex>& target, const std::string& templates,
                             const std::string& sigma) {
    CompositeSmci c(p, specs_for(p, target, templates));
    const SampleSet s = samples_from_array(samples, p.alphabet());
    py::dict out;
    CompositeEstimate e;
    if (sigma == "exact") {
      ExactDistribution dist(p);
      e = c.estimate(s, SigmaPolicy::Exact, &dist);
    } else if (sigma == "sample") {
      e = c.estimate(s, SigmaPolicy::Sample);
    } else {
      fail(ErrorKind::Configuration, "sigma must be 'sample' or 'exact'");
    }
    out["value"] = e.value;
    out["variance"] = e.variance;
    out["weights"] = std::vector<double>(e.weights.begin(), e.weights.end());
    out["components"] = std::vector<double>(e.components.begin(), e.components.end());
    return out;
  }, py::arg("model"), py::arg("samples"), py::arg("target"), py::arg("templates") = "I,II,III",
     py::arg("sigma") = "sample");

  m.def("learn", [](const std::shared_ptr<Graph>& g, const py::array_t<double>& data, const std::string& policy,
                    double eta, std::size_t epochs, std::size_t chains, std::size_t kappa, std::uint64_t seed) {
    Dataset d(g, samples_from_array(data, Alphabet()));
    TrainConfig cfg;
    cfg.policy = parse_policy(policy);
    cfg.eta = eta;
    cfg.epochs = epochs;
    cfg.chains = chains;
    cfg.kappa = kappa;
    cfg.seed = seed;
    const Trajectory t = train(g, d, cfg, nullptr);
    return py::make_tuple(to_array(t.h.back()), to_array(t.j.back()));
  }, py::arg("graph"), py::arg("data"), py::arg("policy") = "qcsmci-all", py::arg("eta") = 0.02,
     py::arg("epochs") = 100, py::arg("chains") = 1000, py::arg("kappa") = 1, py::arg("seed") = 0);

  m.def("exact_ml", [](const std::shared_ptr<Graph>& g, const py::array_t<double>& data) {
    Dataset d(g, samples_from_array(data, Alphabet()));
    const MlResult r = exact_ml(g, d, 1.0);
    return py::make_tuple(to_array(r.params.h()), to_array(r.params.j()));
  });

  m.def("presets", &preset_names);
  m.def("run_experiment", [](const std::string& name, std::size_t trials, std::uint64_t seed,
                             std::size_t epochs) {
    ExperimentConfig cfg = preset(name);
    if (trials) cfg.trials = trials;
    if (epochs) cfg.epochs = epochs;
    cfg.seed = seed;
    const ExperimentReport rep = run_experiment(cfg);
    py::list rows;
    for (const ReportRow& r : rep.rows) {
      py::dict row;
      row["setting"] = r.setting;
      row["method"] = r.method;
      row["mean_mae"] = r.mean_mae;
      row["stderr"] = r.stderr_mae;
      row["trials"] = r.trials;
      rows.append(row);
    }
    return rows;
  }, py::arg("preset"), py::arg("trials") = 0, py::arg("seed") = 0, py::arg("epochs") = 0);
}
