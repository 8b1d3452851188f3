#include <doctest.h>

#include <cmath>

#include "csmci/error.hpp"
#include "csmci/gibbs.hpp"
#include "csmci/inverse_ising.hpp"
#include "helpers.hpp"

using namespace csmci;
using doctest::Approx;

namespace {

Dataset dataset_of(const GraphPtr& g, std::initializer_list<std::initializer_list<int>> rows) {
  std::vector<State> data;
  for (const auto& row : rows)
    for (int v : row) data.push_back(v > 0 ? 1 : 0);
  return Dataset(g, SampleSet(g->num_vertices(), Alphabet(), std::move(data)));
}

}  // namespace

TEST_CASE("log likelihood examples") {
  const auto g = test::torus(2, 3);
  const auto d = Dataset(g, draw_sample_set(random_uniform_params(g, 0.5, 1), 50, 2, 2));
  CHECK(log_likelihood(IsingParams::zeros(g), d) == Approx(-6 * std::log(2.0)).epsilon(1e-14));

  const auto one = test::graph(1, {});
  const auto all_up = dataset_of(one, {{1}, {1}, {1}});
  CHECK(log_likelihood(IsingParams(one, {0.7}, {}), all_up) ==
        Approx(0.7 - std::log(2 * std::cosh(0.7))).epsilon(1e-14));
}

TEST_CASE("dataset moments") {
  const auto g = test::chain(2);
  const auto d = dataset_of(g, {{1, 1}, {1, -1}, {-1, -1}, {1, 1}});
  CHECK(d.vertex_means()[0] == Approx(0.5));
  CHECK(d.vertex_means()[1] == Approx(0.0));
  CHECK(d.pair_means()[0] == Approx(0.5));
  CHECK_THROWS_AS(Dataset(test::chain(3), SampleSet(2, Alphabet(), {1, 1})), Error);
}

TEST_CASE("gradient examples") {
  const auto one = test::graph(1, {});
  const auto d = dataset_of(one, {{1}, {1}});
  const auto p = IsingParams::zeros(one);
  const auto g = gradient(p, d, ExactDistribution(p).moments());
  CHECK(g.h[0] == Approx(1.0));

  const auto chain = test::chain(3);
  const auto data = Dataset(chain, draw_sample_set(random_uniform_params(chain, 0.5, 3), 40, 1, 4));
  Moments matched;
  matched.vertex.assign(data.vertex_means().begin(), data.vertex_means().end());
  matched.edge.assign(data.pair_means().begin(), data.pair_means().end());
  CHECK(gradient(IsingParams::zeros(chain), data, matched).max_norm() == 0.0);

  Moments short_moments{{0.0, 0.0}, {0.0, 0.0}};
  try {
    gradient(IsingParams::zeros(chain), data, short_moments);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::IncompleteMoments);
  }
}

TEST_CASE("exact gradient matches finite differences") {
  const auto g = test::torus(2, 3);
  const auto p = random_uniform_params(g, 0.4, 12);
  const auto d = Dataset(g, draw_sample_set(random_uniform_params(g, 0.4, 13), 200, 3, 14));
  const auto grad = gradient(p, d, ExactDistribution(p).moments());
  const double step = 1e-5;
  std::vector<double> h(p.h().begin(), p.h().end()), j(p.j().begin(), p.j().end());
  for (std::size_t i = 0; i < h.size(); ++i) {
    auto hp = h, hm = h;
    hp[i] += step;
    hm[i] -= step;
    const double fd = (log_likelihood(p.with_values(hp, j), d) - log_likelihood(p.with_values(hm, j), d)) / (2 * step);
    CHECK(std::abs(fd - grad.h[i]) < 1e-6);
  }
  for (std::size_t e = 0; e < j.size(); ++e) {
    auto jp = j, jm = j;
    jp[e] += step;
    jm[e] -= step;
    const double fd = (log_likelihood(p.with_values(h, jp), d) - log_likelihood(p.with_values(h, jm), d)) / (2 * step);
    CHECK(std::abs(fd - grad.j[e]) < 1e-6);
  }
}

TEST_CASE("exact ml closed forms") {
  const auto one = test::graph(1, {});
  const auto d = dataset_of(one, {{1}, {1}, {1}, {-1}});
  const auto r = exact_ml(one, d, 0.5);
  CHECK(r.converged);
  CHECK(r.params.h()[0] == Approx(std::atanh(0.5)).epsilon(1e-7));

  const auto two = test::chain(2);
  const auto pair = dataset_of(two, {{1, 1}, {1, 1}, {1, 1}, {-1, -1}, {-1, -1}, {-1, -1}, {1, -1}, {-1, 1}});
  const auto m = exact_ml(two, pair, 1.0);
  CHECK(m.converged);
  CHECK(m.params.j()[0] == Approx(std::atanh(0.5)).epsilon(1e-7));
  CHECK(std::abs(m.params.h()[0]) < 1e-7);
  CHECK(std::abs(m.params.h()[1]) < 1e-7);
}

TEST_CASE("exact ml on uniform data stays near zero") {
  const auto g = test::torus(2, 3);
  const std::size_t m = 20000;
  const auto d = Dataset(g, draw_sample_set(IsingParams::zeros(g), m, 1, 5));
  const auto r = exact_ml(g, d, 1.0);
  CHECK(r.converged);
  for (double v : r.params.h()) CHECK(std::abs(v) < 5 / std::sqrt(static_cast<double>(m)));
  for (double v : r.params.j()) CHECK(std::abs(v) < 5 / std::sqrt(static_cast<double>(m)));
}

TEST_CASE("parameter mae") {
  const auto g = test::torus(2, 3);
  const auto p = random_uniform_params(g, 0.5, 2);
  CHECK(parameter_mae(p, p) == std::pair<double, double>{0.0, 0.0});
  std::vector<double> h(p.h().begin(), p.h().end());
  for (double& v : h) v += 0.1;
  const auto shifted = p.with_values(h, std::vector<double>(p.j().begin(), p.j().end()));
  CHECK(parameter_mae(shifted, p).first == Approx(0.1));
  CHECK(parameter_mae(shifted, p).second == 0.0);

  const auto q = random_uniform_params(g, 0.5, 3);
  double hs = 0, js = 0;
  for (std::size_t i = 0; i < 6; ++i) hs += std::abs(p.h()[i] - q.h()[i]);
  for (std::size_t e = 0; e < p.num_edges(); ++e) js += std::abs(p.j()[e] - q.j()[e]);
  CHECK(parameter_mae(p, q).first == Approx(hs / 6));
  CHECK(parameter_mae(p, q).second == Approx(js / static_cast<double>(p.num_edges())));
  CHECK_THROWS_AS(parameter_mae(p, IsingParams::zeros(test::torus(3, 3))), Error);
}

TEST_CASE("policy names and ladders") {
  for (auto pol : {MomentPolicy::Mci, MomentPolicy::SmciI, MomentPolicy::SmciII, MomentPolicy::SmciIII,
                   MomentPolicy::QcsmciI_II, MomentPolicy::QcsmciAll, MomentPolicy::Exact})
    CHECK(parse_policy(to_string(pol)) == pol);
  CHECK_THROWS_AS(parse_policy("smci-IV"), Error);
  CHECK(policy_templates(MomentPolicy::QcsmciAll).size() == 3);
  // rung III works on graphs without a layout
  const auto chain = test::chain(4);
  CHECK(policy_specs(*chain, Region{1, 2}, MomentPolicy::SmciIII)[0].sum_region == Region{1, 2});
  CHECK_THROWS_AS(policy_specs(*chain, Region{1}, MomentPolicy::SmciI), Error);
}

TEST_CASE("moment estimates approach exact moments") {
  const auto g = test::torus(4, 5);
  const auto p = random_uniform_params(g, 0.3, 40);
  const auto exact = ExactDistribution(p).moments();
  const auto s = draw_sample_set(p, 4000, 10, 41);
  for (auto pol : {MomentPolicy::Mci, MomentPolicy::SmciI, MomentPolicy::QcsmciAll}) {
    const MomentEstimator est(g, pol);
    const auto m = est.estimate(p, s, 2);
    double worst = 0.0;
    for (std::size_t i = 0; i < 20; ++i) worst = std::max(worst, std::abs(m.vertex[i] - exact.vertex[i]));
    for (std::size_t e = 0; e < 40; ++e) worst = std::max(worst, std::abs(m.edge[e] - exact.edge[e]));
    CHECK(worst < 0.08);
  }
  const auto via_exact = MomentEstimator(g, MomentPolicy::Exact).estimate(p, s);
  CHECK(via_exact.edge[3] == Approx(exact.edge[3]).epsilon(1e-14));
  const auto no_fields = MomentEstimator(g, MomentPolicy::SmciI, false).estimate(p, s);
  CHECK(no_fields.vertex[0] == 0.0);
}

TEST_CASE("training") {
  const auto g = test::torus(2, 3);
  const auto truth = random_uniform_params(g, 0.3, 50);
  const Dataset d(g, draw_sample_set(truth, 500, 5, 51));

  TrainConfig still;
  still.eta = 0.0;
  still.epochs = 5;
  still.chains = 20;
  const auto flat = train(g, d, still);
  CHECK(flat.size() == 6);
  for (const auto& h : flat.h)
    for (double v : h) CHECK(v == 0.0);

  TrainConfig cfg;
  cfg.policy = MomentPolicy::Exact;
  cfg.eta = 0.5;
  cfg.epochs = 400;
  const auto ml = exact_ml(g, d, 1.0);
  const auto traj = train(g, d, cfg, &ml.params);
  CHECK(traj.h_mae.size() == 401);
  CHECK(traj.j_mae.back() < 1e-6);
  CHECK(traj.h_mae.back() < 1e-6);
  const auto last = IsingParams(g, traj.h.back(), traj.j.back());
  CHECK(gradient(last, d, ExactDistribution(last).moments()).max_norm() < 1e-6);

  TrainConfig sampled;
  sampled.policy = MomentPolicy::QcsmciAll;
  sampled.epochs = 10;
  sampled.chains = 100;
  sampled.seed = 3;
  const auto a = train(g, d, sampled);
  sampled.threads = 3;
  const auto b = train(g, d, sampled);
  CHECK(a.j == b.j);

  TrainConfig clamped = sampled;
  clamped.clamp_fields = true;
  for (const auto& h : train(g, d, clamped).h)
    for (double v : h) CHECK(v == 0.0);

  TrainConfig wild;
  wild.policy = MomentPolicy::Exact;
  wild.eta = 1e7;
  wild.epochs = 3;
  try {
    train(g, d, wild);
    FAIL("expected divergence");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::DivergedTraining);
  }
  TrainConfig bad;
  bad.kappa = 0;
  CHECK_THROWS_AS(train(g, d, bad), Error);
}
