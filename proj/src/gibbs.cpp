#include "csmci/gibbs.hpp"

#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

#include "csmci/error.hpp"
#include "csmci/parallel.hpp"

namespace csmci {

SampleSet::SampleSet(std::size_t num_vertices, Alphabet alphabet, std::vector<State> data,
                     Meta meta)
    : num_vertices_(num_vertices),
      num_points_(num_vertices ? data.size() / num_vertices : 0),
      alphabet_(std::move(alphabet)),
      data_(std::move(data)),
      meta_(meta) {
  if (num_vertices_ == 0 || data_.size() % num_vertices_ != 0)
    fail(ErrorKind::Configuration, "sample data does not tile into full configurations");
  for (State s : data_)
    if (s >= alphabet_.size()) fail(ErrorKind::Configuration, "sample state outside the alphabet");
}

void write_samples_csv(std::ostream& out, const SampleSet& s) {
  for (std::size_t mu = 0; mu < s.size(); ++mu) {
    const auto x = s.point(mu);
    for (std::size_t i = 0; i < x.size(); ++i) out << (i ? "," : "") << s.alphabet().value(x[i]);
    out << '\n';
  }
}

SampleSet read_samples_csv(std::istream& in, const Alphabet& alphabet) {
  std::vector<State> data;
  std::size_t width = 0;
  std::size_t line_no = 0;
  std::string line;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::size_t count = 0;
    std::istringstream fields(line);
    std::string cell;
    while (std::getline(fields, cell, ',')) {
      double v = 0.0;
      try {
        v = std::stod(cell);
      } catch (const std::exception&) {
        fail(ErrorKind::Parse, "line " + std::to_string(line_no) + ": '" + cell + "' is not a number");
      }
      std::size_t k = 0;
      while (k < alphabet.size() && std::abs(alphabet.value(static_cast<State>(k)) - v) > 1e-9) ++k;
      if (k == alphabet.size())
        fail(ErrorKind::Parse, "line " + std::to_string(line_no) + ": value " + cell + " is not in the alphabet");
      data.push_back(static_cast<State>(k));
      ++count;
    }
    if (width == 0) width = count;
    else if (count != width)
      fail(ErrorKind::Parse, "line " + std::to_string(line_no) + ": expected " + std::to_string(width) + " values");
  }
  if (data.empty()) fail(ErrorKind::EmptyInput, "no sample points found");
  return SampleSet(width, alphabet, std::move(data));
}

void randomize(std::span<State> x, std::size_t alphabet_size, Philox4x32& rng) {
  for (State& s : x) s = static_cast<State>(rng.below(alphabet_size));
}

namespace {

inline void resample_site(const IsingParams& p, std::span<State> x, Vertex i, Philox4x32& rng) {
  const Alphabet& a = p.alphabet();
  const double b = p.local_field(i, x);
  if (a.is_spin()) {
    // P(x_i = +1) = 1 / (1 + exp(-2b))
    x[i] = rng.uniform() * (1.0 + std::exp(-2.0 * b)) < 1.0 ? State{1} : State{0};
    return;
  }
  const std::size_t q = a.size();
  double top = a.value(0) * b;
  for (std::size_t k = 1; k < q; ++k) top = std::max(top, a.value(static_cast<State>(k)) * b);
  double weights[256];
  double total = 0.0;
  for (std::size_t k = 0; k < q; ++k)
    total += (weights[k] = std::exp(a.value(static_cast<State>(k)) * b - top));
  double u = rng.uniform() * total;
  std::size_t k = 0;
  while (k + 1 < q && u >= weights[k]) u -= weights[k++];
  x[i] = static_cast<State>(k);
}

}  // namespace

void gibbs_sweep(const IsingParams& p, std::span<State> x, Philox4x32& rng, ScanOrder order) {
  const std::size_t n = p.num_vertices();
  if (order == ScanOrder::Ascending) {
    for (std::size_t i = 0; i < n; ++i) resample_site(p, x, static_cast<Vertex>(i), rng);
  } else {
    for (std::size_t k = 0; k < n; ++k) resample_site(p, x, static_cast<Vertex>(rng.below(n)), rng);
  }
}

SampleSet draw_sample_set(const IsingParams& p, std::size_t n_points, std::size_t r,
                          std::uint64_t seed, ScanOrder order) {
  if (n_points == 0) fail(ErrorKind::EmptyInput, "sample set needs at least one point");
  const std::size_t n = p.num_vertices();
  const std::size_t q = p.alphabet().size();
  Philox4x32 rng(seed);
  Configuration x(n);
  std::vector<State> data(n_points * n);
  randomize(x, q, rng);
  for (std::size_t mu = 0; mu < n_points; ++mu) {
    if (r == 0) {
      if (mu > 0) randomize(x, q, rng);
    } else {
      for (std::size_t t = 0; t < r; ++t) gibbs_sweep(p, x, rng, order);
    }
    std::copy(x.begin(), x.end(), data.begin() + static_cast<std::ptrdiff_t>(mu * n));
  }
  return SampleSet(n, p.alphabet(), std::move(data), {seed, r, r});
}

ChainBank::ChainBank(std::size_t num_chains, std::size_t num_vertices, const Alphabet& alphabet,
                     std::uint64_t seed)
    : num_vertices_(num_vertices), alphabet_(alphabet), seed_(seed), states_(num_chains * num_vertices) {
  if (num_chains == 0) fail(ErrorKind::EmptyInput, "chain bank needs at least one chain");
  rngs_.reserve(num_chains);
  for (std::size_t c = 0; c < num_chains; ++c) {
    rngs_.emplace_back(seed, c);
    randomize(std::span<State>(states_.data() + c * num_vertices_, num_vertices_), alphabet_.size(),
              rngs_.back());
  }
}

void ChainBank::advance(const IsingParams& p, std::size_t kappa, std::size_t threads) {
  if (p.num_vertices() != num_vertices_ || !(p.alphabet() == alphabet_))
    fail(ErrorKind::GraphMismatch, "chain bank does not match the model");
  parallel_for(rngs_.size(), threads, [&](std::size_t c) {
    std::span<State> x(states_.data() + c * num_vertices_, num_vertices_);
    for (std::size_t t = 0; t < kappa; ++t) gibbs_sweep(p, x, rngs_[c]);
  });
}

SampleSet ChainBank::snapshot() const {
  return SampleSet(num_vertices_, alphabet_, states_, {seed_, 0, 0});
}

SampleSet persistent_step(const IsingParams& p, ChainBank& bank, std::size_t kappa,
                          std::size_t threads) {
  if (kappa == 0) fail(ErrorKind::Configuration, "kappa must be at least 1");
  bank.advance(p, kappa, threads);
  return bank.snapshot();
}

}  // namespace csmci
