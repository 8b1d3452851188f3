#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "csmci/ising.hpp"
#include "csmci/rng.hpp"

namespace csmci {

enum class ScanOrder { Ascending, Random };

struct SampleMeta {
  std::uint64_t seed = 0;
  std::size_t burn_in = 0;
  std::size_t interval = 0;
};

/// N full configurations stored row-major, plus how they were produced.
class SampleSet {
 public:
  using Meta = SampleMeta;

  SampleSet(std::size_t num_vertices, Alphabet alphabet, std::vector<State> data, Meta meta = {});

  std::size_t size() const noexcept { return num_points_; }
  std::size_t num_vertices() const noexcept { return num_vertices_; }
  const Alphabet& alphabet() const noexcept { return alphabet_; }
  const Meta& meta() const noexcept { return meta_; }
  std::span<const State> point(std::size_t mu) const {
    return {data_.data() + mu * num_vertices_, num_vertices_};
  }
  std::span<const State> data() const noexcept { return data_; }

 private:
  std::size_t num_vertices_;
  std::size_t num_points_;
  Alphabet alphabet_;
  std::vector<State> data_;
  Meta meta_;
};

/// One row per point, alphabet values separated by commas.
void write_samples_csv(std::ostream& out, const SampleSet& s);
/// One configuration per line, comma separated alphabet values.
SampleSet read_samples_csv(std::istream& in, const Alphabet& alphabet = Alphabet());

/// Uniform random configuration.
void randomize(std::span<State> x, std::size_t alphabet_size, Philox4x32& rng);

/// Resamples every vertex once from its single-site conditional. Ascending
/// order visits 0..n-1; random order draws n sites uniformly with replacement.
void gibbs_sweep(const IsingParams& p, std::span<State> x, Philox4x32& rng,
                 ScanOrder order = ScanOrder::Ascending);

/// Single chain from a uniform start: r burn-in sweeps, then one point every
/// r sweeps, N*r sweeps in total. r = 0 records independent uniform draws.
SampleSet draw_sample_set(const IsingParams& p, std::size_t n_points, std::size_t r,
                          std::uint64_t seed, ScanOrder order = ScanOrder::Ascending);

/// N persistent chains, each with its own Philox substream (seed, chain).
class ChainBank {
 public:
  ChainBank(std::size_t num_chains, std::size_t num_vertices, const Alphabet& alphabet,
            std::uint64_t seed);

  std::size_t size() const noexcept { return rngs_.size(); }
  std::span<const State> chain(std::size_t c) const {
    return {states_.data() + c * num_vertices_, num_vertices_};
  }

  /// Advances every chain kappa sweeps under p; chains may run on `threads`
  /// workers without changing the result.
  void advance(const IsingParams& p, std::size_t kappa, std::size_t threads = 1);

  SampleSet snapshot() const;

 private:
  std::size_t num_vertices_;
  Alphabet alphabet_;
  std::uint64_t seed_;
  std::vector<State> states_;
  std::vector<Philox4x32> rngs_;
};

/// Advances the bank kappa (>= 1) sweeps and returns the current states.
SampleSet persistent_step(const IsingParams& p, ChainBank& bank, std::size_t kappa,
                          std::size_t threads = 1);

}  // namespace csmci
