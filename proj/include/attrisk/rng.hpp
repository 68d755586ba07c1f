#pragma once

#include <cstdint>
#include <random>
#include <span>

namespace attrisk {

/// Deterministic random source.  All samplers are implemented in this
/// project rather than delegating to std:: distributions, so a given seed
/// produces the same stream on every platform and standard library.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    /// Uniform double in [0, 1).
    double uniform();

    /// Standard normal via the polar method.
    double normal();

    double normal(double mean, double sd) { return mean + sd * normal(); }

    /// Gamma(shape, 1) via Marsaglia-Tsang squeeze; shape > 0.
    double gamma(double shape);

    /// Inverse-Gamma(shape, scale): reciprocal of Gamma(shape, rate=scale).
    double inverse_gamma(double shape, double scale);

    /// Poisson(mean); inversion walk for small means, transformed
    /// rejection for large ones.
    long poisson(double mean);

    /// Index into `probs` (need not be normalized); 0-based.
    std::size_t categorical(std::span<const double> probs);

    std::uint64_t next_u64() { return engine_(); }

  private:
    std::mt19937_64 engine_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

/// Stable stream derivation: hash (seed, tag) so that independent
/// consumers (plan steps, datasets, grid cells) never share a stream.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t tag);

} // namespace attrisk
