#pragma once

#include "attrisk/draws.hpp"
#include "attrisk/risk.hpp"
#include "attrisk/schema.hpp"
#include "attrisk/synthesizers.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace attrisk {

/// Brute-force reference estimate of the synthetic-data probability per
/// grid cell, obtained by refitting the synthesizer for every guess
/// instead of importance sampling.  Restricted to all-normal plans so
/// each refit is an exact conjugate update; intended for small test
/// instances, not production runs.
struct OracleEstimate {
    std::vector<double> log_raw;    // log mean synthetic-data likelihood per cell
    std::vector<double> normalized; // sums to 1 over the grid
    std::size_t n_draws = 0;
    std::uint64_t seed = 0;
};

/// Refits every plan step on the dataset whose target record has its
/// synthesized values replaced by `guess`, returning exact conjugate
/// draws.  `guess` is ordered like the plan's synthesized variables.
DrawsSet refit_posterior(const Dataset& confidential, std::size_t record,
                         std::span<const double> guess, const ResolvedPlan& plan,
                         const LinearPrior& prior, std::size_t n_draws, std::uint64_t seed);

/// For each grid cell: averages the synthetic-data likelihood over
/// n_draws exact draws from the guess-conditioned posterior, in log
/// space, and normalizes across the grid.
OracleEstimate brute_force_probability(const Dataset& confidential,
                                       std::span<const Dataset> synthetic, std::size_t record,
                                       const GuessGrid& grid, const ResolvedPlan& plan,
                                       const LinearPrior& prior, std::size_t n_draws,
                                       std::uint64_t seed);

} // namespace attrisk
