#include "attrisk/oracle.hpp"

#include "attrisk/density.hpp"
#include "attrisk/error.hpp"
#include "attrisk/logmath.hpp"
#include "attrisk/rng.hpp"

#include <cmath>

namespace attrisk {

namespace {

void require_normal_plan(const ResolvedPlan& plan) {
    for (const ResolvedStep& step : plan.steps)
        if (step.spec.family != Family::Normal)
            throw Error(ErrorKind::Type,
                        "the brute-force oracle supports normal plans only; step for '" +
                            step.spec.outcome + "' is " + to_string(step.spec.family));
}

} // namespace

DrawsSet refit_posterior(const Dataset& confidential, std::size_t record,
                         std::span<const double> guess, const ResolvedPlan& plan,
                         const LinearPrior& prior, std::size_t n_draws, std::uint64_t seed) {
    require_normal_plan(plan);
    if (record >= confidential.n_rows())
        throw Error(ErrorKind::Size, "record " + std::to_string(record) + " out of range");
    if (guess.size() != plan.synthesized_cols.size())
        throw Error(ErrorKind::Size, "guess has " + std::to_string(guess.size()) +
                                         " values, plan synthesizes " +
                                         std::to_string(plan.synthesized_cols.size()));

    Dataset patched = confidential;
    for (std::size_t v = 0; v < guess.size(); ++v)
        patched.cells[plan.synthesized_cols[v]][record] = guess[v];

    DrawsSet set;
    for (std::size_t s = 0; s < plan.steps.size(); ++s) {
        DrawsMatrix draws = fit_linear_conjugate(patched, plan.steps[s], prior, n_draws,
                                                 derive_seed(seed, s));
        draws.step = s;
        set.steps.push_back(std::move(draws));
    }
    return set;
}

OracleEstimate brute_force_probability(const Dataset& confidential,
                                       std::span<const Dataset> synthetic, std::size_t record,
                                       const GuessGrid& grid, const ResolvedPlan& plan,
                                       const LinearPrior& prior, std::size_t n_draws,
                                       std::uint64_t seed) {
    require_normal_plan(plan);
    if (n_draws == 0)
        throw Error(ErrorKind::Size, "n_draws must be >= 1");

    const std::size_t n_cells = grid.n_cells();
    const std::size_t n_axes = grid.axes.size();
    const GEvaluator evaluator(plan, synthetic);

    OracleEstimate estimate;
    estimate.n_draws = n_draws;
    estimate.seed = seed;
    estimate.log_raw.resize(n_cells);

    std::vector<double> guess(n_axes);
    std::vector<std::size_t> index(n_axes, 0);
    std::vector<double> log_lik(n_draws);
    for (std::size_t cell = 0; cell < n_cells; ++cell) {
        for (std::size_t v = 0; v < n_axes; ++v)
            guess[v] = grid.axes[v].candidates[index[v]];

        const DrawsSet refit = refit_posterior(confidential, record, guess, plan, prior, n_draws,
                                               derive_seed(seed, 0xCE11u * (cell + 1)));
        const ThetaSelector selector(refit, plan, n_draws);
        for (std::size_t d = 0; d < n_draws; ++d)
            log_lik[d] = evaluator(selector.at(d));
        estimate.log_raw[cell] = logsumexp(log_lik) - std::log(static_cast<double>(n_draws));

        for (std::size_t v = n_axes; v-- > 0;) {
            if (++index[v] < grid.axes[v].candidates.size())
                break;
            index[v] = 0;
        }
    }

    estimate.normalized.resize(n_cells);
    const double max_log = *std::max_element(estimate.log_raw.begin(), estimate.log_raw.end());
    double total = 0.0;
    for (std::size_t cell = 0; cell < n_cells; ++cell) {
        estimate.normalized[cell] = std::exp(estimate.log_raw[cell] - max_log);
        total += estimate.normalized[cell];
    }
    for (double& p : estimate.normalized)
        p /= total;
    return estimate;
}

} // namespace attrisk
