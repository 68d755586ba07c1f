#pragma once

#include "attrisk/draws.hpp"
#include "attrisk/schema.hpp"

#include <cstdint>
#include <vector>

namespace attrisk {

/// Prior for the linear synthesizer: coefficients N(0, sigma^2 *
/// coef_scale^2 * I) jointly with sigma^2 ~ Inverse-Gamma(a0, b0), the
/// normal-inverse-gamma family, so the posterior has a closed form and
/// draws are exact rather than approximate.
struct LinearPrior {
    double coef_scale = 2.0;
    double a0 = 1.0;
    double b0 = 1.0;
};

/// Prior scale for GLM coefficients: independent N(0, coef_scale^2).
struct GlmPrior {
    double coef_scale = 2.0;
};

struct MetropolisConfig {
    std::size_t n_draws = 2000; // kept after burn-in
    std::size_t burn_in = 2000; // adaptation happens here
};

/// Closed-form normal-inverse-gamma posterior for one normal step.
struct NigPosterior {
    std::vector<double> mean;       // coefficient posterior mean, design order
    std::vector<double> chol_lower; // lower Cholesky factor of the coefficient
                                    // covariance shape matrix, row-major PxP
    double a = 0.0;                 // sigma^2 ~ Inverse-Gamma(a, b)
    double b = 0.0;
    std::size_t width = 0;
};

/// Fits a normal step by exact conjugate update.  Throws
/// ErrorKind::Singular naming the collinear columns when the one-hot
/// design is rank deficient.
NigPosterior linear_posterior(const Dataset& data, const ResolvedStep& step,
                              const LinearPrior& prior);

/// Exact independent draws (coefficients + sigma) from the conjugate
/// posterior.
DrawsMatrix fit_linear_conjugate(const Dataset& data, const ModelSpec& spec,
                                 const LinearPrior& prior, std::size_t n_draws,
                                 std::uint64_t seed);
DrawsMatrix fit_linear_conjugate(const Dataset& data, const ResolvedStep& step,
                                 const LinearPrior& prior, std::size_t n_draws,
                                 std::uint64_t seed);

/// Random-walk Metropolis draws for poisson or multinomial-logit steps.
/// The proposal scale adapts during burn-in toward an acceptance rate in
/// [0.2, 0.4]; a rate outside [0.05, 0.7] after adaptation attaches a
/// convergence warning to the result instead of failing.
DrawsMatrix fit_glm_metropolis(const Dataset& data, const ModelSpec& spec, const GlmPrior& prior,
                               const MetropolisConfig& config, std::uint64_t seed);
DrawsMatrix fit_glm_metropolis(const Dataset& data, const ResolvedStep& step,
                               const GlmPrior& prior, const MetropolisConfig& config,
                               std::uint64_t seed);

/// Fits every plan step on the confidential data, in plan order.
DrawsSet fit_plan(const Dataset& data, const ResolvedPlan& plan, const LinearPrior& linear_prior,
                  const GlmPrior& glm_prior, const MetropolisConfig& config, std::uint64_t seed);

/// Simulates m synthetic datasets.  Dataset l uses one draw per step,
/// strided back from the end of the chain; step outcomes are simulated in
/// plan order, each later step conditioning on the synthetic values of
/// earlier outcomes and the confidential values of unsynthesized
/// predictors.  Requires m * thin <= draws per step.
std::vector<Dataset> simulate_synthetic(const ResolvedPlan& plan, const Dataset& confidential,
                                        const DrawsSet& draws, std::size_t m, std::size_t thin,
                                        std::uint64_t seed);

} // namespace attrisk
