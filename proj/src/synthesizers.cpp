#include "attrisk/synthesizers.hpp"

#include "attrisk/error.hpp"
#include "attrisk/logmath.hpp"
#include "attrisk/rng.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numeric>

namespace attrisk {

namespace {

Eigen::MatrixXd design_matrix(const Dataset& data, const ResolvedStep& step) {
    const std::size_t n = data.n_rows();
    Eigen::MatrixXd design(n, step.design_width);
    std::vector<double> row(step.design_width);
    for (std::size_t r = 0; r < n; ++r) {
        build_design_row(step, data.columns, [&](std::size_t col) { return data.cell(col, r); },
                         row);
        for (std::size_t j = 0; j < step.design_width; ++j)
            design(r, j) = row[j];
    }
    return design;
}

void check_full_rank(const Eigen::MatrixXd& design, const ResolvedStep& step) {
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
    qr.setThreshold(1e-10);
    const auto rank = qr.rank();
    if (rank == design.cols())
        return;
    // Pivot order puts the dependent columns last.
    std::string collinear;
    const auto& perm = qr.colsPermutation().indices();
    for (Eigen::Index i = rank; i < design.cols(); ++i) {
        if (!collinear.empty())
            collinear += ", ";
        collinear += step.design_names[static_cast<std::size_t>(perm(i))];
    }
    throw Error(ErrorKind::Singular, "design for '" + step.spec.outcome +
                                         "' is rank deficient; collinear columns: " + collinear);
}

} // namespace

NigPosterior linear_posterior(const Dataset& data, const ResolvedStep& step,
                              const LinearPrior& prior) {
    const Eigen::MatrixXd design = design_matrix(data, step);
    check_full_rank(design, step);
    const std::size_t n = data.n_rows();
    const std::size_t width = step.design_width;

    Eigen::VectorXd outcome(n);
    for (std::size_t r = 0; r < n; ++r)
        outcome(static_cast<Eigen::Index>(r)) = data.cell(step.outcome_col, r);

    const double prior_precision = 1.0 / (prior.coef_scale * prior.coef_scale);
    Eigen::MatrixXd precision = design.transpose() * design;
    precision.diagonal().array() += prior_precision;

    const Eigen::LLT<Eigen::MatrixXd> llt(precision);
    if (llt.info() != Eigen::Success)
        throw Error(ErrorKind::Singular,
                    "posterior precision for '" + step.spec.outcome + "' is not positive definite");

    const Eigen::VectorXd xty = design.transpose() * outcome;
    const Eigen::VectorXd mean = llt.solve(xty);

    NigPosterior posterior;
    posterior.width = width;
    posterior.mean.assign(mean.data(), mean.data() + width);
    posterior.a = prior.a0 + 0.5 * static_cast<double>(n);
    posterior.b = prior.b0 + 0.5 * (outcome.squaredNorm() - mean.dot(precision * mean));

    // Lower Cholesky factor of the covariance shape precision^-1.
    Eigen::MatrixXd identity = Eigen::MatrixXd::Identity(width, width);
    Eigen::MatrixXd cov = llt.solve(identity);
    Eigen::LLT<Eigen::MatrixXd> cov_llt(cov);
    if (cov_llt.info() != Eigen::Success)
        throw Error(ErrorKind::Internal, "posterior covariance not positive definite");
    Eigen::MatrixXd lower = cov_llt.matrixL();
    posterior.chol_lower.resize(width * width);
    // Eigen stores column-major; copy into a row-major lower triangle.
    for (std::size_t i = 0; i < width; ++i)
        for (std::size_t j = 0; j < width; ++j)
            posterior.chol_lower[i * width + j] = lower(static_cast<Eigen::Index>(i),
                                                        static_cast<Eigen::Index>(j));
    return posterior;
}

DrawsMatrix fit_linear_conjugate(const Dataset& data, const ResolvedStep& step,
                                 const LinearPrior& prior, std::size_t n_draws,
                                 std::uint64_t seed) {
    if (step.spec.family != Family::Normal)
        throw Error(ErrorKind::Type, "conjugate fit requires a normal step");
    if (n_draws == 0)
        throw Error(ErrorKind::Size, "n_draws must be >= 1");
    const NigPosterior posterior = linear_posterior(data, step, prior);
    const std::size_t width = posterior.width;

    DrawsMatrix draws;
    draws.names = draws_column_names(step);
    draws.n_draws = n_draws;
    draws.values.resize(n_draws * draws.names.size());

    Rng rng(seed);
    std::vector<double> z(width);
    for (std::size_t d = 0; d < n_draws; ++d) {
        const double sigma2 = rng.inverse_gamma(posterior.a, posterior.b);
        const double sigma = std::sqrt(sigma2);
        for (std::size_t j = 0; j < width; ++j)
            z[j] = rng.normal();
        double* row = draws.values.data() + d * draws.names.size();
        for (std::size_t i = 0; i < width; ++i) {
            double dot = 0.0;
            for (std::size_t j = 0; j <= i; ++j)
                dot += posterior.chol_lower[i * width + j] * z[j];
            row[i] = posterior.mean[i] + sigma * dot;
        }
        row[width] = sigma;
    }
    return draws;
}

DrawsMatrix fit_linear_conjugate(const Dataset& data, const ModelSpec& spec,
                                 const LinearPrior& prior, std::size_t n_draws,
                                 std::uint64_t seed) {
    return fit_linear_conjugate(data, resolve_step(spec, data.columns), prior, n_draws, seed);
}

// ---------------------------------------------------------------------------
// Random-walk Metropolis for poisson and multinomial-logit steps

namespace {

struct GlmTarget {
    const Eigen::MatrixXd& design;
    const std::vector<double>& outcome;
    Family family;
    std::size_t n_levels; // multinomial only
    double prior_precision;

    std::size_t dim() const {
        return family == Family::MultinomialLogit
                   ? static_cast<std::size_t>(design.cols()) * (n_levels - 1)
                   : static_cast<std::size_t>(design.cols());
    }

    double log_posterior(const Eigen::VectorXd& beta) const {
        const auto n = design.rows();
        const auto width = design.cols();
        double log_lik = 0.0;
        if (family == Family::Poisson) {
            const Eigen::VectorXd eta = design * beta;
            for (Eigen::Index i = 0; i < n; ++i)
                log_lik += outcome[static_cast<std::size_t>(i)] * eta(i) - std::exp(eta(i));
        } else {
            // Logits per non-baseline level; level 1 pinned at zero.
            Eigen::MatrixXd eta(n, n_levels - 1);
            for (std::size_t c = 0; c + 1 < n_levels; ++c)
                eta.col(static_cast<Eigen::Index>(c)) =
                    design * beta.segment(static_cast<Eigen::Index>(c * width), width);
            for (Eigen::Index i = 0; i < n; ++i) {
                double max_logit = 0.0;
                for (std::size_t c = 0; c + 1 < n_levels; ++c)
                    max_logit = std::max(max_logit, eta(i, static_cast<Eigen::Index>(c)));
                double sum = std::exp(-max_logit); // baseline term
                for (std::size_t c = 0; c + 1 < n_levels; ++c)
                    sum += std::exp(eta(i, static_cast<Eigen::Index>(c)) - max_logit);
                const auto y = static_cast<std::size_t>(outcome[static_cast<std::size_t>(i)]);
                const double logit_y = (y == 1) ? 0.0 : eta(i, static_cast<Eigen::Index>(y - 2));
                log_lik += logit_y - max_logit - std::log(sum);
            }
        }
        return log_lik - 0.5 * prior_precision * beta.squaredNorm();
    }
};

// Per-coordinate proposal scales from a crude Fisher diagonal, so the
// global adaptation only has one knob left to tune.
Eigen::VectorXd proposal_base(const GlmTarget& target) {
    const auto width = target.design.cols();
    Eigen::VectorXd info(width);
    double weight;
    if (target.family == Family::Poisson) {
        double mean_y = std::accumulate(target.outcome.begin(), target.outcome.end(), 0.0) /
                        static_cast<double>(target.outcome.size());
        weight = mean_y + 0.1;
    } else {
        const double p = 1.0 / static_cast<double>(target.n_levels);
        weight = p * (1.0 - p);
    }
    for (Eigen::Index j = 0; j < width; ++j)
        info(j) = weight * target.design.col(j).squaredNorm() + target.prior_precision;
    Eigen::VectorXd base(static_cast<Eigen::Index>(target.dim()));
    for (std::size_t i = 0; i < target.dim(); ++i)
        base(static_cast<Eigen::Index>(i)) =
            1.0 / std::sqrt(info(static_cast<Eigen::Index>(i % width)));
    return base;
}

} // namespace

DrawsMatrix fit_glm_metropolis(const Dataset& data, const ResolvedStep& step,
                               const GlmPrior& prior, const MetropolisConfig& config,
                               std::uint64_t seed) {
    if (step.spec.family == Family::Normal)
        throw Error(ErrorKind::Type, "metropolis fit is for poisson or multinomial-logit steps");
    if (config.n_draws == 0)
        throw Error(ErrorKind::Size, "n_draws must be >= 1");
    const Eigen::MatrixXd design = design_matrix(data, step);
    check_full_rank(design, step);

    const std::size_t n = data.n_rows();
    std::vector<double> outcome(n);
    for (std::size_t r = 0; r < n; ++r)
        outcome[r] = data.cell(step.outcome_col, r);

    if (step.spec.family == Family::MultinomialLogit) {
        std::vector<bool> present(step.n_levels + 1, false);
        for (double y : outcome)
            present[static_cast<std::size_t>(y)] = true;
        for (std::size_t lvl = 1; lvl <= step.n_levels; ++lvl)
            if (!present[lvl])
                throw Error(ErrorKind::Domain,
                            "level '" + data.columns[step.outcome_col].levels[lvl - 1] +
                                "' of '" + step.spec.outcome + "' never occurs in the data");
    }

    const GlmTarget target{design, outcome, step.spec.family, step.n_levels,
                           1.0 / (prior.coef_scale * prior.coef_scale)};
    const std::size_t dim = target.dim();
    const Eigen::VectorXd base = proposal_base(target);

    Eigen::VectorXd beta = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(dim));
    if (step.spec.family == Family::Poisson) {
        const double mean_y = std::accumulate(outcome.begin(), outcome.end(), 0.0) /
                              static_cast<double>(n);
        beta(0) = std::log(mean_y + 1e-8);
    }

    Rng rng(seed);
    double scale = 2.38 / std::sqrt(static_cast<double>(dim));
    double log_post = target.log_posterior(beta);

    Eigen::VectorXd proposal(static_cast<Eigen::Index>(dim));
    std::size_t window_accepts = 0;
    std::size_t window_size = 0;
    std::size_t kept_accepts = 0;

    DrawsMatrix draws;
    draws.step = 0;
    draws.names = draws_column_names(step);
    draws.n_draws = config.n_draws;
    draws.values.resize(config.n_draws * dim);

    const std::size_t total = config.burn_in + config.n_draws;
    for (std::size_t iter = 0; iter < total; ++iter) {
        for (std::size_t j = 0; j < dim; ++j)
            proposal(static_cast<Eigen::Index>(j)) =
                beta(static_cast<Eigen::Index>(j)) +
                scale * base(static_cast<Eigen::Index>(j)) * rng.normal();
        const double proposal_post = target.log_posterior(proposal);
        const bool accept = std::log(rng.uniform() + 1e-300) < proposal_post - log_post;
        if (accept) {
            beta = proposal;
            log_post = proposal_post;
        }

        if (iter < config.burn_in) {
            window_accepts += accept;
            if (++window_size == 50) {
                const double rate = static_cast<double>(window_accepts) / 50.0;
                if (rate < 0.2)
                    scale *= 0.8;
                else if (rate > 0.4)
                    scale *= 1.25;
                window_accepts = 0;
                window_size = 0;
            }
        } else {
            kept_accepts += accept;
            const std::size_t d = iter - config.burn_in;
            for (std::size_t j = 0; j < dim; ++j)
                draws.values[d * dim + j] = beta(static_cast<Eigen::Index>(j));
        }
    }

    draws.acceptance_rate = static_cast<double>(kept_accepts) /
                            static_cast<double>(config.n_draws);
    if (draws.acceptance_rate < 0.05 || draws.acceptance_rate > 0.7)
        draws.warnings.push_back("acceptance rate " + format_double(draws.acceptance_rate) +
                                 " for '" + step.spec.outcome +
                                 "' is outside [0.05, 0.7]; draws may mix poorly");
    return draws;
}

DrawsMatrix fit_glm_metropolis(const Dataset& data, const ModelSpec& spec, const GlmPrior& prior,
                               const MetropolisConfig& config, std::uint64_t seed) {
    return fit_glm_metropolis(data, resolve_step(spec, data.columns), prior, config, seed);
}

DrawsSet fit_plan(const Dataset& data, const ResolvedPlan& plan, const LinearPrior& linear_prior,
                  const GlmPrior& glm_prior, const MetropolisConfig& config, std::uint64_t seed) {
    DrawsSet set;
    for (std::size_t s = 0; s < plan.steps.size(); ++s) {
        const ResolvedStep& step = plan.steps[s];
        const std::uint64_t step_seed = derive_seed(seed, s);
        DrawsMatrix draws = step.spec.family == Family::Normal
                                ? fit_linear_conjugate(data, step, linear_prior, config.n_draws,
                                                       step_seed)
                                : fit_glm_metropolis(data, step, glm_prior, config, step_seed);
        draws.step = s;
        set.steps.push_back(std::move(draws));
    }
    return set;
}

// ---------------------------------------------------------------------------
// Posterior predictive simulation

std::vector<Dataset> simulate_synthetic(const ResolvedPlan& plan, const Dataset& confidential,
                                        const DrawsSet& draws, std::size_t m, std::size_t thin,
                                        std::uint64_t seed) {
    if (plan.steps.size() != draws.steps.size())
        throw Error(ErrorKind::Size, "draws available for " + std::to_string(draws.steps.size()) +
                                         " steps, plan has " + std::to_string(plan.steps.size()));
    if (thin == 0)
        throw Error(ErrorKind::Size, "thin must be >= 1");
    for (const DrawsMatrix& step_draws : draws.steps)
        if (m * thin > step_draws.n_draws)
            throw Error(ErrorKind::Size, "m * thin = " + std::to_string(m * thin) +
                                             " exceeds the " + std::to_string(step_draws.n_draws) +
                                             " available draws");

    const std::size_t n = confidential.n_rows();
    std::vector<Dataset> synthetic;
    synthetic.reserve(m);

    std::vector<double> design_row;
    std::vector<double> probs;
    for (std::size_t l = 0; l < m; ++l) {
        Dataset out = confidential;
        out.synthetic_index = l;
        Rng rng(derive_seed(seed, 0x5359u * (l + 1)));
        for (std::size_t s = 0; s < plan.steps.size(); ++s) {
            const ResolvedStep& step = plan.steps[s];
            const DrawsMatrix& step_draws = draws.steps[s];
            // Stride back from the end of the chain, dataset m landing on
            // the final draw.
            const std::size_t draw_index = step_draws.n_draws - 1 - thin * (m - 1 - l);
            const std::span<const double> theta = step_draws.row(draw_index);

            design_row.resize(step.design_width);
            std::vector<double>& outcome = out.cells[step.outcome_col];
            for (std::size_t r = 0; r < n; ++r) {
                build_design_row(step, out.columns,
                                 [&](std::size_t col) { return out.cell(col, r); }, design_row);
                double eta = 0.0;
                switch (step.spec.family) {
                    case Family::Normal: {
                        for (std::size_t j = 0; j < step.design_width; ++j)
                            eta += design_row[j] * theta[j];
                        outcome[r] = rng.normal(eta, theta[step.design_width]);
                        break;
                    }
                    case Family::Poisson: {
                        for (std::size_t j = 0; j < step.design_width; ++j)
                            eta += design_row[j] * theta[j];
                        outcome[r] = static_cast<double>(rng.poisson(std::exp(eta)));
                        break;
                    }
                    case Family::MultinomialLogit: {
                        probs.assign(step.n_levels, 0.0); // baseline logit 0
                        for (std::size_t c = 2; c <= step.n_levels; ++c) {
                            double logit = 0.0;
                            const double* block = theta.data() + (c - 2) * step.design_width;
                            for (std::size_t j = 0; j < step.design_width; ++j)
                                logit += design_row[j] * block[j];
                            probs[c - 1] = logit;
                        }
                        softmax_inplace(probs);
                        outcome[r] = static_cast<double>(rng.categorical(probs) + 1);
                        break;
                    }
                }
            }
        }
        synthetic.push_back(std::move(out));
    }
    return synthetic;
}

} // namespace attrisk
