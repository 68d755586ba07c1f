#include "attrisk/density.hpp"

#include "attrisk/error.hpp"
#include "attrisk/logmath.hpp"

#include <cmath>

namespace attrisk {

namespace {

constexpr double kLogSqrt2Pi = 0.91893853320467274178; // log(sqrt(2*pi))

inline double dot(std::span<const double> x, const double* beta) {
    double sum = 0.0;
    for (std::size_t j = 0; j < x.size(); ++j)
        sum += x[j] * beta[j];
    return sum;
}

} // namespace

ThetaSelector::ThetaSelector(const DrawsSet& draws, const ResolvedPlan& plan, std::size_t n_take)
    : draws_(&draws), plan_(&plan), n_take_(n_take) {
    if (draws.steps.size() != plan.steps.size())
        throw Error(ErrorKind::Size, "draws cover " + std::to_string(draws.steps.size()) +
                                         " steps, plan has " + std::to_string(plan.steps.size()));
    for (const DrawsMatrix& step_draws : draws.steps)
        indices_.push_back(strided_indices(step_draws.n_draws, n_take));
}

ThetaRow ThetaSelector::at(std::size_t h) const {
    ThetaRow theta;
    theta.steps.resize(plan_->steps.size());
    for (std::size_t s = 0; s < plan_->steps.size(); ++s) {
        const ResolvedStep& step = plan_->steps[s];
        const std::span<const double> row = draws_->steps[s].row(indices_[s][h]);
        ThetaStep& slice = theta.steps[s];
        if (step.spec.family == Family::Normal) {
            slice.coef = row.subspan(0, step.design_width);
            slice.sigma = row[step.design_width];
        } else {
            slice.coef = row;
        }
    }
    return theta;
}

double log_dens_normal(double y, std::span<const double> x, const ThetaStep& theta) {
    const double mean = dot(x, theta.coef.data());
    const double z = (y - mean) / theta.sigma;
    return -kLogSqrt2Pi - std::log(theta.sigma) - 0.5 * z * z;
}

double log_dens_poisson(double y, std::span<const double> x, const ThetaStep& theta) {
    if (y < 0.0 || y != std::floor(y))
        throw Error(ErrorKind::Domain, "poisson outcome must be a count >= 0");
    const double eta = dot(x, theta.coef.data());
    return y * eta - std::exp(eta) - std::lgamma(y + 1.0);
}

double log_dens_multinomial(std::size_t y, std::span<const double> x, const ThetaStep& theta,
                            std::size_t n_levels) {
    if (y < 1 || y > n_levels)
        throw Error(ErrorKind::Domain, "level index " + std::to_string(y) + " outside 1.." +
                                           std::to_string(n_levels));
    double max_logit = 0.0;
    double logit_y = 0.0;
    // Store logits on the stack-free path: accumulate max and the target
    // logit, then a second pass for the normalizer.
    const std::size_t width = x.size();
    for (std::size_t c = 2; c <= n_levels; ++c) {
        const double logit = dot(x, theta.coef.data() + (c - 2) * width);
        if (c == y)
            logit_y = logit;
        if (logit > max_logit)
            max_logit = logit;
    }
    double sum = std::exp(0.0 - max_logit);
    for (std::size_t c = 2; c <= n_levels; ++c)
        sum += std::exp(dot(x, theta.coef.data() + (c - 2) * width) - max_logit);
    return logit_y - max_logit - std::log(sum);
}

double log_dens_step(const ResolvedStep& step, double y, std::span<const double> x,
                     const ThetaStep& theta) {
    switch (step.spec.family) {
        case Family::Normal: return log_dens_normal(y, x, theta);
        case Family::Poisson: return log_dens_poisson(y, x, theta);
        case Family::MultinomialLogit:
            return log_dens_multinomial(static_cast<std::size_t>(y), x, theta, step.n_levels);
    }
    throw Error(ErrorKind::Internal, "unhandled family");
}

double log_g_record(const ResolvedPlan& plan, std::span<const Dataset> synthetic,
                    std::size_t record, const ThetaRow& theta) {
    double total = 0.0;
    std::vector<double> x;
    for (const Dataset& data : synthetic) {
        for (std::size_t s = 0; s < plan.steps.size(); ++s) {
            const ResolvedStep& step = plan.steps[s];
            x.resize(step.design_width);
            build_design_row(step, data.columns,
                             [&](std::size_t col) { return data.cell(col, record); }, x);
            total += log_dens_step(step, data.cell(step.outcome_col, record), x, theta.steps[s]);
        }
    }
    return total;
}

double log_g(const ResolvedPlan& plan, std::span<const Dataset> synthetic, const ThetaRow& theta) {
    // Per-dataset subtotals, so duplicated datasets contribute identical
    // (and exactly additive) terms.
    double total = 0.0;
    for (const Dataset& data : synthetic) {
        double subtotal = 0.0;
        const std::size_t n = data.n_rows();
        std::vector<double> x;
        for (std::size_t s = 0; s < plan.steps.size(); ++s) {
            const ResolvedStep& step = plan.steps[s];
            x.resize(step.design_width);
            for (std::size_t r = 0; r < n; ++r) {
                build_design_row(step, data.columns,
                                 [&](std::size_t col) { return data.cell(col, r); }, x);
                subtotal +=
                    log_dens_step(step, data.cell(step.outcome_col, r), x, theta.steps[s]);
            }
        }
        total += subtotal;
    }
    return total;
}

namespace {

// Cell accessor that overlays the synthesized variables of one record
// with supplied values, leaving every other column confidential.
struct OverlayCells {
    const Dataset& confidential;
    const ResolvedPlan& plan;
    std::span<const double> values;
    std::size_t record;

    double operator()(std::size_t col) const {
        for (std::size_t v = 0; v < plan.synthesized_cols.size(); ++v)
            if (plan.synthesized_cols[v] == col)
                return values[v];
        return confidential.cell(col, record);
    }
};

} // namespace

std::vector<std::vector<double>> guess_designs(const ResolvedPlan& plan,
                                               const Dataset& confidential, std::size_t record,
                                               std::span<const double> values) {
    if (values.size() != plan.synthesized_cols.size())
        throw Error(ErrorKind::Size, "expected " + std::to_string(plan.synthesized_cols.size()) +
                                         " values, got " + std::to_string(values.size()));
    const OverlayCells cells{confidential, plan, values, record};
    std::vector<std::vector<double>> designs(plan.steps.size());
    for (std::size_t s = 0; s < plan.steps.size(); ++s) {
        designs[s].resize(plan.steps[s].design_width);
        build_design_row(plan.steps[s], confidential.columns, cells, designs[s]);
    }
    return designs;
}

double seq_log_dens(const ResolvedPlan& plan, std::span<const std::vector<double>> designs,
                    std::span<const double> values, const ThetaRow& theta) {
    double total = 0.0;
    for (std::size_t s = 0; s < plan.steps.size(); ++s)
        total += log_dens_step(plan.steps[s], values[s], designs[s], theta.steps[s]);
    return total;
}

double log_f(const ResolvedPlan& plan, std::span<const double> values,
             const Dataset& confidential, std::size_t record, const ThetaRow& theta) {
    const std::vector<std::vector<double>> designs =
        guess_designs(plan, confidential, record, values);
    return seq_log_dens(plan, designs, values, theta);
}

double log_f_star(const ResolvedPlan& plan, const Dataset& confidential, std::size_t record,
                  const ThetaRow& theta) {
    std::vector<double> truth(plan.synthesized_cols.size());
    for (std::size_t v = 0; v < truth.size(); ++v)
        truth[v] = confidential.cell(plan.synthesized_cols[v], record);
    return log_f(plan, truth, confidential, record, theta);
}

// ---------------------------------------------------------------------------

GEvaluator::GEvaluator(const ResolvedPlan& plan, std::span<const Dataset> synthetic) {
    for (const Dataset& data : synthetic) {
        const std::size_t n = data.n_rows();
        for (const ResolvedStep& step : plan.steps) {
            StepCache cache;
            cache.family = step.spec.family;
            cache.width = step.design_width;
            cache.n_levels = step.n_levels;
            cache.n = n;
            cache.design.resize(n * step.design_width);
            cache.outcome.resize(n);
            for (std::size_t r = 0; r < n; ++r) {
                build_design_row(step, data.columns,
                                 [&](std::size_t col) { return data.cell(col, r); },
                                 std::span<double>(cache.design.data() + r * step.design_width,
                                                   step.design_width));
                cache.outcome[r] = data.cell(step.outcome_col, r);
            }
            if (step.spec.family == Family::Poisson) {
                cache.log_gamma.resize(n);
                for (std::size_t r = 0; r < n; ++r)
                    cache.log_gamma[r] = std::lgamma(cache.outcome[r] + 1.0);
            }
            steps_.push_back(std::move(cache));
        }
    }
}

double GEvaluator::operator()(const ThetaRow& theta) const {
    // Mirrors log_g's per-dataset grouping exactly.
    const std::size_t step_count = theta.steps.size();
    double total = 0.0;
    double subtotal = 0.0;
    for (std::size_t idx = 0; idx < steps_.size(); ++idx) {
        if (idx % step_count == 0 && idx != 0) {
            total += subtotal;
            subtotal = 0.0;
        }
        const StepCache& cache = steps_[idx];
        const ThetaStep& slice = theta.steps[idx % step_count];
        const double* row = cache.design.data();
        switch (cache.family) {
            case Family::Normal: {
                const double log_sigma = std::log(slice.sigma);
                const double inv_sigma = 1.0 / slice.sigma;
                for (std::size_t r = 0; r < cache.n; ++r, row += cache.width) {
                    double mean = 0.0;
                    for (std::size_t j = 0; j < cache.width; ++j)
                        mean += row[j] * slice.coef[j];
                    const double z = (cache.outcome[r] - mean) * inv_sigma;
                    subtotal += -kLogSqrt2Pi - log_sigma - 0.5 * z * z;
                }
                break;
            }
            case Family::Poisson: {
                for (std::size_t r = 0; r < cache.n; ++r, row += cache.width) {
                    double eta = 0.0;
                    for (std::size_t j = 0; j < cache.width; ++j)
                        eta += row[j] * slice.coef[j];
                    subtotal += cache.outcome[r] * eta - std::exp(eta) - cache.log_gamma[r];
                }
                break;
            }
            case Family::MultinomialLogit: {
                for (std::size_t r = 0; r < cache.n; ++r, row += cache.width) {
                    subtotal += log_dens_multinomial(
                        static_cast<std::size_t>(cache.outcome[r]),
                        std::span<const double>(row, cache.width), slice, cache.n_levels);
                }
                break;
            }
        }
    }
    return total + subtotal;
}

} // namespace attrisk
