#pragma once

#include "attrisk/draws.hpp"
#include "attrisk/schema.hpp"

#include <span>
#include <vector>

namespace attrisk {

/// Parameter slice for one plan step at one draw index.  For
/// multinomial-logit the coefficient span holds k-1 contiguous blocks of
/// design_width, levels 2..k; level 1 is the zero baseline.
struct ThetaStep {
    std::span<const double> coef;
    double sigma = 0.0; // normal steps only, > 0
};

/// One common draw across every plan step.
struct ThetaRow {
    std::vector<ThetaStep> steps;
};

/// Picks H evenly strided draw rows per step (anchored at the chain end)
/// and serves them as ThetaRow views.  The draws set must outlive the
/// selector.
class ThetaSelector {
  public:
    ThetaSelector(const DrawsSet& draws, const ResolvedPlan& plan, std::size_t n_take);

    std::size_t size() const { return n_take_; }
    ThetaRow at(std::size_t h) const;

  private:
    const DrawsSet* draws_;
    const ResolvedPlan* plan_;
    std::size_t n_take_;
    std::vector<std::vector<std::size_t>> indices_; // per step
};

/// log normal density of y with mean x'beta and the slice's sigma.
double log_dens_normal(double y, std::span<const double> x, const ThetaStep& theta);

/// log Poisson mass at count y with rate exp(x'beta); y must be a
/// non-negative integer.
double log_dens_poisson(double y, std::span<const double> x, const ThetaStep& theta);

/// log softmax component y (1-based level) of logits (0, x'b2, .., x'bk).
double log_dens_multinomial(std::size_t y, std::span<const double> x, const ThetaStep& theta,
                            std::size_t n_levels);

/// Log density of one outcome cell under its step's family.
double log_dens_step(const ResolvedStep& step, double y, std::span<const double> x,
                     const ThetaStep& theta);

/// log of the probability of simulating the released synthetic data given
/// theta: the sum over datasets, records, and steps of each synthetic
/// outcome's log density given its (synthetic / confidential) predictors.
/// Everything stays in log space; the raw product would underflow at
/// realistic sizes.
double log_g(const ResolvedPlan& plan, std::span<const Dataset> synthetic, const ThetaRow& theta);

/// One record's additive contribution to log_g.
double log_g_record(const ResolvedPlan& plan, std::span<const Dataset> synthetic,
                    std::size_t record, const ThetaRow& theta);

/// Design rows (one per plan step) for the target record with the
/// synthesized columns overlaid by `values`; unsynthesized predictors
/// keep their confidential values.
std::vector<std::vector<double>> guess_designs(const ResolvedPlan& plan,
                                               const Dataset& confidential, std::size_t record,
                                               std::span<const double> values);

/// Sum of per-step log densities of `values` given prebuilt design rows.
double seq_log_dens(const ResolvedPlan& plan, std::span<const std::vector<double>> designs,
                    std::span<const double> values, const ThetaRow& theta);

/// Sequential log density of `values` (one entry per synthesized
/// variable, plan order) for the target record: later steps condition on
/// the supplied values of earlier synthesized variables, and
/// unsynthesized predictors always enter at their confidential values.
/// log_f evaluates a guess; log_f_star evaluates the truth through the
/// same code path, so guess == truth gives bit-equal results.
double log_f(const ResolvedPlan& plan, std::span<const double> values,
             const Dataset& confidential, std::size_t record, const ThetaRow& theta);
double log_f_star(const ResolvedPlan& plan, const Dataset& confidential, std::size_t record,
                  const ThetaRow& theta);

/// Caches design matrices and outcome vectors for the synthetic datasets
/// so repeated log_g evaluation over many draws is a dot-product sweep.
class GEvaluator {
  public:
    GEvaluator(const ResolvedPlan& plan, std::span<const Dataset> synthetic);

    double operator()(const ThetaRow& theta) const;

  private:
    struct StepCache {
        Family family;
        std::size_t width = 0;
        std::size_t n_levels = 0;
        std::vector<double> design;    // row-major n x width
        std::vector<double> outcome;   // n
        std::vector<double> log_gamma; // lgamma(y+1), poisson only
        std::size_t n = 0;
    };
    std::vector<StepCache> steps_; // dataset-major: for each dataset, each plan step
};

} // namespace attrisk
