#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "attrisk/error.hpp"
#include "attrisk/oracle.hpp"
#include "attrisk/risk.hpp"
#include "attrisk/rng.hpp"
#include "attrisk/schema.hpp"
#include "attrisk/synthesizers.hpp"

#include "support/nig_reference.hpp"

#include <algorithm>
#include <cmath>

using namespace attrisk;

namespace {

struct Instance {
    Dataset data;
    ResolvedPlan plan;
    DrawsSet draws;
    std::vector<Dataset> synthetic;

    Instance(std::size_t n, std::uint64_t seed, std::size_t n_draws) {
        data.columns = {{"y", ColumnKind::Continuous, {}, ColumnRole::Synthesized}};
        data.cells.assign(1, std::vector<double>(n));
        Rng rng(seed);
        for (std::size_t i = 0; i < n; ++i)
            data.cells[0][i] = rng.normal(10.0, 1.0);
        SynthesisPlan spec;
        spec.steps = {{"y", {}, Family::Normal}};
        plan = validate_plan(spec, data);
        draws.steps = {fit_linear_conjugate(data, plan.steps[0], {}, n_draws, seed + 1)};
        synthetic = simulate_synthetic(plan, data, draws, 1, 1, seed + 2);
    }
};

} // namespace

TEST_CASE("refitting with the truth reproduces the original posterior draws") {
    Instance fx(20, 31, 500);
    const std::vector<double> truth = {fx.data.cell(0, 6)};
    const DrawsSet refit = refit_posterior(fx.data, 6, truth, fx.plan, {}, 500, 77);
    const DrawsMatrix original = fit_linear_conjugate(fx.data, fx.plan.steps[0], {}, 500,
                                                      derive_seed(77, 0));
    CHECK(refit.steps[0].values == original.values); // same data, same seed path
}

TEST_CASE("refit posterior parameters match an independent closed-form computation") {
    Instance fx(20, 32, 100);
    const double guess = 9.3;
    Dataset patched = fx.data;
    patched.cells[0][4] = guess;

    const NigPosterior posterior = linear_posterior(patched, fx.plan.steps[0], {});

    nig_reference::Matrix X(20, std::vector<double>{1.0});
    std::vector<double> y = patched.cells[0];
    const nig_reference::Posterior ref = nig_reference::posterior(X, y, 2.0, 1.0, 1.0);
    CHECK(posterior.mean[0] == doctest::Approx(ref.mean[0]).epsilon(1e-12));
    CHECK(posterior.a == ref.a);
    CHECK(posterior.b == doctest::Approx(ref.b).epsilon(1e-12));
}

TEST_CASE("distinct guesses move the refit posterior mean") {
    Instance fx(20, 33, 100);
    const DrawsSet low = refit_posterior(fx.data, 2, std::vector<double>{9.0}, fx.plan, {}, 400, 5);
    const DrawsSet high =
        refit_posterior(fx.data, 2, std::vector<double>{11.0}, fx.plan, {}, 400, 5);
    double mean_low = 0.0, mean_high = 0.0;
    for (std::size_t d = 0; d < 400; ++d) {
        mean_low += low.steps[0].at(d, 0);
        mean_high += high.steps[0].at(d, 0);
    }
    CHECK(mean_low / 400.0 < mean_high / 400.0);
}

TEST_CASE("the oracle ignores the order of non-target records") {
    Instance fx(24, 34, 100);
    Dataset permuted = fx.data;
    // Rotate every row except the target record 0.
    std::rotate(permuted.cells[0].begin() + 1, permuted.cells[0].begin() + 5,
                permuted.cells[0].end());
    const NigPosterior a = linear_posterior(fx.data, fx.plan.steps[0], {});
    const NigPosterior b = linear_posterior(permuted, fx.plan.steps[0], {});
    CHECK(a.mean[0] == doctest::Approx(b.mean[0]).epsilon(1e-12));
    CHECK(a.b == doctest::Approx(b.b).epsilon(1e-12));
}

TEST_CASE("a grid holding only the truth normalizes to exactly one") {
    Instance fx(20, 35, 200);
    GuessGrid grid;
    grid.axes = {{0, {fx.data.cell(0, 9)}, 0}};
    const OracleEstimate estimate =
        brute_force_probability(fx.data, fx.synthetic, 9, grid, fx.plan, {}, 200, 11);
    REQUIRE(estimate.normalized.size() == 1);
    CHECK(estimate.normalized[0] == 1.0);
    CHECK(std::isfinite(estimate.log_raw[0]));
}

TEST_CASE("oracle estimates are reproducible across seeds to 0.01 per cell") {
    Instance fx(20, 36, 100);
    const GuessGrid grid = build_guess_grid(fx.data, 5, fx.plan, GridConfig{{5}, 0.1});
    const OracleEstimate a =
        brute_force_probability(fx.data, fx.synthetic, 5, grid, fx.plan, {}, 2000, 1001);
    const OracleEstimate b =
        brute_force_probability(fx.data, fx.synthetic, 5, grid, fx.plan, {}, 2000, 2002);
    REQUIRE(a.normalized.size() == b.normalized.size());
    double total = 0.0;
    for (std::size_t c = 0; c < a.normalized.size(); ++c) {
        CHECK(std::fabs(a.normalized[c] - b.normalized[c]) < 0.01);
        total += a.normalized[c];
    }
    CHECK(std::fabs(total - 1.0) < 1e-9);
}

TEST_CASE("glm steps are rejected") {
    const Dataset data = [] {
        Dataset d;
        d.columns = {{"y", ColumnKind::Count, {}, ColumnRole::Synthesized}};
        d.cells = {{1.0, 2.0, 0.0, 3.0}};
        return d;
    }();
    SynthesisPlan spec;
    spec.steps = {{"y", {}, Family::Poisson}};
    const ResolvedPlan plan = validate_plan(spec, data);
    GuessGrid grid;
    grid.axes = {{0, {0.0, 1.0, 2.0, 3.0}, 1}};
    CHECK_THROWS_AS(
        brute_force_probability(data, std::vector<Dataset>{data}, 0, grid, plan, {}, 10, 1),
        Error);
}

TEST_CASE("importance sampling agrees with the brute-force oracle") {
    Instance fx(20, 37, 1200);
    const std::size_t record = 7;
    const GuessGrid grid = build_guess_grid(fx.data, record, fx.plan, GridConfig{{5}, 0.1});

    const RiskResult is_result =
        evaluate_record(record, fx.data, fx.synthetic, fx.draws, fx.plan, grid, 1200);
    const OracleEstimate oracle =
        brute_force_probability(fx.data, fx.synthetic, record, grid, fx.plan, {}, 1200, 99);

    REQUIRE(is_result.joint.size() == oracle.normalized.size());
    for (std::size_t c = 0; c < oracle.normalized.size(); ++c)
        CHECK(std::fabs(is_result.joint[c] - oracle.normalized[c]) < 0.03);
}

TEST_CASE("the sequential two-step path also agrees with the oracle") {
    Dataset data;
    data.columns = {{"y1", ColumnKind::Continuous, {}, ColumnRole::Synthesized},
                    {"y2", ColumnKind::Continuous, {}, ColumnRole::Synthesized}};
    const std::size_t n = 20;
    data.cells.assign(2, std::vector<double>(n));
    Rng rng(38);
    for (std::size_t i = 0; i < n; ++i) {
        data.cells[0][i] = rng.normal(10.0, 1.0);
        data.cells[1][i] = 2.0 + 0.8 * data.cells[0][i] + rng.normal(0.0, 0.7);
    }
    SynthesisPlan spec;
    spec.steps = {{"y1", {}, Family::Normal}, {"y2", {"y1"}, Family::Normal}};
    const ResolvedPlan plan = validate_plan(spec, data);
    DrawsSet draws;
    draws.steps = {fit_linear_conjugate(data, plan.steps[0], {}, 1500, 39),
                   fit_linear_conjugate(data, plan.steps[1], {}, 1500, 40)};
    const auto synthetic = simulate_synthetic(plan, data, draws, 1, 1, 41);

    const std::size_t record = 3;
    const GuessGrid grid = build_guess_grid(data, record, plan, GridConfig{{3, 3}, 0.1});
    const RiskResult is_result =
        evaluate_record(record, data, synthetic, draws, plan, grid, 1500);
    const OracleEstimate oracle =
        brute_force_probability(data, synthetic, record, grid, plan, {}, 1500, 42);

    REQUIRE(is_result.joint.size() == 9);
    for (std::size_t c = 0; c < 9; ++c)
        CHECK(std::fabs(is_result.joint[c] - oracle.normalized[c]) < 0.03);
}
