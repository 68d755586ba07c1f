// End-to-end acceptance suite.  Each criterion prints exactly one
// PASS/FAIL line; the process exits non-zero if any criterion fails.
//
// usage: acceptance <path-to-attrisk-binary> <path-to-fixtures-dir>

#include "attrisk/density.hpp"
#include "attrisk/draws.hpp"
#include "attrisk/error.hpp"
#include "attrisk/logmath.hpp"
#include "attrisk/oracle.hpp"
#include "attrisk/risk.hpp"
#include "attrisk/rng.hpp"
#include "attrisk/schema.hpp"
#include "attrisk/synthesizers.hpp"

#include "../support/ce_sim.hpp"
#include "../support/nig_reference.hpp"
#include "../support/tmpdir.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <numeric>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <vector>

using namespace attrisk;
namespace fs = std::filesystem;

namespace {

std::string g_binary;
fs::path g_fixtures;
int g_failures = 0;

struct Criterion {
    std::string name;
    std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
    bool ok = true;
    std::string detail;

    explicit Criterion(std::string n) : name(std::move(n)) {}

    void require(bool condition, const std::string& what) {
        if (!condition && ok) {
            ok = false;
            detail = what;
        }
    }

    void finish() {
        const double seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        char timing[32];
        std::snprintf(timing, sizeof timing, "%.1fs", seconds);
        if (ok) {
            std::cout << "PASS  " << name << "  (" << timing << ")\n";
        } else {
            std::cout << "FAIL  " << name << "  (" << timing << "): " << detail << "\n";
            ++g_failures;
        }
    }

    double elapsed() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    }
};

int run_cli(const std::string& args, const fs::path& log) {
    const std::string cmd = g_binary + " " + args + " >" + log.string() + " 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

// --------------------------------------------------------------------------
// 1. Oracle equivalence on the frozen n=20 reference instance.

void criterion_oracle_equivalence() {
    Criterion c("1 oracle-equivalence (n=20, G=5, H=2000 vs M=2000, tol 0.02)");

    const PlanFile plan_file = load_plan_file(g_fixtures / "ref20_plan.json");
    const Dataset data = load_dataset(g_fixtures / "ref20.csv", plan_file.columns);
    Dataset syn = load_dataset(g_fixtures / "ref20_syn.csv", plan_file.columns);
    syn.synthetic_index = 0;
    const std::vector<Dataset> synthetic = {syn};
    const ResolvedPlan plan = validate_plan(plan_file.plan, data);

    DrawsSet draws;
    draws.steps = {fit_linear_conjugate(data, plan.steps[0], {}, 2000, 314159)};

    const std::size_t record = 0;
    const GuessGrid grid = build_guess_grid(data, record, plan, GridConfig{{5}, 0.1});
    const RiskResult is_result =
        evaluate_record(record, data, synthetic, draws, plan, grid, 2000);
    const OracleEstimate oracle =
        brute_force_probability(data, synthetic, record, grid, plan, {}, 2000, 555);

    c.require(is_result.joint.size() == 5 && oracle.normalized.size() == 5, "expected 5 cells");
    double worst = 0.0;
    for (std::size_t cell = 0; cell < oracle.normalized.size(); ++cell)
        worst = std::max(worst, std::fabs(is_result.joint[cell] - oracle.normalized[cell]));
    c.require(worst <= 0.02,
              "max |IS - oracle| = " + format_double(worst) + " exceeds 0.02");
    c.require(c.elapsed() < 60.0, "runtime exceeded 60 s");
    c.finish();
}

// --------------------------------------------------------------------------
// 2. Degenerate posterior draws give an exactly uniform joint.

void criterion_degenerate_uniformity() {
    Criterion c("2 degenerate-posterior uniformity (bit-exact 1/15)");

    const Dataset full = ce_sim::simulate(40, 907);
    Dataset data = ce_sim::select_with_roles(full, {{"LogExpenditure", ColumnRole::Synthesized},
                                                    {"LogIncome", ColumnRole::Synthesized}});
    SynthesisPlan spec;
    spec.steps = {{"LogExpenditure", {}, Family::Normal},
                  {"LogIncome", {"LogExpenditure"}, Family::Normal}};
    const ResolvedPlan plan = validate_plan(spec, data);

    DrawsSet draws;
    DrawsMatrix step1{0, {"(Intercept)", "sigma"}, 0, {}, -1.0, {}};
    DrawsMatrix step2{1, {"(Intercept)", "LogExpenditure", "sigma"}, 0, {}, -1.0, {}};
    for (int d = 0; d < 60; ++d) {
        step1.values.insert(step1.values.end(), {8.5, 0.9});
        step2.values.insert(step2.values.end(), {1.5, 0.95, 1.0});
    }
    step1.n_draws = step2.n_draws = 60;
    draws.steps = {step1, step2};

    const auto synthetic = simulate_synthetic(plan, data, draws, 1, 1, 17);
    const GuessGrid grid = build_guess_grid(data, 12, plan, GridConfig{{5, 3}, 0.1});
    const RiskResult result = evaluate_record(12, data, synthetic, draws, plan, grid, 60);

    const double uniform = 1.0 / 15.0;
    c.require(result.joint.size() == 15, "expected 15 cells");
    for (double p : result.joint)
        c.require(p == uniform, "cell probability " + format_double(p) +
                                    " != " + format_double(uniform) + " exactly");
    c.require(c.elapsed() < 1.0, "runtime exceeded 1 s");
    c.finish();
}

// --------------------------------------------------------------------------
// 3. Normalization across 100 randomized small instances of all three
//    family plan shapes.

void criterion_normalization_suite() {
    Criterion c("3 normalization suite (100 randomized instances, 3 plan shapes)");
    Rng rng(61803);

    for (int trial = 0; trial < 100 && c.ok; ++trial) {
        const std::size_t n = 8 + static_cast<std::size_t>(rng.uniform() * 32);
        const Dataset full = ce_sim::simulate(n, rng.next_u64());
        Dataset data;
        ResolvedPlan plan;
        DrawsSet draws;
        const std::size_t n_draws = 10 + static_cast<std::size_t>(rng.uniform() * 30);

        auto normal_draws = [&](const ResolvedStep& step) {
            DrawsMatrix m;
            m.names = draws_column_names(step);
            m.n_draws = n_draws;
            for (std::size_t d = 0; d < n_draws; ++d) {
                for (std::size_t j = 0; j < step.design_width; ++j)
                    m.values.push_back(j == 0 ? 8.0 + rng.normal() : rng.normal(0.0, 0.5));
                m.values.push_back(0.3 + 1.7 * rng.uniform()); // sigma
            }
            return m;
        };
        auto poisson_draws = [&](const ResolvedStep& step) {
            DrawsMatrix m;
            m.names = draws_column_names(step);
            m.n_draws = n_draws;
            for (std::size_t d = 0; d < n_draws; ++d)
                for (std::size_t j = 0; j < step.design_width; ++j)
                    m.values.push_back(rng.normal(0.0, j == 0 ? 0.5 : 0.1));
            return m;
        };
        auto multinomial_draws = [&](const ResolvedStep& step) {
            DrawsMatrix m;
            m.names = draws_column_names(step);
            m.n_draws = n_draws;
            const std::size_t width = step.design_width * (step.n_levels - 1);
            for (std::size_t d = 0; d < n_draws; ++d)
                for (std::size_t j = 0; j < width; ++j)
                    m.values.push_back(rng.normal(0.0, 0.4));
            return m;
        };

        switch (trial % 3) {
            case 0: { // one categorical, unsynthesized predictor
                data = ce_sim::select_with_roles(
                    full, {{"LogIncome", ColumnRole::UnsynthesizedPredictor},
                           {"Race", ColumnRole::Synthesized}});
                SynthesisPlan spec;
                spec.steps = {{"Race", {"LogIncome"}, Family::MultinomialLogit}};
                plan = validate_plan(spec, data);
                draws.steps = {multinomial_draws(plan.steps[0])};
                break;
            }
            case 1: { // two continuous, sequential
                data = ce_sim::select_with_roles(
                    full, {{"LogExpenditure", ColumnRole::Synthesized},
                           {"LogIncome", ColumnRole::Synthesized}});
                SynthesisPlan spec;
                spec.steps = {{"LogExpenditure", {}, Family::Normal},
                              {"LogIncome", {"LogExpenditure"}, Family::Normal}};
                plan = validate_plan(spec, data);
                draws.steps = {normal_draws(plan.steps[0]), normal_draws(plan.steps[1])};
                break;
            }
            default: { // continuous then count, shared unsynthesized predictor
                data = ce_sim::select_with_roles(
                    full, {{"Urban", ColumnRole::UnsynthesizedPredictor},
                           {"LogExpenditure", ColumnRole::Synthesized},
                           {"KidsCount", ColumnRole::Synthesized}});
                SynthesisPlan spec;
                spec.steps = {{"LogExpenditure", {"Urban"}, Family::Normal},
                              {"KidsCount", {"LogExpenditure", "Urban"}, Family::Poisson}};
                plan = validate_plan(spec, data);
                draws.steps = {normal_draws(plan.steps[0]), poisson_draws(plan.steps[1])};
                break;
            }
        }
        for (std::size_t s = 0; s < draws.steps.size(); ++s)
            draws.steps[s].step = s;

        const auto synthetic = simulate_synthetic(plan, data, draws, 1, 1, rng.next_u64());
        const std::size_t record = static_cast<std::size_t>(rng.uniform() * n);
        const std::size_t sizes[] = {3, 5, 7, 11};
        GridConfig grid_config;
        grid_config.G = {sizes[static_cast<std::size_t>(rng.uniform() * 4)]};
        const GuessGrid grid = build_guess_grid(data, record, plan, grid_config);
        const std::size_t H = 1 + static_cast<std::size_t>(rng.uniform() * n_draws);
        const RiskResult result =
            evaluate_record(record, data, synthetic, draws, plan, grid, H);

        const double joint_sum =
            std::accumulate(result.joint.begin(), result.joint.end(), 0.0);
        c.require(std::fabs(joint_sum - 1.0) < 1e-9,
                  "trial " + std::to_string(trial) + ": joint sums to " +
                      format_double(joint_sum));
        for (const auto& marginal : result.marginals) {
            const double marginal_sum =
                std::accumulate(marginal.begin(), marginal.end(), 0.0);
            c.require(std::fabs(marginal_sum - 1.0) < 1e-9,
                      "trial " + std::to_string(trial) + ": marginal sums to " +
                          format_double(marginal_sum));
        }

        // Independent axis-sum recomputation of every marginal.
        std::vector<std::size_t> index(grid.axes.size(), 0);
        std::vector<std::vector<double>> axis_sums(grid.axes.size());
        for (std::size_t v = 0; v < grid.axes.size(); ++v)
            axis_sums[v].assign(grid.axes[v].candidates.size(), 0.0);
        for (double p : result.joint) {
            for (std::size_t v = 0; v < grid.axes.size(); ++v)
                axis_sums[v][index[v]] += p;
            for (std::size_t v = grid.axes.size(); v-- > 0;) {
                if (++index[v] < grid.axes[v].candidates.size())
                    break;
                index[v] = 0;
            }
        }
        for (std::size_t v = 0; v < grid.axes.size(); ++v)
            for (std::size_t i = 0; i < axis_sums[v].size(); ++i)
                c.require(std::fabs(axis_sums[v][i] - result.marginals[v][i]) < 1e-12,
                          "trial " + std::to_string(trial) + ": marginal != axis sum");
    }
    c.finish();
}

// --------------------------------------------------------------------------
// 4. Log-space survival at survey scale.

void criterion_log_space_scale() {
    Criterion c("4 log-space scale (n=5126, H=50, G=11x11, 100 records, < 5 min)");

    const Dataset full = ce_sim::simulate(5126, 424242);
    Dataset data = ce_sim::select_with_roles(full, {{"LogExpenditure", ColumnRole::Synthesized},
                                                    {"LogIncome", ColumnRole::Synthesized}});
    SynthesisPlan spec;
    spec.steps = {{"LogExpenditure", {}, Family::Normal},
                  {"LogIncome", {"LogExpenditure"}, Family::Normal}};
    const ResolvedPlan plan = validate_plan(spec, data);

    DrawsSet draws;
    draws.steps = {fit_linear_conjugate(data, plan.steps[0], {}, 2000, 11),
                   fit_linear_conjugate(data, plan.steps[1], {}, 2000, 12)};
    const auto synthetic = simulate_synthetic(plan, data, draws, 1, 1, 13);

    // Every per-draw synthetic-data log likelihood is finite and negative;
    // a raw product of 2 * 5126 densities would have underflowed to zero.
    const ThetaSelector selector(draws, plan, 50);
    const GEvaluator evaluator(plan, synthetic);
    for (std::size_t h = 0; h < 50; ++h) {
        const double value = evaluator(selector.at(h));
        c.require(std::isfinite(value) && value < 0.0,
                  "log g at draw " + std::to_string(h) + " = " + format_double(value));
    }

    EvalConfig config;
    config.H = 50;
    config.grid.G = {11, 11};
    config.records.resize(100);
    std::iota(config.records.begin(), config.records.end(), std::size_t{0});
    const RiskReport report = evaluate_all(data, synthetic, draws, plan, config);
    c.require(report.results.size() == 100, "expected 100 results");
    for (const RiskResult& result : report.results)
        for (double p : result.joint)
            c.require(std::isfinite(p) && p >= 0.0 && p <= 1.0,
                      "record " + std::to_string(result.record) + " has probability " +
                          format_double(p));
    c.require(c.elapsed() < 300.0, "runtime exceeded 5 min");
    c.finish();
}

// --------------------------------------------------------------------------
// 5. Sampler validity.

void criterion_sampler_validity() {
    Criterion c("5 sampler validity (conjugate 1e5 draws within 1%; poisson within 3 sd)");

    // Conjugate draws against the closed-form posterior.
    {
        Dataset data;
        data.columns = {{"x", ColumnKind::Continuous, {}, ColumnRole::UnsynthesizedPredictor},
                        {"y", ColumnKind::Continuous, {}, ColumnRole::Synthesized}};
        const std::size_t n = 400;
        data.cells.assign(2, std::vector<double>(n));
        Rng rng(5150);
        for (std::size_t i = 0; i < n; ++i) {
            data.cells[0][i] = rng.normal();
            data.cells[1][i] = 1.0 + 2.0 * data.cells[0][i] + rng.normal(0.0, 0.5);
        }
        const ModelSpec spec{"y", {"x"}, Family::Normal};
        const ResolvedStep step = resolve_step(spec, data.columns);

        nig_reference::Matrix X(n, std::vector<double>(2));
        std::vector<double> y(n);
        for (std::size_t i = 0; i < n; ++i) {
            X[i][0] = 1.0;
            X[i][1] = data.cells[0][i];
            y[i] = data.cells[1][i];
        }
        const nig_reference::Posterior ref = nig_reference::posterior(X, y, 2.0, 1.0, 1.0);

        const std::size_t n_draws = 100000;
        const DrawsMatrix draws = fit_linear_conjugate(data, spec, {}, n_draws, 8675309);
        std::vector<double> mean(2, 0.0);
        for (std::size_t d = 0; d < n_draws; ++d)
            for (std::size_t j = 0; j < 2; ++j)
                mean[j] += draws.at(d, j);
        for (double& m : mean)
            m /= static_cast<double>(n_draws);
        std::vector<std::vector<double>> cov(2, std::vector<double>(2, 0.0));
        for (std::size_t d = 0; d < n_draws; ++d)
            for (std::size_t j = 0; j < 2; ++j)
                for (std::size_t k = 0; k < 2; ++k)
                    cov[j][k] += (draws.at(d, j) - mean[j]) * (draws.at(d, k) - mean[k]);
        for (auto& row : cov)
            for (double& value : row)
                value /= static_cast<double>(n_draws - 1);

        double mean_err = 0.0, mean_ref = 0.0, cov_err = 0.0, cov_ref = 0.0;
        for (std::size_t j = 0; j < 2; ++j) {
            mean_err += (mean[j] - ref.mean[j]) * (mean[j] - ref.mean[j]);
            mean_ref += ref.mean[j] * ref.mean[j];
            for (std::size_t k = 0; k < 2; ++k) {
                cov_err += (cov[j][k] - ref.coef_cov[j][k]) * (cov[j][k] - ref.coef_cov[j][k]);
                cov_ref += ref.coef_cov[j][k] * ref.coef_cov[j][k];
            }
        }
        c.require(std::sqrt(mean_err / mean_ref) < 0.01,
                  "conjugate mean off by " + format_double(std::sqrt(mean_err / mean_ref)));
        c.require(std::sqrt(cov_err / cov_ref) < 0.01,
                  "conjugate covariance off by " + format_double(std::sqrt(cov_err / cov_ref)));
    }

    // Metropolis Poisson fit recovers the simulation truth.
    {
        Dataset data;
        data.columns = {{"x", ColumnKind::Continuous, {}, ColumnRole::UnsynthesizedPredictor},
                        {"y", ColumnKind::Count, {}, ColumnRole::Synthesized}};
        const std::size_t n = 2000;
        data.cells.assign(2, std::vector<double>(n));
        Rng rng(90210);
        for (std::size_t i = 0; i < n; ++i) {
            data.cells[0][i] = rng.normal();
            data.cells[1][i] = static_cast<double>(
                rng.poisson(std::exp(0.3 - 0.2 * data.cells[0][i])));
        }
        MetropolisConfig config;
        config.n_draws = 4000;
        config.burn_in = 3000;
        const DrawsMatrix draws =
            fit_glm_metropolis(data, ModelSpec{"y", {"x"}, Family::Poisson}, {}, config, 7777);
        const double truth[2] = {0.3, -0.2};
        for (std::size_t j = 0; j < 2; ++j) {
            double mean = 0.0;
            for (std::size_t d = 0; d < draws.n_draws; ++d)
                mean += draws.at(d, j);
            mean /= static_cast<double>(draws.n_draws);
            double var = 0.0;
            for (std::size_t d = 0; d < draws.n_draws; ++d)
                var += (draws.at(d, j) - mean) * (draws.at(d, j) - mean);
            var /= static_cast<double>(draws.n_draws - 1);
            c.require(std::fabs(mean - truth[j]) < 3.0 * std::sqrt(var),
                      "poisson coefficient " + std::to_string(j) + " mean " +
                          format_double(mean) + " not within 3 sd of " +
                          format_double(truth[j]));
        }
    }
    c.finish();
}

// --------------------------------------------------------------------------
// 6. CLI defaults conformance on the CE-archetype plans.

void criterion_defaults_conformance() {
    Criterion c("6 defaults conformance (G=11, H=50, grids, priors 1/6 1/121 1/88 1/8)");

    test_support::TempDir dir("acceptance_defaults");
    const Dataset full = ce_sim::simulate(500, 20190401);
    const fs::path data_csv = dir.path / "ce.csv";
    write_dataset(full, data_csv);

    struct Case {
        std::string name;
        PlanFile plan;
        std::vector<std::size_t> grid_sizes;
        double joint_prior;
    };
    const std::vector<Case> cases = {
        {"race", ce_sim::race_plan(full), {6}, 1.0 / 6.0},
        {"two_continuous", ce_sim::two_continuous_plan(full), {11, 11}, 1.0 / 121.0},
        {"count", ce_sim::count_plan(full), {11, 8}, 1.0 / 88.0},
    };

    for (const Case& test_case : cases) {
        if (!c.ok)
            break;
        const fs::path plan_json = dir.path / (test_case.name + "_plan.json");
        write_plan_file(test_case.plan, plan_json);
        const fs::path out = dir.path / test_case.name;

        int code = run_cli("synthesize --data " + data_csv.string() + " --plan " +
                               plan_json.string() + " --out " + out.string() + " --seed 5",
                           dir.path / (test_case.name + "_syn.log"));
        c.require(code == 0, test_case.name + ": synthesize exited " + std::to_string(code));
        if (!c.ok)
            break;

        // No --G or --H flags: defaults G=11 per continuous variable, H=50.
        code = run_cli("risk --data " + data_csv.string() + " --plan " + plan_json.string() +
                           " --syndata " + (out / "synthetic_1.csv").string() + " --draws " +
                           out.string() + " --out " + out.string() +
                           " --records 0 --records 1 --records 2 --records 3",
                       dir.path / (test_case.name + "_risk.log"));
        c.require(code == 0, test_case.name + ": risk exited " + std::to_string(code));
        if (!c.ok)
            break;

        std::ifstream meta_in(out / "report_meta.json");
        nlohmann::json meta = nlohmann::json::parse(meta_in);
        c.require(meta.at("H").get<std::size_t>() == 50, test_case.name + ": H != 50");
        c.require(meta.at("grid_sizes").get<std::vector<std::size_t>>() == test_case.grid_sizes,
                  test_case.name + ": unexpected grid sizes");
        const double joint = meta.at("uniform_prior_joint").get<double>();
        c.require(joint == test_case.joint_prior,
                  test_case.name + ": joint prior " + format_double(joint));
        const auto marginals = meta.at("uniform_prior_marginals").get<std::vector<double>>();
        for (std::size_t v = 0; v < marginals.size(); ++v)
            c.require(marginals[v] == 1.0 / static_cast<double>(test_case.grid_sizes[v]),
                      test_case.name + ": marginal prior mismatch");
    }

    // The continuous default grid follows the 0.9y..1.1y rule with the
    // truth dead center.
    Dataset data = ce_sim::select_with_roles(full, {{"LogExpenditure", ColumnRole::Synthesized},
                                                    {"LogIncome", ColumnRole::Synthesized}});
    SynthesisPlan spec;
    spec.steps = {{"LogExpenditure", {}, Family::Normal},
                  {"LogIncome", {"LogExpenditure"}, Family::Normal}};
    const ResolvedPlan plan = validate_plan(spec, data);
    const GuessGrid grid = build_guess_grid(data, 42, plan, {});
    for (std::size_t v = 0; v < 2; ++v) {
        const GridAxis& axis = grid.axes[v];
        const double truth = data.cell(axis.column, 42);
        c.require(axis.candidates.size() == 11, "default G is not 11");
        c.require(axis.truth_index == 5 && axis.candidates[5] == truth,
                  "truth is not the grid center");
        c.require(std::fabs(axis.candidates.front() - 0.9 * truth) < 1e-12 &&
                      std::fabs(axis.candidates.back() - 1.1 * truth) < 1e-12,
                  "grid does not span 0.9y..1.1y");
    }
    c.finish();
}

// --------------------------------------------------------------------------
// 7. Qualitative CE-archetype check: median truth probability below the
//    1/121 uniform prior, three independent seeds.

void criterion_ce_archetype_median() {
    Criterion c("7 CE-archetype median below prior (n=500, 3 seeds)");

    for (std::uint64_t seed : {1001u, 2002u, 3003u}) {
        if (!c.ok)
            break;
        const Dataset full = ce_sim::simulate(500, seed);
        Dataset data = ce_sim::select_with_roles(
            full, {{"LogExpenditure", ColumnRole::Synthesized},
                   {"LogIncome", ColumnRole::Synthesized}});
        SynthesisPlan spec;
        spec.steps = {{"LogExpenditure", {}, Family::Normal},
                      {"LogIncome", {"LogExpenditure"}, Family::Normal}};
        const ResolvedPlan plan = validate_plan(spec, data);

        DrawsSet draws;
        draws.steps = {fit_linear_conjugate(data, plan.steps[0], {}, 2000, seed + 1),
                       fit_linear_conjugate(data, plan.steps[1], {}, 2000, seed + 2)};
        const auto synthetic = simulate_synthetic(plan, data, draws, 1, 1, seed + 3);

        EvalConfig config; // defaults: G = 11 per continuous variable, H = 50
        const RiskReport report = evaluate_all(data, synthetic, draws, plan, config);
        const RiskSummary summary = summarize(report);
        c.require(summary.median_truth_prob < 1.0 / 121.0,
                  "seed " + std::to_string(seed) + ": median " +
                      format_double(summary.median_truth_prob) + " not below " +
                      format_double(1.0 / 121.0));
    }
    c.finish();
}

// --------------------------------------------------------------------------
// 8. Byte-identical reports across thread counts.

void criterion_thread_determinism() {
    Criterion c("8 determinism across --threads (byte-identical reports)");

    test_support::TempDir dir("acceptance_threads");
    const Dataset full = ce_sim::simulate(200, 777);
    const fs::path data_csv = dir.path / "ce.csv";
    write_dataset(full, data_csv);
    const fs::path plan_json = dir.path / "plan.json";
    write_plan_file(ce_sim::count_plan(full), plan_json);

    auto pipeline = [&](const std::string& tag, const std::string& threads) {
        const fs::path out = dir.path / tag;
        int code = run_cli("synthesize --data " + data_csv.string() + " --plan " +
                               plan_json.string() + " --out " + out.string() + " --seed 99",
                           dir.path / (tag + "_syn.log"));
        c.require(code == 0, tag + ": synthesize exited " + std::to_string(code));
        code = run_cli("risk --data " + data_csv.string() + " --plan " + plan_json.string() +
                           " --syndata " + (out / "synthetic_1.csv").string() + " --draws " +
                           out.string() + " --out " + out.string() + " --seed 99 --threads " +
                           threads,
                       dir.path / (tag + "_risk.log"));
        c.require(code == 0, tag + ": risk exited " + std::to_string(code));
        return std::pair{slurp(out / "report.csv"), slurp(out / "report_meta.json")};
    };

    const auto serial = pipeline("serial", "1");
    const auto parallel = pipeline("parallel", "2");
    c.require(!serial.first.empty(), "empty report");
    c.require(serial.first == parallel.first, "report.csv differs across thread counts");
    c.require(serial.second == parallel.second, "report_meta.json differs across thread counts");
    c.finish();
}

} // namespace

int main(int argc, char** argv) {
    if (argc < 3) {
        std::cerr << "usage: acceptance <attrisk-binary> <fixtures-dir>\n";
        return 2;
    }
    g_binary = argv[1];
    g_fixtures = argv[2];

    criterion_oracle_equivalence();
    criterion_degenerate_uniformity();
    criterion_normalization_suite();
    criterion_log_space_scale();
    criterion_sampler_validity();
    criterion_defaults_conformance();
    criterion_ce_archetype_median();
    criterion_thread_determinism();

    if (g_failures == 0) {
        std::cout << "all 8 criteria passed\n";
        return 0;
    }
    std::cout << g_failures << " criteria failed\n";
    return 1;
}
