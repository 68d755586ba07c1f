#include "attrisk/draws.hpp"
#include "attrisk/error.hpp"
#include "attrisk/risk.hpp"
#include "attrisk/schema.hpp"
#include "attrisk/synthesizers.hpp"

#include "plots.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using namespace attrisk;

namespace {

int exit_code_for(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::Schema:
        case ErrorKind::Parse:
        case ErrorKind::Domain:
        case ErrorKind::Order:
        case ErrorKind::Type:
        case ErrorKind::Size:
        case ErrorKind::Io:
            return 2;
        case ErrorKind::Singular:
            return 3;
        case ErrorKind::Numeric:
        case ErrorKind::Internal:
            return 4;
    }
    return 4;
}

// Outputs are staged as .tmp files and renamed together, so a failure
// part-way never leaves a partial primary output behind.
class StagedWriter {
  public:
    ~StagedWriter() {
        for (const auto& [tmp, final_path] : staged_) {
            std::error_code ec;
            fs::remove(tmp, ec);
        }
    }

    fs::path stage(const fs::path& final_path) {
        fs::path tmp = final_path;
        tmp += ".tmp";
        staged_.emplace_back(tmp, final_path);
        return tmp;
    }

    void commit() {
        for (const auto& [tmp, final_path] : staged_)
            fs::rename(tmp, final_path);
        staged_.clear();
    }

  private:
    std::vector<std::pair<fs::path, fs::path>> staged_;
};

// Console display only; file outputs keep full 17-digit precision.
std::string display(double value) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4g", value);
    return buf;
}

std::uint64_t resolve_seed(const CLI::Option* seed_opt, std::uint64_t seed_flag) {
    if (seed_opt->count() > 0)
        return seed_flag;
    if (const char* env = std::getenv("ATTRISK_SEED"))
        return std::strtoull(env, nullptr, 10);
    return 1;
}

struct CommonPaths {
    std::string data;
    std::string plan;
    std::string out;
};

// Fixed fit depth: plenty for the default H = 50 and for m well past 1.
constexpr std::size_t kFitDraws = 2000;

int run_synthesize(const CommonPaths& paths, const std::string& draws_dir_flag, std::size_t m,
                   std::size_t thin, std::uint64_t seed) {
    const PlanFile plan_file = load_plan_file(paths.plan);
    const Dataset data = load_dataset(paths.data, plan_file.columns);
    const ResolvedPlan plan = validate_plan(plan_file.plan, data);
    if (m < 1)
        throw Error(ErrorKind::Size, "m must be >= 1");
    if (thin < 1)
        throw Error(ErrorKind::Size, "thin must be >= 1");

    const LinearPrior linear_prior;
    const GlmPrior glm_prior;
    MetropolisConfig mcmc;
    mcmc.n_draws = kFitDraws;

    DrawsSet draws;
    try {
        draws = fit_plan(data, plan, linear_prior, glm_prior, mcmc, seed);
    } catch (const Error& e) {
        if (e.kind() == ErrorKind::Singular)
            throw;
        throw Error(ErrorKind::Singular, std::string("fit failed: ") + e.what());
    }

    for (std::size_t s = 0; s < plan.steps.size(); ++s) {
        const ResolvedStep& step = plan.steps[s];
        std::cout << "step " << (s + 1) << ": " << step.spec.outcome << " ["
                  << to_string(step.spec.family) << "] draws=" << draws.steps[s].n_draws;
        if (draws.steps[s].acceptance_rate >= 0.0)
            std::cout << " acceptance=" << display(draws.steps[s].acceptance_rate);
        std::cout << '\n';
        for (const std::string& warning : draws.steps[s].warnings)
            std::cerr << "warning: " << warning << '\n';
    }

    const std::vector<Dataset> synthetic = simulate_synthetic(plan, data, draws, m, thin, seed);

    const fs::path out_dir(paths.out);
    const fs::path draws_dir = draws_dir_flag.empty() ? out_dir : fs::path(draws_dir_flag);
    fs::create_directories(out_dir);
    fs::create_directories(draws_dir);

    StagedWriter writer;
    for (std::size_t l = 0; l < synthetic.size(); ++l)
        write_dataset(synthetic[l],
                      writer.stage(out_dir / ("synthetic_" + std::to_string(l + 1) + ".csv")));
    for (std::size_t s = 0; s < draws.steps.size(); ++s)
        write_draws(draws.steps[s],
                    writer.stage(draws_dir / ("draws_step" + std::to_string(s + 1) + ".csv")));
    writer.commit();
    std::cout << "wrote " << synthetic.size() << " synthetic dataset(s) and "
              << draws.steps.size() << " draws file(s) to " << out_dir.string() << '\n';
    return 0;
}

int run_risk(const CommonPaths& paths, const std::vector<std::string>& syndata_paths,
             const std::string& draws_dir, std::size_t H, const std::vector<std::size_t>& G,
             double radius, const std::vector<std::size_t>& records, bool dump_joint,
             std::size_t threads, std::uint64_t seed) {
    const PlanFile plan_file = load_plan_file(paths.plan);
    const Dataset data = load_dataset(paths.data, plan_file.columns);
    const ResolvedPlan plan = validate_plan(plan_file.plan, data);

    if (syndata_paths.empty())
        throw Error(ErrorKind::Size, "at least one --syndata file is required");
    std::vector<Dataset> synthetic;
    for (std::size_t l = 0; l < syndata_paths.size(); ++l) {
        Dataset d = load_dataset(syndata_paths[l], plan_file.columns);
        if (d.n_rows() != data.n_rows())
            throw Error(ErrorKind::Size, "'" + syndata_paths[l] + "' has " +
                                             std::to_string(d.n_rows()) + " rows, confidential has " +
                                             std::to_string(data.n_rows()));
        d.synthetic_index = l;
        synthetic.push_back(std::move(d));
    }

    DrawsSet draws;
    for (std::size_t s = 0; s < plan.steps.size(); ++s) {
        const fs::path file = fs::path(draws_dir) / ("draws_step" + std::to_string(s + 1) + ".csv");
        DrawsMatrix matrix = read_draws(file, plan.steps[s]);
        matrix.step = s;
        draws.steps.push_back(std::move(matrix));
    }
    if (H < 1)
        throw Error(ErrorKind::Size, "H must be >= 1");
    if (H > draws.min_draws())
        throw Error(ErrorKind::Size, "H exceeds available draws (" + std::to_string(H) + " > " +
                                         std::to_string(draws.min_draws()) + ")");

    EvalConfig config;
    config.grid.G = G;
    config.grid.radius = radius;
    config.H = H;
    config.threads = threads;
    config.records = records;
    config.seed = seed;

    const RiskReport report = evaluate_all(data, synthetic, draws, plan, config);
    for (const RiskResult& result : report.results)
        for (const std::string& warning : result.warnings)
            std::cerr << "warning: record " << result.record << ": " << warning << '\n';

    const fs::path out_dir(paths.out);
    fs::create_directories(out_dir);
    StagedWriter writer;
    write_report(report, writer.stage(out_dir / "report.csv"),
                 writer.stage(out_dir / "report_meta.json"));
    if (dump_joint) {
        for (const RiskResult& result : report.results) {
            const GuessGrid grid = build_guess_grid(data, result.record, plan, config.grid);
            write_joint(result, grid, data,
                        writer.stage(out_dir / ("joint_" + std::to_string(result.record) + ".csv")));
        }
    }
    writer.commit();

    const RiskSummary summary = summarize(report);
    std::cout << "records evaluated: " << summary.n_records << '\n';
    std::cout << "uniform prior: " << display(summary.uniform_prior_joint) << '\n';
    std::cout << "mean truth probability: " << display(summary.mean_truth_prob) << '\n';
    std::cout << "median truth probability: " << display(summary.median_truth_prob) << '\n';
    std::cout << "rank-1 records: " << summary.rank1_count << '\n';
    return 0;
}

int run_report(const std::string& out_dir_flag, bool emit_plots) {
    const fs::path out_dir(out_dir_flag);
    const RiskReport report = read_report(out_dir / "report.csv", out_dir / "report_meta.json");
    const RiskSummary summary = summarize(report);

    StagedWriter writer;
    write_summary(summary, writer.stage(out_dir / "summary.csv"));

    if (emit_plots) {
        std::vector<double> truth_probs, ranks;
        for (const RiskResult& result : report.results) {
            truth_probs.push_back(result.truth_prob);
            ranks.push_back(static_cast<double>(result.truth_rank));
        }
        plots::svg_histogram(truth_probs, 30, "Joint probability of the true values",
                             report.meta.uniform_prior_joint,
                             writer.stage(out_dir / "prob_joint.svg"));
        const std::size_t max_rank = static_cast<std::size_t>(
            *std::max_element(ranks.begin(), ranks.end()));
        plots::svg_histogram(ranks, std::max<std::size_t>(max_rank, 1), "Rank of the true values",
                             std::nullopt, writer.stage(out_dir / "rank_hist.svg"));
        for (std::size_t v = 0; v < report.meta.variables.size(); ++v) {
            std::vector<double> marg, diff;
            for (const RiskResult& result : report.results) {
                marg.push_back(result.marginal_truth_prob[v]);
                diff.push_back(result.abs_diff[v]);
            }
            const std::string& name = report.meta.variables[v];
            plots::svg_histogram(marg, 30, "Marginal probability: " + name,
                                 report.meta.uniform_prior_marginals[v],
                                 writer.stage(out_dir / ("prob_" + name + ".svg")));
            plots::svg_histogram(diff, 30, "Distance of top guess from truth: " + name,
                                 std::nullopt,
                                 writer.stage(out_dir / ("absdiff_" + name + ".svg")));
        }
    }
    writer.commit();

    std::cout << "records: " << summary.n_records << '\n';
    std::cout << "mean truth probability: " << display(summary.mean_truth_prob)
              << " (uniform prior " << display(summary.uniform_prior_joint) << ")\n";
    std::cout << "fraction below prior: " << display(summary.fraction_below_prior) << '\n';
    std::cout << "rank-1 records: " << summary.rank1_count << '\n';
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Sequential Bayesian synthesis and attribute disclosure risk estimation"};
    app.require_subcommand(1);

    CommonPaths paths;
    std::string draws_dir;
    std::vector<std::string> syndata_paths;
    std::size_t m = 1;
    std::size_t H = 50;
    std::vector<std::size_t> G;
    double radius = 0.1;
    std::size_t thin = 1;
    std::uint64_t seed = 1;
    std::vector<std::size_t> records;
    bool dump_joint = false;
    bool emit_plots = false;
    std::size_t threads = 0;

    auto* synthesize = app.add_subcommand(
        "synthesize", "fit the plan's synthesizers and simulate synthetic datasets");
    synthesize->add_option("--data", paths.data, "confidential dataset (CSV)")->required();
    synthesize->add_option("--plan", paths.plan, "schema and plan (JSON)")->required();
    synthesize->add_option("--out", paths.out, "output directory")->required();
    synthesize->add_option("--draws", draws_dir, "directory for draws files (default: --out)");
    synthesize->add_option("--m", m, "number of synthetic datasets");
    synthesize->add_option("--thin", thin, "draw stride between synthetic datasets");
    auto* syn_seed = synthesize->add_option("--seed", seed, "RNG seed (env ATTRISK_SEED)");

    auto* risk = app.add_subcommand("risk", "estimate per-record attribute disclosure risks");
    risk->add_option("--data", paths.data, "confidential dataset (CSV)")->required();
    risk->add_option("--plan", paths.plan, "schema and plan (JSON)")->required();
    risk->add_option("--syndata", syndata_paths, "synthetic dataset file(s)")->required();
    risk->add_option("--draws", draws_dir, "directory holding draws_step<k>.csv")->required();
    risk->add_option("--out", paths.out, "output directory")->required();
    risk->add_option("--H", H, "posterior draws per importance-sampling estimate");
    risk->add_option("--G", G, "guesses per continuous synthesized variable");
    risk->add_option("--radius", radius, "relative half-width of continuous guess intervals");
    risk->add_option("--records", records, "evaluate only these 0-based records");
    risk->add_flag("--dump-joint", dump_joint, "write each record's full joint grid");
    risk->add_option("--threads", threads, "worker threads (0 = all cores)");
    auto* risk_seed = risk->add_option("--seed", seed, "recorded in run metadata");

    auto* report = app.add_subcommand("report", "summarize a risk run and render plots");
    report->add_option("--out", paths.out, "directory holding report.csv and report_meta.json")
        ->required();
    report->add_flag("--emit-plots", emit_plots, "write SVG histograms");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (synthesize->parsed())
            return run_synthesize(paths, draws_dir, m, thin, resolve_seed(syn_seed, seed));
        if (risk->parsed())
            return run_risk(paths, syndata_paths, draws_dir, H, G, radius, records, dump_joint,
                            threads, resolve_seed(risk_seed, seed));
        if (report->parsed())
            return run_report(paths.out, emit_plots);
    } catch (const Error& e) {
        std::cerr << "error (" << to_string(e.kind()) << "): " << e.what() << '\n';
        return exit_code_for(e.kind());
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 4;
    }
    return 2;
}
