#include "attrisk/risk.hpp"

#include "attrisk/error.hpp"
#include "attrisk/logmath.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <fstream>
#include <mutex>
#include <numeric>
#include <set>
#include <sstream>
#include <thread>

namespace attrisk {

using nlohmann::json;

std::size_t GuessGrid::n_cells() const {
    std::size_t total = 1;
    for (const GridAxis& axis : axes)
        total *= axis.candidates.size();
    return total;
}

std::size_t GuessGrid::truth_cell() const {
    std::size_t index = 0;
    for (const GridAxis& axis : axes)
        index = index * axis.candidates.size() + axis.truth_index;
    return index;
}

// ---------------------------------------------------------------------------
// Guess grids

namespace {

double column_sd(const Dataset& data, std::size_t col) {
    const std::vector<double>& cells = data.cells[col];
    const std::size_t n = cells.size();
    if (n < 2)
        return 0.0;
    const double mean = std::accumulate(cells.begin(), cells.end(), 0.0) / static_cast<double>(n);
    double ss = 0.0;
    for (double v : cells)
        ss += (v - mean) * (v - mean);
    return std::sqrt(ss / static_cast<double>(n - 1));
}

// G values assigned to the continuous synthesized variables, plan order.
std::vector<std::size_t> resolve_G(const Dataset& data, const ResolvedPlan& plan,
                                   const GridConfig& config) {
    std::size_t n_continuous = 0;
    for (std::size_t col : plan.synthesized_cols)
        n_continuous += data.columns[col].kind == ColumnKind::Continuous;
    std::vector<std::size_t> G;
    if (config.G.empty())
        G.assign(n_continuous, 11);
    else if (config.G.size() == 1)
        G.assign(n_continuous, config.G.front());
    else if (config.G.size() == n_continuous)
        G = config.G;
    else
        throw Error(ErrorKind::Size, "plan has " + std::to_string(n_continuous) +
                                         " continuous synthesized variables but " +
                                         std::to_string(config.G.size()) + " G values");
    for (std::size_t g : G)
        if (g < 1)
            throw Error(ErrorKind::Size, "G entries must be >= 1");
    return G;
}

std::vector<double> distinct_sorted(const Dataset& data, std::size_t col) {
    std::set<double> values(data.cells[col].begin(), data.cells[col].end());
    return {values.begin(), values.end()};
}

GridAxis continuous_axis(const Dataset& data, std::size_t col, std::size_t record, std::size_t G,
                         double radius, std::vector<std::string>& warnings) {
    GridAxis axis;
    axis.column = col;
    const double truth = data.cell(col, record);
    if (G == 1) {
        axis.candidates = {truth};
        axis.truth_index = 0;
        return axis;
    }
    double lo, hi;
    if (truth == 0.0) {
        double delta = radius * column_sd(data, col);
        if (delta == 0.0)
            delta = radius;
        lo = -delta;
        hi = delta;
    } else {
        const double a = truth * (1.0 - radius);
        const double b = truth * (1.0 + radius);
        lo = std::min(a, b);
        hi = std::max(a, b);
    }
    axis.candidates.resize(G);
    const double step = (hi - lo) / static_cast<double>(G - 1);
    for (std::size_t j = 0; j < G; ++j)
        axis.candidates[j] = lo + static_cast<double>(j) * step;
    if (G % 2 == 1) {
        // The truth is the interval midpoint; pin it so equality is exact.
        axis.truth_index = (G - 1) / 2;
        axis.candidates[axis.truth_index] = truth;
    } else {
        const auto pos = std::lower_bound(axis.candidates.begin(), axis.candidates.end(), truth);
        if (pos != axis.candidates.end() && *pos == truth) {
            axis.truth_index = static_cast<std::size_t>(pos - axis.candidates.begin());
        } else {
            axis.truth_index = static_cast<std::size_t>(pos - axis.candidates.begin());
            axis.candidates.insert(pos, truth);
            warnings.push_back("grid for '" + data.columns[col].name + "' grew to " +
                               std::to_string(G + 1) + " candidates to include the truth");
        }
    }
    return axis;
}

} // namespace

GuessGrid build_guess_grid(const Dataset& confidential, std::size_t record,
                           const ResolvedPlan& plan, const GridConfig& config) {
    if (record >= confidential.n_rows())
        throw Error(ErrorKind::Size, "record " + std::to_string(record) + " out of range");
    if (!(config.radius > 0.0))
        throw Error(ErrorKind::Size, "radius must be > 0");
    const std::vector<std::size_t> G = resolve_G(confidential, plan, config);

    GuessGrid grid;
    std::size_t continuous_seen = 0;
    for (std::size_t col : plan.synthesized_cols) {
        const ColumnSchema& schema = confidential.columns[col];
        GridAxis axis;
        switch (schema.kind) {
            case ColumnKind::Categorical: {
                axis.column = col;
                for (std::size_t lvl = 1; lvl <= schema.levels.size(); ++lvl)
                    axis.candidates.push_back(static_cast<double>(lvl));
                axis.truth_index = static_cast<std::size_t>(confidential.cell(col, record)) - 1;
                break;
            }
            case ColumnKind::Count: {
                axis.column = col;
                axis.candidates = distinct_sorted(confidential, col);
                const double truth = confidential.cell(col, record);
                axis.truth_index = static_cast<std::size_t>(
                    std::lower_bound(axis.candidates.begin(), axis.candidates.end(), truth) -
                    axis.candidates.begin());
                break;
            }
            case ColumnKind::Continuous:
                axis = continuous_axis(confidential, col, record, G[continuous_seen++],
                                       config.radius, grid.warnings);
                break;
        }
        grid.axes.push_back(std::move(axis));
    }
    return grid;
}

// ---------------------------------------------------------------------------
// Importance-sampling evaluation

namespace {

struct EvalContext {
    const Dataset& confidential;
    const ResolvedPlan& plan;
    std::span<const ThetaRow> thetas;
    std::span<const double> log_g_values; // per draw
};

RiskResult evaluate_record_impl(std::size_t record, const EvalContext& ctx, const GuessGrid& grid,
                                std::span<const double> prior_weights) {
    const std::size_t n_axes = grid.axes.size();
    if (n_axes != ctx.plan.synthesized_cols.size())
        throw Error(ErrorKind::Size, "grid has " + std::to_string(n_axes) + " axes, plan has " +
                                         std::to_string(ctx.plan.synthesized_cols.size()) +
                                         " synthesized variables");
    const std::size_t n_cells = grid.n_cells();
    const std::size_t H = ctx.thetas.size();
    if (!prior_weights.empty()) {
        if (prior_weights.size() != n_cells)
            throw Error(ErrorKind::Size, "prior weights size != grid cell count");
        for (double w : prior_weights)
            if (!(w > 0.0))
                throw Error(ErrorKind::Domain, "prior weights must be positive");
    }

    // Truth densities, one per draw, shared by every cell.
    std::vector<double> truth(n_axes);
    for (std::size_t v = 0; v < n_axes; ++v)
        truth[v] = ctx.confidential.cell(grid.axes[v].column, record);
    const std::vector<std::vector<double>> truth_designs =
        guess_designs(ctx.plan, ctx.confidential, record, truth);
    std::vector<double> log_f_truth(H);
    for (std::size_t h = 0; h < H; ++h) {
        log_f_truth[h] = seq_log_dens(ctx.plan, truth_designs, truth, ctx.thetas[h]);
        if (std::isnan(log_f_truth[h]))
            throw Error(ErrorKind::Numeric, "record " + std::to_string(record) +
                                                ": NaN truth log density at draw " +
                                                std::to_string(h));
    }

    std::vector<double> values(n_axes);
    std::vector<std::size_t> index(n_axes, 0);
    std::vector<double> log_weight(H);
    std::vector<double> term(H);
    std::vector<double> log_prob(n_cells);

    for (std::size_t cell = 0; cell < n_cells; ++cell) {
        for (std::size_t v = 0; v < n_axes; ++v)
            values[v] = grid.axes[v].candidates[index[v]];
        const std::vector<std::vector<double>> designs =
            guess_designs(ctx.plan, ctx.confidential, record, values);

        for (std::size_t h = 0; h < H; ++h) {
            const double log_f_guess = seq_log_dens(ctx.plan, designs, values, ctx.thetas[h]);
            if (std::isnan(log_f_guess))
                throw Error(ErrorKind::Numeric, "record " + std::to_string(record) +
                                                    ": NaN log density at cell " +
                                                    std::to_string(cell) + ", draw " +
                                                    std::to_string(h));
            log_weight[h] = log_f_guess - log_f_truth[h];
            if (std::isnan(log_weight[h]) || log_weight[h] == INFINITY)
                throw Error(ErrorKind::Numeric, "record " + std::to_string(record) +
                                                    ": non-finite importance weight at cell " +
                                                    std::to_string(cell) + ", draw " +
                                                    std::to_string(h));
        }

        // Self-normalized importance sampling over the same H draws:
        //   log[(1/H) sum_h exp(lg_h + lw_h - logsumexp_k lw_k)]
        // with the weight maximum subtracted from both numerator terms and
        // the denominator, so a degenerate draws matrix cancels exactly.
        const double max_weight = *std::max_element(log_weight.begin(), log_weight.end());
        if (max_weight == -INFINITY)
            throw Error(ErrorKind::Internal, "record " + std::to_string(record) + ": cell " +
                                                 std::to_string(cell) +
                                                 " has zero weight for every draw");
        double denom_sum = 0.0;
        for (std::size_t h = 0; h < H; ++h)
            denom_sum += std::exp(log_weight[h] - max_weight);
        const double log_denom = std::log(denom_sum);
        for (std::size_t h = 0; h < H; ++h)
            term[h] = ctx.log_g_values[h] + ((log_weight[h] - max_weight) - log_denom);
        log_prob[cell] = logsumexp(term) - std::log(static_cast<double>(H));

        // Advance the mixed-radix cell index, last axis fastest.
        for (std::size_t v = n_axes; v-- > 0;) {
            if (++index[v] < grid.axes[v].candidates.size())
                break;
            index[v] = 0;
        }
    }

    if (!prior_weights.empty()) {
        // Max-shifted so a constant prior changes nothing, bit for bit.
        double max_log_prior = -INFINITY;
        for (double w : prior_weights)
            max_log_prior = std::max(max_log_prior, std::log(w));
        for (std::size_t cell = 0; cell < n_cells; ++cell)
            log_prob[cell] += std::log(prior_weights[cell]) - max_log_prior;
    }

    RiskResult result;
    result.record = record;
    result.warnings = grid.warnings;
    result.joint.resize(n_cells);
    const double max_log_prob = *std::max_element(log_prob.begin(), log_prob.end());
    if (std::isnan(max_log_prob))
        throw Error(ErrorKind::Numeric,
                    "record " + std::to_string(record) + ": NaN cell probability");
    double total = 0.0;
    for (std::size_t cell = 0; cell < n_cells; ++cell) {
        result.joint[cell] = std::exp(log_prob[cell] - max_log_prob);
        total += result.joint[cell];
    }
    for (double& p : result.joint)
        p /= total;

    // Marginals as axis sums of the joint.
    result.marginals.resize(n_axes);
    for (std::size_t v = 0; v < n_axes; ++v)
        result.marginals[v].assign(grid.axes[v].candidates.size(), 0.0);
    std::fill(index.begin(), index.end(), 0);
    for (std::size_t cell = 0; cell < n_cells; ++cell) {
        for (std::size_t v = 0; v < n_axes; ++v)
            result.marginals[v][index[v]] += result.joint[cell];
        for (std::size_t v = n_axes; v-- > 0;) {
            if (++index[v] < grid.axes[v].candidates.size())
                break;
            index[v] = 0;
        }
    }

    const std::size_t truth_cell = grid.truth_cell();
    result.truth_prob = result.joint[truth_cell];
    std::size_t greater = 0;
    for (double p : result.joint)
        greater += p > result.truth_prob;
    result.truth_rank = greater + 1; // competition ranking: ties share the best rank

    result.marginal_truth_prob.resize(n_axes);
    result.abs_diff.resize(n_axes);
    for (std::size_t v = 0; v < n_axes; ++v) {
        const GridAxis& axis = grid.axes[v];
        result.marginal_truth_prob[v] = result.marginals[v][axis.truth_index];
        const std::size_t top = static_cast<std::size_t>(
            std::max_element(result.marginals[v].begin(), result.marginals[v].end()) -
            result.marginals[v].begin());
        const double top_value = axis.candidates[top];
        if (ctx.confidential.columns[axis.column].kind == ColumnKind::Categorical)
            result.abs_diff[v] = top == axis.truth_index ? 0.0 : 1.0;
        else
            result.abs_diff[v] = std::fabs(top_value - truth[v]);
    }
    return result;
}

std::vector<ThetaRow> collect_thetas(const ThetaSelector& selector) {
    std::vector<ThetaRow> thetas;
    thetas.reserve(selector.size());
    for (std::size_t h = 0; h < selector.size(); ++h)
        thetas.push_back(selector.at(h));
    return thetas;
}

std::vector<double> collect_log_g(const GEvaluator& evaluator, std::span<const ThetaRow> thetas) {
    std::vector<double> values(thetas.size());
    for (std::size_t h = 0; h < thetas.size(); ++h) {
        values[h] = evaluator(thetas[h]);
        if (std::isnan(values[h]))
            throw Error(ErrorKind::Numeric,
                        "NaN synthetic-data log likelihood at draw " + std::to_string(h));
    }
    return values;
}

} // namespace

RiskResult evaluate_record(std::size_t record, const Dataset& confidential,
                           std::span<const Dataset> synthetic, const DrawsSet& draws,
                           const ResolvedPlan& plan, const GuessGrid& grid, std::size_t n_draws,
                           std::span<const double> prior_weights) {
    const ThetaSelector selector(draws, plan, n_draws);
    const std::vector<ThetaRow> thetas = collect_thetas(selector);
    const GEvaluator evaluator(plan, synthetic);
    const std::vector<double> log_g_values = collect_log_g(evaluator, thetas);
    const EvalContext ctx{confidential, plan, thetas, log_g_values};
    return evaluate_record_impl(record, ctx, grid, prior_weights);
}

RiskReport evaluate_all(const Dataset& confidential, std::span<const Dataset> synthetic,
                        const DrawsSet& draws, const ResolvedPlan& plan,
                        const EvalConfig& config) {
    const std::size_t n = confidential.n_rows();
    std::vector<std::size_t> records = config.records;
    if (records.empty()) {
        records.resize(n);
        std::iota(records.begin(), records.end(), std::size_t{0});
    } else {
        for (std::size_t r : records)
            if (r >= n)
                throw Error(ErrorKind::Size, "record " + std::to_string(r) + " out of range (n=" +
                                                 std::to_string(n) + ")");
    }

    const ThetaSelector selector(draws, plan, config.H);
    const std::vector<ThetaRow> thetas = collect_thetas(selector);
    const GEvaluator evaluator(plan, synthetic);
    const std::vector<double> log_g_values = collect_log_g(evaluator, thetas);
    const EvalContext ctx{confidential, plan, thetas, log_g_values};

    RiskReport report;
    report.results.resize(records.size());

    std::size_t n_threads = config.threads ? config.threads
                                           : std::max(1u, std::thread::hardware_concurrency());
    n_threads = std::min<std::size_t>(n_threads, records.size());

    std::atomic<std::size_t> next{0};
    std::vector<std::pair<std::size_t, std::string>> failures;
    std::mutex failure_mutex;

    auto worker = [&] {
        for (;;) {
            const std::size_t k = next.fetch_add(1);
            if (k >= records.size())
                return;
            try {
                const GuessGrid grid =
                    build_guess_grid(confidential, records[k], plan, config.grid);
                report.results[k] = evaluate_record_impl(records[k], ctx, grid, {});
            } catch (const std::exception& e) {
                std::lock_guard<std::mutex> lock(failure_mutex);
                failures.emplace_back(records[k], e.what());
            }
        }
    };

    if (n_threads <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (std::size_t t = 0; t < n_threads; ++t)
            pool.emplace_back(worker);
        for (std::thread& t : pool)
            t.join();
    }

    if (!failures.empty()) {
        std::sort(failures.begin(), failures.end());
        std::string message;
        for (const auto& [record, what] : failures) {
            if (!message.empty())
                message += "; ";
            message += "record " + std::to_string(record) + ": " + what;
        }
        throw Error(ErrorKind::Numeric, message);
    }

    // Run metadata, including the uniform-prior reference for the nominal
    // grid (even-G truth insertion can grow individual records' grids).
    RiskMeta& meta = report.meta;
    const std::vector<std::size_t> G = resolve_G(confidential, plan, config.grid);
    meta.G = G;
    meta.H = config.H;
    meta.m = synthetic.size();
    meta.radius = config.grid.radius;
    meta.seed = config.seed;
    meta.record_subset = config.records;
    std::size_t continuous_seen = 0;
    double joint_cells = 1.0;
    for (std::size_t col : plan.synthesized_cols) {
        const ColumnSchema& schema = confidential.columns[col];
        meta.variables.push_back(schema.name);
        std::size_t size = 0;
        switch (schema.kind) {
            case ColumnKind::Categorical: size = schema.levels.size(); break;
            case ColumnKind::Count: size = distinct_sorted(confidential, col).size(); break;
            case ColumnKind::Continuous: size = G[continuous_seen++]; break;
        }
        meta.grid_sizes.push_back(size);
        meta.uniform_prior_marginals.push_back(1.0 / static_cast<double>(size));
        joint_cells *= static_cast<double>(size);
    }
    meta.uniform_prior_joint = 1.0 / joint_cells;
    return report;
}

// ---------------------------------------------------------------------------
// Summaries

namespace {

double median(std::vector<double> values) {
    if (values.empty())
        return 0.0;
    std::sort(values.begin(), values.end());
    const std::size_t mid = values.size() / 2;
    return values.size() % 2 ? values[mid] : 0.5 * (values[mid - 1] + values[mid]);
}

} // namespace

RiskSummary summarize(const RiskReport& report) {
    if (report.results.empty())
        throw Error(ErrorKind::Size, "cannot summarize an empty report");
    RiskSummary summary;
    summary.n_records = report.results.size();
    summary.uniform_prior_joint = report.meta.uniform_prior_joint;

    std::vector<double> truth_probs;
    std::size_t max_rank = 0;
    for (const RiskResult& result : report.results) {
        truth_probs.push_back(result.truth_prob);
        max_rank = std::max(max_rank, result.truth_rank);
        summary.rank1_count += result.truth_rank == 1;
        summary.fraction_below_prior += result.truth_prob < report.meta.uniform_prior_joint;
    }
    summary.mean_truth_prob = std::accumulate(truth_probs.begin(), truth_probs.end(), 0.0) /
                              static_cast<double>(truth_probs.size());
    summary.median_truth_prob = median(truth_probs);
    summary.fraction_below_prior /= static_cast<double>(summary.n_records);

    summary.rank_histogram.assign(max_rank, 0);
    for (const RiskResult& result : report.results)
        ++summary.rank_histogram[result.truth_rank - 1];

    const std::size_t n_vars = report.meta.variables.size();
    for (std::size_t v = 0; v < n_vars; ++v) {
        VariableSummary vs;
        vs.name = report.meta.variables[v];
        std::vector<double> marg;
        double diff_sum = 0.0;
        for (const RiskResult& result : report.results) {
            marg.push_back(result.marginal_truth_prob[v]);
            diff_sum += result.abs_diff[v];
        }
        vs.mean_marginal_truth_prob = std::accumulate(marg.begin(), marg.end(), 0.0) /
                                      static_cast<double>(marg.size());
        vs.median_marginal_truth_prob = median(marg);
        vs.mean_abs_diff = diff_sum / static_cast<double>(report.results.size());
        summary.variables.push_back(std::move(vs));
    }
    return summary;
}

// ---------------------------------------------------------------------------
// Files

void write_report(const RiskReport& report, const std::filesystem::path& csv_path,
                  const std::filesystem::path& meta_path) {
    std::ofstream out(csv_path);
    if (!out)
        throw Error(ErrorKind::Io, "cannot write '" + csv_path.string() + "'");
    out << "record,truth_prob,truth_rank";
    for (const std::string& name : report.meta.variables)
        out << ",marginal_prob_" << name << ",abs_diff_" << name;
    out << '\n';
    for (const RiskResult& result : report.results) {
        out << result.record << ',' << format_double(result.truth_prob) << ','
            << result.truth_rank;
        for (std::size_t v = 0; v < report.meta.variables.size(); ++v)
            out << ',' << format_double(result.marginal_truth_prob[v]) << ','
                << format_double(result.abs_diff[v]);
        out << '\n';
    }
    if (!out)
        throw Error(ErrorKind::Io, "write failed for '" + csv_path.string() + "'");

    json meta;
    meta["variables"] = report.meta.variables;
    meta["grid_sizes"] = report.meta.grid_sizes;
    meta["G"] = report.meta.G;
    meta["H"] = report.meta.H;
    meta["m"] = report.meta.m;
    meta["radius"] = report.meta.radius;
    meta["seed"] = report.meta.seed;
    meta["prior"] = report.meta.prior;
    meta["uniform_prior_joint"] = report.meta.uniform_prior_joint;
    meta["uniform_prior_marginals"] = report.meta.uniform_prior_marginals;
    meta["record_subset"] = report.meta.record_subset;
    meta["n_records"] = report.results.size();
    std::ofstream meta_out(meta_path);
    if (!meta_out)
        throw Error(ErrorKind::Io, "cannot write '" + meta_path.string() + "'");
    meta_out << meta.dump(2) << '\n';
}

RiskReport read_report(const std::filesystem::path& csv_path,
                       const std::filesystem::path& meta_path) {
    RiskReport report;
    {
        std::ifstream in(meta_path);
        if (!in)
            throw Error(ErrorKind::Io, "cannot open '" + meta_path.string() + "'");
        json meta;
        try {
            meta = json::parse(in);
            report.meta.variables = meta.at("variables").get<std::vector<std::string>>();
            report.meta.grid_sizes = meta.at("grid_sizes").get<std::vector<std::size_t>>();
            report.meta.G = meta.at("G").get<std::vector<std::size_t>>();
            report.meta.H = meta.at("H").get<std::size_t>();
            report.meta.m = meta.at("m").get<std::size_t>();
            report.meta.radius = meta.at("radius").get<double>();
            report.meta.seed = meta.at("seed").get<std::uint64_t>();
            report.meta.prior = meta.at("prior").get<std::string>();
            report.meta.uniform_prior_joint = meta.at("uniform_prior_joint").get<double>();
            report.meta.uniform_prior_marginals =
                meta.at("uniform_prior_marginals").get<std::vector<double>>();
            report.meta.record_subset =
                meta.at("record_subset").get<std::vector<std::size_t>>();
        } catch (const json::exception& e) {
            throw Error(ErrorKind::Parse, "'" + meta_path.string() + "': " + e.what());
        }
    }

    std::ifstream in(csv_path);
    if (!in)
        throw Error(ErrorKind::Io, "cannot open '" + csv_path.string() + "'");
    std::string line;
    if (!std::getline(in, line))
        throw Error(ErrorKind::Parse, "'" + csv_path.string() + "' is empty");
    const std::size_t n_vars = report.meta.variables.size();
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r')
            line.pop_back();
        if (line.empty())
            continue;
        std::stringstream row(line);
        std::string field;
        std::vector<double> fields;
        while (std::getline(row, field, ',')) {
            double value = 0.0;
            auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
            if (ec != std::errc() || ptr != field.data() + field.size())
                throw Error(ErrorKind::Parse, "'" + csv_path.string() + "' line " +
                                                  std::to_string(line_no) + ": bad number");
            fields.push_back(value);
        }
        if (fields.size() != 3 + 2 * n_vars)
            throw Error(ErrorKind::Parse, "'" + csv_path.string() + "' line " +
                                              std::to_string(line_no) + ": wrong field count");
        RiskResult result;
        result.record = static_cast<std::size_t>(fields[0]);
        result.truth_prob = fields[1];
        result.truth_rank = static_cast<std::size_t>(fields[2]);
        for (std::size_t v = 0; v < n_vars; ++v) {
            result.marginal_truth_prob.push_back(fields[3 + 2 * v]);
            result.abs_diff.push_back(fields[4 + 2 * v]);
        }
        report.results.push_back(std::move(result));
    }
    return report;
}

void write_joint(const RiskResult& result, const GuessGrid& grid, const Dataset& confidential,
                 const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out)
        throw Error(ErrorKind::Io, "cannot write '" + path.string() + "'");
    for (const GridAxis& axis : grid.axes)
        out << confidential.columns[axis.column].name << ',';
    out << "probability\n";
    const std::size_t n_axes = grid.axes.size();
    std::vector<std::size_t> index(n_axes, 0);
    for (std::size_t cell = 0; cell < result.joint.size(); ++cell) {
        for (std::size_t v = 0; v < n_axes; ++v) {
            const GridAxis& axis = grid.axes[v];
            const ColumnSchema& schema = confidential.columns[axis.column];
            const double value = axis.candidates[index[v]];
            if (schema.kind == ColumnKind::Categorical)
                out << schema.levels[static_cast<std::size_t>(value) - 1];
            else if (schema.kind == ColumnKind::Count)
                out << static_cast<long long>(value);
            else
                out << format_double(value);
            out << ',';
        }
        out << format_double(result.joint[cell]) << '\n';
        for (std::size_t v = n_axes; v-- > 0;) {
            if (++index[v] < grid.axes[v].candidates.size())
                break;
            index[v] = 0;
        }
    }
}

void write_summary(const RiskSummary& summary, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out)
        throw Error(ErrorKind::Io, "cannot write '" + path.string() + "'");
    out << "metric,value\n";
    out << "n_records," << summary.n_records << '\n';
    out << "mean_truth_prob," << format_double(summary.mean_truth_prob) << '\n';
    out << "median_truth_prob," << format_double(summary.median_truth_prob) << '\n';
    out << "uniform_prior_joint," << format_double(summary.uniform_prior_joint) << '\n';
    out << "rank1_count," << summary.rank1_count << '\n';
    out << "fraction_below_prior," << format_double(summary.fraction_below_prior) << '\n';
    for (const VariableSummary& vs : summary.variables) {
        out << "mean_marginal_prob_" << vs.name << ','
            << format_double(vs.mean_marginal_truth_prob) << '\n';
        out << "median_marginal_prob_" << vs.name << ','
            << format_double(vs.median_marginal_truth_prob) << '\n';
        out << "mean_abs_diff_" << vs.name << ',' << format_double(vs.mean_abs_diff) << '\n';
    }
    for (std::size_t r = 0; r < summary.rank_histogram.size(); ++r)
        out << "rank_" << (r + 1) << "_count," << summary.rank_histogram[r] << '\n';
    if (!out)
        throw Error(ErrorKind::Io, "write failed for '" + path.string() + "'");
}

} // namespace attrisk
