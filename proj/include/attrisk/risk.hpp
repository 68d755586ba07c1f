#pragma once

#include "attrisk/density.hpp"
#include "attrisk/draws.hpp"
#include "attrisk/schema.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace attrisk {

/// Candidate confidential values for one synthesized variable of one
/// record.  Candidates are level indices for categorical variables,
/// distinct confidential values for counts, and an equally spaced
/// neighborhood of the truth for continuous variables.  The truth is
/// always a candidate, at truth_index exactly.
struct GridAxis {
    std::size_t column = 0;
    std::vector<double> candidates;
    std::size_t truth_index = 0;
};

struct GuessGrid {
    std::vector<GridAxis> axes; // plan-step order
    std::vector<std::string> warnings;

    std::size_t n_cells() const;
    std::size_t truth_cell() const; // flat index, last axis fastest
};

struct GridConfig {
    std::vector<std::size_t> G; // per continuous synthesized variable;
                                // empty => 11 each, single value broadcasts
    double radius = 0.1;        // relative neighborhood half-width
};

/// Builds the guess grid for one record.  Continuous axes span
/// [y*(1-radius), y*(1+radius)] with the truth forced onto the center
/// point when G is odd; an even G gets the truth inserted (G grows by
/// one, with a warning).  A zero truth falls back to a +-radius*sd(column)
/// interval.
GuessGrid build_guess_grid(const Dataset& confidential, std::size_t record,
                           const ResolvedPlan& plan, const GridConfig& config);

struct RiskResult {
    std::size_t record = 0;
    std::vector<double> joint;                   // flat over the grid, sums to 1
    std::vector<std::vector<double>> marginals;  // per variable, axis sums
    std::vector<double> marginal_truth_prob;     // per variable
    std::size_t truth_rank = 0;                  // 1-based, competition ranking
    std::vector<double> abs_diff;                // |top guess - truth|, or 0/1 mismatch
    double truth_prob = 0.0;
    std::vector<std::string> warnings;
};

struct RiskMeta {
    std::vector<std::string> variables; // synthesized, plan order
    std::vector<std::size_t> grid_sizes;
    std::vector<std::size_t> G;
    std::size_t H = 0;
    std::size_t m = 0;
    double radius = 0.0;
    std::uint64_t seed = 0;
    std::string prior = "uniform";
    double uniform_prior_joint = 0.0;            // 1 / prod(grid_sizes)
    std::vector<double> uniform_prior_marginals; // 1 / grid_sizes[v]
    std::vector<std::size_t> record_subset;      // empty => all records
};

struct RiskReport {
    std::vector<RiskResult> results;
    RiskMeta meta;
};

/// Importance-sampling estimate of the guess probabilities for one
/// record.  For each grid cell, H strided posterior draws are reweighted
/// by the (guess density / truth density) ratio, normalized over the same
/// H draws, averaged against the synthetic-data likelihood, and finally
/// re-normalized across the grid.  All of it in log space.
RiskResult evaluate_record(std::size_t record, const Dataset& confidential,
                           std::span<const Dataset> synthetic, const DrawsSet& draws,
                           const ResolvedPlan& plan, const GuessGrid& grid, std::size_t n_draws,
                           std::span<const double> prior_weights = {});

struct EvalConfig {
    GridConfig grid;
    std::size_t H = 50;
    std::size_t threads = 0;               // 0 => hardware concurrency
    std::vector<std::size_t> records;      // empty => all
    std::uint64_t seed = 0;                // recorded in metadata
};

/// Evaluates each requested record independently (optionally across
/// threads); results are assembled in record order, so the report is
/// identical for any thread count.
RiskReport evaluate_all(const Dataset& confidential, std::span<const Dataset> synthetic,
                        const DrawsSet& draws, const ResolvedPlan& plan, const EvalConfig& config);

struct VariableSummary {
    std::string name;
    double mean_marginal_truth_prob = 0.0;
    double median_marginal_truth_prob = 0.0;
    double mean_abs_diff = 0.0;
};

struct RiskSummary {
    std::size_t n_records = 0;
    double mean_truth_prob = 0.0;
    double median_truth_prob = 0.0;
    double uniform_prior_joint = 0.0;
    std::size_t rank1_count = 0;
    double fraction_below_prior = 0.0;       // strictly below
    std::vector<std::size_t> rank_histogram; // index r => count of rank r+1
    std::vector<VariableSummary> variables;
};

RiskSummary summarize(const RiskReport& report);

// Report files: a CSV with one row per record plus a JSON metadata
// sidecar; full joints are written separately on request.
void write_report(const RiskReport& report, const std::filesystem::path& csv_path,
                  const std::filesystem::path& meta_path);
RiskReport read_report(const std::filesystem::path& csv_path,
                       const std::filesystem::path& meta_path);
void write_joint(const RiskResult& result, const GuessGrid& grid, const Dataset& confidential,
                 const std::filesystem::path& path);

void write_summary(const RiskSummary& summary, const std::filesystem::path& path);

} // namespace attrisk
