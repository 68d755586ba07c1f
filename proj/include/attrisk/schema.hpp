#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace attrisk {

enum class ColumnKind { Categorical, Count, Continuous };
enum class ColumnRole { Synthesized, UnsynthesizedPredictor, Unused };
enum class Family { Normal, Poisson, MultinomialLogit };

const char* to_string(ColumnKind kind);
const char* to_string(ColumnRole role);
const char* to_string(Family family);

/// One column of a table.  Categorical columns carry their level labels;
/// level order is declaration order, never data order, so reloading a
/// shuffled file yields identical encodings.
struct ColumnSchema {
    std::string name;
    ColumnKind kind = ColumnKind::Continuous;
    std::vector<std::string> levels; // categorical only, non-empty, unique
    ColumnRole role = ColumnRole::Unused;
};

/// Typed columnar table.  Cells are stored as doubles column-major:
/// categorical cells hold 1-based level indices, count cells hold
/// non-negative integers, continuous cells hold finite reals.
struct Dataset {
    std::vector<ColumnSchema> columns;
    std::vector<std::vector<double>> cells;     // cells[col][row]
    std::optional<std::size_t> synthetic_index; // empty => confidential

    std::size_t n_rows() const { return cells.empty() ? 0 : cells.front().size(); }
    std::size_t n_cols() const { return columns.size(); }

    /// Index of a named column; throws ErrorKind::Schema if absent.
    std::size_t column_index(std::string_view name) const;

    double cell(std::size_t col, std::size_t row) const { return cells[col][row]; }

    /// Checks every schema invariant (shapes, level ranges, count
    /// integrality, finiteness); throws on the first violation.
    void validate() const;
};

/// One conditional model of the synthesis chain: outcome regressed on
/// predictors (intercept implicit), family matching the outcome's kind.
struct ModelSpec {
    std::string outcome;
    std::vector<std::string> predictors;
    Family family = Family::Normal;
};

struct SynthesisPlan {
    std::vector<ModelSpec> steps;
};

/// A plan step with column references resolved against a dataset and the
/// one-hot design layout fixed.  Categorical predictors contribute one
/// indicator per level after the first.
struct ResolvedStep {
    ModelSpec spec;
    std::size_t outcome_col = 0;
    std::vector<std::size_t> predictor_cols;
    std::vector<std::string> design_names; // "(Intercept)" first
    std::size_t design_width = 0;
    std::size_t n_levels = 0; // outcome arity for multinomial-logit, else 0
};

struct ResolvedPlan {
    std::vector<ResolvedStep> steps;
    std::vector<std::size_t> synthesized_cols; // step order

    std::size_t n_steps() const { return steps.size(); }
};

/// Validates the factorization: every predictor is either an
/// unsynthesized column or the outcome of a strictly earlier step, no
/// outcome repeats, and each family matches its outcome kind.
/// Deterministic and side-effect free.
ResolvedPlan validate_plan(const SynthesisPlan& plan, const Dataset& data);

/// Resolves a single step against a column list (used by the fitters,
/// which accept free-standing model specs).
ResolvedStep resolve_step(const ModelSpec& spec, const std::vector<ColumnSchema>& columns);

/// Fills `out` (size design_width) with the design row for one record,
/// reading cell values through `cell(col_index)`.
template <class CellFn>
void build_design_row(const ResolvedStep& step, const std::vector<ColumnSchema>& columns,
                      CellFn&& cell, std::span<double> out) {
    out[0] = 1.0;
    std::size_t j = 1;
    for (std::size_t col : step.predictor_cols) {
        const ColumnSchema& schema = columns[col];
        if (schema.kind == ColumnKind::Categorical) {
            const auto level = static_cast<std::size_t>(cell(col));
            for (std::size_t lvl = 2; lvl <= schema.levels.size(); ++lvl)
                out[j++] = (level == lvl) ? 1.0 : 0.0;
        } else {
            out[j++] = cell(col);
        }
    }
}

/// Reads a header-bearing comma-separated file against `schema`.
/// Columns are located by header name; unlisted file columns are
/// ignored.  Row order is preserved.
Dataset load_dataset(const std::filesystem::path& path, const std::vector<ColumnSchema>& schema);

/// Inverse of load_dataset: labels for categorical cells, plain integers
/// for counts, 17-significant-digit decimal text for continuous cells so
/// a round trip is value-exact.
void write_dataset(const Dataset& data, const std::filesystem::path& path);

/// Schema plus plan, as stored in one JSON document with fields
/// `columns[]` and `steps[]`.
struct PlanFile {
    std::vector<ColumnSchema> columns;
    SynthesisPlan plan;
};

PlanFile load_plan_file(const std::filesystem::path& path);
void write_plan_file(const PlanFile& file, const std::filesystem::path& path);

/// Formats a double with enough digits to round-trip exactly.
std::string format_double(double value);

} // namespace attrisk
