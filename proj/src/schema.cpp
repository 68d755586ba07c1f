#include "attrisk/schema.hpp"

#include "attrisk/error.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

namespace attrisk {

using nlohmann::json;

const char* to_string(ColumnKind kind) {
    switch (kind) {
        case ColumnKind::Categorical: return "categorical";
        case ColumnKind::Count: return "count";
        case ColumnKind::Continuous: return "continuous";
    }
    return "?";
}

const char* to_string(ColumnRole role) {
    switch (role) {
        case ColumnRole::Synthesized: return "synthesized";
        case ColumnRole::UnsynthesizedPredictor: return "unsynthesized-predictor";
        case ColumnRole::Unused: return "unused";
    }
    return "?";
}

const char* to_string(Family family) {
    switch (family) {
        case Family::Normal: return "normal";
        case Family::Poisson: return "poisson";
        case Family::MultinomialLogit: return "multinomial-logit";
    }
    return "?";
}

std::string format_double(double value) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", value);
    return buf;
}

std::size_t Dataset::column_index(std::string_view name) const {
    for (std::size_t i = 0; i < columns.size(); ++i)
        if (columns[i].name == name)
            return i;
    throw Error(ErrorKind::Schema, "no column named '" + std::string(name) + "'");
}

namespace {

void check_column_schema(const ColumnSchema& schema) {
    if (schema.name.empty())
        throw Error(ErrorKind::Schema, "column with empty name");
    if (schema.kind == ColumnKind::Categorical) {
        if (schema.levels.empty())
            throw Error(ErrorKind::Schema,
                        "categorical column '" + schema.name + "' declares no levels");
        std::unordered_set<std::string> seen;
        for (const auto& level : schema.levels)
            if (!seen.insert(level).second)
                throw Error(ErrorKind::Schema, "duplicate level '" + level + "' in column '" +
                                                   schema.name + "'");
    } else if (!schema.levels.empty()) {
        throw Error(ErrorKind::Schema,
                    "non-categorical column '" + schema.name + "' declares levels");
    }
}

void check_cell(const ColumnSchema& schema, double value, std::size_t row) {
    switch (schema.kind) {
        case ColumnKind::Categorical: {
            const double k = static_cast<double>(schema.levels.size());
            if (!(value >= 1.0 && value <= k && value == std::floor(value)))
                throw Error(ErrorKind::Domain, "column '" + schema.name + "': level index " +
                                                   format_double(value) +
                                                   " out of range at row " + std::to_string(row + 1));
            break;
        }
        case ColumnKind::Count:
            if (!std::isfinite(value) || value < 0.0 || value != std::floor(value))
                throw Error(ErrorKind::Domain, "column '" + schema.name +
                                                   "': count must be >= 0 at row " +
                                                   std::to_string(row + 1));
            break;
        case ColumnKind::Continuous:
            if (!std::isfinite(value))
                throw Error(ErrorKind::Domain, "column '" + schema.name +
                                                   "': non-finite value at row " +
                                                   std::to_string(row + 1));
            break;
    }
}

} // namespace

void Dataset::validate() const {
    if (columns.size() != cells.size())
        throw Error(ErrorKind::Internal, "column/cell vector size mismatch");
    if (columns.empty() || n_rows() == 0)
        throw Error(ErrorKind::Schema, "dataset must have at least one column and one row");
    const std::size_t n = n_rows();
    for (std::size_t c = 0; c < columns.size(); ++c) {
        check_column_schema(columns[c]);
        if (cells[c].size() != n)
            throw Error(ErrorKind::Schema, "column '" + columns[c].name + "' has " +
                                               std::to_string(cells[c].size()) + " cells, expected " +
                                               std::to_string(n));
        for (std::size_t r = 0; r < n; ++r)
            check_cell(columns[c], cells[c][r], r);
    }
}

// ---------------------------------------------------------------------------
// CSV

namespace {

// Splits one CSV line; double quotes delimit fields containing commas,
// "" inside a quoted field is a literal quote.
std::vector<std::string> split_csv_line(const std::string& line, std::size_t line_no) {
    std::vector<std::string> fields;
    std::string field;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char ch = line[i];
        if (quoted) {
            if (ch == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    field += '"';
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                field += ch;
            }
        } else if (ch == '"' && field.empty()) {
            quoted = true;
        } else if (ch == ',') {
            fields.push_back(std::move(field));
            field.clear();
        } else {
            field += ch;
        }
    }
    if (quoted)
        throw Error(ErrorKind::Parse, "unterminated quote on line " + std::to_string(line_no));
    fields.push_back(std::move(field));
    return fields;
}

std::string csv_escape(const std::string& field) {
    if (field.find_first_of(",\"\n") == std::string::npos)
        return field;
    std::string out = "\"";
    for (char ch : field) {
        if (ch == '"')
            out += '"';
        out += ch;
    }
    out += '"';
    return out;
}

double parse_numeric(const std::string& text, const ColumnSchema& schema, std::size_t row) {
    double value = 0.0;
    const char* begin = text.data();
    const char* end = begin + text.size();
    auto [ptr, ec] = std::from_chars(begin, end, value);
    if (ec != std::errc() || ptr != end)
        throw Error(ErrorKind::Parse, "column '" + schema.name + "': cannot parse '" + text +
                                          "' as " + to_string(schema.kind) + " at row " +
                                          std::to_string(row + 1));
    return value;
}

} // namespace

Dataset load_dataset(const std::filesystem::path& path, const std::vector<ColumnSchema>& schema) {
    std::ifstream in(path);
    if (!in)
        throw Error(ErrorKind::Io, "cannot open '" + path.string() + "'");
    for (const auto& column : schema)
        check_column_schema(column);

    std::string line;
    if (!std::getline(in, line))
        throw Error(ErrorKind::Parse, "'" + path.string() + "' is empty");
    if (!line.empty() && line.back() == '\r')
        line.pop_back();
    const std::vector<std::string> header = split_csv_line(line, 1);

    // Map each schema column to its file position.
    std::vector<std::size_t> file_col(schema.size());
    for (std::size_t c = 0; c < schema.size(); ++c) {
        auto it = std::find(header.begin(), header.end(), schema[c].name);
        if (it == header.end())
            throw Error(ErrorKind::Schema, "'" + path.string() + "' is missing column '" +
                                               schema[c].name + "'");
        file_col[c] = static_cast<std::size_t>(it - header.begin());
    }

    // Level lookup per categorical column.
    std::vector<std::unordered_map<std::string, double>> level_of(schema.size());
    for (std::size_t c = 0; c < schema.size(); ++c)
        for (std::size_t l = 0; l < schema[c].levels.size(); ++l)
            level_of[c].emplace(schema[c].levels[l], static_cast<double>(l + 1));

    Dataset data;
    data.columns = schema;
    data.cells.assign(schema.size(), {});

    std::size_t row = 0;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r')
            line.pop_back();
        if (line.empty())
            continue;
        const std::vector<std::string> fields = split_csv_line(line, line_no);
        if (fields.size() != header.size())
            throw Error(ErrorKind::Parse, "row " + std::to_string(row + 1) + " has " +
                                              std::to_string(fields.size()) + " fields, expected " +
                                              std::to_string(header.size()));
        for (std::size_t c = 0; c < schema.size(); ++c) {
            const std::string& text = fields[file_col[c]];
            double value;
            if (schema[c].kind == ColumnKind::Categorical) {
                auto it = level_of[c].find(text);
                if (it == level_of[c].end())
                    throw Error(ErrorKind::Domain, "column '" + schema[c].name +
                                                       "': unknown label '" + text + "' at row " +
                                                       std::to_string(row + 1));
                value = it->second;
            } else {
                value = parse_numeric(text, schema[c], row);
                check_cell(schema[c], value, row);
            }
            data.cells[c].push_back(value);
        }
        ++row;
    }
    if (row == 0)
        throw Error(ErrorKind::Parse, "'" + path.string() + "' has a header but no rows");
    return data;
}

void write_dataset(const Dataset& data, const std::filesystem::path& path) {
    data.validate();
    std::ofstream out(path);
    if (!out)
        throw Error(ErrorKind::Io, "cannot write '" + path.string() + "'");
    for (std::size_t c = 0; c < data.columns.size(); ++c)
        out << (c ? "," : "") << csv_escape(data.columns[c].name);
    out << '\n';
    const std::size_t n = data.n_rows();
    for (std::size_t r = 0; r < n; ++r) {
        for (std::size_t c = 0; c < data.columns.size(); ++c) {
            if (c)
                out << ',';
            const ColumnSchema& schema = data.columns[c];
            const double value = data.cells[c][r];
            switch (schema.kind) {
                case ColumnKind::Categorical:
                    out << csv_escape(schema.levels[static_cast<std::size_t>(value) - 1]);
                    break;
                case ColumnKind::Count:
                    out << static_cast<long long>(value);
                    break;
                case ColumnKind::Continuous:
                    out << format_double(value);
                    break;
            }
        }
        out << '\n';
    }
    if (!out)
        throw Error(ErrorKind::Io, "write failed for '" + path.string() + "'");
}

// ---------------------------------------------------------------------------
// Plan resolution

namespace {

void check_family_matches(const ModelSpec& spec, const ColumnSchema& outcome) {
    const bool ok = (spec.family == Family::Normal && outcome.kind == ColumnKind::Continuous) ||
                    (spec.family == Family::Poisson && outcome.kind == ColumnKind::Count) ||
                    (spec.family == Family::MultinomialLogit &&
                     outcome.kind == ColumnKind::Categorical);
    if (!ok)
        throw Error(ErrorKind::Type, "family " + std::string(to_string(spec.family)) +
                                         " does not match " + to_string(outcome.kind) +
                                         " outcome '" + outcome.name + "'");
}

std::size_t find_column(const std::vector<ColumnSchema>& columns, const std::string& name) {
    for (std::size_t i = 0; i < columns.size(); ++i)
        if (columns[i].name == name)
            return i;
    throw Error(ErrorKind::Schema, "no column named '" + name + "'");
}

} // namespace

ResolvedStep resolve_step(const ModelSpec& spec, const std::vector<ColumnSchema>& columns) {
    ResolvedStep step;
    step.spec = spec;
    step.outcome_col = find_column(columns, spec.outcome);
    const ColumnSchema& outcome = columns[step.outcome_col];
    check_family_matches(spec, outcome);
    if (spec.family == Family::MultinomialLogit)
        step.n_levels = outcome.levels.size();

    step.design_names.push_back("(Intercept)");
    for (const auto& name : spec.predictors) {
        if (name == spec.outcome)
            throw Error(ErrorKind::Schema,
                        "'" + name + "' cannot predict itself in step for '" + spec.outcome + "'");
        const std::size_t col = find_column(columns, name);
        step.predictor_cols.push_back(col);
        const ColumnSchema& pred = columns[col];
        if (pred.kind == ColumnKind::Categorical) {
            for (std::size_t lvl = 2; lvl <= pred.levels.size(); ++lvl)
                step.design_names.push_back(name + "=" + pred.levels[lvl - 1]);
        } else {
            step.design_names.push_back(name);
        }
    }
    step.design_width = step.design_names.size();
    return step;
}

ResolvedPlan validate_plan(const SynthesisPlan& plan, const Dataset& data) {
    if (plan.steps.empty())
        throw Error(ErrorKind::Schema, "plan has no steps");
    ResolvedPlan resolved;
    std::unordered_set<std::size_t> synthesized;
    for (const ModelSpec& spec : plan.steps) {
        ResolvedStep step = resolve_step(spec, data.columns);
        if (synthesized.count(step.outcome_col))
            throw Error(ErrorKind::Schema,
                        "'" + spec.outcome + "' is the outcome of two steps");
        if (data.columns[step.outcome_col].role != ColumnRole::Synthesized)
            throw Error(ErrorKind::Schema, "outcome '" + spec.outcome +
                                               "' must have role synthesized");
        for (std::size_t col : step.predictor_cols) {
            const ColumnSchema& pred = data.columns[col];
            if (pred.role == ColumnRole::Synthesized && !synthesized.count(col))
                throw Error(ErrorKind::Order,
                            "predictor '" + pred.name + "' of '" + spec.outcome +
                                "' is synthesized in a later step");
            if (pred.role == ColumnRole::Unused)
                throw Error(ErrorKind::Schema, "predictor '" + pred.name + "' has role unused");
        }
        synthesized.insert(step.outcome_col);
        resolved.synthesized_cols.push_back(step.outcome_col);
        resolved.steps.push_back(std::move(step));
    }
    // Declared synthesized columns that no step produces would silently
    // keep confidential values in "synthetic" output; reject them.
    for (std::size_t c = 0; c < data.columns.size(); ++c)
        if (data.columns[c].role == ColumnRole::Synthesized && !synthesized.count(c))
            throw Error(ErrorKind::Schema, "column '" + data.columns[c].name +
                                               "' has role synthesized but no plan step");
    return resolved;
}

// ---------------------------------------------------------------------------
// Plan JSON

namespace {

ColumnKind kind_from_string(const std::string& text) {
    if (text == "categorical")
        return ColumnKind::Categorical;
    if (text == "count")
        return ColumnKind::Count;
    if (text == "continuous")
        return ColumnKind::Continuous;
    throw Error(ErrorKind::Schema, "unknown column kind '" + text + "'");
}

ColumnRole role_from_string(const std::string& text) {
    if (text == "synthesized")
        return ColumnRole::Synthesized;
    if (text == "unsynthesized-predictor")
        return ColumnRole::UnsynthesizedPredictor;
    if (text == "unused")
        return ColumnRole::Unused;
    throw Error(ErrorKind::Schema, "unknown column role '" + text + "'");
}

Family family_from_string(const std::string& text) {
    if (text == "normal")
        return Family::Normal;
    if (text == "poisson")
        return Family::Poisson;
    if (text == "multinomial-logit")
        return Family::MultinomialLogit;
    throw Error(ErrorKind::Schema, "unknown family '" + text + "'");
}

} // namespace

PlanFile load_plan_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in)
        throw Error(ErrorKind::Io, "cannot open '" + path.string() + "'");
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error& e) {
        throw Error(ErrorKind::Parse, "'" + path.string() + "': " + e.what());
    }
    try {
        PlanFile file;
        if (!doc.contains("columns") || !doc.contains("steps"))
            throw Error(ErrorKind::Schema,
                        "'" + path.string() + "' needs top-level fields 'columns' and 'steps'");
        for (const json& jc : doc.at("columns")) {
            ColumnSchema column;
            column.name = jc.at("name").get<std::string>();
            column.kind = kind_from_string(jc.at("kind").get<std::string>());
            column.role = role_from_string(jc.at("role").get<std::string>());
            if (jc.contains("levels"))
                column.levels = jc.at("levels").get<std::vector<std::string>>();
            check_column_schema(column);
            file.columns.push_back(std::move(column));
        }
        for (const json& js : doc.at("steps")) {
            ModelSpec spec;
            spec.outcome = js.at("outcome").get<std::string>();
            if (js.contains("predictors"))
                spec.predictors = js.at("predictors").get<std::vector<std::string>>();
            spec.family = family_from_string(js.at("family").get<std::string>());
            file.plan.steps.push_back(std::move(spec));
        }
        return file;
    } catch (const json::exception& e) {
        throw Error(ErrorKind::Schema, "'" + path.string() + "': " + e.what());
    }
}

void write_plan_file(const PlanFile& file, const std::filesystem::path& path) {
    json doc;
    doc["columns"] = json::array();
    for (const ColumnSchema& column : file.columns) {
        json jc;
        jc["name"] = column.name;
        jc["kind"] = to_string(column.kind);
        jc["role"] = to_string(column.role);
        if (column.kind == ColumnKind::Categorical)
            jc["levels"] = column.levels;
        doc["columns"].push_back(jc);
    }
    doc["steps"] = json::array();
    for (const ModelSpec& spec : file.plan.steps) {
        json js;
        js["outcome"] = spec.outcome;
        js["predictors"] = spec.predictors;
        js["family"] = to_string(spec.family);
        doc["steps"].push_back(js);
    }
    std::ofstream out(path);
    if (!out)
        throw Error(ErrorKind::Io, "cannot write '" + path.string() + "'");
    out << doc.dump(2) << '\n';
}

} // namespace attrisk
