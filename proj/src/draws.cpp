#include "attrisk/draws.hpp"

#include "attrisk/error.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace attrisk {

std::vector<std::string> draws_column_names(const ResolvedStep& step) {
    std::vector<std::string> names;
    switch (step.spec.family) {
        case Family::Normal:
            names = step.design_names;
            names.push_back("sigma");
            break;
        case Family::Poisson:
            names = step.design_names;
            break;
        case Family::MultinomialLogit:
            for (std::size_t level = 2; level <= step.n_levels; ++level)
                for (const auto& coef : step.design_names)
                    names.push_back("mu" + std::to_string(level) + "_" + coef);
            break;
    }
    return names;
}

void DrawsMatrix::validate(const ResolvedStep& step) const {
    const std::vector<std::string> expected = draws_column_names(step);
    if (names != expected) {
        std::string want;
        for (const auto& name : expected)
            want += (want.empty() ? "" : ",") + name;
        std::string got;
        for (const auto& name : names)
            got += (got.empty() ? "" : ",") + name;
        throw Error(ErrorKind::Schema, "draws for '" + step.spec.outcome + "' have columns [" +
                                           got + "], expected [" + want + "]");
    }
    if (n_draws == 0)
        throw Error(ErrorKind::Size, "draws for '" + step.spec.outcome + "' are empty");
    if (values.size() != n_draws * names.size())
        throw Error(ErrorKind::Internal, "draws value buffer has wrong size");
    const std::size_t sigma_col = step.spec.family == Family::Normal ? names.size() - 1 : 0;
    for (std::size_t d = 0; d < n_draws; ++d) {
        for (std::size_t p = 0; p < names.size(); ++p)
            if (!std::isfinite(at(d, p)))
                throw Error(ErrorKind::Domain, "non-finite draw at row " + std::to_string(d + 1) +
                                                   ", column '" + names[p] + "'");
        if (step.spec.family == Family::Normal && !(at(d, sigma_col) > 0.0))
            throw Error(ErrorKind::Domain,
                        "sigma must be > 0 at draw row " + std::to_string(d + 1));
    }
}

std::size_t DrawsSet::min_draws() const {
    std::size_t least = 0;
    for (std::size_t i = 0; i < steps.size(); ++i)
        least = (i == 0) ? steps[i].n_draws : std::min(least, steps[i].n_draws);
    return least;
}

std::vector<std::size_t> strided_indices(std::size_t available, std::size_t take) {
    if (take == 0 || take > available)
        throw Error(ErrorKind::Size, "requested " + std::to_string(take) + " draws, " +
                                         std::to_string(available) + " available");
    const std::size_t stride = available / take;
    std::vector<std::size_t> indices(take);
    for (std::size_t j = 0; j < take; ++j)
        indices[j] = available - 1 - (take - 1 - j) * stride;
    return indices;
}

void write_draws(const DrawsMatrix& draws, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out)
        throw Error(ErrorKind::Io, "cannot write '" + path.string() + "'");
    for (std::size_t p = 0; p < draws.names.size(); ++p)
        out << (p ? "," : "") << draws.names[p];
    out << '\n';
    for (std::size_t d = 0; d < draws.n_draws; ++d) {
        for (std::size_t p = 0; p < draws.names.size(); ++p)
            out << (p ? "," : "") << format_double(draws.at(d, p));
        out << '\n';
    }
    if (!out)
        throw Error(ErrorKind::Io, "write failed for '" + path.string() + "'");
}

DrawsMatrix read_draws(const std::filesystem::path& path, const ResolvedStep& step) {
    std::ifstream in(path);
    if (!in)
        throw Error(ErrorKind::Io, "cannot open '" + path.string() + "'");
    DrawsMatrix draws;
    std::string line;
    if (!std::getline(in, line))
        throw Error(ErrorKind::Parse, "'" + path.string() + "' is empty");
    if (!line.empty() && line.back() == '\r')
        line.pop_back();
    std::stringstream header(line);
    std::string name;
    while (std::getline(header, name, ','))
        draws.names.push_back(name);

    const std::size_t width = draws.names.size();
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r')
            line.pop_back();
        if (line.empty())
            continue;
        std::size_t begin = 0;
        std::size_t count = 0;
        while (begin <= line.size()) {
            std::size_t end = line.find(',', begin);
            if (end == std::string::npos)
                end = line.size();
            double value = 0.0;
            auto [ptr, ec] = std::from_chars(line.data() + begin, line.data() + end, value);
            if (ec != std::errc() || ptr != line.data() + end)
                throw Error(ErrorKind::Parse, "'" + path.string() + "' line " +
                                                  std::to_string(line_no) + ": bad number");
            draws.values.push_back(value);
            ++count;
            begin = end + 1;
            if (end == line.size())
                break;
        }
        if (count != width)
            throw Error(ErrorKind::Parse, "'" + path.string() + "' line " +
                                              std::to_string(line_no) + " has " +
                                              std::to_string(count) + " fields, expected " +
                                              std::to_string(width));
        ++draws.n_draws;
    }
    draws.validate(step);
    return draws;
}

} // namespace attrisk
