#pragma once

#include "attrisk/schema.hpp"

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace attrisk {

/// Posterior parameter draws for one plan step, one draw per row.
///
/// Column layout by family:
///   normal            coefficients in design order, then "sigma" (> 0)
///   poisson           coefficients in design order
///   multinomial-logit for each level c = 2..k, the design coefficients
///                     named "mu<c>_<coef>"; level 1 is the zero baseline
struct DrawsMatrix {
    std::size_t step = 0;
    std::vector<std::string> names;
    std::size_t n_draws = 0;
    std::vector<double> values; // row-major, n_draws x names.size()

    double acceptance_rate = -1.0; // Metropolis fits only
    std::vector<std::string> warnings;

    std::size_t n_params() const { return names.size(); }
    double at(std::size_t draw, std::size_t param) const {
        return values[draw * names.size() + param];
    }
    std::span<const double> row(std::size_t draw) const {
        return {values.data() + draw * names.size(), names.size()};
    }

    /// Shape and finiteness checks against the step the draws are for.
    void validate(const ResolvedStep& step) const;
};

/// Expected column names for a step's draws matrix.
std::vector<std::string> draws_column_names(const ResolvedStep& step);

struct DrawsSet {
    std::vector<DrawsMatrix> steps;

    std::size_t min_draws() const;
};

/// `take` indices evenly strided through [0, available), anchored so the
/// last selected index is the final draw.  Requires take <= available.
std::vector<std::size_t> strided_indices(std::size_t available, std::size_t take);

void write_draws(const DrawsMatrix& draws, const std::filesystem::path& path);

/// Reads a draws file and validates it against the step it will serve;
/// this is the substitution point for draws produced by external MCMC
/// tools.
DrawsMatrix read_draws(const std::filesystem::path& path, const ResolvedStep& step);

} // namespace attrisk
