#pragma once

#include <algorithm>
#include <cmath>
#include <span>

namespace attrisk {

/// log(sum(exp(values))) with max subtraction; -inf for an empty span.
inline double logsumexp(std::span<const double> values) {
    if (values.empty())
        return -std::numeric_limits<double>::infinity();
    const double max_value = *std::max_element(values.begin(), values.end());
    if (!std::isfinite(max_value))
        return max_value; // all -inf, or a NaN/inf to propagate
    double sum = 0.0;
    for (double v : values)
        sum += std::exp(v - max_value);
    return max_value + std::log(sum);
}

/// Turns logits into probabilities in place (max-subtracted, normalized).
inline void softmax_inplace(std::span<double> logits) {
    const double max_logit = *std::max_element(logits.begin(), logits.end());
    double total = 0.0;
    for (double& v : logits) {
        v = std::exp(v - max_logit);
        total += v;
    }
    for (double& v : logits)
        v /= total;
}

} // namespace attrisk
