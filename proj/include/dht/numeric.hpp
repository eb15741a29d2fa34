#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>

namespace dht {

// log(sum_k exp(values[k])), max-shifted so huge negative magnitudes stay exact.
inline double log_sum_exp(std::span<const double> values) {
    double max_val = -std::numeric_limits<double>::infinity();
    for (double v : values) max_val = std::max(max_val, v);
    if (!std::isfinite(max_val)) return max_val;
    double sum = 0.0;
    for (double v : values) sum += std::exp(v - max_val);
    return max_val + std::log(sum);
}

// Normalizes a log-probability vector in place: subtracts log_sum_exp so that
// exp(row) sums to one.
inline void log_normalize(std::span<double> row) {
    const double lse = log_sum_exp(row);
    for (double& v : row) v -= lse;
}

inline bool log_normalized(std::span<const double> row, double tol = 1e-9) {
    return std::abs(log_sum_exp(row)) <= tol;
}

inline bool all_finite(std::span<const double> row) {
    return std::all_of(row.begin(), row.end(), [](double v) { return std::isfinite(v); });
}

}  // namespace dht
