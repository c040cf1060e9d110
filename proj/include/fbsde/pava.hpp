#pragma once

#include <algorithm>
#include <cstddef>
#include <span>
#include <vector>

namespace fbsde {

// Pool-adjacent-violators projection onto non-decreasing sequences
// (least squares, unit weights). In place.
inline void isotonic_increasing(std::span<double> v) {
    const std::size_t n = v.size();
    if (n < 2) return;
    // blocks of equal fitted value: (mean, weight)
    std::vector<double> mean(n), weight(n);
    std::vector<std::size_t> len(n);
    std::size_t top = 0;
    for (std::size_t i = 0; i < n; ++i) {
        mean[top] = v[i];
        weight[top] = 1.0;
        len[top] = 1;
        ++top;
        while (top > 1 && mean[top - 2] > mean[top - 1]) {
            const double w = weight[top - 2] + weight[top - 1];
            mean[top - 2] = (weight[top - 2] * mean[top - 2] + weight[top - 1] * mean[top - 1]) / w;
            weight[top - 2] = w;
            len[top - 2] += len[top - 1];
            --top;
        }
    }
    std::size_t pos = 0;
    for (std::size_t b = 0; b < top; ++b) {
        for (std::size_t k = 0; k < len[b]; ++k) v[pos++] = mean[b];
    }
}

// Largest adjacent decrease, max_j (v[j] - v[j+1])_+ ; zero for monotone input.
inline double max_adjacent_inversion(std::span<const double> v) {
    double worst = 0.0;
    for (std::size_t j = 0; j + 1 < v.size(); ++j) {
        worst = std::max(worst, v[j] - v[j + 1]);
    }
    return std::max(worst, 0.0);
}

} // namespace fbsde
