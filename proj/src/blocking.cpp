#include "wiser/blocking.hpp"

#include <algorithm>
#include <stdexcept>

namespace wiser {
namespace {

void check_layout(std::size_t n, std::size_t b) {
    if (n == 0) throw std::invalid_argument("empty pivot series");
    if (b < 1 || b > n) throw std::invalid_argument("block length must lie in [1, n]");
}

}  // namespace

std::size_t block_count(std::size_t n, std::size_t b) {
    check_layout(n, b);
    return (n + b - 1) / b;
}

std::vector<double> block_sums(std::span<const double> x, std::size_t b) {
    const std::size_t count = block_count(x.size(), b);
    std::vector<double> sums(count, 0.0);
    for (std::size_t k = 0; k < count; ++k) {
        const std::size_t end = std::min(x.size(), (k + 1) * b);
        double s = 0.0;
        for (std::size_t t = k * b; t < end; ++t) s += x[t];
        sums[k] = s;
    }
    return sums;
}

double max_block_sum(std::span<const double> x, std::size_t b) {
    const auto sums = block_sums(x, b);
    return *std::max_element(sums.begin(), sums.end());
}

}  // namespace wiser
