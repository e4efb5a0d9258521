#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace wiser {

/// Number of length-b blocks covering n tokens; the last may be shorter.
std::size_t block_count(std::size_t n, std::size_t b);

/// S_k = sum of x over block k (consecutive blocks of length b, last one
/// possibly shorter). Calibration and segmentation share this layout.
std::vector<double> block_sums(std::span<const double> x, std::size_t b);

/// max_k S_k, accumulated in the same order as block_sums.
double max_block_sum(std::span<const double> x, std::size_t b);

}  // namespace wiser
