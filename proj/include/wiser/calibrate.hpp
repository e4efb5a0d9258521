#pragma once

#include <cstddef>
#include <cstdint>
#include <string>

#include "wiser/pivot.hpp"

namespace wiser {

inline constexpr std::size_t kCertifiedMcReps = 10000;

/// Monte Carlo screening threshold: the (1 - alpha)-quantile of the null
/// distribution of max_k S_k for n tokens in blocks of length b.
struct ThresholdCert {
    double q = 0.0;
    double alpha = 0.05;
    std::size_t n = 0;
    std::size_t b = 0;
    std::string scheme_id;  // NullLaw::id() of the calibrated law
    std::size_t mc_reps = 0;
    std::uint64_t seed = 0;
    double quantile_level = 0.95;

    bool certified() const { return mc_reps >= kCertifiedMcReps; }
    bool operator==(const ThresholdCert&) const = default;
};

/// 1-based rank of the empirical quantile: ceil((1 - alpha) * reps).
std::size_t quantile_rank(double alpha, std::size_t reps);

ThresholdCert calibrate_threshold(const NullLaw& law, std::size_t n, std::size_t b, double alpha,
                                  std::size_t mc_reps, std::uint64_t seed, unsigned jobs = 0);

/// Fraction of fresh null streams whose max block sum strictly exceeds cert.q.
double null_fpr_estimate(const ThresholdCert& cert, std::size_t reps, std::uint64_t seed,
                         unsigned jobs = 0);

}  // namespace wiser
