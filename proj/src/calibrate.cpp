#include "wiser/calibrate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "wiser/blocking.hpp"
#include "wiser/parallel.hpp"
#include "wiser/rng.hpp"

namespace wiser {
namespace {

// One null replicate of max_k S_k. Accumulation order matches block_sums().
double null_max_block_sum(const NullLaw& law, std::size_t n, std::size_t b, Rng& rng) {
    double best = -std::numeric_limits<double>::infinity();
    for (std::size_t start = 0; start < n; start += b) {
        const std::size_t end = std::min(n, start + b);
        double s = 0.0;
        for (std::size_t t = start; t < end; ++t) s += law.sample(rng);
        best = std::max(best, s);
    }
    return best;
}

std::vector<double> simulate_maxima(const NullLaw& law, std::size_t n, std::size_t b,
                                    std::size_t reps, std::uint64_t seed, unsigned jobs) {
    block_count(n, b);  // validates the layout
    std::vector<double> maxima(reps);
    parallel_for(reps, jobs, [&](std::size_t r) {
        Rng rng(derive_seed(seed, r));
        maxima[r] = null_max_block_sum(law, n, b, rng);
    });
    return maxima;
}

}  // namespace

std::size_t quantile_rank(double alpha, std::size_t reps) {
    if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("alpha must lie in (0, 1)");
    if (reps == 0) throw std::invalid_argument("need at least one Monte Carlo replicate");
    // the epsilon keeps exact products such as 0.95 * 10000 from rounding up
    const double exact = (1.0 - alpha) * static_cast<double>(reps);
    const auto rank = static_cast<std::size_t>(std::ceil(exact - 1e-9));
    return std::clamp<std::size_t>(rank, 1, reps);
}

ThresholdCert calibrate_threshold(const NullLaw& law, std::size_t n, std::size_t b, double alpha,
                                  std::size_t mc_reps, std::uint64_t seed, unsigned jobs) {
    const std::size_t rank = quantile_rank(alpha, mc_reps);
    auto maxima = simulate_maxima(law, n, b, mc_reps, seed, jobs);
    std::nth_element(maxima.begin(), maxima.begin() + static_cast<std::ptrdiff_t>(rank - 1),
                     maxima.end());

    ThresholdCert cert;
    cert.q = maxima[rank - 1];
    cert.alpha = alpha;
    cert.n = n;
    cert.b = b;
    cert.scheme_id = law.id();
    cert.mc_reps = mc_reps;
    cert.seed = seed;
    cert.quantile_level = 1.0 - alpha;
    return cert;
}

double null_fpr_estimate(const ThresholdCert& cert, std::size_t reps, std::uint64_t seed,
                         unsigned jobs) {
    if (reps < 1000) throw std::invalid_argument("null FPR estimate needs at least 1000 reps");
    const NullLaw law = NullLaw::parse(cert.scheme_id);
    const auto maxima = simulate_maxima(law, cert.n, cert.b, reps, seed, jobs);
    const auto exceed = std::count_if(maxima.begin(), maxima.end(),
                                      [&](double m) { return m > cert.q; });
    return static_cast<double>(exceed) / static_cast<double>(reps);
}

}  // namespace wiser
