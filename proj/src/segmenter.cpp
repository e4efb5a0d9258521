#include "wiser/segmenter.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "wiser/errors.hpp"

namespace wiser {
namespace {

__extension__ typedef __int128 Wide;

constexpr double kFixedPointScale = 4294967296.0;  // 2^32
constexpr double kMaxWeight = 2147483648.0;        // |weight| < 2^31 keeps int64 exact

void check_cert(const PivotSeries& pivots, const WiserConfig& cfg) {
    const auto& cert = cfg.cert;
    if (cert.n != pivots.size()) {
        throw CertMismatch("threshold certificate is for n=" + std::to_string(cert.n) +
                           " but the stream has n=" + std::to_string(pivots.size()));
    }
    if (cert.b != cfg.b) {
        throw CertMismatch("threshold certificate is for b=" + std::to_string(cert.b) +
                           " but the configuration uses b=" + std::to_string(cfg.b));
    }
    if (cert.scheme_id != pivots.law.id()) {
        throw CertMismatch("threshold certificate is for scheme '" + cert.scheme_id +
                           "' but the stream is '" + pivots.law.id() + "'");
    }
    if (cert.alpha != cfg.alpha) {
        throw CertMismatch("threshold certificate alpha differs from the configuration");
    }
    if (!std::isfinite(cert.q)) throw CertMismatch("threshold is not finite");
}

}  // namespace

void WiserConfig::validate() const {
    if (b < 1) throw std::invalid_argument("block length must be positive");
    if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("alpha must lie in (0, 1)");
    if (!(rho >= 0.05 && rho <= 0.9)) throw std::invalid_argument("rho must lie in [0.05, 0.9]");
    if (!(gamma > 0.0 && gamma < 0.5)) throw std::invalid_argument("gamma must lie in (0, 1/2)");
    if (!(discard_c > 0.0)) throw std::invalid_argument("discard constant must be positive");
}

std::vector<std::size_t> screen_blocks(std::span<const double> sums, double q) {
    if (!std::isfinite(q)) throw std::invalid_argument("threshold must be finite");
    std::vector<std::size_t> selected;
    for (std::size_t k = 0; k < sums.size(); ++k) {
        if (sums[k] > q) selected.push_back(k + 1);
    }
    return selected;
}

SegmentSet merge_runs(std::span<const std::size_t> selected) {
    std::vector<Interval> runs;
    for (std::size_t k : selected) {
        if (!runs.empty() && runs.back().right + 1 == k) {
            runs.back().right = k;
        } else {
            runs.push_back({k, k});
        }
    }
    return SegmentSet(std::move(runs));
}

std::size_t min_run_blocks(std::size_t n, std::size_t b, double discard_c) {
    if (b < 1) throw std::invalid_argument("block length must be positive");
    const double nn = static_cast<double>(n);
    const double tokens = discard_c * std::sqrt(nn * std::log(nn));
    const auto blocks = static_cast<std::size_t>(std::ceil(tokens / static_cast<double>(b)));
    return std::max<std::size_t>(1, blocks);
}

SegmentSet discard_short_runs(std::span<const std::size_t> selected, std::size_t min_blocks) {
    if (min_blocks < 1) throw std::invalid_argument("minimum run length must be at least 1");
    std::vector<Interval> kept;
    for (const auto& run : merge_runs(selected)) {
        if (run.length() >= min_blocks) kept.push_back(run);
    }
    return SegmentSet(std::move(kept));
}

std::size_t auto_pad(std::size_t n, double gamma) {
    return static_cast<std::size_t>(std::ceil(std::pow(static_cast<double>(n), 0.5 + gamma)));
}

SegmentSet enlarge_runs(const SegmentSet& runs, std::size_t b, std::size_t n, std::size_t pad) {
    std::vector<Interval> core;
    for (const auto& run : runs) {
        const std::size_t left = (run.left - 1) * b + 1;
        const std::size_t right = std::min(n, run.right * b);
        if (left > n) throw std::out_of_range("block run lies beyond the series");
        core.push_back({left, right});
    }
    std::vector<Interval> out;
    for (const auto& iv : core) {
        out.push_back({iv.left > pad ? iv.left - pad : 1, std::min(n, iv.right + pad)});
    }
    for (std::size_t j = 1; j < out.size(); ++j) {
        if (out[j - 1].right >= out[j].left) {
            const std::size_t mid = (core[j - 1].right + core[j].left) / 2;
            out[j - 1].right = std::min(out[j - 1].right, mid);
            out[j].left = std::max(out[j].left, mid + 1);
        }
    }
    return SegmentSet(std::move(out));
}

DTildeEstimate estimate_dtilde(std::span<const double> x, const SegmentSet& d, double mu0) {
    if (d.empty()) throw std::invalid_argument("d_tilde needs a nonempty enlarged set");
    d.validate_within(x.size());
    double total = 0.0;
    std::size_t count = 0;
    for (const auto& iv : d) {
        for (std::size_t t = iv.left; t <= iv.right; ++t) total += x[t - 1] - mu0;
        count += iv.length();
    }
    const double mean = total / static_cast<double>(count);
    if (mean <= 0.0) return {kDTildeFloor, true};
    return {mean, false};
}

std::size_t window_width(std::size_t pad, std::size_t b) { return 2 * (pad + b); }

SearchWindow search_window(const Interval& d, std::size_t width) {
    const std::size_t w = std::min(d.length(), width);
    if (w == 0) throw std::invalid_argument("search window must be nonempty");
    return {{d.left, d.left + w - 1}, {d.right - w + 1, d.right}};
}

std::vector<long long> objective_weights(std::span<const double> x, double mu0, double rho,
                                         double d_tilde) {
    const double offset = mu0 + rho * d_tilde;
    std::vector<long long> out(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double g = x[i] - offset;
        if (!(std::abs(g) < kMaxWeight)) {
            throw std::domain_error("pivot score out of range for localization: " +
                                    std::to_string(x[i]));
        }
        out[i] = std::llround(g * kFixedPointScale);
    }
    return out;
}

Interval localize_segment(std::span<const double> x, const Interval& d, const SearchWindow& window,
                          double mu0, double rho, double d_tilde) {
    const auto& lw = window.left;
    const auto& rw = window.right;
    if (lw.left > lw.right || rw.left > rw.right) {
        throw std::invalid_argument("empty search window");
    }
    if (d.right > x.size() || lw.left < d.left || lw.right > d.right || rw.left < d.left ||
        rw.right > d.right || lw.left > rw.right) {
        throw std::invalid_argument("search window does not fit inside D");
    }
    const auto weights =
        objective_weights(x.subspan(d.left - 1, d.length()), mu0, rho, d_tilde);

    // prefix[i] = sum of the first i weights of D; inside(s, t) = prefix[t'+1] - prefix[s']
    std::vector<Wide> prefix(weights.size() + 1, 0);
    for (std::size_t i = 0; i < weights.size(); ++i) prefix[i + 1] = prefix[i] + weights[i];

    // Minimizing the outside sum over D is maximizing the inside sum. For each
    // end t keep the start with the smallest prefix (largest s on ties).
    bool have_start = false;
    Wide start_prefix = 0;
    std::size_t start = 0;
    std::size_t next_start = lw.left;

    bool have_best = false;
    Wide best_value = 0;
    Interval best{};
    for (std::size_t t = rw.left; t <= rw.right; ++t) {
        const std::size_t last_start = std::min(lw.right, t);
        for (; next_start <= last_start; ++next_start) {
            const Wide p = prefix[next_start - d.left];
            if (!have_start || p <= start_prefix) {
                start_prefix = p;
                start = next_start;
                have_start = true;
            }
        }
        if (!have_start) continue;
        const Wide value = prefix[t - d.left + 1] - start_prefix;
        const Interval candidate{start, t};
        if (!have_best || value > best_value ||
            (value == best_value &&
             (candidate.length() < best.length() ||
              (candidate.length() == best.length() && candidate.left < best.left)))) {
            best_value = value;
            best = candidate;
            have_best = true;
        }
    }
    if (!have_best) throw std::invalid_argument("search window admits no s <= t");
    return best;
}

Interval naive_estimate(std::span<const double> x, double mu0, double rho, double d_tilde) {
    if (x.empty()) throw std::invalid_argument("empty pivot series");
    const auto weights = objective_weights(x, mu0, rho, d_tilde);
    Wide total = 0;
    for (long long w : weights) total += w;

    bool have_best = false;
    Wide best_outside = 0;
    Interval best{};
    const std::size_t n = x.size();
    for (std::size_t s = 1; s <= n; ++s) {
        Wide inside = 0;
        for (std::size_t t = s; t <= n; ++t) {
            inside += weights[t - 1];
            const Wide outside = total - inside;
            const Interval candidate{s, t};
            if (!have_best || outside < best_outside ||
                (outside == best_outside &&
                 (candidate.length() < best.length() ||
                  (candidate.length() == best.length() && candidate.left < best.left)))) {
                best_outside = outside;
                best = candidate;
                have_best = true;
            }
        }
    }
    return best;
}

WiserResult wiser_segment(const PivotSeries& pivots, const WiserConfig& cfg) {
    cfg.validate();
    check_cert(pivots, cfg);
    const std::span<const double> x = pivots.scores;
    const std::size_t n = x.size();

    WiserResult result;
    auto& trace = result.trace;
    trace.q = cfg.cert.q;
    trace.block_sums = block_sums(x, cfg.b);
    trace.selected_blocks = screen_blocks(trace.block_sums, cfg.cert.q);
    trace.merged_runs = merge_runs(trace.selected_blocks);
    trace.min_run_blocks = min_run_blocks(n, cfg.b, cfg.discard_c);
    trace.kept_runs = discard_short_runs(trace.selected_blocks, trace.min_run_blocks);
    trace.pad = cfg.pad.value_or(auto_pad(n, cfg.gamma));
    if (trace.kept_runs.empty()) return result;

    trace.enlarged = enlarge_runs(trace.kept_runs, cfg.b, n, trace.pad);
    const auto estimate = estimate_dtilde(x, trace.enlarged, pivots.mu0());
    trace.d_tilde = estimate.value;
    trace.d_tilde_floored = estimate.floored;

    const std::size_t width = window_width(trace.pad, cfg.b);
    std::vector<Interval> segments;
    for (const auto& d : trace.enlarged) {
        const SearchWindow window = search_window(d, width);
        trace.windows.push_back(window);
        segments.push_back(
            localize_segment(x, d, window, pivots.mu0(), cfg.rho, trace.d_tilde));
    }
    result.segments = SegmentSet(std::move(segments));
    return result;
}

}  // namespace wiser
