#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "wiser/blocking.hpp"
#include "wiser/calibrate.hpp"
#include "wiser/pivot.hpp"
#include "wiser/segment_set.hpp"

namespace wiser {

struct WiserConfig {
    std::size_t b = 65;
    double alpha = 0.05;
    double rho = 0.5;
    double gamma = 0.1;
    double discard_c = 0.5;
    std::optional<std::size_t> pad;  // nullopt: ceil(n^(1/2 + gamma))
    ThresholdCert cert;

    void validate() const;
};

/// Start and end search ranges for one enlarged interval D_j.
struct SearchWindow {
    Interval left;
    Interval right;
};

struct StageTrace {
    std::vector<double> block_sums;
    std::vector<std::size_t> selected_blocks;  // 1-based block indices
    SegmentSet merged_runs;                    // block units
    SegmentSet kept_runs;                      // block units
    SegmentSet enlarged;                       // D_j, token units
    std::vector<SearchWindow> windows;
    double q = 0.0;
    std::size_t min_run_blocks = 1;
    std::size_t pad = 0;
    double d_tilde = 0.0;
    bool d_tilde_floored = false;
};

struct WiserResult {
    SegmentSet segments;
    StageTrace trace;

    std::size_t k_hat() const { return segments.size(); }
};

/// 1-based indices k with sums[k] > q (strict).
std::vector<std::size_t> screen_blocks(std::span<const double> sums, double q);

/// Joins consecutive selected block indices into maximal runs.
SegmentSet merge_runs(std::span<const std::size_t> selected);

/// ceil(c * sqrt(n log n) / b), at least 1.
std::size_t min_run_blocks(std::size_t n, std::size_t b, double discard_c);

/// Merged runs of at least min_blocks blocks.
SegmentSet discard_short_runs(std::span<const std::size_t> selected, std::size_t min_blocks);

/// ceil(n^(1/2 + gamma)).
std::size_t auto_pad(std::size_t n, double gamma);

/// Block runs -> token intervals padded by `pad` on each side and clipped to
/// [1, n]. Padded neighbours that would overlap are cut at the midpoint of
/// the gap between their unpadded extents.
SegmentSet enlarge_runs(const SegmentSet& runs, std::size_t b, std::size_t n, std::size_t pad);

struct DTildeEstimate {
    double value = 0.0;
    bool floored = false;
};

inline constexpr double kDTildeFloor = 1e-6;

/// Mean of (x_t - mu0) over the union of D; floored at kDTildeFloor.
DTildeEstimate estimate_dtilde(std::span<const double> x, const SegmentSet& d, double mu0);

/// 2 (pad + b): width of the start and end search ranges.
std::size_t window_width(std::size_t pad, std::size_t b);

/// First and last min(|D|, width) positions of D.
SearchWindow search_window(const Interval& d, std::size_t width);

/// argmin over s in window.left, t in window.right, s <= t of
/// sum_{k in D \ [s, t]} (x_k - mu0 - rho * d_tilde); ties go to the
/// narrowest interval, then the smallest s. Linear in |D|.
Interval localize_segment(std::span<const double> x, const Interval& d, const SearchWindow& window,
                          double mu0, double rho, double d_tilde);

/// Exhaustive O(n^2) version of the same objective over all 1 <= s <= t <= n.
Interval naive_estimate(std::span<const double> x, double mu0, double rho, double d_tilde);

/// Objective weights x_k - mu0 - rho * d_tilde in 2^-32 fixed point. Both
/// estimators compare exact integer sums, so their tie-breaking agrees.
std::vector<long long> objective_weights(std::span<const double> x, double mu0, double rho,
                                         double d_tilde);

/// Full pipeline: blocking, discarding, enlargement, d_tilde, localization.
WiserResult wiser_segment(const PivotSeries& pivots, const WiserConfig& cfg);

}  // namespace wiser
