#pragma once

#include <cstddef>
#include <cstdint>
#include <string>

#include "wiser/segment_set.hpp"

namespace wiser {

/// |union(truth) ∩ union(est)| / |union(truth) ∪ union(est)|; 1 when both
/// are empty.
double iou(const SegmentSet& truth, const SegmentSet& est, std::size_t n);

struct PrecisionRecall {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
};

/// An estimated interval is a hit when it meets the union of the truth.
PrecisionRecall precision_recall_f1(const SegmentSet& truth, const SegmentSet& est);

/// Exact pair counts behind RI and MRI, over C(n, 2) unordered token pairs
/// with binary watermarked / unwatermarked labels.
struct PairCounts {
    std::uint64_t concordant = 0;  // pairs co-labelled alike in both labelings
    std::uint64_t correction = 0;  // pairs inside one missed true or one spurious estimated interval
    std::uint64_t total = 0;       // C(n, 2)

    double rand_index() const;
    double modified_rand_index() const;
};

/// O(n) from run lengths.
PairCounts pair_counts(const SegmentSet& truth, const SegmentSet& est, std::size_t n);

double rand_index(const SegmentSet& truth, const SegmentSet& est, std::size_t n);
double modified_rand_index(const SegmentSet& truth, const SegmentSet& est, std::size_t n);

struct EvalReport {
    std::string model;
    std::string scheme;
    std::string method = "wiser";
    double iou = 0.0;
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    double ri = 0.0;
    double mri = 0.0;
    std::size_t k_true = 0;
    std::size_t k_hat = 0;
    double runtime_ms = 0.0;
};

EvalReport evaluate(const SegmentSet& truth, const SegmentSet& est, std::size_t n);

/// "model,scheme,method,iou,precision,recall,f1,ri,mri,runtime_ms"
std::string eval_csv_header();
std::string eval_csv_row(const EvalReport& report);

/// Fixed-precision number formatting shared by every CSV writer.
std::string format_number(double value);

}  // namespace wiser
