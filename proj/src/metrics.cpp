#include "wiser/metrics.hpp"

#include <array>
#include <cstdio>
#include <stdexcept>

namespace wiser {
namespace {

std::uint64_t pairs(std::uint64_t m) { return m < 2 ? 0 : m * (m - 1) / 2; }

}  // namespace

double iou(const SegmentSet& truth, const SegmentSet& est, std::size_t n) {
    const auto a = truth.mask(n);
    const auto b = est.mask(n);
    std::size_t inter = 0;
    std::size_t uni = 0;
    for (std::size_t t = 0; t < n; ++t) {
        inter += (a[t] && b[t]);
        uni += (a[t] || b[t]);
    }
    if (uni == 0) return 1.0;
    return static_cast<double>(inter) / static_cast<double>(uni);
}

PrecisionRecall precision_recall_f1(const SegmentSet& truth, const SegmentSet& est) {
    std::size_t hits = 0;
    for (const auto& e : est) {
        for (const auto& t : truth) {
            if (e.left <= t.right && t.left <= e.right) {
                ++hits;
                break;
            }
        }
    }
    const auto k_true = static_cast<double>(truth.size());
    const auto k_hat = static_cast<double>(est.size());
    PrecisionRecall out;
    if (est.empty()) {
        out.precision = truth.empty() ? 1.0 : 0.0;
    } else {
        out.precision = static_cast<double>(hits) / k_hat;
    }
    out.recall = truth.empty() ? 1.0 : static_cast<double>(hits) / k_true;
    const double denom = out.precision + out.recall;
    out.f1 = denom > 0.0 ? 2.0 * out.precision * out.recall / denom : 0.0;
    return out;
}

double PairCounts::rand_index() const {
    return static_cast<double>(concordant) / static_cast<double>(total);
}

double PairCounts::modified_rand_index() const {
    return (static_cast<double>(concordant) - static_cast<double>(correction)) /
           static_cast<double>(total);
}

PairCounts pair_counts(const SegmentSet& truth, const SegmentSet& est, std::size_t n) {
    if (n < 2) throw std::invalid_argument("Rand index needs n >= 2");
    const auto a = truth.mask(n);
    const auto b = est.mask(n);

    // table[2 * truth_label + est_label]
    std::array<std::uint64_t, 4> table{};
    for (std::size_t t = 0; t < n; ++t) ++table[2 * a[t] + b[t]];

    PairCounts out;
    out.total = pairs(n);
    for (auto c : table) out.concordant += pairs(c);
    out.concordant += table[0] * table[3] + table[1] * table[2];

    for (const auto& iv : truth) {
        std::uint64_t missed = 0;
        for (std::size_t t = iv.left; t <= iv.right; ++t) missed += !b[t - 1];
        out.correction += pairs(missed);
    }
    for (const auto& iv : est) {
        std::uint64_t spurious = 0;
        for (std::size_t t = iv.left; t <= iv.right; ++t) spurious += !a[t - 1];
        out.correction += pairs(spurious);
    }
    return out;
}

double rand_index(const SegmentSet& truth, const SegmentSet& est, std::size_t n) {
    return pair_counts(truth, est, n).rand_index();
}

double modified_rand_index(const SegmentSet& truth, const SegmentSet& est, std::size_t n) {
    return pair_counts(truth, est, n).modified_rand_index();
}

EvalReport evaluate(const SegmentSet& truth, const SegmentSet& est, std::size_t n) {
    EvalReport report;
    report.iou = iou(truth, est, n);
    const auto pr = precision_recall_f1(truth, est);
    report.precision = pr.precision;
    report.recall = pr.recall;
    report.f1 = pr.f1;
    const auto counts = pair_counts(truth, est, n);
    report.ri = counts.rand_index();
    report.mri = counts.modified_rand_index();
    report.k_true = truth.size();
    report.k_hat = est.size();
    return report;
}

std::string format_number(double value) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6f", value);
    return buf;
}

std::string eval_csv_header() {
    return "model,scheme,method,iou,precision,recall,f1,ri,mri,runtime_ms";
}

std::string eval_csv_row(const EvalReport& r) {
    return r.model + "," + r.scheme + "," + r.method + "," + format_number(r.iou) + "," +
           format_number(r.precision) + "," + format_number(r.recall) + "," +
           format_number(r.f1) + "," + format_number(r.ri) + "," + format_number(r.mri) + "," +
           format_number(r.runtime_ms);
}

}  // namespace wiser
