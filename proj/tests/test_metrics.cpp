#include <cmath>
#include <stdexcept>
#include <vector>

#include "doctest.h"
#include "oracles.hpp"
#include "wiser/metrics.hpp"
#include "wiser/rng.hpp"

using namespace wiser;

namespace {

SegmentSet random_set(Rng& rng, std::size_t n, std::size_t max_k) {
    std::vector<Interval> out;
    const std::size_t k = rng() % (max_k + 1);
    std::size_t cursor = 1;
    for (std::size_t i = 0; i < k && cursor <= n; ++i) {
        const std::size_t left = cursor + rng() % std::max<std::size_t>(1, (n - cursor + 1) / 2);
        if (left > n) break;
        const std::size_t right = left + rng() % std::max<std::size_t>(1, (n - left + 1) / 2);
        out.push_back({left, std::min(right, n)});
        cursor = std::min(right, n) + 2;
    }
    return SegmentSet(std::move(out));
}

// Every set of at most `max_k` disjoint intervals within [1, n].
void enumerate_sets(std::size_t n, std::size_t max_k, std::size_t from, std::vector<Interval>& cur,
                    std::vector<SegmentSet>& out) {
    out.emplace_back(cur);
    if (cur.size() == max_k) return;
    for (std::size_t l = from; l <= n; ++l) {
        for (std::size_t r = l; r <= n; ++r) {
            cur.push_back({l, r});
            enumerate_sets(n, max_k, r + 2, cur, out);
            cur.pop_back();
        }
    }
}

}  // namespace

TEST_CASE("IOU") {
    const SegmentSet t{{100, 200}};
    CHECK(iou(t, t, 500) == 1.0);
    CHECK(iou(t, SegmentSet{{150, 250}}, 500) == doctest::Approx(51.0 / 151.0));
    CHECK(iou(t, SegmentSet{}, 500) == 0.0);
    CHECK(iou(SegmentSet{}, t, 500) == 0.0);
    CHECK(iou(SegmentSet{}, SegmentSet{}, 500) == 1.0);
    CHECK_THROWS_AS(iou(SegmentSet{{1, 501}}, t, 500), std::out_of_range);
}

TEST_CASE("precision, recall and F1") {
    const SegmentSet two{{10, 20}, {40, 50}};
    auto pr = precision_recall_f1(two, two);
    CHECK(pr.precision == 1.0);
    CHECK(pr.recall == 1.0);
    CHECK(pr.f1 == 1.0);

    pr = precision_recall_f1(two, SegmentSet{{15, 30}});
    CHECK(pr.precision == 1.0);
    CHECK(pr.recall == 0.5);
    CHECK(pr.f1 == doctest::Approx(2.0 / 3.0));

    pr = precision_recall_f1(SegmentSet{{10, 20}}, SegmentSet{{1, 5}, {20, 22}, {30, 31}});
    CHECK(pr.precision == doctest::Approx(1.0 / 3.0));
    CHECK(pr.recall == 1.0);

    // recall shares the precision numerator, so repeated hits on one truth count again
    pr = precision_recall_f1(SegmentSet{{10, 40}}, SegmentSet{{12, 15}, {20, 22}});
    CHECK(pr.precision == 1.0);
    CHECK(pr.recall == 2.0);

    pr = precision_recall_f1(SegmentSet{}, SegmentSet{});
    CHECK(pr.precision == 1.0);
    CHECK(pr.recall == 1.0);
    pr = precision_recall_f1(two, SegmentSet{});
    CHECK(pr.precision == 0.0);
    CHECK(pr.recall == 0.0);
    CHECK(pr.f1 == 0.0);
    pr = precision_recall_f1(SegmentSet{}, two);
    CHECK(pr.precision == 0.0);
    CHECK(pr.recall == 1.0);
}

TEST_CASE("precision and recall match hand counts over all small configurations") {
    const std::size_t n = 12;
    std::vector<SegmentSet> sets;
    std::vector<Interval> cur;
    enumerate_sets(n, 3, 1, cur, sets);
    Rng rng(4);
    std::size_t checked = 0;
    for (const auto& truth : sets) {
        for (int k = 0; k < 3; ++k) {
            const auto& est = sets[rng() % sets.size()];
            const auto pr = precision_recall_f1(truth, est);
            const std::size_t hits = oracle::hits(truth, est);
            const double p = est.empty() ? (truth.empty() ? 1.0 : 0.0)
                                         : static_cast<double>(hits) / est.size();
            const double r = truth.empty() ? 1.0 : static_cast<double>(hits) / truth.size();
            CHECK(pr.precision == p);
            CHECK(pr.recall == r);
            CHECK(pr.f1 == (p + r > 0 ? 2 * p * r / (p + r) : 0.0));
            CHECK(iou(truth, est, n) == oracle::iou(truth, est, n));
            ++checked;
        }
    }
    MESSAGE(checked << " configurations checked over " << sets.size() << " sets");
}

TEST_CASE("Rand index examples") {
    const SegmentSet t{{3, 7}};
    CHECK(rand_index(t, t, 10) == 1.0);
    CHECK(modified_rand_index(t, t, 10) == 1.0);

    const SegmentSet nine{{1, 9}};
    CHECK(rand_index(nine, SegmentSet{}, 10) == doctest::Approx(0.8));
    CHECK(modified_rand_index(nine, SegmentSet{}, 10) == doctest::Approx(0.0));

    // identical binary partitions with the labels swapped
    const auto swapped = pair_counts(SegmentSet{{1, 2}}, SegmentSet{{3, 4}}, 4);
    CHECK(swapped.total == 6);
    CHECK(swapped.concordant == 6);
    CHECK(swapped.correction == 2);

    const double ri = rand_index(SegmentSet{}, SegmentSet{{1, 5}}, 10);
    CHECK(modified_rand_index(SegmentSet{}, SegmentSet{{1, 5}}, 10) ==
          doctest::Approx(ri - 10.0 / 45.0));

    CHECK_THROWS_AS(rand_index(SegmentSet{}, SegmentSet{}, 1), std::invalid_argument);
    CHECK_THROWS_AS(modified_rand_index(SegmentSet{}, SegmentSet{}, 0), std::invalid_argument);
}

TEST_CASE("pair counts equal exhaustive enumeration") {
    Rng rng(5);
    for (int i = 0; i < 200; ++i) {
        const std::size_t n = 2 + rng() % 199;
        const auto truth = random_set(rng, n, 4);
        const auto est = random_set(rng, n, 4);
        const auto got = pair_counts(truth, est, n);
        const auto want = oracle::enumerate_pairs(truth, est, n);
        CHECK(got.total == want.total);
        CHECK(got.concordant == want.concordant);
        CHECK(got.correction == want.correction);
        CHECK(got.modified_rand_index() <= got.rand_index());
    }
}

TEST_CASE("metrics are invariant to shifting both sets") {
    Rng rng(6);
    for (int i = 0; i < 100; ++i) {
        const std::size_t n = 100;
        const auto truth = random_set(rng, 60, 3);
        const auto est = random_set(rng, 60, 3);
        const std::size_t shift = rng() % 40;
        auto moved = [&](const SegmentSet& s) {
            std::vector<Interval> v;
            for (const auto& iv : s) v.push_back({iv.left + shift, iv.right + shift});
            return SegmentSet(std::move(v));
        };
        const auto a = evaluate(truth, est, n);
        const auto b = evaluate(moved(truth), moved(est), n);
        CHECK(a.iou == b.iou);
        CHECK(a.precision == b.precision);
        CHECK(a.recall == b.recall);
        CHECK(a.ri == b.ri);
        CHECK(a.mri == b.mri);
    }
}

TEST_CASE("evaluation report and CSV") {
    const auto r = evaluate(SegmentSet{{100, 200}}, SegmentSet{{150, 250}}, 500);
    CHECK(r.k_true == 1);
    CHECK(r.k_hat == 1);
    CHECK(r.method == "wiser");
    CHECK(eval_csv_header() == "model,scheme,method,iou,precision,recall,f1,ri,mri,runtime_ms");
    EvalReport named = r;
    named.model = "dirichlet(0.3)";
    named.scheme = "gumbel";
    CHECK(eval_csv_row(named).rfind("dirichlet(0.3),gumbel,wiser,0.337748,", 0) == 0);
    CHECK(format_number(1.0 / 3.0) == "0.333333");
}
