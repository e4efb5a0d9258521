// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fails.
// Usage: acceptance [output-dir]   (CSV outputs land in output-dir, default ./acceptance_out)

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "wiser/harness.hpp"
#include "wiser/io.hpp"
#include "wiser/metrics.hpp"
#include "wiser/pivot.hpp"
#include "wiser/rng.hpp"
#include "wiser/segmenter.hpp"

using namespace wiser;
namespace fs = std::filesystem;

namespace {

constexpr std::uint64_t kMasterSeed = 20240601;

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

struct Verdict {
    bool pass = false;
    std::string detail;
};

int failures = 0;

void report(int id, const std::string& name, const Verdict& v, double secs) {
    std::printf("%s criterion %d (%s): %s [%.2f s]\n", v.pass ? "PASS" : "FAIL", id, name.c_str(),
                v.detail.c_str(), secs);
    std::fflush(stdout);
    if (!v.pass) ++failures;
}

Verdict timed(double limit_s, double secs, Verdict v) {
    if (secs >= limit_s) {
        v.pass = false;
        v.detail += "; over the " + std::to_string(static_cast<int>(limit_s)) + " s budget";
    }
    return v;
}

double median(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t m = v.size() / 2;
    return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

double mean(const std::vector<double>& v) {
    return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

std::string fmt(const char* f, double a) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, a);
    return buf;
}

// CSV outputs collected for the determinism check.
struct Outputs {
    std::vector<std::pair<std::string, std::string>> files;
    void add(const std::string& name, const std::string& csv) { files.emplace_back(name, csv); }
};

ExperimentPlan design_plan(std::uint64_t seed) {
    ExperimentPlan plan;
    plan.replications = 200;
    plan.stream.n = 500;
    plan.stream.true_segments = SegmentSet{{100, 200}, {325, 400}};
    plan.stream.scheme.scheme = Scheme::gumbel;
    plan.stream.ntp.kind = NtpModel::Kind::dirichlet;
    plan.stream.ntp.delta_cap = 0.5;
    plan.b_values = {65};
    plan.rho_values = {0.5};
    plan.alpha_values = {0.05};
    plan.gamma_values = {0.1};
    plan.seed = seed;
    return plan;
}

// ---------------------------------------------------------------------------

Verdict oracle_equivalence() {
    Rng rng(derive_seed(kMasterSeed, 1));
    std::size_t agree = 0, trials = 100;
    for (std::size_t i = 0; i < trials; ++i) {
        const std::size_t n = 2 + rng() % 79;
        std::vector<double> x(n);
        const std::size_t l = 1 + rng() % n;
        const std::size_t r = l + rng() % (n - l + 1);
        const double lift = 0.25 + 1.5 * uniform_open(rng);
        for (std::size_t t = 1; t <= n; ++t) {
            const double e = -std::log(uniform_open(rng));
            x[t - 1] = (t >= l && t <= r) ? e + lift : e;
        }
        const double rho = 0.1 + 0.8 * uniform_open(rng);
        const double dt = 0.1 + uniform_open(rng);
        const SearchWindow full{{1, n}, {1, n}};
        if (naive_estimate(x, 1.0, rho, dt) == localize_segment(x, {1, n}, full, 1.0, rho, dt)) {
            ++agree;
        }
    }
    return {agree == trials, std::to_string(agree) + "/" + std::to_string(trials) + " identical"};
}

Verdict null_level(Outputs& outputs) {
    ExperimentPlan plan = design_plan(derive_seed(kMasterSeed, 2));
    plan.stream.true_segments = SegmentSet{};
    const auto result = run_experiment(plan);
    outputs.add("c2_null.csv", result.csv);
    std::size_t zero = 0;
    for (const auto& run : result.runs) zero += run.report.k_hat == 0;
    const double frac = static_cast<double>(zero) / static_cast<double>(result.runs.size());
    return {frac >= 0.93, "K_hat = 0 in " + fmt("%.3f", frac) + " of runs (need >= 0.93)"};
}

Verdict accuracy(Outputs& outputs) {
    const auto result = run_experiment(design_plan(derive_seed(kMasterSeed, 3)));
    outputs.add("c3_design.csv", result.csv);
    std::vector<double> ious, mris;
    std::size_t two = 0;
    for (const auto& run : result.runs) {
        two += run.report.k_hat == 2;
        ious.push_back(run.report.iou);
        mris.push_back(run.report.mri);
    }
    const double frac = static_cast<double>(two) / static_cast<double>(result.runs.size());
    const double med_iou = median(ious), mean_mri = mean(mris);
    return {frac >= 0.9 && med_iou >= 0.85 && mean_mri >= 0.9,
            "K_hat = 2 fraction " + fmt("%.3f", frac) + ", median IOU " + fmt("%.3f", med_iou) +
                ", mean MRI " + fmt("%.3f", mean_mri)};
}

Verdict scheme_moments() {
    constexpr std::size_t draws = 100000;
    Rng rng(derive_seed(kMasterSeed, 4));

    // Gumbel null: the token is drawn independently of the key
    SchemeConfig gumbel;
    gumbel.scheme = Scheme::gumbel;
    gumbel.vocab_size = 50;
    double null_sum = 0.0;
    for (std::size_t i = 0; i < draws; ++i) {
        const Token w = 1 + static_cast<Token>(rng() % gumbel.vocab_size);
        null_sum += score_token(gumbel, w, KeySeed{rng()});
    }
    const double null_mean = null_sum / draws;

    SchemeConfig inverse;
    inverse.scheme = Scheme::inverse_transform;
    inverse.vocab_size = 1000;
    double inv_sum = 0.0;
    for (std::size_t i = 0; i < draws; ++i) {
        const Token w = 1 + static_cast<Token>(rng() % inverse.vocab_size);
        inv_sum += score_token(inverse, w, KeySeed{rng()});
    }
    const double inv_mean = inv_sum / draws;

    SchemeConfig coin;
    coin.scheme = Scheme::gumbel;
    coin.vocab_size = 2;
    const NtpVector half(std::vector<double>{0.5, 0.5});
    double wm_sum = 0.0;
    for (std::size_t i = 0; i < draws; ++i) {
        const KeySeed key{rng()};
        wm_sum += score_token(coin, watermark_decode(coin, half, key), key);
    }
    const double wm_mean = wm_sum / draws;

    const bool ok = std::abs(null_mean - 1.0) <= 0.01 && std::abs(inv_mean - 0.667) <= 0.01 &&
                    std::abs(wm_mean - 1.5) <= 0.02;
    return {ok, "Gumbel null " + fmt("%.4f", null_mean) + ", inverse null " + fmt("%.4f", inv_mean) +
                    ", Gumbel watermarked at (1/2, 1/2) " + fmt("%.4f", wm_mean)};
}

// Pair counts by direct enumeration over all n(n-1)/2 pairs.
PairCounts enumerate(const SegmentSet& truth, const SegmentSet& est, std::size_t n) {
    auto label = [](const SegmentSet& s, std::size_t n_) {
        std::vector<int> id(n_ + 1, 0);
        int k = 0;
        for (const auto& iv : s) {
            ++k;
            for (std::size_t t = iv.left; t <= iv.right; ++t) id[t] = k;
        }
        return id;
    };
    const auto tid = label(truth, n), eid = label(est, n);
    PairCounts c;
    for (std::size_t i = 1; i <= n; ++i) {
        for (std::size_t j = i + 1; j <= n; ++j) {
            ++c.total;
            const bool same_t = (tid[i] > 0) == (tid[j] > 0);
            const bool same_e = (eid[i] > 0) == (eid[j] > 0);
            if (same_t == same_e) ++c.concordant;
            if (tid[i] > 0 && tid[i] == tid[j] && eid[i] == 0 && eid[j] == 0) ++c.correction;
            if (eid[i] > 0 && eid[i] == eid[j] && tid[i] == 0 && tid[j] == 0) ++c.correction;
        }
    }
    return c;
}

SegmentSet random_set(Rng& rng, std::size_t n) {
    std::vector<Interval> v;
    std::size_t cursor = 1;
    const std::size_t k = rng() % 5;
    for (std::size_t i = 0; i < k && cursor <= n; ++i) {
        const std::size_t l = cursor + rng() % std::max<std::size_t>(1, (n - cursor + 1) / 2);
        if (l > n) break;
        const std::size_t r = std::min(n, l + rng() % std::max<std::size_t>(1, (n - l + 1) / 2));
        v.push_back({l, r});
        cursor = r + 2;
    }
    return SegmentSet(std::move(v));
}

Verdict metric_oracles() {
    Rng rng(derive_seed(kMasterSeed, 5));
    std::size_t exact = 0;
    for (int i = 0; i < 200; ++i) {
        const std::size_t n = 2 + rng() % 199;
        const auto truth = random_set(rng, n), est = random_set(rng, n);
        const auto got = pair_counts(truth, est, n), want = enumerate(truth, est, n);
        exact += got.total == want.total && got.concordant == want.concordant &&
                 got.correction == want.correction;
    }
    const SegmentSet nine{{1, 9}};
    const double ri = rand_index(nine, SegmentSet{}, 10);
    const double mri = modified_rand_index(nine, SegmentSet{}, 10);
    const bool ok = exact == 200 && std::abs(ri - 0.8) < 1e-12 && std::abs(mri) < 1e-12;
    return {ok, std::to_string(exact) + "/200 exact; n = 10 failure mode RI " + fmt("%.4f", ri) +
                    ", MRI " + fmt("%.4f", mri)};
}

Verdict runtime_scaling() {
    const std::vector<std::size_t> sizes{1000, 4000, 16000, 64000};
    const auto rows = run_bench(sizes, 20, derive_seed(kMasterSeed, 6));
    std::ostringstream detail;
    bool ok = true;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        detail << (i ? "; " : "") << "n=" << rows[i].n << " " << fmt("%.3f", rows[i].median_ms)
               << " ms";
        if (i > 0) {
            const double ratio = rows[i].median_ms / rows[i - 1].median_ms;
            detail << " (x" << fmt("%.2f", ratio) << ")";
            ok = ok && ratio <= 2.5;
        }
    }
    return {ok, detail.str() + "; need <= 2.5x per 4x n"};
}

Verdict ablations(Outputs& outputs) {
    // ablation design: one segment 100-200, b = 25 for the rho sweep, rho = 0.25 for the b sweep
    ExperimentPlan rho_plan = design_plan(derive_seed(kMasterSeed, 7));
    rho_plan.stream.true_segments = SegmentSet{{100, 200}};
    rho_plan.b_values = {25};
    rho_plan.rho_values = {0.1, 0.3, 0.5, 0.7, 0.9};
    const auto rho_result = run_experiment(rho_plan);
    outputs.add("c7_rho.csv", rho_result.csv);
    std::vector<double> by_rho;
    for (std::size_t g = 0; g < rho_result.grid.size(); ++g) {
        std::vector<double> v;
        for (const auto& r : rho_result.reports(g)) v.push_back(r.iou);
        by_rho.push_back(mean(v));
    }
    const double best = *std::max_element(by_rho.begin(), by_rho.end());
    bool rho_ok = by_rho[4] < best;
    for (std::size_t g = 0; g < 3; ++g) rho_ok = rho_ok && best - by_rho[g] <= 0.05;

    ExperimentPlan b_plan = design_plan(derive_seed(kMasterSeed, 8));
    b_plan.stream.true_segments = SegmentSet{{100, 200}};
    b_plan.rho_values = {0.25};
    const auto root = static_cast<std::size_t>(std::ceil(std::sqrt(500.0)));
    const std::size_t large_b = 4 * 3 * root;
    b_plan.b_values = {65, large_b};
    const auto b_result = run_experiment(b_plan);
    outputs.add("c7_block.csv", b_result.csv);
    std::vector<double> by_b;
    for (std::size_t g = 0; g < 2; ++g) {
        std::vector<double> v;
        for (const auto& r : b_result.reports(g)) v.push_back(r.iou);
        by_b.push_back(mean(v));
    }
    const bool b_ok = by_b[1] < by_b[0];

    std::ostringstream detail;
    detail << "mean IOU by rho {.1,.3,.5,.7,.9}:";
    for (double v : by_rho) detail << " " << fmt("%.3f", v);
    detail << "; b=65 " << fmt("%.3f", by_b[0]) << " vs b=" << large_b << " "
           << fmt("%.3f", by_b[1]);
    return {rho_ok && b_ok, detail.str()};
}

Verdict determinism(const Outputs& first, const fs::path& dir) {
    Outputs second;
    null_level(second);
    accuracy(second);
    ablations(second);
    std::size_t same = 0;
    for (std::size_t i = 0; i < first.files.size(); ++i) {
        const bool eq = i < second.files.size() && first.files[i].second == second.files[i].second;
        same += eq;
        save_text(dir / first.files[i].first, first.files[i].second);
        if (i < second.files.size()) save_text(dir / ("rerun_" + second.files[i].first), second.files[i].second);
    }
    const bool ok = same == first.files.size() && first.files.size() == second.files.size();
    return {ok, std::to_string(same) + "/" + std::to_string(first.files.size()) +
                    " CSV outputs byte-identical on rerun (written to " + dir.string() + ")"};
}

}  // namespace

int main(int argc, char** argv) {
    const fs::path dir = argc > 1 ? fs::path(argv[1]) : fs::path("acceptance_out");
    fs::create_directories(dir);
    Outputs outputs;

    auto run = [](int id, const std::string& name, double limit_s, const std::function<Verdict()>& f) {
        const auto start = Clock::now();
        Verdict v = f();
        const double secs = seconds_since(start);
        report(id, name, timed(limit_s, secs, v), secs);
    };

    run(1, "oracle equivalence", 10, oracle_equivalence);
    run(2, "null level", 120, [&] { return null_level(outputs); });
    run(3, "segmentation accuracy", 180, [&] { return accuracy(outputs); });
    run(4, "scheme moments", 30, scheme_moments);
    run(5, "metric oracles", 1e9, metric_oracles);
    run(6, "runtime scaling", 300, runtime_scaling);
    run(7, "ablation trends", 1e9, [&] { return ablations(outputs); });
    run(8, "determinism", 1e9, [&] { return determinism(outputs, dir); });

    std::printf("%d criteria failed\n", failures);
    return failures == 0 ? 0 : 1;
}
