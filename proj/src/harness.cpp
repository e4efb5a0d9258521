#include "wiser/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "wiser/errors.hpp"
#include "wiser/parallel.hpp"

namespace wiser {
namespace {

std::string hex64(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

std::uint64_t fnv1a(const std::string& text) {
    std::uint64_t h = 0xCBF29CE484222325ULL;
    for (unsigned char c : text) {
        h ^= c;
        h *= 0x100000001B3ULL;
    }
    return h;
}

std::string exact(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

double median_of(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t m = v.size() / 2;
    return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

// Linear-interpolated empirical quantile of a sorted sample.
double quantile_sorted(const std::vector<double>& sorted, double level) {
    const double pos = level * static_cast<double>(sorted.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
    return sorted[lo] + (pos - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

std::string csv_row(const std::string& kind, std::size_t grid_index, const std::string& rep,
                    const GridPoint& p, const std::string& seed, const std::string& k_true,
                    const std::string& k_hat, const EvalReport& r) {
    std::ostringstream os;
    os << kind << ',' << grid_index << ',' << rep << ',' << p.b << ',' << format_number(p.rho)
       << ',' << format_number(p.alpha) << ',' << format_number(p.gamma) << ',' << seed << ','
       << k_true << ',' << k_hat << ',' << eval_csv_row(r);
    return os.str();
}

EvalReport aggregate(const std::vector<EvalReport>& reports, bool use_median) {
    auto reduce = [&](auto field) {
        std::vector<double> v;
        v.reserve(reports.size());
        for (const auto& r : reports) v.push_back(field(r));
        if (use_median) return median_of(std::move(v));
        double total = 0.0;
        for (double x : v) total += x;
        return total / static_cast<double>(v.size());
    };
    EvalReport out = reports.front();
    out.iou = reduce([](const EvalReport& r) { return r.iou; });
    out.precision = reduce([](const EvalReport& r) { return r.precision; });
    out.recall = reduce([](const EvalReport& r) { return r.recall; });
    out.f1 = reduce([](const EvalReport& r) { return r.f1; });
    out.ri = reduce([](const EvalReport& r) { return r.ri; });
    out.mri = reduce([](const EvalReport& r) { return r.mri; });
    out.runtime_ms = reduce([](const EvalReport& r) { return r.runtime_ms; });
    return out;
}

double mean_count(const std::vector<EvalReport>& reports, bool k_hat) {
    double total = 0.0;
    for (const auto& r : reports) total += static_cast<double>(k_hat ? r.k_hat : r.k_true);
    return total / static_cast<double>(reports.size());
}

template <typename T>
std::vector<T> list_or_scalar(const Json& j) {
    if (j.is_array()) return j.get<std::vector<T>>();
    return {j.get<T>()};
}

}  // namespace

// ---------------------------------------------------------------------------

void ExperimentPlan::validate() const {
    if (replications < 1) throw std::invalid_argument("replications must be at least 1");
    if (b_values.empty() || rho_values.empty() || alpha_values.empty() || gamma_values.empty()) {
        throw std::invalid_argument("experiment grid must be nonempty");
    }
    if (mc_reps < 1) throw std::invalid_argument("mc_reps must be positive");
    stream.validate();
    for (const auto& p : grid()) {
        WiserConfig cfg;
        cfg.b = p.b;
        cfg.alpha = p.alpha;
        cfg.rho = p.rho;
        cfg.gamma = p.gamma;
        cfg.discard_c = discard_c;
        cfg.validate();
        block_count(stream.n, p.b);
    }
}

std::vector<GridPoint> ExperimentPlan::grid() const {
    std::vector<GridPoint> out;
    for (auto b : b_values)
        for (auto rho : rho_values)
            for (auto alpha : alpha_values)
                for (auto gamma : gamma_values) out.push_back({b, rho, alpha, gamma});
    return out;
}

std::uint64_t replication_seed(std::uint64_t plan_seed, std::size_t replication) {
    return derive_seed(plan_seed, 0x5E000000ULL + replication);
}

std::uint64_t calibration_seed(std::uint64_t plan_seed) { return derive_seed(plan_seed, 0xCA11B); }

std::vector<EvalReport> ExperimentResult::reports(std::size_t grid_index) const {
    std::vector<EvalReport> out;
    for (const auto& run : runs) {
        if (run.grid_index == grid_index) out.push_back(run.report);
    }
    return out;
}

// ---------------------------------------------------------------------------

CertCache::CertCache(std::optional<std::filesystem::path> dir) : dir_(std::move(dir)) {}

std::string CertCache::key(const NullLaw& law, std::size_t n, std::size_t b, double alpha,
                           std::size_t mc_reps, std::uint64_t seed) {
    return law.id() + "|n=" + std::to_string(n) + "|b=" + std::to_string(b) +
           "|alpha=" + exact(alpha) + "|reps=" + std::to_string(mc_reps) +
           "|seed=" + std::to_string(seed);
}

std::string CertCache::file_name(const std::string& key) { return "cert-" + hex64(fnv1a(key)) + ".json"; }

ThresholdCert CertCache::get(const NullLaw& law, std::size_t n, std::size_t b, double alpha,
                             std::size_t mc_reps, std::uint64_t seed, unsigned jobs) {
    const std::string k = key(law, n, b, alpha, mc_reps, seed);
    std::lock_guard lock(mutex_);
    if (auto it = memory_.find(k); it != memory_.end()) return it->second;

    const auto matches = [&](const ThresholdCert& c) {
        return c.scheme_id == law.id() && c.n == n && c.b == b && c.alpha == alpha &&
               c.mc_reps == mc_reps && c.seed == seed;
    };
    std::optional<std::filesystem::path> file;
    if (dir_) {
        file = *dir_ / file_name(k);
        if (std::filesystem::exists(*file)) {
            try {
                const ThresholdCert cached = load_cert(*file);
                if (matches(cached)) {
                    memory_.emplace(k, cached);
                    return cached;
                }
            } catch (const std::invalid_argument&) {
                // unreadable cache entry: recompute and overwrite
            }
        }
    }
    const ThresholdCert cert = calibrate_threshold(law, n, b, alpha, mc_reps, seed, jobs);
    ++computed_;
    if (file) {
        std::filesystem::create_directories(*dir_);
        save_cert(*file, cert);
    }
    memory_.emplace(k, cert);
    return cert;
}

// ---------------------------------------------------------------------------

std::string experiment_csv_header() {
    return "row,grid,replication,b,rho,alpha,gamma,seed,k_true,k_hat," + eval_csv_header();
}

ExperimentResult run_experiment(const ExperimentPlan& plan, CertCache* cache) {
    plan.validate();
    CertCache local(plan.cache_dir);
    CertCache& certs = cache ? *cache : local;

    ExperimentResult result;
    result.grid = plan.grid();
    const std::size_t reps = plan.replications;
    const NullLaw law = null_law(plan.stream.scheme);
    const std::string model = plan.stream.ntp.describe();
    const std::string scheme(scheme_name(plan.stream.scheme.scheme));

    if (plan.artifacts_dir) std::filesystem::create_directories(*plan.artifacts_dir);

    std::vector<StreamSpec> specs(reps, plan.stream);
    std::vector<Stream> streams(reps);
    parallel_for(reps, plan.jobs, [&](std::size_t r) {
        specs[r].seed = replication_seed(plan.seed, r);
        streams[r] = generate_stream(specs[r]);
        if (plan.artifacts_dir) {
            save_stream(*plan.artifacts_dir / ("stream_r" + std::to_string(r) + ".jsonl"),
                        to_stream_file(specs[r], streams[r]));
        }
    });

    result.runs.resize(result.grid.size() * reps);
    for (std::size_t g = 0; g < result.grid.size(); ++g) {
        const GridPoint& point = result.grid[g];
        WiserConfig cfg;
        cfg.b = point.b;
        cfg.alpha = point.alpha;
        cfg.rho = point.rho;
        cfg.gamma = point.gamma;
        cfg.discard_c = plan.discard_c;
        cfg.pad = plan.pad;
        cfg.cert = certs.get(law, plan.stream.n, point.b, point.alpha, plan.mc_reps,
                             calibration_seed(plan.seed), plan.jobs);

        parallel_for(reps, plan.jobs, [&](std::size_t r) {
            const auto start = std::chrono::steady_clock::now();
            const WiserResult segmented = wiser_segment(streams[r].pivots, cfg);
            const auto stop = std::chrono::steady_clock::now();

            RunRecord& run = result.runs[g * reps + r];
            run.grid_index = g;
            run.point = point;
            run.replication = r;
            run.stream_seed = specs[r].seed;
            run.report = evaluate(specs[r].true_segments, segmented.segments, plan.stream.n);
            run.report.model = model;
            run.report.scheme = scheme;
            run.report.runtime_ms =
                plan.record_timing
                    ? std::chrono::duration<double, std::milli>(stop - start).count()
                    : 0.0;
            if (plan.artifacts_dir) {
                save_text(*plan.artifacts_dir /
                              ("result_g" + std::to_string(g) + "_r" + std::to_string(r) + ".json"),
                          result_to_json(segmented).dump(2) + "\n");
            }
        });
    }

    std::ostringstream csv;
    csv << experiment_csv_header() << '\n';
    for (const auto& run : result.runs) {
        csv << csv_row("run", run.grid_index, std::to_string(run.replication), run.point,
                       std::to_string(run.stream_seed), std::to_string(run.report.k_true),
                       std::to_string(run.report.k_hat), run.report)
            << '\n';
    }
    for (std::size_t g = 0; g < result.grid.size(); ++g) {
        const auto reports = result.reports(g);
        const std::string k_true = format_number(mean_count(reports, false));
        const std::string k_hat = format_number(mean_count(reports, true));
        csv << csv_row("mean", g, "", result.grid[g], "", k_true, k_hat, aggregate(reports, false))
            << '\n';
        csv << csv_row("median", g, "", result.grid[g], "", k_true, k_hat,
                       aggregate(reports, true))
            << '\n';
    }
    result.csv = csv.str();
    return result;
}

// ---------------------------------------------------------------------------

std::vector<BenchRow> run_bench(std::span<const std::size_t> n_list, std::size_t reps,
                                std::uint64_t seed, const BenchOptions& options) {
    if (n_list.empty()) throw std::invalid_argument("bench needs at least one n");
    if (!std::is_sorted(n_list.begin(), n_list.end())) {
        throw std::invalid_argument("bench n list must be sorted ascending");
    }
    if (n_list.front() < 12) throw std::invalid_argument("bench needs n >= 12");
    if (reps < 1 || options.repeats < 1) throw std::invalid_argument("bench needs reps >= 1");

    std::vector<BenchRow> rows;
    volatile std::size_t sink = 0;
    for (std::size_t n : n_list) {
        const auto b = static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(n))));
        const std::size_t seg_len = (n + 5) / 6;

        StreamSpec spec;
        spec.n = n;
        WiserConfig cfg;
        cfg.b = b;
        cfg.rho = options.rho;
        cfg.cert = calibrate_threshold(null_law(spec.scheme), n, b, cfg.alpha, options.mc_reps,
                                       calibration_seed(seed), options.jobs);

        Rng placement(derive_seed(seed, n));
        std::vector<double> times;
        times.reserve(reps);
        for (std::size_t r = 0; r < reps; ++r) {
            const std::size_t start =
                1 + static_cast<std::size_t>(placement() % (n - seg_len + 1));
            spec.true_segments = SegmentSet{{start, start + seg_len - 1}};
            spec.seed = derive_seed(seed, (static_cast<std::uint64_t>(n) << 20) + r);
            const Stream stream = generate_stream(spec);

            double best = std::numeric_limits<double>::infinity();
            for (std::size_t k = 0; k < options.repeats; ++k) {
                const auto t0 = std::chrono::steady_clock::now();
                const WiserResult out = wiser_segment(stream.pivots, cfg);
                const auto t1 = std::chrono::steady_clock::now();
                sink = sink + out.k_hat();
                best = std::min(best, std::chrono::duration<double, std::milli>(t1 - t0).count());
            }
            times.push_back(best);
        }
        std::sort(times.begin(), times.end());
        rows.push_back({n, b, reps, median_of(times), quantile_sorted(times, 0.025),
                        quantile_sorted(times, 0.975)});
    }
    return rows;
}

std::string bench_csv(std::span<const BenchRow> rows) {
    std::ostringstream os;
    os << "n,b,reps,median_ms,lo95_ms,hi95_ms\n";
    for (const auto& r : rows) {
        os << r.n << ',' << r.b << ',' << r.reps << ',' << format_number(r.median_ms) << ','
           << format_number(r.lo95_ms) << ',' << format_number(r.hi95_ms) << '\n';
    }
    return os.str();
}

// ---------------------------------------------------------------------------

StreamSpec stream_spec_from_json(const Json& j, StreamSpec spec) {
    try {
        if (j.contains("n")) spec.n = j.at("n").get<std::size_t>();
        if (j.contains("segments")) spec.true_segments = segments_from_json(j.at("segments"));
        if (j.contains("scheme")) spec.scheme.scheme = parse_scheme(j.at("scheme").get<std::string>());
        if (j.contains("vocab_size")) spec.scheme.vocab_size = j.at("vocab_size").get<std::size_t>();
        if (j.contains("green_fraction")) spec.scheme.green_fraction = j.at("green_fraction").get<double>();
        if (j.contains("bias")) spec.scheme.bias = j.at("bias").get<double>();
        if (j.contains("seed")) spec.seed = j.at("seed").get<std::uint64_t>();
        if (j.contains("ntp")) {
            const Json& m = j.at("ntp");
            const std::string kind = m.value("kind", "dirichlet");
            if (kind == "dirichlet") {
                spec.ntp.kind = NtpModel::Kind::dirichlet;
            } else if (kind == "zipf") {
                spec.ntp.kind = NtpModel::Kind::zipf;
            } else if (kind == "fixed") {
                spec.ntp.kind = NtpModel::Kind::fixed;
                spec.ntp.fixed.clear();
                for (const auto& p : m.at("vectors")) {
                    spec.ntp.fixed.emplace_back(p.get<std::vector<double>>());
                }
            } else {
                throw std::invalid_argument("unknown NTP model '" + kind + "'");
            }
            spec.ntp.concentration = m.value("concentration", spec.ntp.concentration);
            spec.ntp.exponent = m.value("exponent", spec.ntp.exponent);
            spec.ntp.delta_cap = m.value("delta", spec.ntp.delta_cap);
        }
    } catch (const Json::exception& e) {
        throw std::invalid_argument(std::string("malformed stream configuration: ") + e.what());
    }
    return spec;
}

Json stream_spec_to_json(const StreamSpec& spec) {
    Json ntp{{"delta", spec.ntp.delta_cap}};
    switch (spec.ntp.kind) {
        case NtpModel::Kind::dirichlet:
            ntp["kind"] = "dirichlet";
            ntp["concentration"] = spec.ntp.concentration;
            break;
        case NtpModel::Kind::zipf:
            ntp["kind"] = "zipf";
            ntp["exponent"] = spec.ntp.exponent;
            break;
        case NtpModel::Kind::fixed: {
            ntp["kind"] = "fixed";
            Json vectors = Json::array();
            for (const auto& p : spec.ntp.fixed) {
                vectors.push_back(std::vector<double>(p.probs().begin(), p.probs().end()));
            }
            ntp["vectors"] = vectors;
            break;
        }
    }
    return Json{{"n", spec.n},
                {"segments", segments_to_json(spec.true_segments)},
                {"scheme", scheme_name(spec.scheme.scheme)},
                {"vocab_size", spec.scheme.vocab_size},
                {"green_fraction", spec.scheme.green_fraction},
                {"bias", spec.scheme.bias},
                {"seed", spec.seed},
                {"ntp", ntp}};
}

ExperimentPlan plan_from_json(const Json& j) {
    ExperimentPlan plan;
    try {
        plan.replications = j.value("replications", plan.replications);
        plan.seed = j.value("seed", plan.seed);
        if (j.contains("stream")) plan.stream = stream_spec_from_json(j.at("stream"));
        if (j.contains("grid")) {
            const Json& g = j.at("grid");
            if (g.contains("b")) plan.b_values = list_or_scalar<std::size_t>(g.at("b"));
            if (g.contains("rho")) plan.rho_values = list_or_scalar<double>(g.at("rho"));
            if (g.contains("alpha")) plan.alpha_values = list_or_scalar<double>(g.at("alpha"));
            if (g.contains("gamma")) plan.gamma_values = list_or_scalar<double>(g.at("gamma"));
        }
        plan.discard_c = j.value("discard_c", plan.discard_c);
        if (j.contains("pad") && !j.at("pad").is_null() && j.at("pad") != "auto") {
            plan.pad = j.at("pad").get<std::size_t>();
        }
        plan.mc_reps = j.value("mc_reps", plan.mc_reps);
        plan.jobs = j.value("jobs", plan.jobs);
        if (j.contains("cache_dir") && !j.at("cache_dir").is_null()) {
            plan.cache_dir = j.at("cache_dir").get<std::string>();
        }
        if (j.contains("artifacts_dir") && !j.at("artifacts_dir").is_null()) {
            plan.artifacts_dir = j.at("artifacts_dir").get<std::string>();
        }
        plan.record_timing = j.value("record_timing", plan.record_timing);
    } catch (const Json::exception& e) {
        throw std::invalid_argument(std::string("malformed experiment plan: ") + e.what());
    }
    return plan;
}

}  // namespace wiser
