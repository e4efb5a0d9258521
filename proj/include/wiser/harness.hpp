#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "wiser/calibrate.hpp"
#include "wiser/io.hpp"
#include "wiser/metrics.hpp"
#include "wiser/segmenter.hpp"
#include "wiser/synth.hpp"

namespace wiser {

struct GridPoint {
    std::size_t b = 65;
    double rho = 0.5;
    double alpha = 0.05;
    double gamma = 0.1;
};

struct ExperimentPlan {
    std::size_t replications = 200;
    StreamSpec stream;  // stream.seed is ignored; per-replication seeds derive from `seed`
    std::vector<std::size_t> b_values{65};
    std::vector<double> rho_values{0.5};
    std::vector<double> alpha_values{0.05};
    std::vector<double> gamma_values{0.1};
    double discard_c = 0.5;
    std::optional<std::size_t> pad;
    std::size_t mc_reps = kCertifiedMcReps;
    std::uint64_t seed = 2024;
    unsigned jobs = 0;
    std::optional<std::filesystem::path> cache_dir;
    std::optional<std::filesystem::path> artifacts_dir;  // per-run stream and result files
    bool record_timing = false;  // off keeps the CSV byte-reproducible

    void validate() const;
    std::vector<GridPoint> grid() const;
};

/// Seed of replication r's stream. Shared by every grid point, so grid
/// points are compared on common streams.
std::uint64_t replication_seed(std::uint64_t plan_seed, std::size_t replication);

/// Seed used for threshold calibration inside experiments and benches.
std::uint64_t calibration_seed(std::uint64_t plan_seed);

struct RunRecord {
    std::size_t grid_index = 0;
    GridPoint point;
    std::size_t replication = 0;
    std::uint64_t stream_seed = 0;
    EvalReport report;
};

struct ExperimentResult {
    std::vector<GridPoint> grid;
    std::vector<RunRecord> runs;  // grid-major, then replication
    std::string csv;

    /// Runs belonging to one grid point.
    std::vector<EvalReport> reports(std::size_t grid_index) const;
};

/// Memory cache of threshold certificates, optionally mirrored on disk as
/// cert-<hash>.json keyed by the calibration inputs.
class CertCache {
public:
    explicit CertCache(std::optional<std::filesystem::path> dir = std::nullopt);

    ThresholdCert get(const NullLaw& law, std::size_t n, std::size_t b, double alpha,
                      std::size_t mc_reps, std::uint64_t seed, unsigned jobs = 0);

    static std::string key(const NullLaw& law, std::size_t n, std::size_t b, double alpha,
                           std::size_t mc_reps, std::uint64_t seed);
    static std::string file_name(const std::string& key);

    std::size_t computed() const { return computed_; }

private:
    std::optional<std::filesystem::path> dir_;
    std::map<std::string, ThresholdCert> memory_;
    std::size_t computed_ = 0;
    std::mutex mutex_;
};

ExperimentResult run_experiment(const ExperimentPlan& plan, CertCache* cache = nullptr);

std::string experiment_csv_header();

struct BenchOptions {
    double rho = 0.1;
    std::size_t mc_reps = kCertifiedMcReps;
    std::size_t repeats = 5;  // calls per replicate; the fastest counts
    unsigned jobs = 0;
};

struct BenchRow {
    std::size_t n = 0;
    std::size_t b = 0;
    std::size_t reps = 0;
    double median_ms = 0.0;
    double lo95_ms = 0.0;
    double hi95_ms = 0.0;
};

/// Times wiser_segment (generation and calibration excluded) on streams with
/// one planted segment of length ceil(n/6), b = ceil(sqrt(n)).
std::vector<BenchRow> run_bench(std::span<const std::size_t> n_list, std::size_t reps,
                                std::uint64_t seed, const BenchOptions& options = {});
std::string bench_csv(std::span<const BenchRow> rows);

// JSON configuration (schema in docs/config.md).
StreamSpec stream_spec_from_json(const Json& j, StreamSpec base = {});
Json stream_spec_to_json(const StreamSpec& spec);
ExperimentPlan plan_from_json(const Json& j);

}  // namespace wiser
