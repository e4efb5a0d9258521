#include "wiser/cli.hpp"

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <stdexcept>

#include "CLI11.hpp"
#include "wiser/errors.hpp"
#include "wiser/harness.hpp"

namespace wiser {
namespace {

struct Common {
    std::optional<std::uint64_t> seed;
    std::string config;
    std::string out;
};

void add_common(CLI::App* cmd, Common& c) {
    cmd->add_option("--seed", c.seed, "Master seed");
    cmd->add_option("--config", c.config, "JSON configuration file");
    cmd->add_option("--out", c.out, "Output path (stdout when omitted)");
}

Json config_of(const Common& c) { return c.config.empty() ? Json::object() : load_json(c.config); }

void emit(const Common& c, const std::string& text, std::ostream& out) {
    if (c.out.empty()) {
        out << text;
    } else {
        save_text(c.out, text);
    }
}

template <typename T>
void take(const Json& j, const char* key, T& value) {
    if (j.contains(key)) value = j.at(key).get<T>();
}

SchemeConfig scheme_from_stream(const StreamFile& file) { return file.scheme; }

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Watermarked segment localization over token streams", "wiser"};
    app.require_subcommand(1);

    // generate
    Common gen;
    std::optional<std::size_t> gen_n, gen_vocab;
    std::optional<std::string> gen_scheme, gen_segments, gen_model;
    std::optional<double> gen_delta;
    auto* generate = app.add_subcommand("generate", "Write a synthetic token stream as JSONL");
    add_common(generate, gen);
    generate->add_option("--n", gen_n, "Stream length");
    generate->add_option("--scheme", gen_scheme, "gumbel | inverse_transform | red_green");
    generate->add_option("--vocab", gen_vocab, "Vocabulary size");
    generate->add_option("--segments", gen_segments, "Watermarked intervals, e.g. 100-200,325-400");
    generate->add_option("--model", gen_model, "NTP model: dirichlet | zipf");
    generate->add_option("--delta", gen_delta, "NTP cap: max probability <= 1 - delta");

    // calibrate
    Common cal;
    std::string cal_stream;
    std::optional<std::string> cal_scheme;
    std::optional<std::size_t> cal_vocab, cal_n, cal_b, cal_reps;
    std::optional<double> cal_alpha, cal_green;
    unsigned cal_jobs = 0;
    auto* calibrate = app.add_subcommand("calibrate", "Monte Carlo screening threshold");
    add_common(calibrate, cal);
    calibrate->add_option("--stream", cal_stream, "Take n and the scheme from a stream file");
    calibrate->add_option("--scheme", cal_scheme, "Scheme when no stream is given");
    calibrate->add_option("--vocab", cal_vocab, "Vocabulary size");
    calibrate->add_option("--green-fraction", cal_green, "Red-green list fraction");
    calibrate->add_option("--n", cal_n, "Stream length when no stream is given");
    calibrate->add_option("--b", cal_b, "Block length");
    calibrate->add_option("--alpha", cal_alpha, "Level");
    calibrate->add_option("--mc-reps", cal_reps, "Monte Carlo replicates");
    calibrate->add_option("--jobs", cal_jobs, "Worker threads (0 = hardware)");

    // segment
    Common seg;
    std::string seg_stream, seg_cert, seg_trace;
    std::optional<double> seg_rho, seg_gamma, seg_c;
    std::optional<std::size_t> seg_pad;
    auto* segment = app.add_subcommand("segment", "Localize watermarked segments");
    add_common(segment, seg);
    segment->add_option("--stream", seg_stream, "Stream JSONL")->required();
    segment->add_option("--cert", seg_cert, "Threshold certificate")->required();
    segment->add_option("--trace", seg_trace, "Write the full stage trace here");
    segment->add_option("--rho", seg_rho, "Tempering of d_tilde");
    segment->add_option("--gamma", seg_gamma, "Padding exponent");
    segment->add_option("--discard-c", seg_c, "Short-run discard constant");
    segment->add_option("--pad", seg_pad, "Explicit padding in tokens");

    // evaluate
    Common ev;
    std::string ev_truth, ev_est;
    auto* evaluate_cmd = app.add_subcommand("evaluate", "Score an estimate against the truth");
    add_common(evaluate_cmd, ev);
    evaluate_cmd->add_option("--truth", ev_truth, "Stream JSONL carrying true segments")->required();
    evaluate_cmd->add_option("--est", ev_est, "Result JSON from segment")->required();

    // bench
    Common bn;
    std::vector<std::size_t> bn_sizes;
    std::optional<std::size_t> bn_reps, bn_repeats, bn_mc;
    std::optional<double> bn_rho;
    unsigned bn_jobs = 0;
    auto* bench = app.add_subcommand("bench", "Runtime scaling table");
    add_common(bench, bn);
    bench->add_option("--n", bn_sizes, "Stream lengths, ascending")->delimiter(',');
    bench->add_option("--reps", bn_reps, "Streams per n");
    bench->add_option("--repeats", bn_repeats, "Timed calls per stream; the fastest counts");
    bench->add_option("--mc-reps", bn_mc, "Calibration replicates");
    bench->add_option("--rho", bn_rho, "Tempering of d_tilde");
    bench->add_option("--jobs", bn_jobs, "Calibration threads");

    // experiment
    Common ex;
    std::optional<std::size_t> ex_reps;
    std::optional<unsigned> ex_jobs;
    std::optional<std::string> ex_cache, ex_artifacts;
    auto* experiment = app.add_subcommand("experiment", "Run a replicated grid and emit CSV");
    add_common(experiment, ex);
    experiment->add_option("--replications", ex_reps, "Replications per grid point");
    experiment->add_option("--jobs", ex_jobs, "Worker threads (0 = hardware)");
    experiment->add_option("--cache-dir", ex_cache, "Directory for cached certificates");
    experiment->add_option("--artifacts", ex_artifacts, "Directory for per-run stream/result files");

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return 0;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return 0;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n\n" << app.help();
        return 1;
    }

    try {
        if (generate->parsed()) {
            StreamSpec spec = stream_spec_from_json(config_of(gen));
            if (gen_n) spec.n = *gen_n;
            if (gen_scheme) spec.scheme.scheme = parse_scheme(*gen_scheme);
            if (gen_vocab) spec.scheme.vocab_size = *gen_vocab;
            if (gen_segments) spec.true_segments = SegmentSet::parse(*gen_segments);
            if (gen_model) {
                if (*gen_model == "dirichlet") {
                    spec.ntp.kind = NtpModel::Kind::dirichlet;
                } else if (*gen_model == "zipf") {
                    spec.ntp.kind = NtpModel::Kind::zipf;
                } else {
                    throw std::invalid_argument("unknown NTP model '" + *gen_model + "'");
                }
            }
            if (gen_delta) spec.ntp.delta_cap = *gen_delta;
            if (gen.seed) spec.seed = *gen.seed;
            const Stream stream = generate_stream(spec);
            std::ostringstream os;
            write_stream_jsonl(os, to_stream_file(spec, stream));
            emit(gen, os.str(), out);
        } else if (calibrate->parsed()) {
            const Json j = config_of(cal);
            SchemeConfig scheme;
            std::size_t n = 500, b = 65, reps = kCertifiedMcReps;
            double alpha = 0.05;
            std::uint64_t seed = 1;
            if (j.contains("scheme")) scheme.scheme = parse_scheme(j.at("scheme").get<std::string>());
            take(j, "vocab_size", scheme.vocab_size);
            take(j, "green_fraction", scheme.green_fraction);
            take(j, "n", n);
            take(j, "b", b);
            take(j, "alpha", alpha);
            take(j, "mc_reps", reps);
            take(j, "seed", seed);
            if (!cal_stream.empty()) {
                const StreamFile file = load_stream(cal_stream);
                scheme = scheme_from_stream(file);
                n = file.n;
            }
            if (cal_scheme) scheme.scheme = parse_scheme(*cal_scheme);
            if (cal_vocab) scheme.vocab_size = *cal_vocab;
            if (cal_green) scheme.green_fraction = *cal_green;
            if (cal_n) n = *cal_n;
            if (cal_b) b = *cal_b;
            if (cal_alpha) alpha = *cal_alpha;
            if (cal_reps) reps = *cal_reps;
            if (cal.seed) seed = *cal.seed;
            scheme.validate();
            const ThresholdCert cert =
                calibrate_threshold(null_law(scheme), n, b, alpha, reps, seed, cal_jobs);
            if (!cert.certified()) {
                err << "warning: " << reps << " Monte Carlo replicates is below the "
                    << kCertifiedMcReps << " needed for a certified threshold\n";
            }
            emit(cal, cert_to_json(cert).dump(2) + "\n", out);
        } else if (segment->parsed()) {
            const Json j = config_of(seg);
            const StreamFile file = load_stream(seg_stream);
            WiserConfig cfg;
            cfg.cert = load_cert(seg_cert);
            cfg.b = cfg.cert.b;
            cfg.alpha = cfg.cert.alpha;
            take(j, "rho", cfg.rho);
            take(j, "gamma", cfg.gamma);
            take(j, "discard_c", cfg.discard_c);
            if (j.contains("pad") && j.at("pad").is_number()) cfg.pad = j.at("pad").get<std::size_t>();
            if (seg_rho) cfg.rho = *seg_rho;
            if (seg_gamma) cfg.gamma = *seg_gamma;
            if (seg_c) cfg.discard_c = *seg_c;
            if (seg_pad) cfg.pad = *seg_pad;
            const WiserResult result = wiser_segment(file.pivots, cfg);
            if (!seg_trace.empty()) save_text(seg_trace, trace_to_json(result.trace).dump(2) + "\n");
            emit(seg, result_to_json(result).dump(2) + "\n", out);
        } else if (evaluate_cmd->parsed()) {
            const StreamFile truth = load_stream(ev_truth);
            const SegmentSet est = load_result_segments(ev_est);
            est.validate_within(truth.n);
            EvalReport report = evaluate(truth.true_segments, est, truth.n);
            report.model = truth.model;
            report.scheme = std::string(scheme_name(truth.scheme.scheme));
            emit(ev, eval_csv_header() + "\n" + eval_csv_row(report) + "\n", out);
        } else if (bench->parsed()) {
            const Json j = config_of(bn);
            std::vector<std::size_t> sizes{1000, 4000, 16000, 64000};
            std::size_t reps = 20;
            std::uint64_t seed = 1;
            BenchOptions options;
            take(j, "n", sizes);
            take(j, "reps", reps);
            take(j, "seed", seed);
            take(j, "rho", options.rho);
            take(j, "mc_reps", options.mc_reps);
            take(j, "repeats", options.repeats);
            if (!bn_sizes.empty()) sizes = bn_sizes;
            if (bn_reps) reps = *bn_reps;
            if (bn_repeats) options.repeats = *bn_repeats;
            if (bn_mc) options.mc_reps = *bn_mc;
            if (bn_rho) options.rho = *bn_rho;
            if (bn.seed) seed = *bn.seed;
            options.jobs = bn_jobs;
            const auto rows = run_bench(sizes, reps, seed, options);
            emit(bn, bench_csv(rows), out);
        } else if (experiment->parsed()) {
            ExperimentPlan plan = plan_from_json(config_of(ex));
            if (ex.seed) plan.seed = *ex.seed;
            if (ex_reps) plan.replications = *ex_reps;
            if (ex_jobs) plan.jobs = *ex_jobs;
            if (ex_cache) plan.cache_dir = *ex_cache;
            if (ex_artifacts) plan.artifacts_dir = *ex_artifacts;
            emit(ex, run_experiment(plan).csv, out);
        }
    } catch (const IoError& e) {
        err << "I/O error: " << e.what() << '\n';
        return 2;
    } catch (const std::filesystem::filesystem_error& e) {
        err << "I/O error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}

}  // namespace wiser
