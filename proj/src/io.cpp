#include "wiser/io.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "wiser/errors.hpp"

namespace wiser {
namespace {

std::ifstream open_input(const std::filesystem::path& path) {
    std::ifstream is(path);
    if (!is) throw IoError("cannot open '" + path.string() + "' for reading");
    return is;
}

std::ofstream open_output(const std::filesystem::path& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw IoError("cannot open '" + path.string() + "' for writing");
    return os;
}

void finish_output(std::ofstream& os, const std::filesystem::path& path) {
    os.flush();
    if (!os) throw IoError("failed writing '" + path.string() + "'");
}

Json interval_json(const Interval& iv) { return Json{{"left", iv.left}, {"right", iv.right}}; }

}  // namespace

StreamFile to_stream_file(const StreamSpec& spec, const Stream& stream) {
    StreamFile file;
    file.n = spec.n;
    file.scheme = spec.scheme;
    file.model = spec.ntp.describe();
    file.seed = spec.seed;
    file.true_segments = spec.true_segments;
    file.tokens = stream.tokens;
    file.pivots = stream.pivots;
    return file;
}

Json segments_to_json(const SegmentSet& segments) {
    Json out = Json::array();
    for (const auto& iv : segments) out.push_back(interval_json(iv));
    return out;
}

SegmentSet segments_from_json(const Json& j) {
    std::vector<Interval> out;
    for (const auto& item : j) {
        if (item.is_array()) {
            out.push_back({item.at(0).get<std::size_t>(), item.at(1).get<std::size_t>()});
        } else {
            out.push_back({item.at("left").get<std::size_t>(), item.at("right").get<std::size_t>()});
        }
    }
    return SegmentSet(std::move(out));
}

void write_stream_jsonl(std::ostream& os, const StreamFile& file) {
    const Json header{{"type", "header"},
                      {"n", file.n},
                      {"scheme", scheme_name(file.scheme.scheme)},
                      {"null_law", file.pivots.law.id()},
                      {"mu0", file.pivots.mu0()},
                      {"seed", file.seed},
                      {"vocab_size", file.scheme.vocab_size},
                      {"green_fraction", file.scheme.green_fraction},
                      {"bias", file.scheme.bias},
                      {"model", file.model},
                      {"true_segments", segments_to_json(file.true_segments)}};
    os << header.dump() << '\n';
    for (std::size_t t = 0; t < file.n; ++t) {
        const Json record{{"t", t + 1}, {"token", file.tokens[t]}, {"pivot_score", file.pivots.scores[t]}};
        os << record.dump() << '\n';
    }
}

StreamFile read_stream_jsonl(std::istream& is) {
    std::string line;
    if (!std::getline(is, line)) throw std::invalid_argument("stream file is empty");
    StreamFile file;
    try {
        const Json header = Json::parse(line);
        file.n = header.at("n").get<std::size_t>();
        file.scheme.scheme = parse_scheme(header.at("scheme").get<std::string>());
        file.scheme.vocab_size = header.at("vocab_size").get<std::size_t>();
        file.scheme.green_fraction = header.value("green_fraction", 0.5);
        file.scheme.bias = header.value("bias", 2.0);
        file.scheme.validate();
        file.model = header.value("model", "");
        file.seed = header.at("seed").get<std::uint64_t>();
        file.true_segments = segments_from_json(header.at("true_segments"));
        file.true_segments.validate_within(file.n);
        file.pivots.law = null_law(file.scheme);
        if (header.contains("null_law") &&
            header.at("null_law").get<std::string>() != file.pivots.law.id()) {
            throw std::invalid_argument("stream header null law does not match its scheme");
        }
        if (std::abs(header.at("mu0").get<double>() - file.pivots.mu0()) > 1e-12) {
            throw std::invalid_argument("stream header mu0 does not match its scheme");
        }
        file.tokens.reserve(file.n);
        file.pivots.scores.reserve(file.n);
        while (std::getline(is, line)) {
            if (line.empty()) continue;
            const Json record = Json::parse(line);
            const auto t = record.at("t").get<std::size_t>();
            if (t != file.tokens.size() + 1) {
                throw std::invalid_argument("stream records out of order at t=" + std::to_string(t));
            }
            file.tokens.push_back(record.at("token").get<Token>());
            file.pivots.scores.push_back(record.at("pivot_score").get<double>());
        }
    } catch (const Json::exception& e) {
        throw std::invalid_argument(std::string("malformed stream file: ") + e.what());
    }
    if (file.tokens.size() != file.n) {
        throw std::invalid_argument("stream header says n=" + std::to_string(file.n) + " but " +
                                    std::to_string(file.tokens.size()) + " records follow");
    }
    return file;
}

void save_stream(const std::filesystem::path& path, const StreamFile& file) {
    auto os = open_output(path);
    write_stream_jsonl(os, file);
    finish_output(os, path);
}

StreamFile load_stream(const std::filesystem::path& path) {
    auto is = open_input(path);
    return read_stream_jsonl(is);
}

Json cert_to_json(const ThresholdCert& cert) {
    return Json{{"Q", cert.q},         {"alpha", cert.alpha},
                {"n", cert.n},         {"b", cert.b},
                {"scheme", cert.scheme_id}, {"mc_reps", cert.mc_reps},
                {"seed", cert.seed},   {"quantile_level", cert.quantile_level}};
}

ThresholdCert cert_from_json(const Json& j) {
    ThresholdCert cert;
    try {
        cert.q = j.at("Q").get<double>();
        cert.alpha = j.at("alpha").get<double>();
        cert.n = j.at("n").get<std::size_t>();
        cert.b = j.at("b").get<std::size_t>();
        cert.scheme_id = j.at("scheme").get<std::string>();
        cert.mc_reps = j.at("mc_reps").get<std::size_t>();
        cert.seed = j.at("seed").get<std::uint64_t>();
        cert.quantile_level = j.value("quantile_level", 1.0 - cert.alpha);
    } catch (const Json::exception& e) {
        throw std::invalid_argument(std::string("malformed threshold certificate: ") + e.what());
    }
    NullLaw::parse(cert.scheme_id);
    if (!std::isfinite(cert.q)) throw std::invalid_argument("certificate threshold is not finite");
    if (std::abs(cert.quantile_level - (1.0 - cert.alpha)) > 1e-12) {
        throw std::invalid_argument("certificate quantile level differs from 1 - alpha");
    }
    return cert;
}

void save_cert(const std::filesystem::path& path, const ThresholdCert& cert) {
    save_text(path, cert_to_json(cert).dump(2) + "\n");
}

ThresholdCert load_cert(const std::filesystem::path& path) { return cert_from_json(load_json(path)); }

Json result_to_json(const WiserResult& result) {
    const auto& trace = result.trace;
    return Json{{"K_hat", result.k_hat()},
                {"segments", segments_to_json(result.segments)},
                {"d_tilde", trace.d_tilde},
                {"trace",
                 {{"n_blocks", trace.block_sums.size()},
                  {"Q", trace.q},
                  {"selected_blocks", trace.selected_blocks.size()},
                  {"merged_runs", trace.merged_runs.size()},
                  {"kept_runs", trace.kept_runs.size()},
                  {"min_run_blocks", trace.min_run_blocks},
                  {"pad", trace.pad},
                  {"enlarged", segments_to_json(trace.enlarged)},
                  {"d_tilde_floored", trace.d_tilde_floored}}}};
}

Json trace_to_json(const StageTrace& trace) {
    Json windows = Json::array();
    for (const auto& w : trace.windows) {
        windows.push_back({{"L", interval_json(w.left)}, {"R", interval_json(w.right)}});
    }
    return Json{{"block_sums", trace.block_sums},
                {"selected_blocks", trace.selected_blocks},
                {"merged_runs", segments_to_json(trace.merged_runs)},
                {"kept_runs", segments_to_json(trace.kept_runs)},
                {"enlarged", segments_to_json(trace.enlarged)},
                {"windows", windows},
                {"Q", trace.q},
                {"min_run_blocks", trace.min_run_blocks},
                {"pad", trace.pad},
                {"d_tilde", trace.d_tilde},
                {"d_tilde_floored", trace.d_tilde_floored}};
}

SegmentSet load_result_segments(const std::filesystem::path& path) {
    const Json j = load_json(path);
    try {
        return segments_from_json(j.at("segments"));
    } catch (const Json::exception& e) {
        throw std::invalid_argument("malformed result file '" + path.string() + "': " + e.what());
    }
}

Json load_json(const std::filesystem::path& path) {
    auto is = open_input(path);
    try {
        return Json::parse(is);
    } catch (const Json::exception& e) {
        throw std::invalid_argument("malformed JSON in '" + path.string() + "': " + e.what());
    }
}

void save_text(const std::filesystem::path& path, const std::string& text) {
    auto os = open_output(path);
    os << text;
    finish_output(os, path);
}

}  // namespace wiser
