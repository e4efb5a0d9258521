#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "json.hpp"
#include "wiser/calibrate.hpp"
#include "wiser/pivot.hpp"
#include "wiser/segment_set.hpp"
#include "wiser/segmenter.hpp"
#include "wiser/synth.hpp"

namespace wiser {

using Json = nlohmann::json;

/// Contents of a JSONL stream file: a header record followed by one
/// {t, token, pivot_score} record per token.
struct StreamFile {
    std::size_t n = 0;
    SchemeConfig scheme;
    std::string model;
    std::uint64_t seed = 0;
    SegmentSet true_segments;
    std::vector<Token> tokens;
    PivotSeries pivots;
};

StreamFile to_stream_file(const StreamSpec& spec, const Stream& stream);

void write_stream_jsonl(std::ostream& os, const StreamFile& file);
StreamFile read_stream_jsonl(std::istream& is);

// Path variants throw IoError when the file cannot be opened or written.
void save_stream(const std::filesystem::path& path, const StreamFile& file);
StreamFile load_stream(const std::filesystem::path& path);

Json segments_to_json(const SegmentSet& segments);
SegmentSet segments_from_json(const Json& j);

Json cert_to_json(const ThresholdCert& cert);
ThresholdCert cert_from_json(const Json& j);
void save_cert(const std::filesystem::path& path, const ThresholdCert& cert);
ThresholdCert load_cert(const std::filesystem::path& path);

/// {K_hat, segments, d_tilde, trace: summary}
Json result_to_json(const WiserResult& result);
/// Every stage of the trace, for debugging.
Json trace_to_json(const StageTrace& trace);

/// Estimated segments and n read back from a result file.
SegmentSet load_result_segments(const std::filesystem::path& path);

Json load_json(const std::filesystem::path& path);
void save_text(const std::filesystem::path& path, const std::string& text);

}  // namespace wiser
