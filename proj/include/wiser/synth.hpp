#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "wiser/pivot.hpp"
#include "wiser/rng.hpp"
#include "wiser/segment_set.hpp"

namespace wiser {

inline constexpr Token kSentinelToken = 0;

/// Generator of Delta-capped next-token probability vectors.
struct NtpModel {
    enum class Kind { dirichlet, zipf, fixed };

    Kind kind = Kind::dirichlet;
    double concentration = 0.3;  // dirichlet
    double exponent = 1.1;       // zipf
    std::vector<NtpVector> fixed;  // cycled by position
    double delta_cap = 0.5;

    void validate(std::size_t vocab_size) const;

    /// NTP for 1-based position t; every result satisfies max <= 1 - delta_cap.
    NtpVector sample(std::size_t t, std::size_t vocab_size, Rng& rng) const;

    /// Short label, e.g. "dirichlet(0.3)".
    std::string describe() const;
};

/// Caps every entry at max_prob and hands the excess to the uncapped entries
/// in proportion to their mass, repeating until nothing exceeds the cap.
NtpVector cap_probabilities(std::vector<double> weights, double max_prob);

struct StreamSpec {
    std::size_t n = 500;
    SegmentSet true_segments;
    SchemeConfig scheme;
    NtpModel ntp;
    std::uint64_t seed = 1;  // also the master watermark key

    void validate() const;
};

struct Stream {
    std::vector<Token> tokens;
    std::vector<KeySeed> keys;
    std::vector<char> decoded;  // 1 where the token came from the watermark decoder
    PivotSeries pivots;
};

Stream generate_stream(const StreamSpec& spec);

/// Key for a position whose preceding token is `previous` (context width 1).
KeySeed derive_key(Token previous, std::uint64_t master_seed);

/// Verifier's view: keys recomputed from the observed tokens alone.
std::vector<KeySeed> reconstruct_keys(std::span<const Token> tokens, std::uint64_t master_seed);

/// Reconstructs keys and scores every token.
PivotSeries score_tokens(std::span<const Token> tokens, std::uint64_t master_seed,
                         const SchemeConfig& scheme);

struct Edit {
    enum class Kind { substitute, insert, remove };
    Kind kind = Kind::substitute;
    std::size_t position = 1;  // 1-based, relative to the sequence at the time of the edit
    Token token = 1;           // ignored for remove
};

/// Applies edits in order. Insert places the token before `position`
/// (position n + 1 appends).
std::vector<Token> apply_edits(std::vector<Token> tokens, std::span<const Edit> edits);

}  // namespace wiser
