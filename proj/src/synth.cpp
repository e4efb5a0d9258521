#include "wiser/synth.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "wiser/errors.hpp"

namespace wiser {
namespace {

constexpr int kRejectionAttempts = 10000;

Token sample_categorical(const NtpVector& p, Rng& rng) {
    const double target = uniform_open(rng);
    double cumulative = 0.0;
    Token last_positive = 0;
    for (std::size_t w = 1; w <= p.vocab_size(); ++w) {
        const double pw = p.prob(static_cast<Token>(w));
        if (pw <= 0.0) continue;
        last_positive = static_cast<Token>(w);
        cumulative += pw;
        if (cumulative >= target) return last_positive;
    }
    return last_positive;
}

std::vector<double> normalized(std::vector<double> weights) {
    double total = 0.0;
    for (double w : weights) total += w;
    for (double& w : weights) w /= total;
    return weights;
}

}  // namespace

NtpVector cap_probabilities(std::vector<double> weights, double max_prob) {
    if (weights.empty()) throw InvalidDistribution("empty probability vector");
    if (!(max_prob > 0.0 && max_prob <= 1.0) ||
        max_prob * static_cast<double>(weights.size()) < 1.0) {
        throw std::invalid_argument("cap is infeasible for this vocabulary size");
    }
    weights = normalized(std::move(weights));
    std::vector<char> capped(weights.size(), 0);
    for (;;) {
        double excess = 0.0;
        double free_mass = 0.0;
        std::size_t free_count = 0;
        for (std::size_t i = 0; i < weights.size(); ++i) {
            if (weights[i] > max_prob) {
                excess += weights[i] - max_prob;
                weights[i] = max_prob;
                capped[i] = 1;
            }
        }
        if (excess <= 0.0) break;
        for (std::size_t i = 0; i < weights.size(); ++i) {
            if (!capped[i]) {
                free_mass += weights[i];
                ++free_count;
            }
        }
        for (std::size_t i = 0; i < weights.size(); ++i) {
            if (capped[i]) continue;
            weights[i] += free_mass > 0.0 ? excess * weights[i] / free_mass
                                          : excess / static_cast<double>(free_count);
        }
    }
    return NtpVector(normalized(std::move(weights)));
}

void NtpModel::validate(std::size_t vocab_size) const {
    if (!(delta_cap > 0.0 && delta_cap < 1.0)) {
        throw std::invalid_argument("delta cap must lie in (0, 1)");
    }
    if ((1.0 - delta_cap) * static_cast<double>(vocab_size) < 1.0) {
        throw std::invalid_argument("delta cap is infeasible for this vocabulary size");
    }
    switch (kind) {
        case Kind::dirichlet:
            if (!(concentration > 0.0)) throw std::invalid_argument("concentration must be > 0");
            break;
        case Kind::zipf:
            if (!(exponent >= 0.0)) throw std::invalid_argument("zipf exponent must be >= 0");
            break;
        case Kind::fixed:
            if (fixed.empty()) throw std::invalid_argument("fixed NTP list is empty");
            for (const auto& p : fixed) {
                if (p.vocab_size() != vocab_size) {
                    throw std::invalid_argument("fixed NTP has the wrong vocabulary size");
                }
                if (!p.within_cap(delta_cap)) {
                    throw std::invalid_argument("fixed NTP exceeds the delta cap");
                }
            }
            break;
    }
}

NtpVector NtpModel::sample(std::size_t t, std::size_t vocab_size, Rng& rng) const {
    const double max_prob = 1.0 - delta_cap;
    switch (kind) {
        case Kind::dirichlet: {
            std::gamma_distribution<double> gamma(concentration, 1.0);
            std::vector<double> draw(vocab_size);
            for (int attempt = 0; attempt < kRejectionAttempts; ++attempt) {
                double total = 0.0;
                for (double& g : draw) {
                    g = gamma(rng);
                    total += g;
                }
                if (!(total > 0.0)) continue;
                double top = 0.0;
                for (double g : draw) top = std::max(top, g / total);
                if (top <= max_prob) return NtpVector(normalized(draw));
            }
            return cap_probabilities(draw, max_prob);
        }
        case Kind::zipf: {
            std::vector<double> weights(vocab_size);
            for (std::size_t k = 0; k < vocab_size; ++k) {
                weights[k] = std::pow(static_cast<double>(k + 1), -exponent);
            }
            std::shuffle(weights.begin(), weights.end(), rng);
            return cap_probabilities(std::move(weights), max_prob);
        }
        case Kind::fixed: return fixed[(t - 1) % fixed.size()];
    }
    throw std::invalid_argument("unknown NTP model");
}

std::string NtpModel::describe() const {
    std::ostringstream os;
    switch (kind) {
        case Kind::dirichlet: os << "dirichlet(" << concentration << ")"; break;
        case Kind::zipf: os << "zipf(" << exponent << ")"; break;
        case Kind::fixed: os << "fixed(" << fixed.size() << ")"; break;
    }
    return os.str();
}

void StreamSpec::validate() const {
    if (n < 1) throw std::invalid_argument("stream length must be positive");
    true_segments.validate_within(n);
    scheme.validate();
    ntp.validate(scheme.vocab_size);
}

KeySeed derive_key(Token previous, std::uint64_t master_seed) {
    return KeySeed{derive_seed(master_seed, 0x6B657900ULL + previous)};
}

std::vector<KeySeed> reconstruct_keys(std::span<const Token> tokens, std::uint64_t master_seed) {
    std::vector<KeySeed> keys;
    keys.reserve(tokens.size());
    Token previous = kSentinelToken;
    for (Token token : tokens) {
        keys.push_back(derive_key(previous, master_seed));
        previous = token;
    }
    return keys;
}

PivotSeries score_tokens(std::span<const Token> tokens, std::uint64_t master_seed,
                         const SchemeConfig& scheme) {
    scheme.validate();
    PivotSeries out;
    out.law = null_law(scheme);
    const auto keys = reconstruct_keys(tokens, master_seed);
    out.scores.reserve(tokens.size());
    for (std::size_t t = 0; t < tokens.size(); ++t) {
        out.scores.push_back(score_token(scheme, tokens[t], keys[t]));
    }
    return out;
}

Stream generate_stream(const StreamSpec& spec) {
    spec.validate();
    Rng rng(derive_seed(spec.seed, 0x6E7470ULL));
    const auto in_segment = spec.true_segments.mask(spec.n);

    Stream out;
    out.tokens.reserve(spec.n);
    out.keys.reserve(spec.n);
    out.decoded.assign(in_segment.begin(), in_segment.end());
    out.pivots.law = null_law(spec.scheme);
    out.pivots.scores.reserve(spec.n);

    Token previous = kSentinelToken;
    for (std::size_t t = 1; t <= spec.n; ++t) {
        const NtpVector p = spec.ntp.sample(t, spec.scheme.vocab_size, rng);
        const KeySeed key = derive_key(previous, spec.seed);
        const Token token = in_segment[t - 1] ? watermark_decode(spec.scheme, p, key)
                                              : sample_categorical(p, rng);
        out.tokens.push_back(token);
        out.keys.push_back(key);
        out.pivots.scores.push_back(score_token(spec.scheme, token, key));
        previous = token;
    }
    return out;
}

std::vector<Token> apply_edits(std::vector<Token> tokens, std::span<const Edit> edits) {
    for (const auto& edit : edits) {
        const std::size_t n = tokens.size();
        const std::size_t limit = edit.kind == Edit::Kind::insert ? n + 1 : n;
        if (edit.position < 1 || edit.position > limit) {
            throw std::out_of_range("edit position " + std::to_string(edit.position) +
                                    " outside 1.." + std::to_string(limit));
        }
        const auto at = tokens.begin() + static_cast<std::ptrdiff_t>(edit.position - 1);
        switch (edit.kind) {
            case Edit::Kind::substitute: *at = edit.token; break;
            case Edit::Kind::insert: tokens.insert(at, edit.token); break;
            case Edit::Kind::remove: tokens.erase(at); break;
        }
    }
    return tokens;
}

}  // namespace wiser
