#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "wiser/rng.hpp"

namespace wiser {

/// Vocabulary index, 1-based. Token 0 is reserved as the sentinel context
/// for the first position of a stream.
using Token = std::uint32_t;

/// Next-token probability vector over a vocabulary of size V.
class NtpVector {
public:
    /// Throws InvalidDistribution unless entries are finite, nonnegative and
    /// sum to 1 within 1e-9.
    explicit NtpVector(std::vector<double> probs);

    std::size_t vocab_size() const { return probs_.size(); }
    double prob(Token w) const { return probs_[w - 1]; }
    std::span<const double> probs() const { return probs_; }
    double max_prob() const;

    /// Membership in the Delta-constrained class (max entry <= 1 - delta).
    bool within_cap(double delta) const;

private:
    std::vector<double> probs_;
};

/// Compact per-position key. The scheme-specific randomness (V uniforms,
/// a uniform and a permutation, or a green-list seed) is expanded from it on
/// demand, so a stream of keys costs 8 bytes per token.
struct KeySeed {
    std::uint64_t value = 0;
    auto operator<=>(const KeySeed&) const = default;
};

struct GumbelKey {
    std::vector<double> uniforms;  // uniforms[w - 1] = U_w, each in (0, 1)
};

struct InverseKey {
    double u = 0.5;
    std::vector<Token> perm;  // perm[w - 1] = pi(w), a bijection on 1..V
};

struct RedGreenKey {
    std::uint64_t seed = 0;
};

GumbelKey expand_gumbel_key(KeySeed key, std::size_t vocab_size);
InverseKey expand_inverse_key(KeySeed key, std::size_t vocab_size);
RedGreenKey expand_red_green_key(KeySeed key);

// ---------------------------------------------------------------------------
// Gumbel-max scheme. Pivot Y = U_token, score h(y) = -log(1 - y) ~ Exp(1).

Token gumbel_decode(const NtpVector& p, const GumbelKey& key);
double gumbel_pivot(Token token, const GumbelKey& key);
double gumbel_score(double y);

/// Exact E_{1,P}[-log(1 - Y)] for a given NTP vector, by series summation.
double gumbel_watermarked_mean(const NtpVector& p);

/// Guaranteed separation d = inf over the Delta-class of E_1[h(Y)] - 1,
/// evaluated at the extremal vector (1-D, ..., 1-D, remainder, 0, ...).
double gumbel_d_lower_bound(double delta);

// ---------------------------------------------------------------------------
// Inverse-transform scheme. Pivot Y = |U - eta(pi(token))|, score 1 - Y.

Token inverse_decode(const NtpVector& p, const InverseKey& key);
double inverse_pivot(Token token, const InverseKey& key, std::size_t vocab_size);
double inverse_score(double y);

/// Null mean of 1 - Y at finite V: 1 - (2V - 1) / (6(V - 1)); tends to 2/3.
double inverse_null_mean(std::size_t vocab_size);

// ---------------------------------------------------------------------------
// Red-green scheme (soft logit bias). Pivot is the green indicator, h = id.

std::size_t green_count(std::size_t vocab_size, double green_fraction);

/// membership[w - 1] is true when w is green; exactly green_count() entries set.
std::vector<bool> green_list(const RedGreenKey& key, std::size_t vocab_size,
                             double green_fraction);

/// Samples from p reweighted by exp(bias) on green tokens. The sampling
/// uniform is drawn from the key, so the decoder is deterministic.
Token red_green_decode(const NtpVector& p, const RedGreenKey& key, double bias,
                       double green_fraction);
double red_green_pivot(Token token, const RedGreenKey& key, double green_fraction,
                       std::size_t vocab_size);

// ---------------------------------------------------------------------------
// Scheme dispatch.

enum class Scheme { gumbel, inverse_transform, red_green };

std::string_view scheme_name(Scheme scheme);
Scheme parse_scheme(std::string_view name);

struct SchemeConfig {
    Scheme scheme = Scheme::gumbel;
    std::size_t vocab_size = 100;
    double green_fraction = 0.5;  // red-green only
    double bias = 2.0;            // red-green only

    void validate() const;
};

/// Null law of the score X = h(Y) for unwatermarked tokens. Besides the
/// three schemes it has a point mass, used to stub calibration.
class NullLaw {
public:
    enum class Kind { exponential, inverse_grid, bernoulli, point_mass };

    static NullLaw exponential();
    static NullLaw inverse_grid(std::size_t vocab_size);
    static NullLaw bernoulli(std::size_t green, std::size_t vocab_size);
    static NullLaw point_mass(double value);

    /// Throws std::invalid_argument on an unknown or malformed id.
    static NullLaw parse(std::string_view id);

    Kind kind() const { return kind_; }
    double mean() const;
    double sample(Rng& rng) const;
    std::string id() const;

    bool operator==(const NullLaw&) const = default;

private:
    Kind kind_ = Kind::exponential;
    std::size_t vocab_size_ = 0;
    std::size_t green_ = 0;
    double value_ = 0.0;
};

NullLaw null_law(const SchemeConfig& cfg);

Token watermark_decode(const SchemeConfig& cfg, const NtpVector& p, KeySeed key);

/// Score h(Y(token, key)) under the configured scheme.
double score_token(const SchemeConfig& cfg, Token token, KeySeed key);

/// Per-token scores together with the null law they follow off-watermark.
struct PivotSeries {
    std::vector<double> scores;
    NullLaw law = NullLaw::exponential();

    std::size_t size() const { return scores.size(); }
    double mu0() const { return law.mean(); }
};

}  // namespace wiser
