#include "wiser/pivot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>

#include "wiser/errors.hpp"

namespace wiser {
namespace {

__extension__ typedef unsigned __int128 WideUnsigned;

// Unbiased enough for vocabulary-sized bounds (bias ~ bound / 2^64).
std::size_t bounded(std::uint64_t bits, std::size_t bound) {
    return static_cast<std::size_t>((static_cast<WideUnsigned>(bits) * bound) >> 64);
}

double gumbel_uniform(KeySeed key, Token w) {
    return to_open_unit(derive_seed(key.value, w));
}

void check_token(Token token, std::size_t vocab_size) {
    if (token < 1 || token > vocab_size) {
        throw std::out_of_range("token " + std::to_string(token) + " outside vocabulary 1.." +
                                std::to_string(vocab_size));
    }
}

// Sum over n >= 1 of p / (n (1 + n p)), i.e. the contribution of one NTP
// entry to E_1[-log(1 - Y)]. Summed until the next term drops below 2e-10;
// the remaining tail is replaced by the midpoint integral
// int_{N+1/2}^inf p / (x (1 + p x)) dx = p log(1 + 1 / (p (N + 1/2))),
// which overestimates the tail by less than the last term.
double gumbel_entry_series(double p) {
    if (p <= 0.0) return 0.0;
    double sum = 0.0;
    double n = 1.0;
    for (;; n += 1.0) {
        const double term = p / (n * (1.0 + n * p));
        if (term < 2e-10) break;
        sum += term;
    }
    // n is the first index not summed.
    return sum + p * std::log1p(1.0 / (p * (n - 0.5)));
}

std::vector<Token> inverse_permutation(std::span<const Token> perm) {
    std::vector<Token> inv(perm.size(), 0);
    for (std::size_t w = 0; w < perm.size(); ++w) {
        const Token image = perm[w];
        if (image < 1 || image > perm.size() || inv[image - 1] != 0) {
            throw std::invalid_argument("inverse-transform key does not hold a permutation");
        }
        inv[image - 1] = static_cast<Token>(w + 1);
    }
    return inv;
}

}  // namespace

// ---------------------------------------------------------------------------

NtpVector::NtpVector(std::vector<double> probs) : probs_(std::move(probs)) {
    if (probs_.empty()) throw InvalidDistribution("empty probability vector");
    double total = 0.0;
    for (double p : probs_) {
        if (!std::isfinite(p) || p < 0.0) {
            throw InvalidDistribution("probability entries must be finite and nonnegative");
        }
        total += p;
    }
    if (total == 0.0) throw InvalidDistribution("all-zero probability vector");
    if (std::abs(total - 1.0) > 1e-9) {
        throw InvalidDistribution("probabilities sum to " + std::to_string(total) + ", not 1");
    }
}

double NtpVector::max_prob() const { return *std::max_element(probs_.begin(), probs_.end()); }

bool NtpVector::within_cap(double delta) const { return max_prob() <= 1.0 - delta + 1e-12; }

GumbelKey expand_gumbel_key(KeySeed key, std::size_t vocab_size) {
    GumbelKey out;
    out.uniforms.resize(vocab_size);
    for (std::size_t w = 1; w <= vocab_size; ++w) {
        out.uniforms[w - 1] = gumbel_uniform(key, static_cast<Token>(w));
    }
    return out;
}

InverseKey expand_inverse_key(KeySeed key, std::size_t vocab_size) {
    InverseKey out;
    out.u = to_open_unit(derive_seed(key.value, 0));
    out.perm.resize(vocab_size);
    std::iota(out.perm.begin(), out.perm.end(), Token{1});
    const std::uint64_t stream = derive_seed(key.value, 1);
    for (std::size_t i = vocab_size; i > 1; --i) {
        const std::size_t j = bounded(derive_seed(stream, i), i);
        std::swap(out.perm[i - 1], out.perm[j]);
    }
    return out;
}

RedGreenKey expand_red_green_key(KeySeed key) { return RedGreenKey{derive_seed(key.value, 2)}; }

// ---------------------------------------------------------------------------

Token gumbel_decode(const NtpVector& p, const GumbelKey& key) {
    if (key.uniforms.size() != p.vocab_size()) {
        throw std::invalid_argument("Gumbel key size differs from vocabulary size");
    }
    Token best = 0;
    double best_score = -std::numeric_limits<double>::infinity();
    for (std::size_t w = 1; w <= p.vocab_size(); ++w) {
        const double pw = p.prob(static_cast<Token>(w));
        if (pw <= 0.0) continue;
        const double score = std::log(key.uniforms[w - 1]) / pw;
        // strict comparison keeps the lowest index on ties
        if (best == 0 || score > best_score) {
            best = static_cast<Token>(w);
            best_score = score;
        }
    }
    if (best == 0) throw InvalidDistribution("no token has positive probability");
    return best;
}

double gumbel_pivot(Token token, const GumbelKey& key) {
    check_token(token, key.uniforms.size());
    return key.uniforms[token - 1];
}

double gumbel_score(double y) {
    if (!(y >= 0.0 && y < 1.0)) {
        throw std::domain_error("Gumbel score needs y in [0, 1), got " + std::to_string(y));
    }
    return -std::log1p(-y);
}

double gumbel_watermarked_mean(const NtpVector& p) {
    std::vector<double> probs(p.probs().begin(), p.probs().end());
    std::sort(probs.begin(), probs.end());
    double total = 0.0;
    for (std::size_t i = 0; i < probs.size();) {
        std::size_t j = i;
        while (j < probs.size() && probs[j] == probs[i]) ++j;
        total += static_cast<double>(j - i) * gumbel_entry_series(probs[i]);
        i = j;
    }
    return total;
}

double gumbel_d_lower_bound(double delta) {
    if (!(delta > 0.0 && delta < 1.0)) {
        throw std::domain_error("delta must lie in (0, 1)");
    }
    const double cap = 1.0 - delta;
    const double copies = std::floor(1.0 / cap);
    const double remainder = std::max(0.0, 1.0 - copies * cap);
    const double mean = copies * gumbel_entry_series(cap) + gumbel_entry_series(remainder);
    return mean - 1.0;
}

// ---------------------------------------------------------------------------

Token inverse_decode(const NtpVector& p, const InverseKey& key) {
    const std::size_t vocab = p.vocab_size();
    if (key.perm.size() != vocab) {
        throw std::invalid_argument("inverse-transform key size differs from vocabulary size");
    }
    const std::vector<Token> inv = inverse_permutation(key.perm);
    double cumulative = 0.0;
    Token last_positive = 0;
    for (std::size_t i = 1; i <= vocab; ++i) {
        const Token w = inv[i - 1];
        const double pw = p.prob(w);
        if (pw > 0.0) last_positive = w;
        cumulative += pw;
        if (pw > 0.0 && cumulative >= key.u) return w;
    }
    // cumulative mass fell short of u through rounding
    return last_positive;
}

double inverse_pivot(Token token, const InverseKey& key, std::size_t vocab_size) {
    if (vocab_size < 2) throw std::domain_error("inverse-transform pivot needs V >= 2");
    if (key.perm.size() != vocab_size) {
        throw std::invalid_argument("inverse-transform key size differs from vocabulary size");
    }
    check_token(token, vocab_size);
    const double eta =
        static_cast<double>(key.perm[token - 1] - 1) / static_cast<double>(vocab_size - 1);
    return std::abs(key.u - eta);
}

double inverse_score(double y) {
    if (!(y >= 0.0 && y <= 1.0)) {
        throw std::domain_error("inverse-transform score needs y in [0, 1], got " +
                                std::to_string(y));
    }
    return 1.0 - y;
}

double inverse_null_mean(std::size_t vocab_size) {
    if (vocab_size < 2) throw std::domain_error("inverse-transform pivot needs V >= 2");
    const double v = static_cast<double>(vocab_size);
    return 1.0 - (2.0 * v - 1.0) / (6.0 * (v - 1.0));
}

// ---------------------------------------------------------------------------

std::size_t green_count(std::size_t vocab_size, double green_fraction) {
    if (!(green_fraction > 0.0 && green_fraction < 1.0)) {
        throw std::domain_error("green fraction must lie in (0, 1)");
    }
    const auto count =
        static_cast<std::size_t>(std::floor(green_fraction * static_cast<double>(vocab_size)));
    if (count < 1) throw std::domain_error("green list would be empty");
    return count;
}

std::vector<bool> green_list(const RedGreenKey& key, std::size_t vocab_size,
                             double green_fraction) {
    const std::size_t green = green_count(vocab_size, green_fraction);
    std::vector<std::size_t> order(vocab_size);
    std::iota(order.begin(), order.end(), std::size_t{0});
    // partial Fisher-Yates: the first `green` slots are a uniform subset
    for (std::size_t i = 0; i < green; ++i) {
        const std::size_t j = i + bounded(derive_seed(key.seed, i), vocab_size - i);
        std::swap(order[i], order[j]);
    }
    std::vector<bool> membership(vocab_size, false);
    for (std::size_t i = 0; i < green; ++i) membership[order[i]] = true;
    return membership;
}

Token red_green_decode(const NtpVector& p, const RedGreenKey& key, double bias,
                       double green_fraction) {
    if (!(bias >= 0.0)) throw std::domain_error("red-green bias must be nonnegative");
    const std::size_t vocab = p.vocab_size();
    const std::vector<bool> green = green_list(key, vocab, green_fraction);
    const double boost = std::exp(bias);
    std::vector<double> weights(vocab);
    double total = 0.0;
    for (std::size_t w = 0; w < vocab; ++w) {
        weights[w] = p.probs()[w] * (green[w] ? boost : 1.0);
        total += weights[w];
    }
    const double target = to_open_unit(derive_seed(key.seed, 0xC0FFEEULL)) * total;
    double cumulative = 0.0;
    Token last_positive = 0;
    for (std::size_t w = 0; w < vocab; ++w) {
        if (weights[w] <= 0.0) continue;
        last_positive = static_cast<Token>(w + 1);
        cumulative += weights[w];
        if (cumulative >= target) return last_positive;
    }
    return last_positive;
}

double red_green_pivot(Token token, const RedGreenKey& key, double green_fraction,
                       std::size_t vocab_size) {
    check_token(token, vocab_size);
    return green_list(key, vocab_size, green_fraction)[token - 1] ? 1.0 : 0.0;
}

// ---------------------------------------------------------------------------

std::string_view scheme_name(Scheme scheme) {
    switch (scheme) {
        case Scheme::gumbel: return "gumbel";
        case Scheme::inverse_transform: return "inverse_transform";
        case Scheme::red_green: return "red_green";
    }
    return "unknown";
}

Scheme parse_scheme(std::string_view name) {
    if (name == "gumbel") return Scheme::gumbel;
    if (name == "inverse_transform" || name == "inverse") return Scheme::inverse_transform;
    if (name == "red_green" || name == "redgreen") return Scheme::red_green;
    throw std::invalid_argument("unsupported scheme '" + std::string(name) + "'");
}

void SchemeConfig::validate() const {
    if (vocab_size < 2) throw std::invalid_argument("vocabulary size must be at least 2");
    if (scheme == Scheme::red_green) {
        green_count(vocab_size, green_fraction);
        if (!(bias >= 0.0) || !std::isfinite(bias)) {
            throw std::invalid_argument("red-green bias must be finite and nonnegative");
        }
    }
}

NullLaw NullLaw::exponential() { return NullLaw{}; }

NullLaw NullLaw::inverse_grid(std::size_t vocab_size) {
    if (vocab_size < 2) throw std::domain_error("inverse-transform pivot needs V >= 2");
    NullLaw law;
    law.kind_ = Kind::inverse_grid;
    law.vocab_size_ = vocab_size;
    return law;
}

NullLaw NullLaw::bernoulli(std::size_t green, std::size_t vocab_size) {
    if (green < 1 || green >= vocab_size) {
        throw std::domain_error("green count must lie in [1, V)");
    }
    NullLaw law;
    law.kind_ = Kind::bernoulli;
    law.green_ = green;
    law.vocab_size_ = vocab_size;
    return law;
}

NullLaw NullLaw::point_mass(double value) {
    if (!std::isfinite(value)) throw std::domain_error("point mass must be finite");
    NullLaw law;
    law.kind_ = Kind::point_mass;
    law.value_ = value;
    return law;
}

NullLaw NullLaw::parse(std::string_view id) {
    const auto colon = id.find(':');
    const std::string_view head = id.substr(0, colon);
    const std::string tail = colon == std::string_view::npos ? "" : std::string(id.substr(colon + 1));
    try {
        if (head == "gumbel" && colon == std::string_view::npos) return exponential();
        if (head == "inverse_transform" && !tail.empty()) return inverse_grid(std::stoul(tail));
        if (head == "red_green") {
            const auto slash = tail.find('/');
            if (slash != std::string::npos) {
                return bernoulli(std::stoul(tail.substr(0, slash)),
                                 std::stoul(tail.substr(slash + 1)));
            }
        }
        if (head == "point_mass" && !tail.empty()) return point_mass(std::stod(tail));
    } catch (const std::invalid_argument&) {
    } catch (const std::out_of_range&) {
    }
    throw std::invalid_argument("unsupported scheme '" + std::string(id) + "'");
}

double NullLaw::mean() const {
    switch (kind_) {
        case Kind::exponential: return 1.0;
        case Kind::inverse_grid: return inverse_null_mean(vocab_size_);
        case Kind::bernoulli:
            return static_cast<double>(green_) / static_cast<double>(vocab_size_);
        case Kind::point_mass: return value_;
    }
    return 0.0;
}

double NullLaw::sample(Rng& rng) const {
    switch (kind_) {
        case Kind::exponential: return -std::log(uniform_open(rng));
        case Kind::inverse_grid: {
            const double u = uniform_open(rng);
            const double eta = static_cast<double>(bounded(rng(), vocab_size_)) /
                               static_cast<double>(vocab_size_ - 1);
            return 1.0 - std::abs(u - eta);
        }
        case Kind::bernoulli: return bounded(rng(), vocab_size_) < green_ ? 1.0 : 0.0;
        case Kind::point_mass: return value_;
    }
    return 0.0;
}

std::string NullLaw::id() const {
    switch (kind_) {
        case Kind::exponential: return "gumbel";
        case Kind::inverse_grid: return "inverse_transform:" + std::to_string(vocab_size_);
        case Kind::bernoulli:
            return "red_green:" + std::to_string(green_) + "/" + std::to_string(vocab_size_);
        case Kind::point_mass: {
            char buf[64];
            std::snprintf(buf, sizeof buf, "point_mass:%.17g", value_);
            return buf;
        }
    }
    return "unknown";
}

NullLaw null_law(const SchemeConfig& cfg) {
    switch (cfg.scheme) {
        case Scheme::gumbel: return NullLaw::exponential();
        case Scheme::inverse_transform: return NullLaw::inverse_grid(cfg.vocab_size);
        case Scheme::red_green:
            return NullLaw::bernoulli(green_count(cfg.vocab_size, cfg.green_fraction),
                                      cfg.vocab_size);
    }
    throw std::invalid_argument("unsupported scheme");
}

Token watermark_decode(const SchemeConfig& cfg, const NtpVector& p, KeySeed key) {
    switch (cfg.scheme) {
        case Scheme::gumbel: return gumbel_decode(p, expand_gumbel_key(key, p.vocab_size()));
        case Scheme::inverse_transform:
            return inverse_decode(p, expand_inverse_key(key, p.vocab_size()));
        case Scheme::red_green:
            return red_green_decode(p, expand_red_green_key(key), cfg.bias, cfg.green_fraction);
    }
    throw std::invalid_argument("unsupported scheme");
}

double score_token(const SchemeConfig& cfg, Token token, KeySeed key) {
    check_token(token, cfg.vocab_size);
    switch (cfg.scheme) {
        case Scheme::gumbel: return gumbel_score(gumbel_uniform(key, token));
        case Scheme::inverse_transform:
            return inverse_score(
                inverse_pivot(token, expand_inverse_key(key, cfg.vocab_size), cfg.vocab_size));
        case Scheme::red_green:
            return red_green_pivot(token, expand_red_green_key(key), cfg.green_fraction,
                                   cfg.vocab_size);
    }
    throw std::invalid_argument("unsupported scheme");
}

}  // namespace wiser
