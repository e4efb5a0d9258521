#include "wiser/segment_set.hpp"

#include <sstream>
#include <stdexcept>

namespace wiser {

SegmentSet::SegmentSet(std::vector<Interval> intervals) : intervals_(std::move(intervals)) {
    for (std::size_t i = 0; i < intervals_.size(); ++i) {
        const auto& iv = intervals_[i];
        if (iv.left < 1 || iv.left > iv.right) {
            throw std::invalid_argument("segment [" + std::to_string(iv.left) + ", " +
                                        std::to_string(iv.right) + "] is malformed");
        }
        if (i > 0 && intervals_[i - 1].right >= iv.left) {
            throw std::invalid_argument("segments must be sorted and disjoint");
        }
    }
}

void SegmentSet::validate_within(std::size_t n) const {
    if (!intervals_.empty() && intervals_.back().right > n) {
        throw std::out_of_range("segment end " + std::to_string(intervals_.back().right) +
                                " exceeds sequence length " + std::to_string(n));
    }
}

std::size_t SegmentSet::total_length() const {
    std::size_t total = 0;
    for (const auto& iv : intervals_) total += iv.length();
    return total;
}

std::vector<char> SegmentSet::mask(std::size_t n) const {
    validate_within(n);
    std::vector<char> out(n, 0);
    for (const auto& iv : intervals_) {
        for (std::size_t t = iv.left; t <= iv.right; ++t) out[t - 1] = 1;
    }
    return out;
}

std::string SegmentSet::to_string() const {
    std::ostringstream os;
    for (std::size_t i = 0; i < intervals_.size(); ++i) {
        if (i) os << ',';
        os << intervals_[i].left << '-' << intervals_[i].right;
    }
    return os.str();
}

SegmentSet SegmentSet::parse(const std::string& text) {
    std::vector<Interval> out;
    std::istringstream is(text);
    std::string item;
    while (std::getline(is, item, ',')) {
        if (item.empty()) continue;
        const auto dash = item.find('-');
        if (dash == std::string::npos) {
            throw std::invalid_argument("segment '" + item + "' is not of the form left-right");
        }
        try {
            out.push_back({std::stoul(item.substr(0, dash)), std::stoul(item.substr(dash + 1))});
        } catch (const std::logic_error&) {
            throw std::invalid_argument("segment '" + item + "' is not of the form left-right");
        }
    }
    return SegmentSet(std::move(out));
}

}  // namespace wiser
