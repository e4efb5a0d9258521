#pragma once

#include <compare>
#include <cstddef>
#include <initializer_list>
#include <string>
#include <vector>

namespace wiser {

/// Inclusive, 1-based index interval [left, right].
struct Interval {
    std::size_t left = 1;
    std::size_t right = 1;

    std::size_t length() const { return right - left + 1; }
    bool contains(std::size_t i) const { return left <= i && i <= right; }
    auto operator<=>(const Interval&) const = default;
};

/// Sorted list of pairwise disjoint inclusive intervals. Construction
/// validates ordering and disjointness; bounds against a sequence length
/// are checked separately with validate_within().
class SegmentSet {
public:
    SegmentSet() = default;
    explicit SegmentSet(std::vector<Interval> intervals);
    SegmentSet(std::initializer_list<Interval> intervals)
        : SegmentSet(std::vector<Interval>(intervals)) {}

    void validate_within(std::size_t n) const;

    std::size_t size() const { return intervals_.size(); }
    bool empty() const { return intervals_.empty(); }
    const Interval& operator[](std::size_t i) const { return intervals_[i]; }
    auto begin() const { return intervals_.begin(); }
    auto end() const { return intervals_.end(); }
    const std::vector<Interval>& intervals() const { return intervals_; }

    std::size_t total_length() const;

    /// Per-position membership flags over [1, n]; index 0 of the result is token 1.
    std::vector<char> mask(std::size_t n) const;

    /// "l-r,l-r" form used by the CLI.
    std::string to_string() const;
    static SegmentSet parse(const std::string& text);

    bool operator==(const SegmentSet&) const = default;

private:
    std::vector<Interval> intervals_;
};

}  // namespace wiser
