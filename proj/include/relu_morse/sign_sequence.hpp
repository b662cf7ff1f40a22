#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace relu_morse {

/// A word over {-1, 0, +1}, one entry per hidden neuron, ordered layer by
/// layer and neuron by neuron. Comparison is lexicographic with -1 < 0 < +1,
/// which is the tie-breaking order used throughout the library.
class SignSequence {
public:
    SignSequence() = default;
    explicit SignSequence(std::size_t length, std::int8_t fill = 0) : entries_(length, fill) {}
    explicit SignSequence(std::vector<std::int8_t> entries);

    /// Parses "+0-" style strings. Throws ShapeError on other characters.
    static SignSequence parse(std::string_view text);

    std::size_t size() const noexcept { return entries_.size(); }
    bool empty() const noexcept { return entries_.empty(); }

    std::int8_t operator[](std::size_t i) const { return entries_[i]; }
    void set(std::size_t i, std::int8_t value);

    const std::vector<std::int8_t>& entries() const noexcept { return entries_; }

    std::size_t zero_count() const noexcept;
    /// Positions of the zero entries, ascending.
    std::vector<std::size_t> zero_positions() const;

    std::string str() const;

    friend bool operator==(const SignSequence&, const SignSequence&) = default;
    friend std::strong_ordering operator<=>(const SignSequence& a, const SignSequence& b) {
        return a.entries_ <=> b.entries_;
    }

private:
    std::vector<std::int8_t> entries_;
};

/// Entrywise product: a's entry where nonzero, otherwise b's.
SignSequence compose_signs(const SignSequence& a, const SignSequence& b);

/// a is a face of b iff a . b == b.
bool is_face(const SignSequence& a, const SignSequence& b);

}  // namespace relu_morse
