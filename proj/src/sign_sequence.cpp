#include "relu_morse/sign_sequence.hpp"

#include "relu_morse/errors.hpp"

namespace relu_morse {

SignSequence::SignSequence(std::vector<std::int8_t> entries) : entries_(std::move(entries)) {
    for (auto e : entries_) {
        if (e < -1 || e > 1) throw ShapeError("sign entries must be -1, 0 or +1");
    }
}

SignSequence SignSequence::parse(std::string_view text) {
    std::vector<std::int8_t> out;
    out.reserve(text.size());
    for (char c : text) {
        switch (c) {
            case '-': out.push_back(-1); break;
            case '0': out.push_back(0); break;
            case '+': out.push_back(1); break;
            default: throw ShapeError("invalid sign character '" + std::string(1, c) + "'");
        }
    }
    return SignSequence(std::move(out));
}

void SignSequence::set(std::size_t i, std::int8_t value) {
    if (value < -1 || value > 1) throw ShapeError("sign entries must be -1, 0 or +1");
    entries_.at(i) = value;
}

std::size_t SignSequence::zero_count() const noexcept {
    std::size_t n = 0;
    for (auto e : entries_) n += (e == 0);
    return n;
}

std::vector<std::size_t> SignSequence::zero_positions() const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < entries_.size(); ++i)
        if (entries_[i] == 0) out.push_back(i);
    return out;
}

std::string SignSequence::str() const {
    std::string s;
    s.reserve(entries_.size());
    for (auto e : entries_) s.push_back(e < 0 ? '-' : (e > 0 ? '+' : '0'));
    return s;
}

SignSequence compose_signs(const SignSequence& a, const SignSequence& b) {
    if (a.size() != b.size()) throw ShapeError("sign sequences differ in length");
    std::vector<std::int8_t> out(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] != 0 ? a[i] : b[i];
    return SignSequence(std::move(out));
}

bool is_face(const SignSequence& a, const SignSequence& b) {
    return a.size() == b.size() && compose_signs(a, b) == b;
}

}  // namespace relu_morse
