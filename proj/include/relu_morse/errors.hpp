#pragma once

#include <stdexcept>
#include <string>

namespace relu_morse {

/// Base for every domain error raised by the library. `kind()` is the short
/// machine-readable tag written by the CLI into its error JSON.
class Error : public std::runtime_error {
public:
    Error(std::string kind, const std::string& message)
        : std::runtime_error(message), kind_(std::move(kind)) {}

    const std::string& kind() const noexcept { return kind_; }

private:
    std::string kind_;
};

#define RELU_MORSE_ERROR(Name, tag)                                           \
    class Name : public Error {                                               \
    public:                                                                   \
        explicit Name(const std::string& message) : Error(tag, message) {}   \
    }

// Input shape / indexing problems.
RELU_MORSE_ERROR(ShapeError, "shape");
RELU_MORSE_ERROR(IndexError, "index");
RELU_MORSE_ERROR(ArchitectureError, "architecture");
RELU_MORSE_ERROR(DimensionError, "dimension");

// The network violates one of the conditions the theory assumes.
RELU_MORSE_ERROR(GenericityError, "genericity");
RELU_MORSE_ERROR(InjectivityError, "injectivity");
RELU_MORSE_ERROR(FlatCellError, "flat_cell");
RELU_MORSE_ERROR(SingularSystemError, "singular_system");

RELU_MORSE_ERROR(NumericalInstability, "numerical_instability");
RELU_MORSE_ERROR(UnboundedCellError, "unbounded_cell");

// Internal consistency failures; these indicate a bug rather than bad input.
RELU_MORSE_ERROR(MissingEdgeError, "missing_edge");
RELU_MORSE_ERROR(IncompletePairingError, "incomplete_pairing");
RELU_MORSE_ERROR(CyclicMatchingError, "cyclic_matching");

#undef RELU_MORSE_ERROR

}  // namespace relu_morse
