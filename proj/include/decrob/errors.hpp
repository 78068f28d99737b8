#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace decrob {

/// Bad argument: dimension mismatch, out-of-range parameter.
class InputError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Malformed text input (alist, config, artifacts). Carries the 1-based line.
class ParseError : public std::runtime_error {
public:
    ParseError(std::size_t line, const std::string& what)
        : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}

    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

/// Operation needs something the decoder does not offer (e.g. input gradients).
class CapabilityError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

/// Request too large to serve (e.g. ML enumeration over 2^k codewords).
class RefusalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class TrainingError : public std::runtime_error {
public:
    TrainingError(std::size_t step, const std::string& what)
        : std::runtime_error("step " + std::to_string(step) + ": " + what), step_(step) {}

    std::size_t step() const noexcept { return step_; }

private:
    std::size_t step_;
};

}  // namespace decrob
