#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace sturmdisc {

// Base of everything the library throws on purpose.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Bad user input: malformed expressions, out-of-range parameters.
class ValidationError : public Error {
public:
    using Error::Error;
};

class ParseError : public ValidationError {
public:
    ParseError(std::size_t offset, std::string message, std::vector<std::string> expected = {})
        : ValidationError(format(offset, message, expected)),
          offset_(offset), detail_(std::move(message)), expected_(std::move(expected)) {}

    std::size_t offset() const { return offset_; }
    const std::string& detail() const { return detail_; }
    const std::vector<std::string>& expected() const { return expected_; }

private:
    static std::string format(std::size_t offset, const std::string& message,
                              const std::vector<std::string>& expected) {
        std::string s = "parse error at offset " + std::to_string(offset) + ": " + message;
        if (!expected.empty()) {
            s += " (expected ";
            for (std::size_t i = 0; i < expected.size(); ++i) {
                if (i) s += ", ";
                s += expected[i];
            }
            s += ")";
        }
        return s;
    }

    std::size_t offset_;
    std::string detail_;
    std::vector<std::string> expected_;
};

// Numerical failure: integrator, root refinement, contour counting.
class ComputationError : public Error {
public:
    using Error::Error;
};

class IntegrationError : public ComputationError {
public:
    IntegrationError(const std::string& message, double worst_error)
        : ComputationError(message + " (worst scaled local error " + std::to_string(worst_error) + ")"),
          worst_error_(worst_error) {}
    double worst_error() const { return worst_error_; }

private:
    double worst_error_;
};

} // namespace sturmdisc
