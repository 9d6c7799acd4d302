#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace metriscope {

/// Base class for all domain errors raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Syntax error in a tree query, with the byte offset of the offending token.
class QuerySyntaxError : public Error {
public:
    QuerySyntaxError(const std::string& message, std::size_t offset)
        : Error(message + " (at offset " + std::to_string(offset) + ")"), offset_(offset) {}

    std::size_t offset() const { return offset_; }

private:
    std::size_t offset_;
};

} // namespace metriscope
