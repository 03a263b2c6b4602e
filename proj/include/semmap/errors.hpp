#pragma once

#include <iostream>
#include <stdexcept>
#include <string>

namespace semmap {

// Malformed or degenerate input: empty corpora, bad files, dimension
// mismatches. CLI maps this to exit code 2.
struct DataError : std::runtime_error {
    explicit DataError(const std::string& msg) : std::runtime_error(msg) {}
};

// An iterative solver failed to converge within its cap. CLI exit code 3.
struct NumericError : std::runtime_error {
    explicit NumericError(const std::string& msg) : std::runtime_error(msg) {}
};

inline void warn(const std::string& msg) {
    std::cerr << "warning: " << msg << "\n";
}

}  // namespace semmap
