#pragma once

#include <stdexcept>
#include <string>

namespace clicklab {

// Bad configuration or malformed input file. The CLI maps this to exit code 2.
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// A precondition of an analysis or simulation routine does not hold for the
// given data (empty stream, mismatched durations, rate outside the valid
// range, ...). The CLI maps this to exit code 3.
class AnalysisError : public std::runtime_error {
public:
    explicit AnalysisError(const std::string& what) : std::runtime_error(what) {}
};

}
