#pragma once

#include <stdexcept>
#include <string>

namespace raceplan {

// Malformed input file (CSV/JSON); message carries the line number where known.
class ParseError : public std::runtime_error {
public:
    explicit ParseError(const std::string& msg) : std::runtime_error(msg) {}
};

// Structurally valid input that violates a documented invariant.
class InvariantError : public std::runtime_error {
public:
    explicit InvariantError(const std::string& msg) : std::runtime_error(msg) {}
};

// Velocity profile degenerates to zero speed over an interval.
class ProfileStallError : public std::runtime_error {
public:
    explicit ProfileStallError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace raceplan
