#pragma once

#include <stdexcept>
#include <string>

namespace lasermot {

// Caller broke a documented precondition (shape mismatch, frame-tag
// mismatch, out-of-order frames). These indicate bugs, not bad data.
class contract_error : public std::logic_error {
public:
    explicit contract_error(const std::string& what) : std::logic_error(what) {}
};

// Input data is syntactically or structurally invalid (bad PGM header,
// malformed CSV row, unparseable JSON). Maps to CLI exit code 2.
class format_error : public std::runtime_error {
public:
    explicit format_error(const std::string& what) : std::runtime_error(what) {}
    format_error(const std::string& what, long line)
        : std::runtime_error(what + " (line " + std::to_string(line) + ")"), line_(line) {}

    long line() const { return line_; }

private:
    long line_ = -1;
};

// A referenced file is missing or unreadable. Maps to CLI exit code 2.
class io_error : public std::runtime_error {
public:
    explicit io_error(const std::string& what) : std::runtime_error(what) {}
};

// Input is syntactically fine but mathematically unusable: too few or
// collinear calibration pairs, angles at or past 90 degrees, a metric
// with zero ground truth. Maps to CLI exit code 3.
class degenerate_error : public std::runtime_error {
public:
    explicit degenerate_error(const std::string& what) : std::runtime_error(what) {}
};

} // namespace lasermot
