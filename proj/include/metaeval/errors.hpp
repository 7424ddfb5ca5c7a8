#pragma once

#include <stdexcept>
#include <string>

namespace metaeval {

// Bad input: malformed bytes, violated file-format contracts, or operation
// preconditions (index out of range, mismatched lengths, invalid flags).
// The CLI maps these to exit code 2.
class input_error : public std::runtime_error {
public:
    explicit input_error(const std::string& msg) : std::runtime_error(msg) {}
};

// Input that does not conform to a file format (CSV/JSON score tables).
class parse_error : public input_error {
public:
    explicit parse_error(const std::string& msg) : input_error(msg) {}
};

// The input was valid but the requested statistic has no defined value on
// it: empty pair selections, every bootstrap draw degenerate, and so on.
// The CLI maps these to exit code 3.
class degenerate_error : public std::runtime_error {
public:
    explicit degenerate_error(const std::string& msg) : std::runtime_error(msg) {}
};

// A rank correlation whose tie-corrected denominator vanishes (a fully tied
// vector). Kept distinct from invalid input so resampling loops can drop and
// count these outcomes instead of aborting.
class undefined_correlation : public degenerate_error {
public:
    explicit undefined_correlation(const std::string& msg) : degenerate_error(msg) {}
};

}  // namespace metaeval
