#pragma once

#include <stdexcept>
#include <string>

namespace hyperconv {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct DimensionMismatch : Error {
    using Error::Error;
};

struct IndexOutOfRange : Error {
    using Error::Error;
};

struct ZeroDegree : Error {
    using Error::Error;
};

struct EmptyHypergraph : Error {
    using Error::Error;
};

struct EmptySegment : Error {
    using Error::Error;
};

struct NonScalarLoss : Error {
    using Error::Error;
};

struct ParseError : Error {
    long line;
    ParseError(const std::string& msg, long line_no)
        : Error(msg + " (line " + std::to_string(line_no) + ")"), line(line_no) {}
};

struct SplitInfeasible : Error {
    using Error::Error;
};

struct ConfigError : Error {
    using Error::Error;
};

struct NumericalDivergence : Error {
    using Error::Error;
};

struct AllTrialsDiverged : Error {
    using Error::Error;
};

}  // namespace hyperconv
