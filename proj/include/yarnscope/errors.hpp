#pragma once

#include <stdexcept>
#include <string>

namespace yarnscope {

/// A caller-supplied parameter is outside its contract (even window, tmin > tmax, ...).
class ParameterError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// An input file or stream could not be decoded.
class ParseError : public std::runtime_error {
public:
    enum class Kind { Io, MalformedHeader, UnsupportedMaxval, TruncatedPayload, Malformed };

    ParseError(Kind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}

    Kind kind() const noexcept { return kind_; }

private:
    Kind kind_;
};

/// A pipeline ran on valid input but found nothing measurable ("no yarn found", ...).
class AnalysisError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace yarnscope
