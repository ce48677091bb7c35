#pragma once

#include <stdexcept>
#include <string>

namespace benchlab {

// Base class for everything this library throws on purpose.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// -- template / spec resolution ------------------------------------------

class UnboundPlaceholderError : public Error {
public:
    UnboundPlaceholderError(const std::string& name, const std::string& where)
        : Error("unbound placeholder {" + name + "} in " + where), placeholder(name) {}
    std::string placeholder;
};

class ConflictingBindingError : public Error {
public:
    explicit ConflictingBindingError(const std::string& name)
        : Error("placeholder {" + name + "} is bound by both a variant and a parameter"),
          placeholder(name) {}
    std::string placeholder;
};

class MalformedTemplateError : public Error {
public:
    explicit MalformedTemplateError(const std::string& msg) : Error(msg) {}
};

// -- process execution -----------------------------------------------------

class SpawnFailureError : public Error {
public:
    SpawnFailureError(const std::string& program, const std::string& reason)
        : Error("cannot run '" + program + "': " + reason) {}
};

class TimeoutError : public Error {
public:
    TimeoutError(const std::string& program, double limit_s)
        : Error("'" + program + "' killed after exceeding " + std::to_string(limit_s) +
                " s timeout") {}
};

class NonZeroExitError : public Error {
public:
    NonZeroExitError(const std::string& program, int status, const std::string& tail)
        : Error("'" + program + "' exited with status " + std::to_string(status)),
          exit_status(status), output_tail(tail) {}
    int exit_status;
    std::string output_tail;
};

// -- statistics -------------------------------------------------------------

class EmptySeriesError : public Error {
public:
    EmptySeriesError() : Error("cannot summarize an empty series") {}
};

class DegenerateSummaryError : public Error {
public:
    DegenerateSummaryError() : Error("cannot compare summaries with a zero central value") {}
};

class NonPositiveRatioError : public Error {
public:
    NonPositiveRatioError() : Error("geometric mean requires strictly positive ratios") {}
};

class SeriesTooShortError : public Error {
public:
    explicit SeriesTooShortError(std::size_t n)
        : Error("outlier detection needs at least 4 samples, got " + std::to_string(n)) {}
};

// -- journal ----------------------------------------------------------------

class DanglingRefError : public Error {
public:
    explicit DanglingRefError(const std::string& ref)
        : Error("reference '" + ref + "' does not resolve to a known entry or session") {}
};

class UnknownExplanationError : public Error {
public:
    explicit UnknownExplanationError(std::int64_t id)
        : Error("no explanation entry with id " + std::to_string(id)) {}
};

// -- sweep / calibration ------------------------------------------------------

class CalibrationFailedError : public Error {
public:
    explicit CalibrationFailedError(const std::string& msg) : Error(msg) {}
};

// -- persistence --------------------------------------------------------------

class MissingFileError : public Error {
public:
    explicit MissingFileError(const std::string& path) : Error("no such file: " + path) {}
};

class StoreLockedError : public Error {
public:
    explicit StoreLockedError(const std::string& path)
        : Error("project is locked by another writer (" + path + ")") {}
};

class LoadError : public Error {
public:
    explicit LoadError(const std::string& msg) : Error(msg) {}
};

// -- report -------------------------------------------------------------------

class MissingResultsError : public Error {
public:
    explicit MissingResultsError(const std::string& what)
        : Error("no stored results for " + what) {}
};

}  // namespace benchlab
