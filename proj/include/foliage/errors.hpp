#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace foliage {

/// Base class for every error this library raises on purpose.
struct Error : std::runtime_error {
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// --- expression evaluation ---
struct DivisionByZero : Error {
    explicit DivisionByZero(const std::string& w = "division by zero") : Error(w) {}
};
struct DomainError : Error {
    explicit DomainError(const std::string& w) : Error(w) {}
};
struct UnboundCoordinate : Error {
    explicit UnboundCoordinate(const std::string& w) : Error(w) {}
};
struct ParseError : Error {
    explicit ParseError(const std::string& w) : Error(w) {}
};

// --- maps and pseudogroups ---
struct EmptyDomain : Error {
    explicit EmptyDomain(const std::string& w = "composition has empty domain") : Error(w) {}
};
struct ChartMismatch : Error {
    explicit ChartMismatch(const std::string& w) : Error(w) {}
};
struct InvalidGenerator : Error {
    explicit InvalidGenerator(const std::string& w) : Error(w) {}
};
struct ParameterOutOfRange : Error {
    explicit ParameterOutOfRange(const std::string& w) : Error(w) {}
};
struct FrontierOverflow : Error {
    explicit FrontierOverflow(const std::string& w = "search frontier exceeded cap") : Error(w) {}
};

// --- operators ---
struct ZeroCovector : Error {
    explicit ZeroCovector(const std::string& w = "covector must be nonzero") : Error(w) {}
};
struct SingularJacobian : Error {
    explicit SingularJacobian(const std::string& w = "Jacobian is singular") : Error(w) {}
};

// --- averaging pipeline ---
struct UnknownClosure : Error {
    explicit UnknownClosure(const std::string& w = "closure class is Unknown; refusing to average") : Error(w) {}
};
struct OutOfReach : Error {
    explicit OutOfReach(const std::string& w) : Error(w) {}
};

/// Gluing failed: some probe points are not covered by any cover word.
/// Carries the offending points (flattened coordinates) for reporting.
struct CoverageGap : Error {
    std::vector<std::vector<double>> uncovered;
    explicit CoverageGap(const std::string& w, std::vector<std::vector<double>> pts = {})
        : Error(w), uncovered(std::move(pts)) {}
};

/// A verification command found residuals above tolerance (CLI exit code 1).
struct CheckFailed : Error {
    explicit CheckFailed(const std::string& w) : Error(w) {}
};

}  // namespace foliage
