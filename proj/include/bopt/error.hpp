#pragma once

#include <stdexcept>
#include <string>

namespace bopt {

enum class ErrorKind {
    Domain,
    InvalidHyperparameter,
    IllConditioned,
    Initialisation,
    Parameter,
    BaseSamples,
    Optimisation,
    InfeasibleStart,
    Infeasible,
    CombinatorialExplosion,
    ZeroVariance,
    Budget,
    Ordering,
    UnmatchedCandidate,
    Schema,
    Io,
    Lock,
};

const char* to_string(ErrorKind kind);

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what)
        : std::runtime_error(what), kind_(kind) {}

    [[nodiscard]] ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) { throw Error(kind, what); }

}  // namespace bopt
