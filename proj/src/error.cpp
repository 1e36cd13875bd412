#include "bopt/error.hpp"

namespace bopt {

const char* to_string(ErrorKind kind) {
    switch (kind) {
    case ErrorKind::Domain: return "domain";
    case ErrorKind::InvalidHyperparameter: return "invalid-hyperparameter";
    case ErrorKind::IllConditioned: return "ill-conditioned";
    case ErrorKind::Initialisation: return "initialisation";
    case ErrorKind::Parameter: return "parameter";
    case ErrorKind::BaseSamples: return "base-samples";
    case ErrorKind::Optimisation: return "optimisation";
    case ErrorKind::InfeasibleStart: return "infeasible-start";
    case ErrorKind::Infeasible: return "infeasible";
    case ErrorKind::CombinatorialExplosion: return "combinatorial-explosion";
    case ErrorKind::ZeroVariance: return "zero-variance";
    case ErrorKind::Budget: return "budget";
    case ErrorKind::Ordering: return "ordering";
    case ErrorKind::UnmatchedCandidate: return "unmatched-candidate";
    case ErrorKind::Schema: return "schema";
    case ErrorKind::Io: return "io";
    case ErrorKind::Lock: return "lock";
    }
    return "unknown";
}

}  // namespace bopt
