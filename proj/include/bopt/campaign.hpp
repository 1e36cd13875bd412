#pragma once

#include "bopt/acquisition.hpp"
#include "bopt/optimise.hpp"
#include "bopt/surrogate.hpp"
#include "bopt/testfuncs.hpp"

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace bopt {

enum class Strategy { Single, MultiJoint, MultiSequential };
enum class Source { Init, Bo };

struct GPFitConfig {
    double lr = 0.1;
    int steps = 200;
    int restarts = 1;
};

struct CampaignConfig {
    Index budget = 70;       // N
    Index init_points = 30;  // n0
    AcquisitionSpec acquisition;
    OptimiserConfig optimiser;
    GPFitConfig gp_fit;
    GPConfig model;
    Strategy strategy = Strategy::Single;
    bool warm_start = false;
    int design_candidates = 100;

    void validate() const;
};

struct EvaluationRecord {
    Index eval_index = 0;  // 1-based
    Vector x;
    double y = 0.0;
    Source source = Source::Init;
};

struct CampaignState {
    InputSpace space;
    Dataset data;
    Matrix pending;  // p x d
    std::vector<Source> pending_source;
    CampaignConfig config;
    Index iteration = 0;
    std::uint64_t seed = 0;
    Index asks = 0;
    std::vector<EvaluationRecord> history;
    std::optional<GPHyperparameters> last_hyper;  // kept for warm starts
};

/// Initial maximin-LHS design of n0 points, discrete dimensions snapped and
/// infeasible points moved to the nearest feasible point. The points are
/// left pending until told.
CampaignState initialise(const InputSpace& space, const CampaignConfig& config, std::uint64_t seed);

/// Fits the surrogate, conditions on pending points and returns the next
/// batch (appended to pending). Persists when path is non-null.
Matrix ask(CampaignState& state, const std::filesystem::path* persist = nullptr);

/// Moves told points from pending into the dataset. Each row of x must
/// match a pending row within 1e-9 per coordinate unless force is set.
/// Validation happens before any mutation.
void tell(CampaignState& state, const Matrix& x, const Vector& y, bool force = false,
          const std::filesystem::path* persist = nullptr);

struct Incumbent {
    Vector x;
    double y = 0.0;
    Index index = 0;  // 0-based row in the dataset
};

Incumbent best(const CampaignState& state);

using BatchObjective = std::function<Vector(const Matrix&)>;

/// Closed loop: initialise, evaluate, then ask/evaluate/tell until the
/// budget is used. When the objective throws, the state is persisted (if a
/// path is given) and the exception propagates.
CampaignState run_loop(const InputSpace& space, const CampaignConfig& config, const BatchObjective& objective,
                       std::uint64_t seed, const std::filesystem::path* persist = nullptr);

// Test function as a batch objective; call k draws its noise from stream k.
BatchObjective make_test_objective(const TestFunctionSpec& spec, std::uint64_t seed);

// Configuration of the six-dimensional Hartmann demonstration: noise 0.1,
// 30 initial points, first input discrete in steps of 0.1, ten greedy
// batches of four from MC-UCB (beta 4, 128 samples) under Adam.
struct CaseStudy {
    InputSpace space;
    CampaignConfig config;
    TestFunctionSpec function;
};
CaseStudy case_study();

Vector cumulative_best(const Vector& y);

struct MethodTrace {
    std::string method;  // bo, random, lhs
    std::uint64_t seed = 0;
    Vector observed;
    Vector best_so_far;
};

struct MethodSummary {
    std::string method;
    double median = 0.0;
    double lower_quartile = 0.0;
    double upper_quartile = 0.0;
    std::vector<double> finals;
};

struct BenchmarkResult {
    std::vector<MethodTrace> traces;
    std::vector<MethodSummary> summary;  // bo, random, lhs
    std::vector<CampaignState> bo_runs;
};

using ObjectiveFactory = std::function<BatchObjective(std::uint64_t seed)>;

/// Per seed (base_seed + k): a BO run, N uniform random points and one
/// N-point LHS, all on the same objective.
BenchmarkResult benchmark_compare(const InputSpace& space, const CampaignConfig& config,
                                  const ObjectiveFactory& objective, int n_seeds, std::uint64_t base_seed);

double quantile(std::vector<double> values, double p);

std::string to_string(Strategy s);
std::string to_string(Source s);

}  // namespace bopt
