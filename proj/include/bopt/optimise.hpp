#pragma once

#include "bopt/acquisition.hpp"
#include "bopt/types.hpp"

#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <vector>

namespace bopt {

enum class ConstraintKind { Equality, Inequality };

// constant + coefficients . x; the serialisable constraint form.
struct LinearForm {
    Vector coefficients;
    double constant = 0.0;
};

/// Feasible iff fn(x) == 0 (Equality) or fn(x) >= 0 (Inequality).
/// grad is optional; central differences are used when it is empty.
struct ConstraintRecord {
    ConstraintKind kind = ConstraintKind::Inequality;
    std::function<double(const Vector&)> fn;
    std::function<Vector(const Vector&)> grad;
    std::optional<LinearForm> linear;

    [[nodiscard]] Vector gradient(const Vector& x) const;
    [[nodiscard]] double violation(const Vector& x) const;
};

ConstraintRecord linear_constraint(ConstraintKind kind, Vector coefficients, double constant);

using DiscreteMap = std::map<Index, std::vector<double>>;

struct InputSpace {
    Matrix bounds;  // 2 x d
    DiscreteMap discrete;
    std::vector<ConstraintRecord> constraints;

    [[nodiscard]] Index dims() const { return bounds.cols(); }
    [[nodiscard]] Bounds box() const;
    void validate() const;
    // Nearest allowed value per discrete dimension, ties to the smaller one.
    [[nodiscard]] Vector snap(const Vector& x) const;
    // bounds within bound_tol, discrete values exact, constraints within constraint_tol
    [[nodiscard]] bool admits(const Vector& x, double bound_tol = 1e-12, double constraint_tol = 1e-6) const;
};

double snap_to(const std::vector<double>& allowed, double v);

enum class OptimiserMethod { BoundedDeterministic, ConstrainedDeterministic, Stochastic };

struct OptimiserConfig {
    OptimiserMethod method = OptimiserMethod::BoundedDeterministic;
    double lr = 0.1;
    int steps = 100;
    int num_starts = 10;
    int num_samples = 100;
    Index batch_size = 1;
    std::uint64_t seed = 0;
    std::size_t enumeration_cap = 10000;
    int num_designs = 100;  // LHS candidate designs behind the multistart samples

    void validate() const;
};

struct OptimResult {
    Vector x;
    double value = 0.0;
    int iterations = 0;
};

/// Adam ascent with per-step projection onto the box. The update runs in
/// unit-cube coordinates of the box; pinned coordinates never move.
/// Returns the best iterate seen (x0 included).
OptimResult stochastic_maximise(const Objective& f, const Vector& x0, const Bounds& box, double lr, int steps);

struct QuasiNewtonOptions {
    int max_iterations = 200;
    double projected_gradient_tol = 1e-8;
    int memory = 10;
};

/// Projected limited-memory BFGS with an Armijo backtracking search along
/// the projection arc. Accepted values never decrease.
OptimResult bounded_maximise(const Objective& f, const Vector& x0, const Bounds& box,
                             const QuasiNewtonOptions& options = {});

/// Augmented-Lagrangian outer loop around bounded_maximise. Throws
/// InfeasibleStart when the final point violates a constraint by more
/// than 1e-6.
OptimResult constrained_maximise(const Objective& f, const Vector& x0, const Bounds& box,
                                 const std::vector<ConstraintRecord>& constraints);

/// Top num_starts of num_samples maximin-LHS points (discrete dimensions
/// snapped) by descending f; ties keep the lower candidate index.
Matrix multistart_candidates(const std::function<double(const Vector&)>& f, const InputSpace& space, int num_samples,
                             int num_starts, std::uint64_t seed, int num_designs = 100);

// Local search from x0 within a box whose discrete coordinates are pinned.
// run identifies the (combination, start) pair for stream splitting.
using LocalSearch = std::function<OptimResult(const Vector& x0, const Bounds& box, std::size_t run)>;

std::size_t combination_count(const DiscreteMap& discrete);

/// Enumerates every combination of the discrete coordinates; for each one
/// the coordinates of every start are overwritten and the remaining
/// coordinates maximised. Returns the best overall, ties to the earliest
/// (combination, start). Throws CombinatorialExplosion above cap.
OptimResult optimise_mixed(const Bounds& box, const DiscreteMap& discrete, const Matrix& starts,
                           const LocalSearch& local, std::size_t cap = 10000);

struct BatchResult {
    Matrix x;  // q x d
    double value = 0.0;
};

struct SequentialTrace {
    std::vector<Matrix> pending_per_step;  // pending set seen by greedy step i
};

BatchResult single(const std::shared_ptr<const GPModel>& model, const AcquisitionSpec& spec, const InputSpace& space,
                   const OptimiserConfig& config);
BatchResult multi_joint(const std::shared_ptr<const GPModel>& model, const AcquisitionSpec& spec,
                        const InputSpace& space, const OptimiserConfig& config);
BatchResult multi_sequential(const std::shared_ptr<const GPModel>& model, const AcquisitionSpec& spec,
                             const InputSpace& space, const OptimiserConfig& config, SequentialTrace* trace = nullptr);

// Core shared by the strategies: optimise a q-point batch of one acquisition.
BatchResult optimise_batch(const Acquisition& acq, const InputSpace& space, const OptimiserConfig& config, Index q);

}  // namespace bopt
