#include "bopt/optimise.hpp"

#include "bopt/adam.hpp"
#include "bopt/design.hpp"
#include "bopt/error.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <numeric>
#include <sstream>

namespace bopt {

// ---------------------------------------------------------------- space

Vector ConstraintRecord::gradient(const Vector& x) const {
    if (grad) return grad(x);
    if (linear) return linear->coefficients;
    Vector g(x.size());
    Vector xp = x;
    for (Index i = 0; i < x.size(); ++i) {
        const double h = 1e-7 * std::max(1.0, std::abs(x[i]));
        xp[i] = x[i] + h;
        const double fp = fn(xp);
        xp[i] = x[i] - h;
        const double fm = fn(xp);
        xp[i] = x[i];
        g[i] = (fp - fm) / (2.0 * h);
    }
    return g;
}

double ConstraintRecord::violation(const Vector& x) const {
    const double v = fn(x);
    if (!std::isfinite(v)) return std::numeric_limits<double>::infinity();
    return kind == ConstraintKind::Equality ? std::abs(v) : std::max(0.0, -v);
}

ConstraintRecord linear_constraint(ConstraintKind kind, Vector coefficients, double constant) {
    ConstraintRecord rec;
    rec.kind = kind;
    rec.linear = LinearForm{coefficients, constant};
    rec.fn = [coefficients, constant](const Vector& x) { return constant + coefficients.dot(x); };
    rec.grad = [coefficients](const Vector&) { return coefficients; };
    return rec;
}

Bounds InputSpace::box() const { return Bounds{bounds.row(0).transpose(), bounds.row(1).transpose()}; }

void InputSpace::validate() const {
    validate_bounds(bounds);
    for (const auto& [dim, values] : discrete) {
        if (dim < 0 || dim >= dims()) fail(ErrorKind::Parameter, "discrete dimension index out of range");
        if (values.empty()) fail(ErrorKind::Parameter, "discrete dimension has no allowed values");
        if (!std::is_sorted(values.begin(), values.end()))
            fail(ErrorKind::Parameter, "discrete values must be sorted ascending");
        for (double v : values) {
            if (!(v >= bounds(0, dim) && v <= bounds(1, dim)))
                fail(ErrorKind::Parameter, "discrete value lies outside its dimension's bounds");
        }
    }
    for (const auto& c : constraints) {
        if (!c.fn) fail(ErrorKind::Parameter, "constraint without a function");
        if (c.linear && c.linear->coefficients.size() != dims())
            fail(ErrorKind::Parameter, "linear constraint has the wrong dimension");
    }
}

double snap_to(const std::vector<double>& allowed, double v) {
    double best = allowed.front();
    double best_dist = std::abs(v - best);
    for (double a : allowed) {
        const double dist = std::abs(v - a);
        if (dist < best_dist) {
            best = a;
            best_dist = dist;
        }
    }
    return best;
}

Vector InputSpace::snap(const Vector& x) const {
    Vector out = x;
    for (const auto& [dim, values] : discrete) out[dim] = snap_to(values, x[dim]);
    return out;
}

bool InputSpace::admits(const Vector& x, double bound_tol, double constraint_tol) const {
    if (x.size() != dims() || !x.allFinite()) return false;
    if (!box().contains(x, bound_tol)) return false;
    for (const auto& [dim, values] : discrete) {
        if (std::find(values.begin(), values.end(), x[dim]) == values.end()) return false;
    }
    for (const auto& c : constraints) {
        if (c.violation(x) > constraint_tol) return false;
    }
    return true;
}

void OptimiserConfig::validate() const {
    if (num_starts < 1) fail(ErrorKind::Parameter, "optimiser: num_starts must be at least 1");
    if (num_samples < num_starts) fail(ErrorKind::Parameter, "optimiser: num_starts must not exceed num_samples");
    if (batch_size < 1) fail(ErrorKind::Parameter, "optimiser: batch_size must be at least 1");
    if (steps < 0) fail(ErrorKind::Parameter, "optimiser: steps must be non-negative");
    if (!(lr >= 0.0)) fail(ErrorKind::Parameter, "optimiser: lr must be non-negative");
    if (num_designs < 1) fail(ErrorKind::Parameter, "optimiser: num_designs must be at least 1");
}

// ----------------------------------------------------- local optimisers

namespace {

[[noreturn]] void non_finite(const char* where, const Vector& x, const Vector& g) {
    std::ostringstream msg;
    msg.precision(17);
    msg << where << ": non-finite objective or gradient at x = [";
    for (Index i = 0; i < x.size(); ++i) msg << (i ? ", " : "") << x[i];
    msg << "], gradient = [";
    for (Index i = 0; i < g.size(); ++i) msg << (i ? ", " : "") << g[i];
    msg << "]";
    fail(ErrorKind::Optimisation, msg.str());
}

double eval_checked(const Objective& f, const Vector& x, Vector& g, const char* where) {
    g = Vector::Zero(x.size());
    const double v = f(x, &g);
    if (!std::isfinite(v) || !g.allFinite()) non_finite(where, x, g);
    return v;
}

void check_box(const Vector& x0, const Bounds& box) {
    if (x0.size() != box.dims()) fail(ErrorKind::Parameter, "optimiser: start has the wrong dimension");
    for (Index i = 0; i < box.dims(); ++i) {
        if (!(box.lower[i] <= box.upper[i])) fail(ErrorKind::Parameter, "optimiser: invalid box");
    }
}

}  // namespace

OptimResult stochastic_maximise(const Objective& f, const Vector& x0, const Bounds& box, double lr, int steps) {
    check_box(x0, box);
    const Index d = x0.size();
    const Vector width = box.upper - box.lower;
    Vector x = box.clamp(x0);
    Vector u(d);
    for (Index i = 0; i < d; ++i) u[i] = width[i] > 0.0 ? (x[i] - box.lower[i]) / width[i] : 0.0;

    Vector g;
    OptimResult best{x, eval_checked(f, x, g, "stochastic_maximise"), 0};
    Adam adam(d, lr);
    for (int step = 0; step < steps; ++step) {
        Vector gu(d);
        for (Index i = 0; i < d; ++i) gu[i] = width[i] > 0.0 ? g[i] * width[i] : 0.0;
        const Vector delta = adam.step(-gu);
        for (Index i = 0; i < d; ++i) {
            if (delta[i] == 0.0) continue;
            u[i] = std::clamp(u[i] + delta[i], 0.0, 1.0);
            x[i] = width[i] > 0.0 ? box.lower[i] + u[i] * width[i] : box.lower[i];
        }
        x = box.clamp(x);
        const double v = eval_checked(f, x, g, "stochastic_maximise");
        if (v > best.value) best = {x, v, step + 1};
    }
    best.iterations = steps;
    return best;
}

OptimResult bounded_maximise(const Objective& f, const Vector& x0, const Bounds& box,
                             const QuasiNewtonOptions& options) {
    check_box(x0, box);
    const Index d = x0.size();
    Vector x = box.clamp(x0);
    Vector g;
    double fx = eval_checked(f, x, g, "bounded_maximise");
    // minimise phi = -f
    Vector gphi = -g;

    std::deque<Vector> s_hist;
    std::deque<Vector> y_hist;
    int iterations = 0;
    for (; iterations < options.max_iterations; ++iterations) {
        const Vector projected = box.clamp(x - gphi) - x;
        if (projected.lpNorm<Eigen::Infinity>() < options.projected_gradient_tol) break;

        Vector free_mask(d);
        for (Index i = 0; i < d; ++i) {
            const bool pinned = box.lower[i] >= box.upper[i];
            const bool at_lower = x[i] <= box.lower[i] && gphi[i] > 0.0;
            const bool at_upper = x[i] >= box.upper[i] && gphi[i] < 0.0;
            free_mask[i] = (pinned || at_lower || at_upper) ? 0.0 : 1.0;
        }

        // two-loop recursion on the free subspace
        Vector q = gphi.cwiseProduct(free_mask);
        const std::size_t m = s_hist.size();
        std::vector<double> alpha(m);
        std::vector<double> rho(m);
        for (std::size_t k = m; k-- > 0;) {
            const Vector s = s_hist[k].cwiseProduct(free_mask);
            const Vector y = y_hist[k].cwiseProduct(free_mask);
            const double sy = s.dot(y);
            rho[k] = sy > 1e-300 ? 1.0 / sy : 0.0;
            alpha[k] = rho[k] * s.dot(q);
            q -= alpha[k] * y;
        }
        if (m > 0) {
            const Vector s = s_hist.back().cwiseProduct(free_mask);
            const Vector y = y_hist.back().cwiseProduct(free_mask);
            const double yy = y.squaredNorm();
            if (yy > 0.0 && s.dot(y) > 0.0) q *= s.dot(y) / yy;
        }
        for (std::size_t k = 0; k < m; ++k) {
            const Vector s = s_hist[k].cwiseProduct(free_mask);
            const Vector y = y_hist[k].cwiseProduct(free_mask);
            const double beta = rho[k] * y.dot(q);
            q += (alpha[k] - beta) * s;
        }
        Vector dir = -q.cwiseProduct(free_mask);
        if (!(gphi.dot(dir) < 0.0)) {
            s_hist.clear();
            y_hist.clear();
            dir = -gphi.cwiseProduct(free_mask);
        }
        if (!(gphi.dot(dir) < 0.0)) {
            // no descent on the free set; fall back to the projected gradient step
            dir = projected;
        }

        double t = s_hist.empty() ? std::min(1.0, 1.0 / std::max(dir.lpNorm<Eigen::Infinity>(), 1e-300)) : 1.0;
        bool accepted = false;
        Vector xn;
        Vector gn;
        double fn = 0.0;
        for (int k = 0; k < 60; ++k) {
            xn = box.clamp(x + t * dir);
            const Vector step = xn - x;
            if (step.lpNorm<Eigen::Infinity>() == 0.0) break;
            fn = eval_checked(f, xn, gn, "bounded_maximise");
            if (-fn <= -fx + 1e-4 * gphi.dot(step)) {
                accepted = true;
                break;
            }
            t *= 0.5;
        }
        if (!accepted) break;

        const Vector s = xn - x;
        const Vector y = (-gn) - gphi;
        if (s.dot(y) > 1e-12 * s.norm() * y.norm()) {
            s_hist.push_back(s);
            y_hist.push_back(y);
            if (static_cast<int>(s_hist.size()) > options.memory) {
                s_hist.pop_front();
                y_hist.pop_front();
            }
        }
        x = xn;
        fx = fn;
        gphi = -gn;
    }
    return {x, fx, iterations};
}

OptimResult constrained_maximise(const Objective& f, const Vector& x0, const Bounds& box,
                                 const std::vector<ConstraintRecord>& constraints) {
    if (constraints.empty()) return bounded_maximise(f, x0, box);
    check_box(x0, box);
    const std::size_t nc = constraints.size();
    std::vector<double> mult(nc, 0.0);
    double rho = 10.0;
    double prev_violation = std::numeric_limits<double>::infinity();
    Vector x = box.clamp(x0);

    auto violation_at = [&](const Vector& p) {
        double worst = 0.0;
        for (const auto& c : constraints) worst = std::max(worst, c.violation(p));
        return worst;
    };

    for (int outer = 0; outer < 60; ++outer) {
        const auto lagrangian = [&](const Vector& p, Vector* grad) {
            const double fv = f(p, grad);
            double value = fv;
            for (std::size_t k = 0; k < nc; ++k) {
                const auto& c = constraints[k];
                const double cv = c.fn(p);
                double weight = 0.0;
                if (c.kind == ConstraintKind::Equality) {
                    value -= mult[k] * cv + 0.5 * rho * cv * cv;
                    weight = mult[k] + rho * cv;
                } else {
                    const double shifted = std::max(0.0, mult[k] - rho * cv);
                    value -= (shifted * shifted - mult[k] * mult[k]) / (2.0 * rho);
                    weight = -shifted;
                }
                if (grad && weight != 0.0) *grad -= weight * c.gradient(p);
            }
            return value;
        };
        x = bounded_maximise(lagrangian, x, box).x;

        const double viol = violation_at(x);
        double change = 0.0;
        for (std::size_t k = 0; k < nc; ++k) {
            const auto& c = constraints[k];
            const double cv = c.fn(x);
            const double next = c.kind == ConstraintKind::Equality ? mult[k] + rho * cv
                                                                   : std::max(0.0, mult[k] - rho * cv);
            change = std::max(change, std::abs(next - mult[k]));
            mult[k] = next;
        }
        if (viol <= 1e-10 && change <= 1e-7 * (1.0 + rho)) break;
        if (viol > 0.25 * prev_violation) rho = std::min(rho * 10.0, 1e10);
        prev_violation = viol;
    }

    const double viol = violation_at(x);
    if (!(viol <= 1e-6)) {
        std::ostringstream msg;
        msg << "constrained_maximise: no feasible point found from this start (violation " << viol << ")";
        fail(ErrorKind::InfeasibleStart, msg.str());
    }
    Vector g;
    const double v = eval_checked(f, x, g, "constrained_maximise");
    return {x, v, 0};
}

// ------------------------------------------------------------ multistart

namespace {

std::vector<std::size_t> top_indices(const std::vector<double>& values, int count) {
    std::vector<std::size_t> order(values.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        // NaN sorts last
        if (std::isnan(values[a])) return false;
        if (std::isnan(values[b])) return true;
        return values[a] > values[b];
    });
    order.resize(static_cast<std::size_t>(count));
    return order;
}

// num_samples candidate batches of q snapped points, drawn as one maximin
// LHS of num_samples * q points split into consecutive row blocks.
std::vector<Matrix> candidate_batches(const InputSpace& space, int num_samples, Index q, std::uint64_t seed,
                                      int num_designs) {
    DesignConfig dc;
    dc.num_points = static_cast<Index>(num_samples) * q;
    dc.num_dims = space.dims();
    dc.bounds = space.bounds;
    dc.num_designs = num_designs;
    dc.seed = seed;
    const Matrix pts = gen_inputs(dc);
    std::vector<Matrix> out;
    out.reserve(static_cast<std::size_t>(num_samples));
    for (int k = 0; k < num_samples; ++k) {
        Matrix batch = pts.middleRows(static_cast<Index>(k) * q, q);
        for (Index r = 0; r < q; ++r) batch.row(r) = space.snap(batch.row(r).transpose()).transpose();
        out.push_back(std::move(batch));
    }
    return out;
}

}  // namespace

Matrix multistart_candidates(const std::function<double(const Vector&)>& f, const InputSpace& space, int num_samples,
                             int num_starts, std::uint64_t seed, int num_designs) {
    space.validate();
    if (num_starts < 1 || num_starts > num_samples)
        fail(ErrorKind::Parameter, "multistart: need 1 <= num_starts <= num_samples");
    const auto batches = candidate_batches(space, num_samples, 1, seed, num_designs);
    std::vector<double> values(batches.size());
    for (std::size_t k = 0; k < batches.size(); ++k) values[k] = f(batches[k].row(0).transpose());
    const auto order = top_indices(values, num_starts);
    Matrix out(num_starts, space.dims());
    for (int i = 0; i < num_starts; ++i) out.row(i) = batches[order[static_cast<std::size_t>(i)]].row(0);
    return out;
}

// ---------------------------------------------------------------- mixed

std::size_t combination_count(const DiscreteMap& discrete) {
    std::size_t total = 1;
    for (const auto& [dim, values] : discrete) {
        const std::size_t n = values.size();
        if (n != 0 && total > std::numeric_limits<std::size_t>::max() / n) return std::numeric_limits<std::size_t>::max();
        total *= n;
    }
    return total;
}

OptimResult optimise_mixed(const Bounds& box, const DiscreteMap& discrete, const Matrix& starts,
                           const LocalSearch& local, std::size_t cap) {
    const std::size_t combos = combination_count(discrete);
    if (combos > cap) {
        fail(ErrorKind::CombinatorialExplosion, "optimise_mixed: " + std::to_string(combos) +
                                                    " discrete combinations exceed the enumeration cap of " +
                                                    std::to_string(cap));
    }
    if (starts.rows() < 1) fail(ErrorKind::Parameter, "optimise_mixed: no starts");
    std::vector<Index> dims;
    std::vector<const std::vector<double>*> values;
    for (const auto& [dim, vals] : discrete) {
        dims.push_back(dim);
        values.push_back(&vals);
    }

    std::optional<OptimResult> best;
    std::optional<Error> last_infeasible;
    std::vector<std::size_t> digits(dims.size(), 0);
    for (std::size_t combo = 0; combo < combos; ++combo) {
        Bounds pinned = box;
        for (std::size_t k = 0; k < dims.size(); ++k) {
            const double v = (*values[k])[digits[k]];
            pinned.lower[dims[k]] = v;
            pinned.upper[dims[k]] = v;
        }
        // every start collapses to the same point when nothing is continuous
        const bool all_pinned = (pinned.upper - pinned.lower).cwiseAbs().maxCoeff() == 0.0;
        const Index run_starts = all_pinned ? 1 : starts.rows();
        for (Index s = 0; s < run_starts; ++s) {
            Vector x0 = pinned.clamp(starts.row(s).transpose());
            try {
                const std::size_t run = combo * static_cast<std::size_t>(starts.rows()) + static_cast<std::size_t>(s);
                OptimResult r = local(x0, pinned, run);
                r.x = pinned.clamp(r.x);
                if (!best || r.value > best->value) best = std::move(r);
            } catch (const Error& e) {
                if (e.kind() != ErrorKind::InfeasibleStart) throw;
                last_infeasible = e;
            }
        }
        // odometer over the discrete dimensions, last dimension fastest
        for (std::size_t k = dims.size(); k-- > 0;) {
            if (++digits[k] < values[k]->size()) break;
            digits[k] = 0;
        }
    }
    if (!best) {
        fail(ErrorKind::Infeasible, std::string("no start produced a feasible point") +
                                        (last_infeasible ? std::string(": ") + last_infeasible->what() : ""));
    }
    return *best;
}

// ------------------------------------------------------------ strategies

namespace {

Matrix reshape_rows(const Vector& flat, Index q, Index d) {
    Matrix m(q, d);
    for (Index r = 0; r < q; ++r) m.row(r) = flat.segment(r * d, d).transpose();
    return m;
}

Vector flatten_rows(const Matrix& m) {
    Vector flat(m.size());
    for (Index r = 0; r < m.rows(); ++r) flat.segment(r * m.cols(), m.cols()) = m.row(r).transpose();
    return flat;
}

struct FlatProblem {
    Bounds box;
    DiscreteMap discrete;
    std::vector<ConstraintRecord> constraints;
};

// independent streams derived from OptimiserConfig::seed
constexpr std::uint64_t kDesignStream = 101;
constexpr std::uint64_t kCandidateStream = 102;
constexpr std::uint64_t kLocalStream = 103;

FlatProblem flatten_space(const InputSpace& space, Index q) {
    const Index d = space.dims();
    const Bounds base = space.box();
    FlatProblem fp;
    fp.box.lower.resize(q * d);
    fp.box.upper.resize(q * d);
    for (Index r = 0; r < q; ++r) {
        fp.box.lower.segment(r * d, d) = base.lower;
        fp.box.upper.segment(r * d, d) = base.upper;
        for (const auto& [dim, values] : space.discrete) fp.discrete[r * d + dim] = values;
        for (const auto& c : space.constraints) {
            ConstraintRecord rc;
            rc.kind = c.kind;
            rc.fn = [c, r, d](const Vector& flat) { return c.fn(flat.segment(r * d, d)); };
            rc.grad = [c, r, d, q](const Vector& flat) {
                Vector g = Vector::Zero(q * d);
                g.segment(r * d, d) = c.gradient(flat.segment(r * d, d));
                return g;
            };
            fp.constraints.push_back(std::move(rc));
        }
    }
    return fp;
}

}  // namespace

BatchResult optimise_batch(const Acquisition& acq, const InputSpace& space, const OptimiserConfig& config, Index q) {
    space.validate();
    config.validate();
    if (q < 1) fail(ErrorKind::Parameter, "optimise: batch size must be at least 1");
    if (space.dims() != acq.model().dims()) fail(ErrorKind::Parameter, "optimise: space and model dimensions differ");
    if (!acq.spec().is_mc() && q != 1) fail(ErrorKind::Parameter, "optimise: analytic acquisitions select one point");
    const bool constrained = !space.constraints.empty();
    if (constrained && config.method == OptimiserMethod::Stochastic)
        fail(ErrorKind::Parameter, "optimise: constraints require a deterministic method");
    if (config.method != OptimiserMethod::Stochastic && !acq.deterministic())
        fail(ErrorKind::Parameter,
             "optimise: deterministic methods over Monte-Carlo acquisitions require fix_base_samples");

    const Index d = space.dims();
    const FlatProblem fp = flatten_space(space, q);

    // multistart seeds
    Rng candidate_rng = make_rng(config.seed, kCandidateStream);
    const auto batches =
        candidate_batches(space, config.num_samples, q, derive_seed(config.seed, kDesignStream), config.num_designs);
    std::vector<double> values(batches.size());
    for (std::size_t k = 0; k < batches.size(); ++k) values[k] = acq.evaluate(batches[k], nullptr, &candidate_rng);
    const auto order = top_indices(values, config.num_starts);
    Matrix starts(config.num_starts, q * d);
    for (int i = 0; i < config.num_starts; ++i)
        starts.row(i) = flatten_rows(batches[order[static_cast<std::size_t>(i)]]).transpose();

    const LocalSearch local = [&](const Vector& x0, const Bounds& box, std::size_t run) -> OptimResult {
        Rng rng = make_rng(derive_seed(config.seed, kLocalStream), run);
        const Objective objective = [&](const Vector& flat, Vector* grad) {
            Matrix g;
            const double v = acq.evaluate(reshape_rows(flat, q, d), grad ? &g : nullptr, &rng);
            if (grad) *grad = flatten_rows(g);
            return v;
        };
        if (config.method == OptimiserMethod::Stochastic)
            return stochastic_maximise(objective, x0, box, config.lr, config.steps);
        if (constrained) return constrained_maximise(objective, x0, box, fp.constraints);
        return bounded_maximise(objective, x0, box);
    };

    OptimResult best;
    if (fp.discrete.empty() || combination_count(fp.discrete) <= config.enumeration_cap) {
        best = optimise_mixed(fp.box, fp.discrete, starts, local, config.enumeration_cap);
    } else if (combination_count(space.discrete) <= config.enumeration_cap) {
        // joint combinations across the batch exceed the cap: optimise with
        // discrete coordinates relaxed, snap them, then polish the rest
        const auto relaxed = optimise_mixed(fp.box, {}, starts, local, config.enumeration_cap);
        Matrix snapped = reshape_rows(relaxed.x, q, d);
        for (Index r = 0; r < q; ++r) snapped.row(r) = space.snap(snapped.row(r).transpose()).transpose();
        Bounds pinned = fp.box;
        const Vector flat = flatten_rows(snapped);
        for (const auto& [dim, vals] : fp.discrete) {
            pinned.lower[dim] = flat[dim];
            pinned.upper[dim] = flat[dim];
        }
        best = optimise_mixed(pinned, {}, Matrix(flat.transpose()), local, config.enumeration_cap);
    } else {
        fail(ErrorKind::CombinatorialExplosion,
             "optimise: " + std::to_string(combination_count(space.discrete)) +
                 " discrete combinations exceed the enumeration cap of " + std::to_string(config.enumeration_cap));
    }
    return {reshape_rows(fp.box.clamp(best.x), q, d), best.value};
}

BatchResult single(const std::shared_ptr<const GPModel>& model, const AcquisitionSpec& spec, const InputSpace& space,
                   const OptimiserConfig& config) {
    AcquisitionSpec s = spec;
    s.batch_size = 1;
    s.base_samples.reset();
    return optimise_batch(Acquisition(model, s), space, config, 1);
}

BatchResult multi_joint(const std::shared_ptr<const GPModel>& model, const AcquisitionSpec& spec,
                        const InputSpace& space, const OptimiserConfig& config) {
    if (!spec.is_mc()) fail(ErrorKind::Parameter, "multi_joint requires a Monte-Carlo acquisition");
    AcquisitionSpec s = spec;
    s.batch_size = config.batch_size;
    if (s.base_samples && s.base_samples->cols() != s.x_pending.rows() + config.batch_size) s.base_samples.reset();
    return optimise_batch(Acquisition(model, s), space, config, config.batch_size);
}

BatchResult multi_sequential(const std::shared_ptr<const GPModel>& model, const AcquisitionSpec& spec,
                             const InputSpace& space, const OptimiserConfig& config, SequentialTrace* trace) {
    if (!spec.is_mc()) fail(ErrorKind::Parameter, "multi_sequential requires a Monte-Carlo acquisition");
    config.validate();
    const Index q = config.batch_size;
    const Index d = space.dims();
    const Index user_pending = spec.x_pending.rows();
    Matrix chosen(0, d);
    BatchResult out{Matrix(q, d), 0.0};
    for (Index i = 0; i < q; ++i) {
        Matrix pending(user_pending + i, d);
        if (user_pending > 0) pending.topRows(user_pending) = spec.x_pending;
        if (i > 0) pending.bottomRows(i) = chosen;
        AcquisitionSpec step_spec = with_pending(spec, pending);
        step_spec.batch_size = 1;
        if (trace) trace->pending_per_step.push_back(pending);
        OptimiserConfig step_config = config;
        step_config.batch_size = 1;
        if (i > 0) step_config.seed = derive_seed(config.seed, static_cast<std::uint64_t>(i));
        const auto r = optimise_batch(Acquisition(model, step_spec), space, step_config, 1);
        chosen.conservativeResize(i + 1, d);
        chosen.row(i) = r.x.row(0);
        out.value = r.value;
    }
    out.x = chosen;
    return out;
}

}  // namespace bopt
