#include "bopt/campaign.hpp"

#include "bopt/design.hpp"
#include "bopt/error.hpp"
#include "bopt/persistence.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

namespace bopt {

namespace {

// stream ids derived from the campaign seed
constexpr std::uint64_t kInitDesignStream = 1;
constexpr std::uint64_t kAskStream = 1000;
constexpr std::uint64_t kBaseSampleStream = 2000;

constexpr double kTellTolerance = 1e-9;

bool rows_match(const Matrix& a, Index i, const Matrix& b, Index j) {
    for (Index k = 0; k < a.cols(); ++k) {
        if (!(std::abs(a(i, k) - b(j, k)) <= kTellTolerance)) return false;
    }
    return true;
}

Matrix remove_rows(const Matrix& m, const std::vector<bool>& drop) {
    Index keep = 0;
    for (bool d : drop) keep += d ? 0 : 1;
    Matrix out(keep, m.cols());
    Index r = 0;
    for (Index i = 0; i < m.rows(); ++i) {
        if (!drop[static_cast<std::size_t>(i)]) out.row(r++) = m.row(i);
    }
    return out;
}

Vector nearest_feasible(const InputSpace& space, const Vector& x) {
    const Objective closeness = [&](const Vector& p, Vector* grad) {
        const Vector diff = p - x;
        if (grad) *grad = -2.0 * diff;
        return -diff.squaredNorm();
    };
    Bounds box = space.box();
    for (const auto& [dim, values] : space.discrete) {
        box.lower[dim] = x[dim];
        box.upper[dim] = x[dim];
    }
    return box.clamp(constrained_maximise(closeness, x, box, space.constraints).x);
}

}  // namespace

std::string to_string(Strategy s) {
    switch (s) {
    case Strategy::Single: return "single";
    case Strategy::MultiJoint: return "joint";
    case Strategy::MultiSequential: return "sequential";
    }
    return "single";
}

std::string to_string(Source s) { return s == Source::Init ? "init" : "bo"; }

void CampaignConfig::validate() const {
    if (init_points < 1) fail(ErrorKind::Parameter, "campaign: init_points must be at least 1");
    if (budget < init_points) fail(ErrorKind::Parameter, "campaign: budget must be at least init_points");
    if (design_candidates < 1) fail(ErrorKind::Parameter, "campaign: design_candidates must be at least 1");
    if (!(gp_fit.lr > 0.0) || gp_fit.steps < 1) fail(ErrorKind::Parameter, "campaign: invalid GP fit settings");
    optimiser.validate();
    if (strategy != Strategy::Single && !acquisition.is_mc())
        fail(ErrorKind::Parameter, "campaign: multi-point strategies need a Monte-Carlo acquisition");
    if (acquisition.samples < 1) fail(ErrorKind::Parameter, "campaign: samples must be at least 1");
    if (!(acquisition.beta >= 0.0)) fail(ErrorKind::Parameter, "campaign: beta must be non-negative");
}

CampaignState initialise(const InputSpace& space, const CampaignConfig& config, std::uint64_t seed) {
    space.validate();
    config.validate();
    CampaignState state;
    state.space = space;
    state.config = config;
    state.seed = seed;
    const Index d = space.dims();

    DesignConfig dc;
    dc.num_points = config.init_points;
    dc.num_dims = d;
    dc.bounds = space.bounds;
    dc.num_designs = config.design_candidates;
    dc.seed = derive_seed(seed, kInitDesignStream);
    Matrix design = gen_inputs(dc);
    for (Index i = 0; i < design.rows(); ++i) {
        Vector x = space.snap(design.row(i).transpose());
        if (!space.constraints.empty() && !space.admits(x)) x = nearest_feasible(space, x);
        design.row(i) = x.transpose();
    }
    state.pending = design;
    state.pending_source.assign(static_cast<std::size_t>(design.rows()), Source::Init);
    state.data.inputs.resize(0, d);
    state.data.outputs.resize(0);
    return state;
}

Matrix ask(CampaignState& state, const std::filesystem::path* persist) {
    const auto& cfg = state.config;
    if (state.data.size() == 0) fail(ErrorKind::Ordering, "ask: no observations yet; tell the initial design first");
    if (std::find(state.pending_source.begin(), state.pending_source.end(), Source::Init) != state.pending_source.end())
        fail(ErrorKind::Ordering, "ask: initial design points are still pending");
    const Index remaining = cfg.budget - state.data.size() - state.pending.rows();
    if (remaining <= 0) fail(ErrorKind::Budget, "ask: evaluation budget exhausted");
    const Index q = cfg.strategy == Strategy::Single ? 1 : std::min<Index>(cfg.optimiser.batch_size, remaining);

    // surrogate
    const Matrix& b = state.space.bounds;
    FitOptions fit_options;
    fit_options.lr = cfg.gp_fit.lr;
    fit_options.steps = cfg.gp_fit.steps;
    fit_options.restarts = cfg.gp_fit.restarts;
    fit_options.initial_lengthscales = Vector((b.row(1) - b.row(0)).transpose());
    GPHyperparameters start = default_hyperparameters(cfg.model, state.data, fit_options.initial_lengthscales);
    if (cfg.warm_start && state.last_hyper) {
        start = *state.last_hyper;
        fit_options.initialise = false;
    }
    const GPModel prior(cfg.model, start, state.data);
    auto model = std::make_shared<const GPModel>(fit(prior, fit_options));

    // acquisition
    AcquisitionSpec spec = cfg.acquisition;
    spec.y_best = state.data.outputs.maxCoeff();
    spec.seed = derive_seed(state.seed, kBaseSampleStream + static_cast<std::uint64_t>(state.asks));
    spec.base_samples.reset();
    spec.batch_size = q;
    spec.x_pending = spec.is_mc() ? state.pending : Matrix(0, state.space.dims());

    OptimiserConfig opt = cfg.optimiser;
    opt.seed = derive_seed(state.seed, kAskStream + static_cast<std::uint64_t>(state.asks));
    opt.batch_size = q;

    BatchResult result;
    switch (cfg.strategy) {
    case Strategy::Single: result = single(model, spec, state.space, opt); break;
    case Strategy::MultiJoint: result = multi_joint(model, spec, state.space, opt); break;
    case Strategy::MultiSequential: result = multi_sequential(model, spec, state.space, opt); break;
    }

    const Index p = state.pending.rows();
    state.pending.conservativeResize(p + result.x.rows(), Eigen::NoChange);
    state.pending.bottomRows(result.x.rows()) = result.x;
    state.pending_source.insert(state.pending_source.end(), static_cast<std::size_t>(result.x.rows()), Source::Bo);
    state.last_hyper = model->hyper();
    ++state.asks;
    if (persist) save_state(state, *persist);
    return result.x;
}

void tell(CampaignState& state, const Matrix& x, const Vector& y, bool force, const std::filesystem::path* persist) {
    const Index d = state.space.dims();
    if (x.cols() != d) fail(ErrorKind::Parameter, "tell: inputs have the wrong number of columns");
    if (x.rows() != y.size()) fail(ErrorKind::Parameter, "tell: input rows and outputs differ in length");
    if (!x.allFinite()) fail(ErrorKind::Domain, "tell: non-finite input");
    if (!y.allFinite()) fail(ErrorKind::Domain, "tell: non-finite output");
    if (state.data.size() + x.rows() > state.config.budget) fail(ErrorKind::Budget, "tell: budget would be exceeded");

    std::vector<bool> used(static_cast<std::size_t>(state.pending.rows()), false);
    std::vector<Source> sources(static_cast<std::size_t>(x.rows()), Source::Bo);
    for (Index i = 0; i < x.rows(); ++i) {
        bool matched = false;
        for (Index j = 0; j < state.pending.rows(); ++j) {
            if (!used[static_cast<std::size_t>(j)] && rows_match(x, i, state.pending, j)) {
                used[static_cast<std::size_t>(j)] = true;
                sources[static_cast<std::size_t>(i)] = state.pending_source[static_cast<std::size_t>(j)];
                matched = true;
                break;
            }
        }
        if (!matched && !force) fail(ErrorKind::UnmatchedCandidate, "tell: row " + std::to_string(i) + " matches no pending candidate");
    }

    const Index n = state.data.size();
    state.data.inputs.conservativeResize(n + x.rows(), d);
    state.data.inputs.bottomRows(x.rows()) = x;
    state.data.outputs.conservativeResize(n + x.rows());
    state.data.outputs.tail(x.rows()) = y;
    for (Index i = 0; i < x.rows(); ++i) {
        state.history.push_back({static_cast<Index>(state.history.size()) + 1, x.row(i).transpose(), y[i],
                                 sources[static_cast<std::size_t>(i)]});
    }
    state.pending = remove_rows(state.pending, used);
    std::vector<Source> kept;
    for (std::size_t j = 0; j < used.size(); ++j) {
        if (!used[j]) kept.push_back(state.pending_source[j]);
    }
    state.pending_source = std::move(kept);
    ++state.iteration;
    if (persist) save_state(state, *persist);
}

Incumbent best(const CampaignState& state) {
    if (state.data.size() == 0) fail(ErrorKind::Ordering, "best: no observations yet");
    Index idx = 0;
    for (Index i = 1; i < state.data.size(); ++i) {
        if (state.data.outputs[i] > state.data.outputs[idx]) idx = i;
    }
    return {state.data.inputs.row(idx).transpose(), state.data.outputs[idx], idx};
}

CampaignState run_loop(const InputSpace& space, const CampaignConfig& config, const BatchObjective& objective,
                       std::uint64_t seed, const std::filesystem::path* persist) {
    CampaignState state = initialise(space, config, seed);
    if (persist) save_state(state, *persist);
    const auto evaluate = [&](const Matrix& x) {
        try {
            return objective(x);
        } catch (...) {
            if (persist) save_state(state, *persist);
            throw;
        }
    };
    const Matrix init = state.pending;
    tell(state, init, evaluate(init), false, persist);
    while (state.data.size() < config.budget) {
        const Matrix x = ask(state, persist);
        tell(state, x, evaluate(x), false, persist);
    }
    return state;
}

BatchObjective make_test_objective(const TestFunctionSpec& spec, std::uint64_t seed) {
    auto calls = std::make_shared<std::uint64_t>(0);
    return [spec, seed, calls](const Matrix& x) { return evaluate(spec, x, derive_seed(seed, (*calls)++)); };
}

CaseStudy case_study() {
    CaseStudy cs;
    cs.function = make_test_function(TestFunction::Hartmann6D, 6, 0.1, false);
    cs.space.bounds = cs.function.bounds;
    cs.space.discrete[0] = {0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0};
    auto& c = cs.config;
    c.budget = 70;
    c.init_points = 30;
    c.strategy = Strategy::MultiSequential;
    c.acquisition.variant = AcquisitionVariant::MCUCB;
    c.acquisition.beta = 4.0;
    c.acquisition.samples = 128;
    c.acquisition.fix_base_samples = false;
    c.optimiser.method = OptimiserMethod::Stochastic;
    c.optimiser.lr = 0.1;
    c.optimiser.steps = 200;
    c.optimiser.num_starts = 2;
    c.optimiser.num_samples = 100;
    c.optimiser.batch_size = 4;
    c.gp_fit.lr = 0.1;
    c.gp_fit.steps = 200;
    return cs;
}

Vector cumulative_best(const Vector& y) {
    Vector out(y.size());
    double running = -std::numeric_limits<double>::infinity();
    for (Index i = 0; i < y.size(); ++i) {
        running = std::max(running, y[i]);
        out[i] = running;
    }
    return out;
}

double quantile(std::vector<double> values, double p) {
    if (values.empty()) fail(ErrorKind::Parameter, "quantile of an empty sample");
    std::sort(values.begin(), values.end());
    const double pos = p * static_cast<double>(values.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = std::min(lo + 1, values.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    return values[lo] + frac * (values[hi] - values[lo]);
}

BenchmarkResult benchmark_compare(const InputSpace& space, const CampaignConfig& config,
                                  const ObjectiveFactory& objective, int n_seeds, std::uint64_t base_seed) {
    if (n_seeds < 1) fail(ErrorKind::Parameter, "benchmark: n_seeds must be at least 1");
    space.validate();
    const Index n = config.budget;
    const Index d = space.dims();
    BenchmarkResult result;
    std::vector<std::vector<double>> finals(3);
    const std::vector<std::string> names{"bo", "random", "lhs"};
    for (int k = 0; k < n_seeds; ++k) {
        const std::uint64_t seed = base_seed + static_cast<std::uint64_t>(k);

        CampaignState run = run_loop(space, config, objective(derive_seed(seed, 11)), seed);
        Vector bo_y = run.data.outputs;

        Rng rng = make_rng(seed, 12);
        std::uniform_real_distribution<double> unif(0.0, 1.0);
        Matrix random_x(n, d);
        for (Index i = 0; i < n; ++i) {
            for (Index j = 0; j < d; ++j) random_x(i, j) = unif(rng);
        }
        random_x = unnormalise(random_x, space.bounds);
        for (Index i = 0; i < n; ++i) random_x.row(i) = space.snap(random_x.row(i).transpose()).transpose();
        const Vector random_y = objective(derive_seed(seed, 13))(random_x);

        DesignConfig dc;
        dc.num_points = n;
        dc.num_dims = d;
        dc.bounds = space.bounds;
        dc.num_designs = config.design_candidates;
        dc.seed = derive_seed(seed, 14);
        Matrix lhs_x = gen_inputs(dc);
        for (Index i = 0; i < n; ++i) lhs_x.row(i) = space.snap(lhs_x.row(i).transpose()).transpose();
        const Vector lhs_y = objective(derive_seed(seed, 15))(lhs_x);

        const std::vector<Vector> ys{bo_y, random_y, lhs_y};
        for (std::size_t m = 0; m < 3; ++m) {
            MethodTrace t{names[m], seed, ys[m], cumulative_best(ys[m])};
            finals[m].push_back(t.best_so_far[t.best_so_far.size() - 1]);
            result.traces.push_back(std::move(t));
        }
        result.bo_runs.push_back(std::move(run));
    }
    for (std::size_t m = 0; m < 3; ++m) {
        result.summary.push_back(
            {names[m], quantile(finals[m], 0.5), quantile(finals[m], 0.25), quantile(finals[m], 0.75), finals[m]});
    }
    return result;
}

}  // namespace bopt
