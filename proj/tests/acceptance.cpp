// Acceptance suite: one PASS/FAIL line per criterion, non-zero exit on any failure.

#include "bopt/acquisition.hpp"
#include "bopt/campaign.hpp"
#include "bopt/design.hpp"
#include "bopt/error.hpp"
#include "bopt/optimise.hpp"
#include "bopt/persistence.hpp"
#include "bopt/testfuncs.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <unistd.h>
#include <vector>

using namespace bopt;

namespace {

namespace fs = std::filesystem;

struct Outcome {
    bool pass = true;
    std::string detail;
};

// Collects sub-check failures; the first few are kept for the report.
class Checks {
public:
    void expect(bool ok, const std::string& what) {
        ++total_;
        if (ok) return;
        ++failed_;
        if (failed_ <= 3) notes_ += (notes_.empty() ? "" : "; ") + what;
    }
    [[nodiscard]] Outcome outcome(const std::string& summary) const {
        if (failed_ == 0) return {true, summary + " (" + std::to_string(total_) + " checks)"};
        return {false, std::to_string(failed_) + "/" + std::to_string(total_) + " checks failed: " + notes_};
    }

private:
    int total_ = 0;
    int failed_ = 0;
    std::string notes_;
};

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0) {
    char buf[256];
    std::snprintf(buf, sizeof(buf), f, a, b, c);
    return buf;
}

Matrix uniform(Rng& rng, Index rows, Index cols, double lo = 0.0, double hi = 1.0) {
    std::uniform_real_distribution<double> u(lo, hi);
    Matrix m(rows, cols);
    for (Index i = 0; i < rows; ++i) {
        for (Index j = 0; j < cols; ++j) m(i, j) = u(rng);
    }
    return m;
}

Vector response(const Matrix& x) {
    Vector y(x.rows());
    for (Index i = 0; i < x.rows(); ++i) {
        double s = 0.0;
        for (Index j = 0; j < x.cols(); ++j) s += std::sin(3.0 * x(i, j) + static_cast<double>(j)) * (1.0 + 0.3 * j);
        y[i] = s;
    }
    return y;
}

Dataset dataset(const Matrix& x, const Vector& y) {
    Dataset d;
    d.inputs = x;
    d.outputs = y;
    return d;
}

InputSpace unit_space(Index d) {
    InputSpace s;
    s.bounds = Matrix(2, d);
    s.bounds.row(0).setZero();
    s.bounds.row(1).setOnes();
    return s;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// ------------------------------------------------------------ case study

// Both AC1 and AC2 read the same ten-seed comparison.
const BenchmarkResult& case_study_benchmark() {
    static const BenchmarkResult result = [] {
        const CaseStudy cs = case_study();
        const TestFunctionSpec fn = cs.function;
        return benchmark_compare(
            cs.space, cs.config, [fn](std::uint64_t seed) { return make_test_objective(fn, seed); }, 10, 0);
    }();
    return result;
}

Outcome ac1_case_study() {
    const auto t0 = std::chrono::steady_clock::now();
    const auto& bench = case_study_benchmark();
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const auto& bo = bench.summary.at(0);
    int reached = 0;
    for (double f : bo.finals) reached += f >= 2.9 ? 1 : 0;
    bool records = true;
    for (const auto& run : bench.bo_runs) records = records && run.history.size() == 70;
    std::string finals;
    for (double f : bo.finals) finals += (finals.empty() ? "" : " ") + fmt("%.3f", f);
    const bool pass = bo.median >= 3.0 && reached >= 7 && records;
    return {pass, fmt("median best %.4f (>= 3.0), ", bo.median) + std::to_string(reached) +
                      "/10 runs >= 2.9, 70 records each: " + (records ? "yes" : "no") + fmt(", %.0f s; finals [", seconds) +
                      finals + "]"};
}

Outcome ac2_baselines() {
    const auto& s = case_study_benchmark().summary;
    const double bo = s.at(0).median;
    const double random = s.at(1).median;
    const double lhs = s.at(2).median;
    bool budget = true;
    for (const auto& t : case_study_benchmark().traces) budget = budget && t.observed.size() == 70;
    return {bo > random && bo > lhs && budget,
            fmt("median final best: bo %.4f, random %.4f, lhs %.4f", bo, random, lhs) +
                (budget ? ", all at 70 evaluations" : ", budget mismatch")};
}

// ------------------------------------------------------------ surrogate

Outcome ac3_surrogate() {
    Checks c;
    Rng rng(2024);
    std::uniform_int_distribution<int> dims(1, 4);
    std::uniform_int_distribution<int> points(3, 20);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    double worst_interp = 0.0;
    double worst_grad = 0.0;
    for (int trial = 0; trial < 20; ++trial) {
        const Index d = dims(rng);
        const Index n = points(rng);
        GPConfig cfg;
        cfg.kernel = trial % 2 ? KernelKind::RBF : KernelKind::Matern52;
        cfg.mean = trial % 3 ? MeanKind::Constant : MeanKind::Zero;
        const Matrix x = uniform(rng, n, d);
        Vector y = response(x);

        // noise-free interpolation
        GPHyperparameters h;
        h.mean_constant = 0.3 * u(rng);
        h.signal_variance = 0.5 + u(rng);
        h.lengthscales = Vector(d);
        for (Index j = 0; j < d; ++j) h.lengthscales[j] = 0.15 + 0.25 * u(rng);
        h.noise_variance = 0.0;
        const GPModel exact(cfg, h, dataset(x, y));
        const auto at_train = posterior(exact, x);
        const double err = (at_train.mean - y).cwiseAbs().maxCoeff();
        worst_interp = std::max(worst_interp, err);
        c.expect(err <= 1e-6, "interpolation error " + fmt("%.2e", err));

        // variance bounds, including points far outside the data
        const Matrix xs = uniform(rng, 25, d, -1.0, 2.0);
        const auto post = posterior(exact, xs);
        for (Index i = 0; i < xs.rows(); ++i) {
            const double var = post.covariance(i, i) + post.jitter;
            c.expect(var >= 0.0 && var <= h.signal_variance + post.jitter, "variance " + fmt("%.3e", var));
        }

        // LML gradient against central differences
        for (Index i = 0; i < n; ++i) y[i] += 0.1 * (u(rng) - 0.5);
        GPHyperparameters hn = h;
        hn.noise_variance = 1e-3 + 0.05 * u(rng);
        for (Index j = 0; j < d; ++j) hn.lengthscales[j] = 0.2 + 0.8 * u(rng);
        const GPModel noisy(cfg, hn, dataset(x, y));
        const Parameterisation p{cfg, d, true};
        const Vector theta = p.pack(hn);
        const auto analytic = log_marginal_likelihood_with_gradient(noisy);
        for (Index k = 0; k < theta.size(); ++k) {
            const double step = 1e-5;
            Vector tp = theta;
            Vector tm = theta;
            tp[k] += step;
            tm[k] -= step;
            const double fd = (log_marginal_likelihood(GPModel(cfg, p.unpack(tp, hn), noisy.data())) -
                               log_marginal_likelihood(GPModel(cfg, p.unpack(tm, hn), noisy.data()))) /
                              (2.0 * step);
            const double rel = std::abs(analytic.gradient[k] - fd) / std::max({std::abs(fd), std::abs(analytic.gradient[k]), 1e-6});
            worst_grad = std::max(worst_grad, rel);
            c.expect(rel < 1e-4, "LML gradient relative error " + fmt("%.2e", rel));
        }
    }
    return c.outcome(fmt("20 instances: worst interpolation error %.2e, worst LML gradient relative error %.2e",
                         worst_interp, worst_grad));
}

// ------------------------------------------------------------ MC convergence

Outcome ac4_mc_convergence() {
    Checks c;
    Rng rng(4);
    const Matrix x = uniform(rng, 20, 2);
    Vector y = response(x);
    y.array() += 5.0;  // keeps UCB away from zero
    const auto data = dataset(x, y);
    const auto model =
        std::make_shared<const GPModel>(fit(GPModel(GPConfig{}, default_hyperparameters(GPConfig{}, data), data)));
    AcquisitionSpec s;
    s.samples = 32768;
    s.fix_base_samples = true;
    s.seed = 7;
    s.beta = 4.0;
    s.y_best = y.maxCoeff();
    double worst_ei = 0.0;
    double worst_ucb = 0.0;
    const Matrix pts = uniform(rng, 50, 2);
    for (Index i = 0; i < 50; ++i) {
        const Vector p = pts.row(i).transpose();
        const Matrix batch(p.transpose());
        const double e = ei(*model, p, s.y_best);
        const double me = mc_ei(model, batch, s);
        const double re = std::abs(me - e) / std::max(e, 0.05);
        worst_ei = std::max(worst_ei, re);
        c.expect(re < 0.05, "MC-EI " + fmt("%.5f vs %.5f", me, e));
        const double u = ucb(*model, p, s.beta);
        const double mu = mc_ucb(model, batch, s);
        const double ru = std::abs(mu - u) / std::abs(u);
        worst_ucb = std::max(worst_ucb, ru);
        c.expect(ru < 0.02, "MC-UCB " + fmt("%.5f vs %.5f", mu, u));
    }
    return c.outcome(fmt("50 points, S=32768: worst EI error %.4f (< 0.05), worst UCB error %.4f (< 0.02)", worst_ei,
                         worst_ucb));
}

// ------------------------------------------------------------ optimiser

bool exactly_admitted(const InputSpace& space, const Matrix& batch) {
    for (Index i = 0; i < batch.rows(); ++i) {
        for (Index k = 0; k < batch.cols(); ++k) {
            const double v = batch(i, k);
            if (v < space.bounds(0, k) || v > space.bounds(1, k)) return false;
            if (auto it = space.discrete.find(k); it != space.discrete.end()) {
                if (std::find(it->second.begin(), it->second.end(), v) == it->second.end()) return false;
            }
        }
        for (const auto& con : space.constraints) {
            if (con.violation(batch.row(i).transpose()) > 1e-6) return false;
        }
    }
    return true;
}

Outcome ac5_optimiser() {
    Checks c;
    const Bounds unit2{Vector::Zero(2), Vector::Ones(2)};

    // inner optimisers against analytic maximisers
    const Objective quad = [](const Vector& x, Vector* g) {
        const Vector t = (Vector(2) << 0.3, 0.7).finished();
        if (g) *g = -2.0 * (x - t);
        return -(x - t).squaredNorm();
    };
    const auto rb = bounded_maximise(quad, Vector::Constant(2, 0.9), unit2);
    c.expect(std::abs(rb.x[0] - 0.3) < 1e-6 && std::abs(rb.x[1] - 0.7) < 1e-6, "bounded argmax");
    const auto rs = stochastic_maximise(quad, Vector::Constant(2, 0.9), unit2, 0.1, 200);
    c.expect(std::abs(rs.x[0] - 0.3) < 1e-2 && std::abs(rs.x[1] - 0.7) < 1e-2, "stochastic argmax");
    const Objective sum = [](const Vector& x, Vector* g) {
        if (g) *g = Vector::Ones(2);
        return x.sum();
    };
    const auto h = linear_constraint(ConstraintKind::Inequality, -Vector::Ones(2), 0.5);
    const auto rc = constrained_maximise(sum, Vector::Constant(2, 0.1), unit2, {h});
    c.expect(std::abs(rc.value - 0.5) < 1e-5 && h.violation(rc.x) <= 1e-6, "constrained linear programme");

    // brute force over an all-discrete 3 x 4 x 5 grid
    DiscreteMap grid{{0, {0.0, 0.5, 1.0}}, {1, {0.1, 0.3, 0.6, 0.9}}, {2, {0.0, 0.2, 0.4, 0.6, 0.8}}};
    Rng rng(5);
    for (int trial = 0; trial < 10; ++trial) {
        const Vector centre = uniform(rng, 3, 1).col(0);
        const Objective f = [&](const Vector& x, Vector* g) {
            if (g) *g = -2.0 * (x - centre);
            return -(x - centre).squaredNorm() + 0.1 * std::cos(5.0 * x.sum());
        };
        const LocalSearch local = [&](const Vector& x0, const Bounds&, std::size_t) {
            Vector g;
            return OptimResult{x0, f(x0, &g), 0};
        };
        const auto r = optimise_mixed(Bounds{Vector::Zero(3), Vector::Ones(3)}, grid, Matrix::Constant(1, 3, 0.5), local);
        double best = -1e300;
        for (double a : grid[0]) {
            for (double b : grid[1]) {
                for (double d : grid[2]) best = std::max(best, f((Vector(3) << a, b, d).finished(), nullptr));
            }
        }
        c.expect(r.value == best, "optimise_mixed brute force");
    }

    // candidate admissibility for every strategy
    for (int trial = 0; trial < 6; ++trial) {
        Rng drng(100 + trial);
        const Matrix x = uniform(drng, 12, 3);
        const auto data = dataset(x, response(x));
        const auto model =
            std::make_shared<const GPModel>(fit(GPModel(GPConfig{}, default_hyperparameters(GPConfig{}, data), data)));
        InputSpace space = unit_space(3);
        space.discrete[trial % 3] = {0.0, 0.2, 0.45, 0.7, 1.0};
        const bool constrained = trial % 2 == 0;
        if (constrained) space.constraints.push_back(linear_constraint(ConstraintKind::Inequality, -Vector::Ones(3), 1.1));
        OptimiserConfig cfg;
        cfg.method = constrained ? OptimiserMethod::ConstrainedDeterministic
                                 : (trial % 3 == 1 ? OptimiserMethod::Stochastic : OptimiserMethod::BoundedDeterministic);
        cfg.num_starts = 3;
        cfg.num_samples = 30;
        cfg.steps = 50;
        cfg.batch_size = 3;
        cfg.seed = static_cast<std::uint64_t>(trial);
        AcquisitionSpec s;
        s.variant = trial % 2 ? AcquisitionVariant::MCEI : AcquisitionVariant::MCUCB;
        s.samples = 64;
        s.fix_base_samples = true;
        s.seed = 50 + static_cast<std::uint64_t>(trial);
        s.y_best = data.outputs.maxCoeff();
        c.expect(exactly_admitted(space, single(model, s, space, cfg).x), "single candidate outside the space");
        c.expect(exactly_admitted(space, multi_joint(model, s, space, cfg).x), "joint candidate outside the space");
        c.expect(exactly_admitted(space, multi_sequential(model, s, space, cfg).x),
                 "sequential candidate outside the space");
    }
    return c.outcome("analytic argmax oracles, 3x4x5 brute force, admissibility of single/joint/sequential batches");
}

// ------------------------------------------------------------ design

Outcome ac6_design() {
    Checks c;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        DesignConfig dc;
        dc.num_points = 5 + static_cast<Index>(seed % 7) * 4;
        dc.num_dims = 1 + static_cast<Index>(seed % 6);
        dc.bounds = Matrix(2, dc.num_dims);
        dc.bounds.row(0).setConstant(-2.0);
        dc.bounds.row(1).setConstant(3.0);
        dc.num_designs = 25;
        dc.seed = seed;
        const auto sel = maximin_candidates(dc);
        std::vector<double> recomputed;
        for (const Matrix& design : sel.candidates) {
            // every design stratified: one point per interval in every column
            for (Index j = 0; j < design.cols(); ++j) {
                std::vector<int> hits(static_cast<std::size_t>(dc.num_points), 0);
                for (Index i = 0; i < design.rows(); ++i) {
                    const auto cell = static_cast<long>(std::floor(design(i, j) * static_cast<double>(dc.num_points)));
                    if (cell >= 0 && cell < dc.num_points) ++hits[static_cast<std::size_t>(cell)];
                }
                c.expect(std::all_of(hits.begin(), hits.end(), [](int h) { return h == 1; }), "stratification");
            }
            double dmin = 1e300;
            for (Index a = 0; a < design.rows(); ++a) {
                for (Index b = a + 1; b < design.rows(); ++b) dmin = std::min(dmin, (design.row(a) - design.row(b)).norm());
            }
            recomputed.push_back(dmin);
        }
        const auto best = static_cast<std::size_t>(std::max_element(recomputed.begin(), recomputed.end()) - recomputed.begin());
        c.expect(recomputed[sel.chosen] == recomputed[best], "maximin choice");
        for (std::size_t k = 0; k < recomputed.size(); ++k) {
            c.expect(std::abs(recomputed[k] - sel.scores[k]) <= 1e-12, "maximin score");
        }
        const Matrix x = gen_inputs(dc);
        c.expect((normalise(x, dc.bounds) - sel.candidates[sel.chosen]).cwiseAbs().maxCoeff() <= 1e-12,
                 "gen_inputs returns the chosen design");
        c.expect((unnormalise(normalise(x, dc.bounds), dc.bounds) - x).cwiseAbs().maxCoeff() <= 1e-12,
                 "normalise round trip");
        Rng rng(seed);
        const Vector y = uniform(rng, 30, 1, -50.0, 80.0).col(0);
        const Vector z = standardise(y);
        const double sd = std::sqrt((z.array() - z.mean()).square().sum() / 29.0);
        c.expect(std::abs(z.mean()) <= 1e-12 && std::abs(sd - 1.0) <= 1e-12, "standardise moments");
    }
    return c.outcome("20 configurations x 25 candidate designs");
}

// ------------------------------------------------------------ determinism

int shell(const std::string& cmd) {
    const int status = std::system((cmd + " >/dev/null 2>&1").c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

Outcome ac7_determinism() {
    Checks c;
    const fs::path dir = fs::temp_directory_path() / ("bopt_acceptance_" + std::to_string(::getpid()));
    fs::create_directories(dir);

    // library: the case study twice from the same seed
    const CaseStudy cs = case_study();
    const auto a = run_loop(cs.space, cs.config, make_test_objective(cs.function, 3), 3);
    const auto b = run_loop(cs.space, cs.config, make_test_objective(cs.function, 3), 3);
    bool same = a.history.size() == b.history.size();
    for (std::size_t i = 0; same && i < a.history.size(); ++i) {
        same = a.history[i].x == b.history[i].x && a.history[i].y == b.history[i].y &&
               a.history[i].source == b.history[i].source;
    }
    c.expect(same, "library histories differ");

    // save, load, save
    const fs::path s1 = dir / "s1.json";
    const fs::path s2 = dir / "s2.json";
    save_state(a, s1);
    save_state(load_state(s1), s2);
    c.expect(slurp(s1) == slurp(s2), "save/load/save bytes differ");
    c.expect(slurp(s1) == serialise_state(b), "state bytes differ between runs");

    // CLI: two runs and the library run agree byte for byte
    const std::string bin = BOPT_CLI_PATH;
    const fs::path c1 = dir / "c1.json";
    const fs::path c2 = dir / "c2.json";
    const std::string run = bin + " run --preset case-study --seed 3 --campaign ";
    c.expect(shell(run + c1.string()) == 0, "CLI run failed");
    c.expect(shell(run + c2.string()) == 0, "CLI run failed");
    c.expect(slurp(c1) == slurp(c2), "CLI state files differ");
    c.expect(slurp(c1) == slurp(s1), "CLI and library states differ");
    fs::remove_all(dir);
    return c.outcome("case-study seed 3 via library and CLI; state file save/load/save");
}

// ------------------------------------------------------------ test functions

Outcome ac8_test_functions() {
    Checks c;
    const auto ack = make_test_function(TestFunction::Ackley, 4);
    c.expect(ackley(Vector::Zero(4)) == 0.0, "Ackley(0) != 0");
    c.expect(evaluate(ack, Matrix::Zero(1, 4), 1)[0] == 0.0, "noise-free Ackley(0) != 0");

    const auto h6 = make_test_function(TestFunction::Hartmann6D, 6, 0.0, false);
    const double at_opt = evaluate_clean(h6, h6.optimum_input);
    c.expect(std::abs(at_opt - 3.32237) <= 1e-4, "Hartmann6 optimum " + fmt("%.6f", at_opt));
    const auto h3 = make_test_function(TestFunction::Hartmann3D, 3, 0.0, false);

    double worst = -1e300;
    Rng rng(8);
    for (const auto* spec : {&h6, &h3}) {
        std::uniform_real_distribution<double> u(0.0, 1.0);
        Vector x(spec->dims);
        for (int i = 0; i < 1000000; ++i) {
            for (Index k = 0; k < x.size(); ++k) x[k] = u(rng);
            const double excess = evaluate_clean(*spec, x) - spec->optimum_value;
            worst = std::max(worst, excess);
        }
    }
    c.expect(worst <= 1e-6, "scan exceeded a stored optimum by " + fmt("%.3e", worst));
    // Ackley is a minimum at the origin: nothing on the scan goes below zero
    std::uniform_real_distribution<double> ua(-32.768, 32.768);
    double lowest = 1e300;
    Vector x(4);
    for (int i = 0; i < 1000000; ++i) {
        for (Index k = 0; k < 4; ++k) x[k] = ua(rng);
        lowest = std::min(lowest, ackley(x));
    }
    c.expect(lowest >= -1e-6, "Ackley scan below zero");
    return c.outcome(fmt("Hartmann6 at stored optimiser %.6f; largest scan excess %.2e; Ackley scan minimum %.4f", at_opt,
                         worst, lowest));
}

}  // namespace

// Optional arguments select criteria by prefix, e.g. "acceptance AC3 AC4".
int main(int argc, char** argv) {
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
        {"AC1 case-study reproduction", ac1_case_study},
        {"AC2 baseline dominance", ac2_baselines},
        {"AC3 surrogate correctness", ac3_surrogate},
        {"AC4 MC-to-analytical convergence", ac4_mc_convergence},
        {"AC5 optimiser contracts", ac5_optimiser},
        {"AC6 design properties", ac6_design},
        {"AC7 determinism and persistence", ac7_determinism},
        {"AC8 test-function fidelity", ac8_test_functions},
    };
    const std::vector<std::string> only(argv + 1, argv + argc);
    std::ofstream report("acceptance_report.txt");  // ctest hides stdout of passing tests
    int failures = 0;
    int ran = 0;
    for (const auto& [name, run] : criteria) {
        if (!only.empty() && std::none_of(only.begin(), only.end(), [&](const std::string& p) {
                return name.compare(0, p.size(), p) == 0;
            })) {
            continue;
        }
        ++ran;
        Outcome o;
        try {
            o = run();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        failures += o.pass ? 0 : 1;
        const std::string line = std::string(o.pass ? "PASS " : "FAIL ") + name + ": " + o.detail;
        std::printf("%s\n", line.c_str());
        report << line << '\n' << std::flush;
        std::fflush(stdout);
    }
    std::printf("%d/%d criteria passed\n", ran - failures, ran);
    report << (ran - failures) << '/' << ran << " criteria passed\n";
    return failures == 0 ? 0 : 1;
}
