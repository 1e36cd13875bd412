#include "bopt/cli.hpp"

#include "bopt/campaign.hpp"
#include "bopt/error.hpp"
#include "bopt/persistence.hpp"

#include <CLI11.hpp>

#include <cerrno>
#include <charconv>
#include <cstdio>
#include <cstdlib>
#include <fcntl.h>
#include <fstream>
#include <istream>
#include <ostream>
#include <unistd.h>

namespace bopt {

namespace {

namespace fs = std::filesystem;

int exit_code(ErrorKind kind) {
    switch (kind) {
    case ErrorKind::Budget:
    case ErrorKind::Infeasible:
    case ErrorKind::InfeasibleStart:
        return kExitBudget;
    case ErrorKind::Domain:
    case ErrorKind::InvalidHyperparameter:
    case ErrorKind::Parameter:
    case ErrorKind::BaseSamples:
    case ErrorKind::CombinatorialExplosion:
    case ErrorKind::ZeroVariance:
    case ErrorKind::Ordering:
    case ErrorKind::UnmatchedCandidate:
    case ErrorKind::Schema:
        return kExitValidation;
    default:
        return kExitFailure;
    }
}

// Exclusive campaign lock; a second holder fails immediately.
class CampaignLock {
public:
    explicit CampaignLock(const fs::path& state) : path_(state) {
        path_ += ".lock";
        if (state.has_parent_path()) fs::create_directories(state.parent_path());
        fd_ = ::open(path_.c_str(), O_CREAT | O_EXCL | O_WRONLY, 0644);
        if (fd_ < 0) {
            if (errno == EEXIST) fail(ErrorKind::Lock, "campaign is locked (" + path_.string() + ")");
            fail(ErrorKind::Io, "cannot create lock " + path_.string());
        }
    }
    ~CampaignLock() {
        ::close(fd_);
        ::unlink(path_.c_str());
    }
    CampaignLock(const CampaignLock&) = delete;
    CampaignLock& operator=(const CampaignLock&) = delete;

private:
    fs::path path_;
    int fd_ = -1;
};

struct SetupFlags {
    std::string config_file;
    std::string preset;
    std::uint64_t seed = 0;
    Index batch_size = 1;
    std::string strategy;
    std::string acquisition;
    std::string method;
    double beta = 4.0;
    int samples = 512;
    bool fix_base_samples = false;
    Index budget = 70;
    Index init_points = 30;
    std::string function;
    double noise_std = 0.0;

    CLI::Option* o_batch = nullptr;
    CLI::Option* o_beta = nullptr;
    CLI::Option* o_samples = nullptr;
    CLI::Option* o_budget = nullptr;
    CLI::Option* o_init = nullptr;
    CLI::Option* o_noise = nullptr;
    CLI::Option* o_fix = nullptr;
};

void add_setup_flags(CLI::App* app, SetupFlags& f) {
    app->add_option("--config", f.config_file, "Config document (bopt.config)");
    app->add_option("--preset", f.preset, "Named configuration")->check(CLI::IsMember({"case-study"}));
    app->add_option("--seed", f.seed, "Seed for all randomness");
    f.o_batch = app->add_option("--batch-size", f.batch_size, "Candidates per ask")->check(CLI::PositiveNumber);
    app->add_option("--strategy", f.strategy, "Batch strategy")->check(CLI::IsMember({"single", "joint", "sequential"}));
    app->add_option("--acquisition", f.acquisition, "Acquisition function")
        ->check(CLI::IsMember({"ei", "ucb", "mcei", "mcucb"}));
    app->add_option("--method", f.method, "Acquisition optimiser")
        ->check(CLI::IsMember({"bounded", "constrained", "stochastic"}));
    f.o_beta = app->add_option("--beta", f.beta, "UCB trade-off");
    f.o_samples = app->add_option("--samples", f.samples, "Monte-Carlo samples")->check(CLI::PositiveNumber);
    f.o_fix = app->add_flag("--fix-base-samples", f.fix_base_samples, "Fix Monte-Carlo base samples");
    f.o_budget = app->add_option("--budget", f.budget, "Evaluation budget");
    f.o_init = app->add_option("--init-points", f.init_points, "Initial design size");
    app->add_option("--function", f.function, "Test function")
        ->check(CLI::IsMember({"ackley", "hartmann3", "hartmann6"}));
    f.o_noise = app->add_option("--noise-std", f.noise_std, "Observation noise of the test function");
}

AcquisitionVariant parse_variant(const std::string& s) {
    if (s == "ei") return AcquisitionVariant::EI;
    if (s == "ucb") return AcquisitionVariant::UCB;
    if (s == "mcei") return AcquisitionVariant::MCEI;
    return AcquisitionVariant::MCUCB;
}

Strategy parse_strategy(const std::string& s) {
    if (s == "joint") return Strategy::MultiJoint;
    if (s == "sequential") return Strategy::MultiSequential;
    return Strategy::Single;
}

OptimiserMethod parse_method(const std::string& s) {
    if (s == "constrained") return OptimiserMethod::ConstrainedDeterministic;
    if (s == "stochastic") return OptimiserMethod::Stochastic;
    return OptimiserMethod::BoundedDeterministic;
}

struct Setup {
    CampaignSetup campaign;
    std::optional<TestFunctionSpec> function;
};

Setup build_setup(const SetupFlags& f) {
    Setup s;
    if (f.preset == "case-study") {
        const CaseStudy cs = case_study();
        s.campaign = {cs.space, cs.config};
        s.function = cs.function;
    } else if (!f.config_file.empty()) {
        s.campaign = load_setup(f.config_file);
    }
    if (!f.function.empty()) {
        const double noise = s.function ? s.function->noise_std : 0.0;
        s.function = make_test_function(parse_test_function(f.function), 0, noise, false);
        if (f.preset.empty() && f.config_file.empty()) s.campaign.space.bounds = s.function->bounds;
    }
    if (s.function && *f.o_noise) s.function->noise_std = f.noise_std;
    if (s.campaign.space.bounds.size() == 0) {
        fail(ErrorKind::Parameter, "no search space: give --config, --function or --preset");
    }
    if (s.function && s.function->dims != s.campaign.space.dims()) {
        fail(ErrorKind::Parameter, "test function dimension does not match the search space");
    }

    auto& c = s.campaign.config;
    if (*f.o_budget) c.budget = f.budget;
    if (*f.o_init) c.init_points = f.init_points;
    if (*f.o_beta) c.acquisition.beta = f.beta;
    if (*f.o_samples) c.acquisition.samples = f.samples;
    if (*f.o_fix) c.acquisition.fix_base_samples = f.fix_base_samples;
    if (*f.o_batch) {
        c.optimiser.batch_size = f.batch_size;
        c.acquisition.batch_size = f.batch_size;
    }
    if (!f.strategy.empty()) c.strategy = parse_strategy(f.strategy);
    if (*f.o_batch && f.batch_size > 1 && f.strategy.empty() && c.strategy == Strategy::Single) {
        c.strategy = Strategy::MultiSequential;
    }
    if (!f.acquisition.empty()) {
        c.acquisition.variant = parse_variant(f.acquisition);
        if (f.method.empty() && c.acquisition.is_mc() && !c.acquisition.fix_base_samples) {
            c.optimiser.method = OptimiserMethod::Stochastic;
        }
    } else if (c.strategy != Strategy::Single && !c.acquisition.is_mc()) {
        c.acquisition.variant = AcquisitionVariant::MCUCB;
        if (f.method.empty() && !c.acquisition.fix_base_samples) c.optimiser.method = OptimiserMethod::Stochastic;
    }
    if (!f.method.empty()) c.optimiser.method = parse_method(f.method);
    if (f.method.empty() && !s.campaign.space.constraints.empty() &&
        c.optimiser.method == OptimiserMethod::BoundedDeterministic) {
        c.optimiser.method = OptimiserMethod::ConstrainedDeterministic;
    }
    c.validate();
    return s;
}

fs::path resolve_campaign(const std::string& flag) {
    fs::path p;
    if (!flag.empty()) {
        p = flag;
    } else if (const char* dir = std::getenv(kCampaignDirEnv); dir && *dir) {
        p = dir;
    } else {
        fail(ErrorKind::Parameter, std::string("no campaign: give --campaign or set ") + kCampaignDirEnv);
    }
    if (fs::is_directory(p) || (flag.empty())) p /= kCampaignFileName;
    return p;
}

void print_rows(const Matrix& x, std::ostream& out) {
    for (Index i = 0; i < x.rows(); ++i) {
        for (Index k = 0; k < x.cols(); ++k) out << (k ? "," : "") << format_double(x(i, k));
        out << '\n';
    }
}

void print_best(const CampaignState& state, std::ostream& out) {
    const Incumbent inc = best(state);
    char buf[64];
    out << "Approximate solution\n--------------------\n";
    out << "Evaluation: " << (inc.index + 1) << '\n';
    out << "Inputs: [";
    for (Index k = 0; k < inc.x.size(); ++k) {
        std::snprintf(buf, sizeof(buf), "%.4f", inc.x[k]);
        out << (k ? ", " : "") << buf;
    }
    out << "]\n";
    std::snprintf(buf, sizeof(buf), "%.4f", inc.y);
    out << "Output: " << buf << '\n';
}

bool parse_number(const std::string& field, double& v) {
    std::size_t b = field.find_first_not_of(" \t\r");
    std::size_t e = field.find_last_not_of(" \t\r");
    if (b == std::string::npos) return false;
    const char* first = field.data() + b;
    const char* last = field.data() + e + 1;
    if (*first == '+') ++first;
    const auto res = std::from_chars(first, last, v);
    return res.ec == std::errc() && res.ptr == last;
}

// x_1..x_d,y rows; a non-numeric first line is taken as a header.
void read_observations(std::istream& in, Index d, Matrix& x, Vector& y) {
    std::vector<std::vector<double>> rows;
    std::string line;
    bool first = true;
    while (std::getline(in, line)) {
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        std::vector<double> row;
        bool numeric = true;
        std::stringstream ss(line);
        std::string field;
        while (std::getline(ss, field, ',')) {
            double v = 0.0;
            if (!parse_number(field, v)) numeric = false;
            row.push_back(v);
        }
        if (!numeric) {
            if (first) {
                first = false;
                continue;
            }
            fail(ErrorKind::Parameter, "tell: non-numeric field in row " + std::to_string(rows.size() + 1));
        }
        first = false;
        if (static_cast<Index>(row.size()) != d + 1) {
            fail(ErrorKind::Parameter, "tell: expected " + std::to_string(d + 1) + " columns, got " +
                                           std::to_string(row.size()));
        }
        rows.push_back(std::move(row));
    }
    if (rows.empty()) fail(ErrorKind::Parameter, "tell: no observations given");
    x.resize(static_cast<Index>(rows.size()), d);
    y.resize(static_cast<Index>(rows.size()));
    for (std::size_t i = 0; i < rows.size(); ++i) {
        for (Index k = 0; k < d; ++k) x(static_cast<Index>(i), k) = rows[i][static_cast<std::size_t>(k)];
        y[static_cast<Index>(i)] = rows[i][static_cast<std::size_t>(d)];
    }
}

void write_to(const std::string& file, std::ostream& fallback, const std::function<void(std::ostream&)>& writer) {
    if (file.empty() || file == "-") {
        writer(fallback);
        return;
    }
    const fs::path p(file);
    if (p.has_parent_path()) fs::create_directories(p.parent_path());
    std::ofstream f(p, std::ios::binary | std::ios::trunc);
    if (!f) fail(ErrorKind::Io, "cannot write " + file);
    writer(f);
}

}  // namespace

int cli_dispatch(const std::vector<std::string>& argv, std::istream& in, std::ostream& out, std::ostream& err) {
    CLI::App app{"Bayesian optimisation campaigns", argv.empty() ? "bopt" : argv.front()};
    app.require_subcommand(1);

    std::string campaign;
    bool force = false;
    std::string out_file;
    std::string input_file;
    std::string summary_file;
    int n_seeds = 10;
    SetupFlags init_flags;
    SetupFlags run_flags;
    SetupFlags bench_flags;

    auto* init = app.add_subcommand("init", "Create a campaign and print its initial design");
    init->add_option("--campaign", campaign, "Campaign state file or directory");
    init->add_flag("--force", force, "Overwrite an existing campaign");
    add_setup_flags(init, init_flags);

    auto* ask_cmd = app.add_subcommand("ask", "Print the next batch of candidates");
    ask_cmd->add_option("--campaign", campaign, "Campaign state file or directory");

    auto* tell_cmd = app.add_subcommand("tell", "Record observations given as x_1..x_d,y rows");
    tell_cmd->add_option("--campaign", campaign, "Campaign state file or directory");
    tell_cmd->add_option("--input", input_file, "CSV file (default stdin)");
    tell_cmd->add_flag("--force", force, "Accept rows that match no pending candidate");

    auto* best_cmd = app.add_subcommand("best", "Print the incumbent");
    best_cmd->add_option("--campaign", campaign, "Campaign state file or directory");

    auto* run_cmd = app.add_subcommand("run", "Closed-loop run on a test function");
    run_cmd->add_option("--campaign", campaign, "Persist the run to this state file");
    run_cmd->add_option("--out", out_file, "History CSV");
    add_setup_flags(run_cmd, run_flags);

    auto* bench_cmd = app.add_subcommand("bench", "Compare BO with random and LHS sampling");
    bench_cmd->add_option("--seeds", n_seeds, "Number of seeds")->check(CLI::PositiveNumber);
    bench_cmd->add_option("--out", out_file, "Trace CSV");
    bench_cmd->add_option("--summary", summary_file, "Summary CSV");
    add_setup_flags(bench_cmd, bench_flags);

    auto* export_cmd = app.add_subcommand("export", "Write the history as CSV");
    export_cmd->add_option("--campaign", campaign, "Campaign state file or directory");
    export_cmd->add_option("--out", out_file, "History CSV (default stdout)");

    std::vector<const char*> raw;
    for (const auto& a : argv) raw.push_back(a.c_str());
    try {
        app.parse(static_cast<int>(raw.size()), raw.data());
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << '\n';
        return kExitValidation;
    }

    try {
        if (init->parsed()) {
            const Setup s = build_setup(init_flags);
            const fs::path path = resolve_campaign(campaign);
            CampaignLock lock(path);
            if (fs::exists(path) && !force) fail(ErrorKind::Parameter, "campaign exists: " + path.string());
            const CampaignState state = initialise(s.campaign.space, s.campaign.config, init_flags.seed);
            save_state(state, path);
            print_rows(state.pending, out);
        } else if (ask_cmd->parsed()) {
            const fs::path path = resolve_campaign(campaign);
            CampaignLock lock(path);
            CampaignState state = load_state(path);
            print_rows(ask(state, &path), out);
        } else if (tell_cmd->parsed()) {
            const fs::path path = resolve_campaign(campaign);
            CampaignLock lock(path);
            CampaignState state = load_state(path);
            Matrix x;
            Vector y;
            if (input_file.empty() || input_file == "-") {
                read_observations(in, state.space.dims(), x, y);
            } else {
                std::ifstream f(input_file);
                if (!f) fail(ErrorKind::Io, "cannot read " + input_file);
                read_observations(f, state.space.dims(), x, y);
            }
            tell(state, x, y, force, &path);
            out << "told " << x.rows() << " observation(s); " << state.data.size() << " of " << state.config.budget
                << " evaluations used, " << state.pending.rows() << " pending\n";
        } else if (best_cmd->parsed()) {
            print_best(load_state(resolve_campaign(campaign)), out);
        } else if (export_cmd->parsed()) {
            const CampaignState state = load_state(resolve_campaign(campaign));
            write_to(out_file, out, [&](std::ostream& o) { write_history_csv(state, o); });
        } else if (run_cmd->parsed()) {
            const Setup s = build_setup(run_flags);
            if (!s.function) fail(ErrorKind::Parameter, "run needs --function or --preset");
            std::optional<fs::path> path;
            std::optional<CampaignLock> lock;
            if (!campaign.empty()) {
                path = resolve_campaign(campaign);
                lock.emplace(*path);
            }
            const CampaignState state = run_loop(s.campaign.space, s.campaign.config,
                                                 make_test_objective(*s.function, run_flags.seed), run_flags.seed,
                                                 path ? &*path : nullptr);
            print_best(state, out);
            if (!out_file.empty()) write_to(out_file, out, [&](std::ostream& o) { write_history_csv(state, o); });
        } else if (bench_cmd->parsed()) {
            const Setup s = build_setup(bench_flags);
            if (!s.function) fail(ErrorKind::Parameter, "bench needs --function or --preset");
            const TestFunctionSpec fn = *s.function;
            const BenchmarkResult result = benchmark_compare(
                s.campaign.space, s.campaign.config,
                [fn](std::uint64_t seed) { return make_test_objective(fn, seed); }, n_seeds, bench_flags.seed);
            if (!out_file.empty()) write_to(out_file, out, [&](std::ostream& o) { write_traces_csv(result, o); });
            if (!summary_file.empty()) {
                write_to(summary_file, out, [&](std::ostream& o) { write_summary_csv(result, o); });
            }
            char buf[128];
            out << "method   median   lower_q  upper_q\n";
            for (const auto& m : result.summary) {
                std::snprintf(buf, sizeof(buf), "%-8s %.4f   %.4f   %.4f\n", m.method.c_str(), m.median,
                              m.lower_quartile, m.upper_quartile);
                out << buf;
            }
        }
    } catch (const Error& e) {
        err << "error (" << to_string(e.kind()) << "): " << e.what() << '\n';
        return exit_code(e.kind());
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitFailure;
    }
    return kExitOk;
}

}  // namespace bopt
