#include "bopt/persistence.hpp"

#include "bopt/error.hpp"

#include <charconv>
#include <fstream>
#include <ostream>
#include <sstream>
#include <unistd.h>

namespace bopt {

using nlohmann::ordered_json;

namespace {

ordered_json vector_json(const Vector& v) {
    ordered_json out = ordered_json::array();
    for (Index i = 0; i < v.size(); ++i) out.push_back(v[i]);
    return out;
}

ordered_json matrix_json(const Matrix& m) {
    ordered_json out = ordered_json::array();
    for (Index i = 0; i < m.rows(); ++i) out.push_back(vector_json(m.row(i).transpose()));
    return out;
}

Vector vector_from(const ordered_json& j) {
    Vector v(static_cast<Index>(j.size()));
    for (std::size_t i = 0; i < j.size(); ++i) v[static_cast<Index>(i)] = j.at(i).get<double>();
    return v;
}

Matrix matrix_from(const ordered_json& j, Index cols) {
    Matrix m(static_cast<Index>(j.size()), cols);
    for (std::size_t i = 0; i < j.size(); ++i) {
        const auto& row = j.at(i);
        if (static_cast<Index>(row.size()) != cols) fail(ErrorKind::Schema, "matrix row has the wrong length");
        for (Index k = 0; k < cols; ++k) m(static_cast<Index>(i), k) = row.at(static_cast<std::size_t>(k)).get<double>();
    }
    return m;
}

template <class E>
struct Names {
    std::vector<std::pair<E, const char*>> entries;

    const char* name(E e) const {
        for (const auto& [k, v] : entries) {
            if (k == e) return v;
        }
        return entries.front().second;
    }
    E parse(const std::string& s) const {
        for (const auto& [k, v] : entries) {
            if (s == v) return k;
        }
        fail(ErrorKind::Schema, "unknown value '" + s + "'");
    }
};

const Names<Strategy> kStrategy{{{Strategy::Single, "single"},
                                 {Strategy::MultiJoint, "joint"},
                                 {Strategy::MultiSequential, "sequential"}}};
const Names<Source> kSource{{{Source::Init, "init"}, {Source::Bo, "bo"}}};
const Names<AcquisitionVariant> kVariant{{{AcquisitionVariant::EI, "ei"},
                                          {AcquisitionVariant::UCB, "ucb"},
                                          {AcquisitionVariant::MCEI, "mcei"},
                                          {AcquisitionVariant::MCUCB, "mcucb"}}};
const Names<OptimiserMethod> kMethod{{{OptimiserMethod::BoundedDeterministic, "bounded"},
                                      {OptimiserMethod::ConstrainedDeterministic, "constrained"},
                                      {OptimiserMethod::Stochastic, "stochastic"}}};
const Names<MeanKind> kMean{{{MeanKind::Zero, "zero"}, {MeanKind::Constant, "constant"}}};
const Names<KernelKind> kKernel{{{KernelKind::RBF, "rbf"}, {KernelKind::Matern52, "matern52"}}};
const Names<ConstraintKind> kConstraint{{{ConstraintKind::Equality, "equality"},
                                         {ConstraintKind::Inequality, "inequality"}}};

template <class T>
void read(const ordered_json& j, const char* key, T& out) {
    if (j.contains(key)) out = j.at(key).get<T>();
}

template <class E>
void read_enum(const ordered_json& j, const char* key, const Names<E>& names, E& out) {
    if (j.contains(key)) out = names.parse(j.at(key).get<std::string>());
}

ordered_json space_json(const InputSpace& space) {
    ordered_json j;
    j["bounds"] = matrix_json(space.bounds);
    ordered_json discrete = ordered_json::object();
    for (const auto& [dim, values] : space.discrete) {
        ordered_json vals = ordered_json::array();
        for (double v : values) vals.push_back(v);
        discrete[std::to_string(dim)] = vals;
    }
    j["discrete"] = discrete;
    ordered_json constraints = ordered_json::array();
    for (const auto& c : space.constraints) {
        if (!c.linear) fail(ErrorKind::Schema, "only linear constraints can be persisted");
        ordered_json cj;
        cj["kind"] = kConstraint.name(c.kind);
        cj["coefficients"] = vector_json(c.linear->coefficients);
        cj["constant"] = c.linear->constant;
        constraints.push_back(cj);
    }
    j["constraints"] = constraints;
    return j;
}

InputSpace space_from(const ordered_json& j) {
    InputSpace space;
    const auto& b = j.at("bounds");
    if (b.size() != 2) fail(ErrorKind::Schema, "bounds must have two rows");
    space.bounds = matrix_from(b, static_cast<Index>(b.at(0).size()));
    if (j.contains("discrete")) {
        for (const auto& [key, values] : j.at("discrete").items()) {
            std::vector<double> vals;
            for (const auto& v : values) vals.push_back(v.get<double>());
            space.discrete[static_cast<Index>(std::stol(key))] = vals;
        }
    }
    if (j.contains("constraints")) {
        for (const auto& cj : j.at("constraints")) {
            space.constraints.push_back(linear_constraint(kConstraint.parse(cj.at("kind").get<std::string>()),
                                                          vector_from(cj.at("coefficients")),
                                                          cj.at("constant").get<double>()));
        }
    }
    space.validate();
    return space;
}

ordered_json config_json(const CampaignConfig& c) {
    ordered_json j;
    j["budget"] = c.budget;
    j["init_points"] = c.init_points;
    j["strategy"] = kStrategy.name(c.strategy);
    j["warm_start"] = c.warm_start;
    j["design_candidates"] = c.design_candidates;
    const auto& a = c.acquisition;
    ordered_json aj;
    aj["variant"] = kVariant.name(a.variant);
    aj["beta"] = a.beta;
    aj["y_best"] = a.y_best;
    aj["samples"] = a.samples;
    aj["fix_base_samples"] = a.fix_base_samples;
    aj["batch_size"] = a.batch_size;
    aj["seed"] = a.seed;
    j["acquisition"] = aj;
    const auto& o = c.optimiser;
    ordered_json oj;
    oj["method"] = kMethod.name(o.method);
    oj["lr"] = o.lr;
    oj["steps"] = o.steps;
    oj["num_starts"] = o.num_starts;
    oj["num_samples"] = o.num_samples;
    oj["batch_size"] = o.batch_size;
    oj["seed"] = o.seed;
    oj["enumeration_cap"] = o.enumeration_cap;
    oj["num_designs"] = o.num_designs;
    j["optimiser"] = oj;
    j["gp_fit"] = {{"lr", c.gp_fit.lr}, {"steps", c.gp_fit.steps}, {"restarts", c.gp_fit.restarts}};
    j["model"] = {{"mean", kMean.name(c.model.mean)}, {"kernel", kKernel.name(c.model.kernel)}, {"ard", c.model.ard}};
    return j;
}

CampaignConfig config_from(const ordered_json& j) {
    CampaignConfig c;
    read(j, "budget", c.budget);
    read(j, "init_points", c.init_points);
    read_enum(j, "strategy", kStrategy, c.strategy);
    read(j, "warm_start", c.warm_start);
    read(j, "design_candidates", c.design_candidates);
    if (j.contains("acquisition")) {
        const auto& aj = j.at("acquisition");
        auto& a = c.acquisition;
        read_enum(aj, "variant", kVariant, a.variant);
        read(aj, "beta", a.beta);
        read(aj, "y_best", a.y_best);
        read(aj, "samples", a.samples);
        read(aj, "fix_base_samples", a.fix_base_samples);
        read(aj, "batch_size", a.batch_size);
        read(aj, "seed", a.seed);
    }
    if (j.contains("optimiser")) {
        const auto& oj = j.at("optimiser");
        auto& o = c.optimiser;
        read_enum(oj, "method", kMethod, o.method);
        read(oj, "lr", o.lr);
        read(oj, "steps", o.steps);
        read(oj, "num_starts", o.num_starts);
        read(oj, "num_samples", o.num_samples);
        read(oj, "batch_size", o.batch_size);
        read(oj, "seed", o.seed);
        read(oj, "enumeration_cap", o.enumeration_cap);
        read(oj, "num_designs", o.num_designs);
    }
    if (j.contains("gp_fit")) {
        const auto& gj = j.at("gp_fit");
        read(gj, "lr", c.gp_fit.lr);
        read(gj, "steps", c.gp_fit.steps);
        read(gj, "restarts", c.gp_fit.restarts);
    }
    if (j.contains("model")) {
        const auto& mj = j.at("model");
        read_enum(mj, "mean", kMean, c.model.mean);
        read_enum(mj, "kernel", kKernel, c.model.kernel);
        read(mj, "ard", c.model.ard);
    }
    return c;
}

ordered_json hyper_json(const GPHyperparameters& h) {
    ordered_json j;
    j["mean_constant"] = h.mean_constant;
    j["signal_variance"] = h.signal_variance;
    j["lengthscales"] = vector_json(h.lengthscales);
    j["noise_variance"] = h.noise_variance;
    j["learn_noise"] = h.learn_noise;
    return j;
}

GPHyperparameters hyper_from(const ordered_json& j) {
    GPHyperparameters h;
    h.mean_constant = j.at("mean_constant").get<double>();
    h.signal_variance = j.at("signal_variance").get<double>();
    h.lengthscales = vector_from(j.at("lengthscales"));
    h.noise_variance = j.at("noise_variance").get<double>();
    h.learn_noise = j.at("learn_noise").get<bool>();
    return h;
}

void check_header(const ordered_json& doc, const char* schema) {
    const std::string expected = std::string(schema) + " version " + std::to_string(kStateSchemaVersion);
    if (!doc.is_object() || !doc.contains("schema") || !doc.contains("version") ||
        doc.at("schema") != schema || doc.at("version") != kStateSchemaVersion) {
        fail(ErrorKind::Schema, "unsupported document; expected " + expected);
    }
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(ErrorKind::Io, "cannot read " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

ordered_json parse_document(const std::string& text, const char* schema) {
    ordered_json doc;
    try {
        doc = ordered_json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        fail(ErrorKind::Schema, std::string("corrupt document (") + e.what() + "); expected " + schema + " version " +
                                    std::to_string(kStateSchemaVersion));
    }
    check_header(doc, schema);
    return doc;
}

template <class F>
auto guarded(const char* schema, F&& f) {
    try {
        return f();
    } catch (const nlohmann::json::exception& e) {
        fail(ErrorKind::Schema, std::string("malformed document (") + e.what() + "); expected " + schema +
                                    " version " + std::to_string(kStateSchemaVersion));
    }
}

}  // namespace

ordered_json state_to_json(const CampaignState& state) {
    ordered_json j;
    j["schema"] = kStateSchemaName;
    j["version"] = kStateSchemaVersion;
    j["seed"] = state.seed;
    j["iteration"] = state.iteration;
    j["asks"] = state.asks;
    j["space"] = space_json(state.space);
    j["config"] = config_json(state.config);
    ordered_json data;
    data["inputs"] = matrix_json(state.data.inputs);
    data["outputs"] = vector_json(state.data.outputs);
    data["fixed_noise"] = state.data.fixed_noise ? vector_json(*state.data.fixed_noise) : ordered_json(nullptr);
    j["data"] = data;
    j["pending"] = matrix_json(state.pending);
    ordered_json sources = ordered_json::array();
    for (Source s : state.pending_source) sources.push_back(kSource.name(s));
    j["pending_source"] = sources;
    ordered_json history = ordered_json::array();
    for (const auto& r : state.history) {
        ordered_json rj;
        rj["eval_index"] = r.eval_index;
        rj["x"] = vector_json(r.x);
        rj["y"] = r.y;
        rj["source"] = kSource.name(r.source);
        history.push_back(rj);
    }
    j["history"] = history;
    j["last_hyper"] = state.last_hyper ? hyper_json(*state.last_hyper) : ordered_json(nullptr);
    return j;
}

CampaignState state_from_json(const ordered_json& doc) {
    check_header(doc, kStateSchemaName);
    return guarded(kStateSchemaName, [&] {
        CampaignState s;
        s.seed = doc.at("seed").get<std::uint64_t>();
        s.iteration = doc.at("iteration").get<Index>();
        s.asks = doc.at("asks").get<Index>();
        s.space = space_from(doc.at("space"));
        s.config = config_from(doc.at("config"));
        const Index d = s.space.dims();
        const auto& data = doc.at("data");
        s.data.inputs = matrix_from(data.at("inputs"), d);
        s.data.outputs = vector_from(data.at("outputs"));
        if (!data.at("fixed_noise").is_null()) s.data.fixed_noise = vector_from(data.at("fixed_noise"));
        s.pending = matrix_from(doc.at("pending"), d);
        for (const auto& src : doc.at("pending_source")) s.pending_source.push_back(kSource.parse(src.get<std::string>()));
        for (const auto& rj : doc.at("history")) {
            s.history.push_back({rj.at("eval_index").get<Index>(), vector_from(rj.at("x")), rj.at("y").get<double>(),
                                 kSource.parse(rj.at("source").get<std::string>())});
        }
        if (!doc.at("last_hyper").is_null()) s.last_hyper = hyper_from(doc.at("last_hyper"));
        if (s.data.inputs.rows() != s.data.outputs.size() ||
            static_cast<std::size_t>(s.pending.rows()) != s.pending_source.size() ||
            static_cast<Index>(s.history.size()) != s.data.size()) {
            fail(ErrorKind::Schema, "inconsistent campaign state");
        }
        return s;
    });
}

std::string serialise_state(const CampaignState& state) { return state_to_json(state).dump(2) + "\n"; }

CampaignState parse_state(const std::string& text) { return state_from_json(parse_document(text, kStateSchemaName)); }

void save_state(const CampaignState& state, const std::filesystem::path& path) {
    const std::string text = serialise_state(state);
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::filesystem::path tmp = path;
    tmp += ".tmp." + std::to_string(::getpid());
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) fail(ErrorKind::Io, "cannot write " + tmp.string());
        out << text;
        out.flush();
        if (!out) fail(ErrorKind::Io, "write failed for " + tmp.string());
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) {
        std::filesystem::remove(tmp);
        fail(ErrorKind::Io, "cannot replace " + path.string() + ": " + ec.message());
    }
}

CampaignState load_state(const std::filesystem::path& path) { return parse_state(read_file(path)); }

CampaignSetup setup_from_json(const ordered_json& doc) {
    check_header(doc, kConfigSchemaName);
    return guarded(kConfigSchemaName, [&] {
        CampaignSetup setup;
        if (!doc.contains("space")) fail(ErrorKind::Schema, "config document has no space");
        setup.space = space_from(doc.at("space"));
        if (doc.contains("config")) setup.config = config_from(doc.at("config"));
        return setup;
    });
}

ordered_json setup_to_json(const CampaignSetup& setup) {
    ordered_json j;
    j["schema"] = kConfigSchemaName;
    j["version"] = kStateSchemaVersion;
    j["space"] = space_json(setup.space);
    j["config"] = config_json(setup.config);
    return j;
}

CampaignSetup load_setup(const std::filesystem::path& path) {
    return setup_from_json(parse_document(read_file(path), kConfigSchemaName));
}

std::string format_double(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

void write_history_csv(const CampaignState& state, std::ostream& out) {
    const Index d = state.space.dims();
    out << "eval_index";
    for (Index k = 0; k < d; ++k) out << ",x_" << (k + 1);
    out << ",y,source,cumulative_best\n";
    double running = -std::numeric_limits<double>::infinity();
    for (const auto& r : state.history) {
        running = std::max(running, r.y);
        out << r.eval_index;
        for (Index k = 0; k < d; ++k) out << ',' << format_double(r.x[k]);
        out << ',' << format_double(r.y) << ',' << to_string(r.source) << ',' << format_double(running) << '\n';
    }
}

void write_traces_csv(const BenchmarkResult& result, std::ostream& out) {
    out << "method,seed,eval_index,observed,best_so_far\n";
    for (const auto& t : result.traces) {
        for (Index i = 0; i < t.observed.size(); ++i) {
            out << t.method << ',' << t.seed << ',' << (i + 1) << ',' << format_double(t.observed[i]) << ','
                << format_double(t.best_so_far[i]) << '\n';
        }
    }
}

void write_summary_csv(const BenchmarkResult& result, std::ostream& out) {
    out << "method,median,lower_quartile,upper_quartile\n";
    for (const auto& s : result.summary) {
        out << s.method << ',' << format_double(s.median) << ',' << format_double(s.lower_quartile) << ','
            << format_double(s.upper_quartile) << '\n';
    }
}

}  // namespace bopt
