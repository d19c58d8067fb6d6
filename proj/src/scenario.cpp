#include "homocon/scenario.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "homocon/error.hpp"

namespace homocon {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& path, const std::string& msg) {
    throw Error(ErrorCode::ConfigError, path + ": " + msg);
}

void check_keys(const json& obj, const std::string& path, std::initializer_list<const char*> required,
                std::initializer_list<const char*> optional) {
    if (!obj.is_object()) fail(path, "expected an object");
    std::set<std::string> known;
    for (const char* k : required) {
        known.insert(k);
        if (!obj.contains(k)) fail(path, std::string("missing key '") + k + "'");
    }
    for (const char* k : optional) known.insert(k);
    for (const auto& [key, _] : obj.items()) {
        if (!known.count(key)) fail(path, "unknown key '" + key + "'");
    }
}

double get_number(const json& v, const std::string& path) {
    if (!v.is_number()) fail(path, "expected a number");
    const double d = v.get<double>();
    if (!std::isfinite(d)) fail(path, "expected a finite number");
    return d;
}

int get_int(const json& v, const std::string& path) {
    if (!v.is_number_integer()) fail(path, "expected an integer");
    return v.get<int>();
}

std::string get_string(const json& v, const std::string& path) {
    if (!v.is_string()) fail(path, "expected a string");
    return v.get<std::string>();
}

Vec get_vector(const json& v, int n, const std::string& path) {
    if (!v.is_array() || static_cast<int>(v.size()) != n) fail(path, "expected an array of " + std::to_string(n) + " numbers");
    Vec out(n);
    for (int i = 0; i < n; ++i) out(i) = get_number(v[i], path + "[" + std::to_string(i) + "]");
    return out;
}

// Row-major n x n matrix, either nested rows or a flat array of n*n numbers.
Mat get_matrix(const json& v, int n, const std::string& path) {
    if (!v.is_array()) fail(path, "expected a matrix");
    Mat out(n, n);
    if (static_cast<int>(v.size()) == n * n && (n == 1 || !v[0].is_array())) {
        for (int k = 0; k < n * n; ++k) out(k / n, k % n) = get_number(v[k], path);
        return out;
    }
    if (static_cast<int>(v.size()) != n) fail(path, "expected " + std::to_string(n) + " rows");
    for (int i = 0; i < n; ++i) out.row(i) = get_vector(v[i], n, path + "[" + std::to_string(i) + "]").transpose();
    return out;
}

json matrix_json(const Mat& m) {
    json rows = json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        json row = json::array();
        for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
        rows.push_back(row);
    }
    return rows;
}

template <class V>
json vector_json(const V& v) {
    json out = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
    return out;
}

ProtocolKind parse_kind(const std::string& s, const std::string& path) {
    for (auto k : {ProtocolKind::Linear, ProtocolKind::HomogeneousConsensus, ProtocolKind::HomogeneousNonOvershooting})
        if (to_string(k) == s) return k;
    fail(path, "unknown protocol kind '" + s + "'");
}

Integrator parse_integrator(const std::string& s, const std::string& path) {
    if (s == "implicit_euler") return Integrator::ImplicitEuler;
    if (s == "rk4") return Integrator::ExplicitRK4;
    fail(path, "integrator must be 'implicit_euler' or 'rk4'");
}

const char* integrator_name(Integrator i) { return i == Integrator::ImplicitEuler ? "implicit_euler" : "rk4"; }

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string fmt(const std::optional<double>& v) { return v ? fmt(*v) : std::string(); }

}  // namespace

ScenarioDocument parse_scenario(std::string_view text) {
    json root;
    try {
        root = json::parse(text);
    } catch (const json::parse_error& e) {
        fail("scenario", std::string("invalid JSON: ") + e.what());
    }
    check_keys(root, "scenario", {"graph", "system", "protocol", "initial", "sim"}, {"name", "disturbance", "output"});

    ScenarioDocument doc;
    if (root.contains("name")) doc.name = get_string(root["name"], "name");

    const json& graph = root["graph"];
    check_keys(graph, "graph", {"followers", "edges"}, {});
    doc.num_followers = get_int(graph["followers"], "graph.followers");
    if (doc.num_followers < 1) fail("graph.followers", "need at least one follower");
    if (!graph["edges"].is_array()) fail("graph.edges", "expected an array");
    for (std::size_t e = 0; e < graph["edges"].size(); ++e) {
        const std::string path = "graph.edges[" + std::to_string(e) + "]";
        const json& edge = graph["edges"][e];
        check_keys(edge, path, {"to", "from"}, {"weight"});
        DirectedGraph::Edge out{get_int(edge["to"], path + ".to"), get_int(edge["from"], path + ".from"), 1.0};
        if (edge.contains("weight")) out.weight = get_number(edge["weight"], path + ".weight");
        if (out.to < 0 || out.to > doc.num_followers || out.from < 0 || out.from > doc.num_followers) {
            fail(path, "agent index out of range");
        }
        doc.edges.push_back(out);
    }

    const json& system = root["system"];
    check_keys(system, "system", {"n", "axes"}, {});
    doc.n = get_int(system["n"], "system.n");
    if (doc.n < 1 || doc.n > kMaxDim) fail("system.n", "must be in [1, " + std::to_string(kMaxDim) + "]");
    if (!system["axes"].is_array() || system["axes"].empty()) fail("system.axes", "expected a non-empty array");
    for (const auto& a : system["axes"]) {
        std::string name = get_string(a, "system.axes");
        if (name.empty() || name.find_first_of(",\n\"") != std::string::npos) fail("system.axes", "invalid axis name");
        if (std::find(doc.axes.begin(), doc.axes.end(), name) != doc.axes.end()) fail("system.axes", "duplicate axis");
        doc.axes.push_back(std::move(name));
    }

    auto per_axis = [&](const json& section, const std::string& path) {
        if (!section.is_object()) fail(path, "expected an object keyed by axis name");
        for (const auto& [key, _] : section.items())
            if (std::find(doc.axes.begin(), doc.axes.end(), key) == doc.axes.end()) fail(path, "unknown axis '" + key + "'");
        for (const auto& a : doc.axes)
            if (!section.contains(a)) fail(path, "missing axis '" + a + "'");
    };

    const int agents = doc.num_followers + 1;
    per_axis(root["protocol"], "protocol");
    per_axis(root["initial"], "initial");
    for (const auto& a : doc.axes) {
        const std::string path = "protocol." + a;
        const json& p = root["protocol"][a];
        check_keys(p, path, {"kind"}, {"mu", "lambda", "P", "X", "Y"});
        ProtocolEntry entry;
        entry.kind = parse_kind(get_string(p["kind"], path + ".kind"), path + ".kind");
        if (p.contains("mu")) entry.mu = get_number(p["mu"], path + ".mu");
        if (p.contains("lambda")) entry.lambda = get_number(p["lambda"], path + ".lambda");
        if (!(entry.lambda > 0.0)) fail(path + ".lambda", "must be positive");
        if (p.contains("P")) entry.p = get_matrix(p["P"], doc.n, path + ".P");
        if (p.contains("X")) entry.x = get_matrix(p["X"], doc.n, path + ".X");
        if (p.contains("Y")) entry.y = get_vector(p["Y"], doc.n, path + ".Y").transpose();
        if (entry.kind != ProtocolKind::Linear && !entry.mu) fail(path, "homogeneous protocols need 'mu'");
        if (entry.x.has_value() != entry.y.has_value()) fail(path, "'X' and 'Y' come together");
        if (entry.kind == ProtocolKind::HomogeneousConsensus && entry.p) fail(path, "consensus protocols take X/Y, not P");
        if (entry.kind != ProtocolKind::HomogeneousConsensus && entry.x) fail(path, "X/Y belong to consensus protocols");
        doc.protocols.push_back(std::move(entry));

        const json& init = root["initial"][a];
        if (!init.is_array() || static_cast<int>(init.size()) != agents) {
            fail("initial." + a, "expected " + std::to_string(agents) + " states (leader first)");
        }
        std::vector<Vec> states;
        for (int i = 0; i < agents; ++i)
            states.push_back(get_vector(init[i], doc.n, "initial." + a + "[" + std::to_string(i) + "]"));
        doc.initial.push_back(std::move(states));
    }

    if (root.contains("disturbance") && !root["disturbance"].is_null()) {
        const json& d = root["disturbance"];
        check_keys(d, "disturbance", {"amplitude"}, {});
        per_axis(d["amplitude"], "disturbance.amplitude");
        std::vector<std::vector<double>> amp;
        for (const auto& a : doc.axes) {
            const std::string path = "disturbance.amplitude." + a;
            const Vec row = get_vector(d["amplitude"][a], agents, path);
            if ((row.array() < 0.0).any()) fail(path, "amplitudes must be >= 0");
            amp.emplace_back(row.data(), row.data() + agents);
        }
        doc.amplitude = std::move(amp);
    }

    const json& sim = root["sim"];
    check_keys(sim, "sim", {}, {"dt", "horizon", "integrator", "seed"});
    if (sim.contains("dt")) doc.dt = get_number(sim["dt"], "sim.dt");
    if (sim.contains("horizon")) doc.horizon = get_number(sim["horizon"], "sim.horizon");
    if (sim.contains("integrator")) doc.integrator = parse_integrator(get_string(sim["integrator"], "sim.integrator"), "sim.integrator");
    if (sim.contains("seed")) {
        if (!sim["seed"].is_number_unsigned()) fail("sim.seed", "expected a non-negative integer");
        doc.seed = sim["seed"].get<std::uint64_t>();
    }
    if (!(doc.dt > 0.0)) fail("sim.dt", "must be positive");
    if (!(doc.horizon >= doc.dt)) fail("sim.horizon", "must be at least dt");

    if (root.contains("output")) {
        const json& o = root["output"];
        check_keys(o, "output", {}, {"trajectory", "summary"});
        if (o.contains("trajectory")) doc.output.trajectory = get_string(o["trajectory"], "output.trajectory");
        if (o.contains("summary")) doc.output.summary = get_string(o["summary"], "output.summary");
    }
    return doc;
}

ScenarioDocument load_scenario_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::ConfigError, "cannot open " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_scenario(ss.str());
}

std::string scenario_to_json(const ScenarioDocument& doc) {
    json root;
    root["name"] = doc.name;
    json edges = json::array();
    for (const auto& e : doc.edges) edges.push_back({{"to", e.to}, {"from", e.from}, {"weight", e.weight}});
    root["graph"] = {{"followers", doc.num_followers}, {"edges", edges}};
    root["system"] = {{"n", doc.n}, {"axes", doc.axes}};
    for (std::size_t a = 0; a < doc.axes.size(); ++a) {
        const auto& p = doc.protocols[a];
        json entry = {{"kind", std::string(to_string(p.kind))}, {"lambda", p.lambda}};
        if (p.mu) entry["mu"] = *p.mu;
        if (p.p) entry["P"] = matrix_json(*p.p);
        if (p.x) entry["X"] = matrix_json(*p.x);
        if (p.y) entry["Y"] = vector_json(*p.y);
        root["protocol"][doc.axes[a]] = entry;
        json states = json::array();
        for (const auto& x : doc.initial[a]) states.push_back(vector_json(x));
        root["initial"][doc.axes[a]] = states;
        if (doc.amplitude) root["disturbance"]["amplitude"][doc.axes[a]] = (*doc.amplitude)[a];
    }
    root["sim"] = {{"dt", doc.dt},
                   {"horizon", doc.horizon},
                   {"integrator", integrator_name(doc.integrator)},
                   {"seed", doc.seed}};
    root["output"] = {{"trajectory", doc.output.trajectory}, {"summary", doc.output.summary}};
    return root.dump(2) + "\n";
}

ScenarioConfig build_scenario(const ScenarioDocument& doc) {
    const IntegratorChain chain(doc.n);
    ScenarioConfig cfg{DirectedGraph::from_edges(doc.num_followers, doc.edges), doc.n, {}, std::nullopt,
                       doc.dt, doc.horizon, doc.integrator};
    for (std::size_t a = 0; a < doc.axes.size(); ++a) {
        const auto& entry = doc.protocols[a];
        std::optional<ProtocolSpec> spec;
        std::optional<HomogeneousNormContext> monitor;
        switch (entry.kind) {
            case ProtocolKind::Linear:
                spec = ProtocolSpec::linear(doc.n, entry.lambda);
                if (entry.p) monitor.emplace(DilationGenerator(doc.n, entry.mu.value_or(0.0)), *entry.p);
                break;
            case ProtocolKind::HomogeneousNonOvershooting: {
                const DilationGenerator gen(doc.n, *entry.mu);
                CertificateP cert;
                if (entry.p) {
                    cert.p = *entry.p;
                } else {
                    cert = solve_lmi_P(gen, chain.a, chain.b, linear_gain(doc.n, entry.lambda));
                }
                spec = ProtocolSpec::homogeneous_non_overshooting(gen, entry.lambda, cert);
                break;
            }
            case ProtocolKind::HomogeneousConsensus: {
                const DilationGenerator gen(doc.n, *entry.mu);
                CertificateXY cert;
                if (entry.x) {
                    cert.x = *entry.x;
                    cert.y = *entry.y;
                } else {
                    cert = solve_lmi_XY(gen, chain.a, chain.b);
                }
                spec = ProtocolSpec::homogeneous_consensus(gen, cert);
                break;
            }
        }
        cfg.axes.push_back(AxisConfig{doc.axes[a], *spec, doc.initial[a], ConeSpec(doc.n, entry.lambda, entry.mu),
                                      std::move(monitor)});
    }
    if (doc.amplitude) cfg.disturbance = DisturbanceSpec{*doc.amplitude, doc.seed};
    return cfg;
}

bool CertificateCheck::feasible() const noexcept {
    return (!p || p->feasible) && (!xy || xy->feasible);
}

std::vector<CertificateCheck> verify_certificates(const ScenarioDocument& doc) {
    const IntegratorChain chain(doc.n);
    std::vector<CertificateCheck> out;
    for (std::size_t a = 0; a < doc.axes.size(); ++a) {
        const auto& entry = doc.protocols[a];
        if (!entry.p && !entry.x) continue;
        const DilationGenerator gen(doc.n, entry.mu.value_or(0.0));
        CertificateCheck check{doc.axes[a], std::nullopt, std::nullopt};
        if (entry.p) check.p = verify_lmi_P(*entry.p, gen, chain.a, chain.b, linear_gain(doc.n, entry.lambda));
        if (entry.x) check.xy = verify_lmi_XY(*entry.x, *entry.y, gen, chain.a, chain.b);
        out.push_back(std::move(check));
    }
    return out;
}

std::vector<PresetRun> preset_runs() {
    return {PresetRun::NominalMuMinus02, PresetRun::DisturbedMuMinus1, PresetRun::DisturbedMu0, PresetRun::LinearNominal};
}

ScenarioDocument preset_scenario(PresetRun run) {
    ScenarioDocument doc;
    doc.num_followers = 3;
    // Chain leader -> 1 -> 2 with a two-way link between robots 2 and 3.
    doc.edges = {{1, 0, 1.0}, {2, 1, 1.0}, {3, 2, 1.0}, {2, 3, 1.0}};
    doc.n = 2;
    doc.axes = {"X", "Y"};
    auto v = [](double a, double b) {
        Vec x(2);
        x << a, b;
        return x;
    };
    doc.initial = {{v(0, 0), v(-4, 1), v(-6, 1), v(-8, 1)}, {v(0, 1), v(2, 1), v(-2, 1), v(4, 1)}};

    Mat p(2, 2);
    p << 0.0020, 0.0005, 0.0005, 0.0012;
    Mat x(2, 2);
    x << 0.8281, -0.3107, -0.3107, 0.9377;
    RowVec y(2);
    y << 0.7502, 0.5000;
    auto non_overshooting = [&](double mu) {
        return ProtocolEntry{ProtocolKind::HomogeneousNonOvershooting, mu, 1.0, p, std::nullopt, std::nullopt};
    };
    auto consensus = [&](double mu) {
        return ProtocolEntry{ProtocolKind::HomogeneousConsensus, mu, 1.0, std::nullopt, x, y};
    };
    const ProtocolEntry linear_x{ProtocolKind::Linear, 0.0, 1.0, p, std::nullopt, std::nullopt};
    const ProtocolEntry linear_y{ProtocolKind::Linear, std::nullopt, 1.0, std::nullopt, std::nullopt, std::nullopt};
    const std::vector<std::vector<double>> amplitude = {{0.0, 0.540, 0.444, 0.462}, {0.030, 0.428, 0.533, 0.441}};

    switch (run) {
        case PresetRun::NominalMuMinus02:
            doc.name = "mu_-0.2_nominal";
            doc.protocols = {non_overshooting(-0.2), consensus(-0.2)};
            doc.seed = 1;
            break;
        case PresetRun::DisturbedMuMinus1:
            doc.name = "mu_-1_disturbed";
            doc.protocols = {non_overshooting(-1.0), consensus(-1.0)};
            doc.amplitude = amplitude;
            doc.seed = 2;
            break;
        case PresetRun::DisturbedMu0:
            doc.name = "mu_0_disturbed";
            doc.protocols = {linear_x, consensus(0.0)};
            doc.amplitude = amplitude;
            doc.seed = 2;
            break;
        case PresetRun::LinearNominal:
            doc.name = "linear_nominal";
            doc.protocols = {linear_x, linear_y};
            doc.seed = 4;
            break;
    }
    doc.output.trajectory = doc.name + ".csv";
    doc.output.summary = doc.name + "_summary.csv";
    return doc;
}

RunSummary summarize(const std::string& name, const ScenarioConfig& cfg, const Trajectory& traj, double tol) {
    RunSummary out{name, settling_time(traj, tol), {}};
    const IntegratorChain chain(cfg.n);
    for (int a = 0; a < static_cast<int>(cfg.axes.size()); ++a) {
        const auto& axis = cfg.axes[a];
        const ConeSpec cone = effective_cone(axis, cfg.n);
        const HomogeneousNormContext* norm = effective_norm(axis);
        const auto report =
            invariance_monitor(traj, a, cone, norm, norm ? BarrierMode::Homogeneous : BarrierMode::Linear);
        AxisSummary s;
        s.axis = axis.name;
        s.protocol = std::string(to_string(axis.protocol.kind()));
        s.mu = norm ? norm->generator().mu() : 0.0;
        s.settling_time = settling_time(traj, a, tol);
        s.overshoot = overshoot_metric(traj, a);
        s.min_barrier = report.min_barrier;
        s.violation_time = report.first_violation_time;
        if (norm) {
            try {
                const Mat a_cl = chain.a - chain.b * axis.protocol.gain();
                const auto rc = robustness_constants(norm->shape(), norm->generator(), a_cl, cone.h(), cone.lambda());
                s.rho = rc.rho;
                s.theta = rc.theta;
                if (cfg.n == 2 && norm->generator().mu() == -1.0) s.q_bound = rc.q_bound;
            } catch (const Error&) {
                // Metrics only; a missing decay certificate leaves them empty.
            }
        }
        out.axes.push_back(std::move(s));
    }
    return out;
}

void write_summary_csv(std::ostream& os, const std::vector<RunSummary>& runs) {
    os << "run,axis,protocol,mu,settling_time,axis_settling_time,overshoot,min_barrier,violation_time,rho,theta,"
          "disturbance_bound\n";
    for (const auto& run : runs) {
        for (const auto& s : run.axes) {
            os << run.name << ',' << s.axis << ',' << s.protocol << ',' << fmt(s.mu) << ',' << fmt(run.settling_time)
               << ',' << fmt(s.settling_time) << ',' << fmt(s.overshoot) << ',' << fmt(s.min_barrier) << ','
               << fmt(s.violation_time) << ',';
            os << fmt(s.rho) << ',' << fmt(s.theta) << ',' << fmt(s.q_bound);
            os << '\n';
        }
    }
}

}  // namespace homocon
