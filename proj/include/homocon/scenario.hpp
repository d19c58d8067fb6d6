#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "homocon/graph.hpp"
#include "homocon/lmi.hpp"
#include "homocon/protocol.hpp"
#include "homocon/simulation.hpp"

namespace homocon {

/// One axis' protocol as written in a scenario file. Missing certificate
/// matrices are computed by the LMI solvers when the scenario is built.
struct ProtocolEntry {
    ProtocolKind kind = ProtocolKind::Linear;
    std::optional<double> mu;
    double lambda = 1.0;
    std::optional<Mat> p;
    std::optional<Mat> x;
    std::optional<RowVec> y;
};

struct OutputPaths {
    std::string trajectory = "trajectory.csv";
    std::string summary = "summary.csv";
};

/// Parsed, schema-checked scenario file. Nothing here has been verified
/// against the control-theoretic conditions yet.
struct ScenarioDocument {
    std::string name = "scenario";
    int num_followers = 0;
    std::vector<DirectedGraph::Edge> edges;
    int n = 2;
    std::vector<std::string> axes;
    std::vector<ProtocolEntry> protocols;     // one per axis
    std::vector<std::vector<Vec>> initial;    // [axis][agent]
    std::optional<std::vector<std::vector<double>>> amplitude;  // [axis][agent]
    double dt = 1e-3;
    double horizon = 20.0;
    Integrator integrator = Integrator::ImplicitEuler;
    std::uint64_t seed = 0;
    OutputPaths output;
};

/// Throws Error{ConfigError} on malformed JSON, unknown keys, wrong types
/// or inconsistent dimensions.
ScenarioDocument parse_scenario(std::string_view json_text);
ScenarioDocument load_scenario_file(const std::filesystem::path& path);

/// Serializes a document back to the file format (round-trips through
/// parse_scenario).
std::string scenario_to_json(const ScenarioDocument& doc);

/// Builds protocols, cones and monitor norms. Supplied certificates are
/// verified (Error{CertificateMissing} if they fail); absent ones are solved
/// for (Error{Infeasible} if that fails).
ScenarioConfig build_scenario(const ScenarioDocument& doc);

/// Margins of every certificate present in the document, one entry per axis
/// that carries matrices.
struct CertificateCheck {
    std::string axis;
    std::optional<CertificateP> p;
    std::optional<CertificateXY> xy;
    bool feasible() const noexcept;
};
std::vector<CertificateCheck> verify_certificates(const ScenarioDocument& doc);

enum class PresetRun { NominalMuMinus02, DisturbedMuMinus1, DisturbedMu0, LinearNominal };

/// The four preset experiments on the planar three-robot team.
ScenarioDocument preset_scenario(PresetRun run);
std::vector<PresetRun> preset_runs();

struct AxisSummary {
    std::string axis;
    std::string protocol;
    double mu = 0.0;
    std::optional<double> settling_time;
    double overshoot = 0.0;
    double min_barrier = 0.0;
    std::optional<double> violation_time;
    std::optional<double> rho;
    std::optional<double> theta;
    /// Only for n = 2, mu = -1, where the bound is defined.
    std::optional<double> q_bound;
};

struct RunSummary {
    std::string name;
    std::optional<double> settling_time;
    std::vector<AxisSummary> axes;
};

/// Settling time (tol), per-axis overshoot, barrier minimum and first
/// violation, plus rho / theta / disturbance bound for axes whose protocol
/// carries a P certificate.
RunSummary summarize(const std::string& name, const ScenarioConfig& cfg, const Trajectory& traj,
                     double tol = 1e-3);

/// Header plus one row per (run, axis); empty cells for absent values.
void write_summary_csv(std::ostream& os, const std::vector<RunSummary>& runs);

}  // namespace homocon
