#include "homocon/runner.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <sstream>
#include <thread>

namespace homocon {

void apply_overrides(ScenarioDocument& doc, const RunOverrides& overrides) {
    if (overrides.seed) doc.seed = *overrides.seed;
    if (overrides.dt) doc.dt = *overrides.dt;
    if (overrides.horizon) doc.horizon = *overrides.horizon;
    if (!(doc.dt > 0.0)) throw Error(ErrorCode::ConfigError, "dt must be positive");
    if (!(doc.horizon >= doc.dt)) throw Error(ErrorCode::ConfigError, "horizon must be at least dt");
}

void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error(ErrorCode::ConfigError, "cannot write " + tmp.string());
        out << content;
        out.close();
        if (!out) throw Error(ErrorCode::ConfigError, "write failed for " + tmp.string());
    }
    std::filesystem::rename(tmp, path);
}

namespace {

struct PreparedRun {
    ScenarioDocument doc;
    ScenarioConfig cfg;
};

std::string trajectory_csv(const Trajectory& traj) {
    std::ostringstream os;
    traj.write_csv(os);
    return os.str();
}

std::string summary_csv(const std::vector<RunSummary>& runs) {
    std::ostringstream os;
    write_summary_csv(os, runs);
    return os.str();
}

}  // namespace

RunSummary run_to_files(const ScenarioDocument& doc, const std::filesystem::path& outdir) {
    const ScenarioConfig cfg = build_scenario(doc);
    const Trajectory traj = simulate(cfg);
    RunSummary summary = summarize(doc.name, cfg, traj);
    std::filesystem::create_directories(outdir);
    write_file_atomic(outdir / doc.output.trajectory, trajectory_csv(traj));
    write_file_atomic(outdir / doc.output.summary, summary_csv({summary}));
    return summary;
}

std::vector<RunSummary> run_presets(const std::filesystem::path& outdir, const RunOverrides& overrides,
                                        int threads) {
    std::vector<PreparedRun> runs;
    for (PresetRun run : preset_runs()) {
        ScenarioDocument doc = preset_scenario(run);
        apply_overrides(doc, overrides);
        ScenarioConfig cfg = build_scenario(doc);
        runs.push_back({std::move(doc), std::move(cfg)});
    }

    std::vector<std::optional<RunSummary>> summaries(runs.size());
    std::vector<std::string> csv(runs.size());
    std::vector<std::exception_ptr> errors(runs.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i; (i = next.fetch_add(1)) < runs.size();) {
            try {
                const Trajectory traj = simulate(runs[i].cfg);
                csv[i] = trajectory_csv(traj);
                summaries[i] = summarize(runs[i].doc.name, runs[i].cfg, traj);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    const int workers = std::clamp(threads, 1, static_cast<int>(runs.size()));
    if (workers == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int t = 0; t < workers; ++t) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }
    for (const auto& e : errors)
        if (e) std::rethrow_exception(e);

    std::filesystem::create_directories(outdir);
    std::vector<RunSummary> out;
    for (std::size_t i = 0; i < runs.size(); ++i) {
        write_file_atomic(outdir / runs[i].doc.output.trajectory, csv[i]);
        write_file_atomic(outdir / (runs[i].doc.name + ".json"), scenario_to_json(runs[i].doc));
        out.push_back(std::move(*summaries[i]));
    }
    write_file_atomic(outdir / "summary.csv", summary_csv(out));
    return out;
}

int thread_budget() {
    if (const char* env = std::getenv("HOMOCON_THREADS")) {
        char* end = nullptr;
        const long v = std::strtol(env, &end, 10);
        if (end != env && *end == '\0' && v > 0) return static_cast<int>(std::min(v, 1024L));
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

int exit_code_for(ErrorCode code) noexcept {
    switch (code) {
        case ErrorCode::Infeasible:
        case ErrorCode::CertificateMissing:
        case ErrorCode::SingularX:
        case ErrorCode::NonPositiveRho:
            return 3;
        case ErrorCode::NonConvergentStep:
        case ErrorCode::NoConvergence:
            return 4;
        default:
            return 2;
    }
}

}  // namespace homocon
