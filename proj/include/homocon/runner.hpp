#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "homocon/error.hpp"
#include "homocon/scenario.hpp"

namespace homocon {

struct RunOverrides {
    std::optional<std::uint64_t> seed;
    std::optional<double> dt;
    std::optional<double> horizon;
};

void apply_overrides(ScenarioDocument& doc, const RunOverrides& overrides);

/// Writes to a sibling temporary file, then renames it over `path`.
void write_file_atomic(const std::filesystem::path& path, const std::string& content);

/// Builds, simulates and writes the trajectory and summary CSVs named in the
/// document's output section under `outdir`.
RunSummary run_to_files(const ScenarioDocument& doc, const std::filesystem::path& outdir);

/// The four preset runs. Every scenario is built (and its certificates
/// checked) before anything is written. Writes one trajectory CSV and one
/// scenario JSON per run plus `summary.csv`. Runs execute on up to `threads`
/// workers.
std::vector<RunSummary> run_presets(const std::filesystem::path& outdir, const RunOverrides& overrides,
                                        int threads);

/// HOMOCON_THREADS if set to a positive integer, else the hardware count.
int thread_budget();

/// 2 bad input, 3 infeasible certificate, 4 integration failure.
int exit_code_for(ErrorCode code) noexcept;

}  // namespace homocon
