#pragma once

#include <aibo/bo_loop.hpp>

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace aibo {

/// Raised for invalid CLI flags or config values (exit code 2).
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct CampaignConfig {
    BenchmarkSpec benchmark;
    LoopConfig loop;
    int repetitions = 5;
    std::uint64_t seed_base = 0;
    int jobs = 1;
    std::filesystem::path out_dir = "runs";
    std::optional<Variant> paired_variant; // run a second variant on the same seeds
};

/// Parse the CLI into a campaign config. Flags override config-file values;
/// variant presets apply only where the user did not pass an explicit flag.
CampaignConfig parse_cli(const std::vector<std::string>& args);

struct SummaryRow {
    int eval_index = 0;
    double median = 0.0;
    double mean = 0.0;
    double iqr = 0.0;
};

struct CampaignResult {
    std::vector<double> final_best;          // per repetition, primary variant
    std::vector<double> paired_final_best;   // per repetition, paired variant
    std::vector<SummaryRow> summary;
    std::vector<std::filesystem::path> trace_files;
    std::filesystem::path summary_file;
    std::filesystem::path compare_file;      // only for paired campaigns
};

/// Run R seeded repetitions (in parallel up to `jobs`), write one trace CSV
/// per run plus a summary CSV, and a paired-comparison CSV when configured.
/// Byte-identical outputs for identical config and seeds.
CampaignResult run_campaign(const CampaignConfig& config);

/// Shortest round-trip decimal formatting used in every CSV.
std::string format_double(double value);

void write_trace_csv(const std::filesystem::path& path, std::uint64_t run_seed,
                     const std::vector<TraceRow>& rows);

struct ParsedTrace {
    std::uint64_t run_seed = 0;
    std::vector<TraceRow> rows;
};
ParsedTrace read_trace_csv(const std::filesystem::path& path);

std::vector<SummaryRow> summarize(const std::vector<std::vector<TraceRow>>& traces);

/// Full CLI entry point: returns 0 on success, 2 on config errors, 1 on
/// runtime failures.
int run_cli(int argc, char** argv);

} // namespace aibo
