#pragma once

#include <aibo/acquisition.hpp>
#include <aibo/benchmarks.hpp>
#include <aibo/dataset.hpp>
#include <aibo/gp.hpp>
#include <aibo/heuristics.hpp>
#include <aibo/maximizer.hpp>

#include <array>
#include <cstdint>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

namespace aibo {

enum class Variant { aibo, aibo_none, bo_grad, bo_es, bo_random, aibo_ga, aibo_cmaes, aibo_gacma };

Variant variant_from_string(std::string_view name);
const char* to_string(Variant variant);

/// How each variant turns top-n initial points into a candidate.
enum class MaximizerMode { gradient, none, cmaes };
MaximizerMode maximizer_mode(Variant variant);

struct LoopConfig {
    int total_evals = 1000;       // full budget, initial design included
    int init_samples = 50;        // N
    int raw_per_strategy = 500;   // k
    int starts = 1;               // n
    int batch = 10;               // q
    std::vector<StrategyKind> strategies = {StrategyKind::cmaes, StrategyKind::ga,
                                            StrategyKind::random_search};
    Variant variant = Variant::aibo;
    AfKind af_kind = AfKind::ucb_mc;
    double beta = 1.96;
    int mc_samples_maximize = 128;
    int mc_samples_select = 512;
    bool low_discrepancy = true;
    StrategyOptions strategy_options;
    MaximizerConfig maximizer;
    CmaMaximizerConfig af_cmaes;  // inner maximizer settings for bo_es
    int first_fit_restarts = 5;
    int first_fit_max_iters = 100;
    int refit_max_iters = 25;     // warm-started refits inside the loop
    double fit_tol = 1e-6;
    std::uint64_t seed = 0;
};

/// Overwrite the strategy set, maximizer mode and (k, n) presets implied by
/// config.variant. Callers that let users override k/n should apply their
/// explicit values afterwards.
void apply_variant(LoopConfig& config);

/// Cumulative per-strategy win counts (indexed by StrategyKind).
struct DiagnosticCounters {
    std::array<long, 4> wins_af_value{};
    std::array<long, 4> wins_low_mean{};
    std::array<long, 4> wins_high_variance{};
    long slots = 0;

    long af(StrategyKind k) const { return wins_af_value[static_cast<int>(k)]; }
    long mean(StrategyKind k) const { return wins_low_mean[static_cast<int>(k)]; }
    long variance(StrategyKind k) const { return wins_high_variance[static_cast<int>(k)]; }
};

struct TraceRow {
    int iteration = 0;            // 0 for the initial design
    int eval_index = 0;           // 1-based, strictly increasing
    std::string strategy;         // "init" or the chosen strategy
    double af_value = 0.0;        // NaN for initial-design rows
    double y_raw = 0.0;           // objective value as returned
    double best_so_far = 0.0;
    DiagnosticCounters counters;  // cumulative snapshot at this row
};

/// One strategy's candidate in one batch slot, with its selection-stage AF
/// value and the marginal posterior at the point (transformed scale).
struct SlotCandidate {
    StrategyKind kind = StrategyKind::random_search;
    Vector point;
    double af_value = 0.0;
    double post_mean = 0.0;
    double post_variance = 0.0;
};

struct SlotRecord {
    int iteration = 0;
    int slot = 0;
    std::vector<SlotCandidate> candidates;
    int chosen = 0;
    DiagnosticCounters counters; // cumulative snapshot after this slot
};

struct Problem {
    std::function<double(const Vector&)> objective; // original-domain coordinates
    Bounds bounds;
};
Problem make_problem(const BenchmarkSpec& spec);

struct RunResult {
    std::vector<TraceRow> trace;
    std::vector<SlotRecord> slots;
    double final_best = std::numeric_limits<double>::infinity();
};

/// Execute the full loop: initial design, per-iteration GP fit and greedy
/// batch construction, heuristic updates, trace collection. Deterministic
/// given the config seed.
RunResult run(const Problem& problem, const LoopConfig& config);

/// Argmax by AF value, ties to the lowest strategy index.
Candidate select_query(const std::vector<Candidate>& candidates);

/// Credit the slot's AF-value / posterior-mean / posterior-variance winners.
void update_diagnostics(DiagnosticCounters& counters,
                        const std::vector<SlotCandidate>& candidates);

} // namespace aibo
