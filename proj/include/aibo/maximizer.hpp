#pragma once

#include <aibo/rng.hpp>
#include <aibo/types.hpp>

#include <vector>

namespace aibo {

enum class GradientMode { analytic, finite_difference };

struct MaximizerConfig {
    int max_iters = 50;
    double step_tol = 1e-6;
    GradientMode gradient_mode = GradientMode::analytic;
    int starts = 1;               // n
    double fd_step = 1e-5;        // central differences, unit-cube coordinates
    double armijo = 1e-4;
};

struct Candidate {
    Vector point;                 // unit cube
    double af_value = 0.0;
    StrategyKind origin = StrategyKind::random_search;
};

/// Indices of the n highest AF values, ties broken by lowest input index,
/// ordered by descending value. Throws when fewer than n values are given.
std::vector<int> top_n_select(const Vector& af_values, int n);
/// Same, returning the selected rows of `raw`.
Matrix top_n_select(const Matrix& raw, const Vector& af_values, int n);

/// Projected gradient ascent with backtracking line search from one start.
/// The returned AF value never falls below the start's value.
Candidate ascend(const Vector& start, const AfEvaluator& af, const MaximizerConfig& config);

/// Run ascend from every row of `inits` and keep the best candidate
/// (lowest start index on ties).
Candidate multi_start_maximize(const Matrix& inits, const AfEvaluator& af,
                               const MaximizerConfig& config);

struct CmaMaximizerConfig {
    int generations = 50;
    int lambda = 20;
    double sigma0 = 0.2;
};

/// Maximize the AF with a fresh CMA-ES run seeded at the best init (the
/// BO-es baseline's inner maximizer). Tracks the best point ever evaluated,
/// inits included.
Candidate cma_maximize(const Matrix& inits, const AfEvaluator& af, const CmaMaximizerConfig& config,
                       RngStream& rng);

} // namespace aibo
