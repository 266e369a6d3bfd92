#pragma once

#include <Eigen/Core>

#include <functional>
#include <optional>

namespace aibo {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

enum class StrategyKind { cmaes, ga, random_search, gaussian_spray };

const char* to_string(StrategyKind kind);

/// Value (and optionally gradient) of an acquisition surface at one point.
struct AfEvaluation {
    double value = 0.0;
    std::optional<Vector> gradient;
};

/// Callable acquisition surface handed to the maximizer. The surface must be
/// deterministic for the lifetime of one maximization episode.
using AfEvaluator = std::function<AfEvaluation(const Vector& x, bool want_gradient)>;

} // namespace aibo
