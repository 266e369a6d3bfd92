#pragma once

#include <aibo/dataset.hpp>
#include <aibo/types.hpp>

#include <cstdint>
#include <optional>

namespace aibo {

/// Fitted GP hyperparameters plus the cached Cholesky factor of
/// K + noise_variance * I and the solved vector alpha = (K + nI)^-1 (y - mean).
/// Immutable after construction; safe to share across readers.
struct GpModel {
    Vector lengthscales;      // unit-cube units, one per input dimension
    double signal_variance = 1.0;
    double noise_variance = 1e-4;
    double constant_mean = 0.0;
    Matrix chol;              // lower triangular
    Vector alpha;

    int dim() const { return static_cast<int>(lengthscales.size()); }
    int train_size() const { return static_cast<int>(alpha.size()); }
};

struct FitConfig {
    int restarts = 5;
    int max_iters = 100;
    double tol = 1e-6;               // stop when the LML improvement falls below this
    std::uint64_t seed = 0;
    double lengthscale_min = 0.005;
    double lengthscale_max = 20.0;
    double signal_min = 1e-3;
    double signal_max = 1e3;
    double noise_min = 1e-6;
    double noise_max = 0.01;
    std::optional<Vector> warm_start; // log-parameter vector [log l_1..d, log s2, log n2]
};

/// Matern-5/2 ARD covariance between two unit-cube points.
double matern52_ard(const Vector& x1, const Vector& x2, const GpModel& model);

/// Log marginal likelihood of the model's cached factorization against the
/// dataset's transformed targets. A non-finite result signals a broken factor.
double log_marginal_likelihood(const GpModel& model, const Dataset& data);

/// Log marginal likelihood (and optionally its gradient) as a function of the
/// log hyperparameters [log l_1..d, log s2, log n2]. The constant mean is
/// profiled out in closed form and held fixed for the gradient.
double lml_log_params(const Dataset& data, const Vector& log_params, Vector* grad = nullptr);

/// Maximize the log marginal likelihood by multi-restart projected gradient
/// ascent with backtracking. Deterministic given config.seed; restart ties go
/// to the lowest restart index.
GpModel fit(const Dataset& data, const FitConfig& config = {});

/// Rebuild the cached factorization for the given hyperparameters (used for
/// hand-constructed models in tests and by fit internally).
GpModel make_model(const Dataset& data, const Vector& lengthscales, double signal_variance,
                   double noise_variance, std::optional<double> constant_mean = std::nullopt);

struct Posterior {
    Vector mean;       // q entries, transformed-objective units
    Vector variance;   // diag of cov, clamped to >= 0
    Matrix cov;        // present when computed with want_cov
    Matrix root;       // lower triangular, root * root^T = cov (PSD-clamped)
    bool has_cov = false;
};

/// Joint posterior at q unit-cube query points (rows of `query`).
Posterior posterior(const GpModel& model, const Dataset& data, const Matrix& query, bool want_cov);

/// Lower-triangular root of a PSD matrix with zero-clamped pivots: columns
/// whose pivot falls below a relative tolerance are zeroed, so leading
/// principal blocks factor exactly as they would on their own.
Matrix psd_lower_root(const Matrix& symmetric);

/// Forward substitution that maps zero-pivot rows to zero instead of
/// dividing by the zero diagonal produced by psd_lower_root.
Vector guarded_forward_solve(const Matrix& lower, const Vector& rhs);

/// Variance floor applied before taking square roots.
inline constexpr double kVarianceFloor = 1e-12;

namespace detail {

/// Matern-5/2 correlation as a function of the ARD-scaled distance r.
double matern52_corr(double r);
/// d(corr)/dr divided by r; smooth at r = 0.
double matern52_dcorr_over_r(double r);
double scaled_distance(const Vector& a, const Vector& b, const Vector& lengthscales);
/// Pairwise scaled distances between rows of a and rows of b.
Matrix scaled_distance_matrix(const Matrix& a, const Matrix& b, const Vector& lengthscales);

} // namespace detail

} // namespace aibo
