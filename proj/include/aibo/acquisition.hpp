#pragma once

#include <aibo/gp.hpp>
#include <aibo/types.hpp>

#include <functional>
#include <vector>

namespace aibo {

enum class AfKind { ucb_analytic, ei_analytic, ucb_mc, ei_mc };

/// UCB in the minimization convention: -mu + sqrt(beta) * sigma.
double ucb(double mu, double sigma, double beta);

/// Closed-form expected improvement over the incumbent (minimization form):
/// EI = (f* - mu) Phi(z) + sigma phi(z), z = (f* - mu) / sigma.
double ei_analytic(double mu, double sigma, double incumbent);

/// Acquisition configuration for one maximization episode. The base-sample
/// bank is frozen so the MC surface is deterministic; pending points are the
/// batch slots already chosen, in order.
struct AcquisitionSpec {
    AfKind kind = AfKind::ucb_mc;
    double beta = 1.96;
    int mc_samples = 128;
    Matrix base_samples;          // mc_samples x q_max, prefix-ordered
    Matrix select_samples;        // optional larger bank for candidate comparison
    std::vector<Vector> pending;
    double incumbent = 0.0;       // f*, transformed-objective units
};

/// MC estimate of the batch acquisition from a joint posterior over
/// pending + {x} (the free point last). Requires the posterior root.
double mc_af_value(const Posterior& post, const AcquisitionSpec& spec);

/// Acquisition surface bound to one fitted model and dataset. Owns the
/// pending-point conditioning caches; single-owner per episode (the internal
/// scratch buffers make concurrent calls on one instance unsafe).
class AcquisitionFunction {
public:
    AcquisitionFunction(const GpModel& model, const Dataset& data, AcquisitionSpec spec);

    int dim() const { return model_.dim(); }
    int pending_count() const { return static_cast<int>(spec_.pending.size()); }
    const AcquisitionSpec& spec() const { return spec_; }
    double incumbent() const { return spec_.incumbent; }

    /// AF value on the maximization bank.
    double value(const Vector& x) const;
    AfEvaluation value_and_gradient(const Vector& x) const;
    /// AF values for many candidates at once (rows of X).
    Vector value_batch(const Matrix& X) const;
    /// AF value on the (larger) selection bank; falls back to the
    /// maximization bank when no selection bank was provided.
    double select_value(const Vector& x) const;

    /// Append a chosen point to the pending batch and refresh the caches.
    void push_pending(const Vector& x);

    /// Closure for the gradient-based maximizer.
    AfEvaluator evaluator() const;

private:
    struct BankCache {
        const Matrix* bank = nullptr;
        int rows = 0;
        Matrix pending_draws;   // rows x p, zero-mean pending sample values
        Vector best_pending;    // per-sample best score over pending slots
    };

    struct PointStats {
        double mu = 0.0;
        double var = 0.0;       // clamped at zero
        Vector sigma_px;        // cross-covariance against pending
        Vector b;               // L_pp^-1 sigma_px
        double c = 0.0;         // conditional standard deviation
    };

    void rebuild_bank_cache(BankCache& cache) const;
    PointStats point_stats(const Vector& x) const;
    double mc_value(const PointStats& stats, const BankCache& cache) const;
    double analytic_value(double mu, double var) const;

    const GpModel& model_;
    const Dataset& data_;
    AcquisitionSpec spec_;

    // pending-point caches
    Matrix pending_pts_;   // p x d
    Matrix kp_;            // n x p kernel train vs pending
    Matrix vp_;            // n x p, chol^-1 kp
    Matrix wp_;            // n x p, (K + n2 I)^-1 kp
    Vector mu_p_;
    Matrix lpp_;           // p x p lower root of the pending covariance
    BankCache max_cache_;
    BankCache sel_cache_;

    // scratch (single-owner hot path)
    mutable Vector kstar_, v_, gx_;
    mutable Matrix gmat_;
};

/// Build a q-point batch greedily: solve one slot at a time against the AF
/// conditioned on the slots already chosen. The solver returns the point for
/// the given slot.
using SlotSolver = std::function<Vector(AcquisitionFunction&, int slot)>;
Matrix greedy_sequential_batch(AcquisitionFunction& af, int q, const SlotSolver& solver);

} // namespace aibo
