#include <aibo/maximizer.hpp>

#include <aibo/heuristics.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace aibo {

std::vector<int> top_n_select(const Vector& af_values, int n) {
    const int k = static_cast<int>(af_values.size());
    if (n < 1 || n > k) throw std::invalid_argument("top_n_select: need 1 <= n <= k");
    std::vector<int> order(k);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b) { return af_values[a] > af_values[b]; });
    order.resize(n);
    return order;
}

Matrix top_n_select(const Matrix& raw, const Vector& af_values, int n) {
    if (raw.rows() != af_values.size()) throw std::invalid_argument("top_n_select: size mismatch");
    const auto idx = top_n_select(af_values, n);
    Matrix out(n, raw.cols());
    for (int i = 0; i < n; ++i) out.row(i) = raw.row(idx[i]);
    return out;
}

namespace {

Vector clamp_unit(Vector x) {
    return x.cwiseMax(0.0).cwiseMin(1.0);
}

Vector fd_gradient(const Vector& x, const AfEvaluator& af, double h) {
    Vector g(x.size());
    Vector probe = x;
    for (int j = 0; j < x.size(); ++j) {
        probe[j] = x[j] + h;
        const double up = af(probe, false).value;
        probe[j] = x[j] - h;
        const double down = af(probe, false).value;
        probe[j] = x[j];
        g[j] = (up - down) / (2.0 * h);
    }
    return g;
}

} // namespace

Candidate ascend(const Vector& start, const AfEvaluator& af, const MaximizerConfig& config) {
    Vector x = clamp_unit(start);
    double fx = af(x, false).value;
    if (!std::isfinite(fx)) throw std::runtime_error("ascend: non-finite acquisition value at start");

    double step = 0.1;
    for (int iter = 0; iter < config.max_iters; ++iter) {
        Vector g;
        if (config.gradient_mode == GradientMode::analytic) {
            const AfEvaluation eval = af(x, true);
            if (!eval.gradient.has_value()) {
                throw std::runtime_error("ascend: evaluator returned no gradient");
            }
            g = *eval.gradient;
        } else {
            g = fd_gradient(x, af, config.fd_step);
        }
        if (!g.allFinite() || g.norm() < 1e-12) break;

        bool accepted = false;
        double alpha = step;
        while (alpha >= config.step_tol) {
            Vector trial = clamp_unit(x + alpha * g);
            const Vector delta = trial - x;
            const double delta_norm = delta.norm();
            if (delta_norm < config.step_tol) break;
            const double ft = af(trial, false).value;
            if (std::isfinite(ft) && ft >= fx + config.armijo * g.dot(delta)) {
                x = std::move(trial);
                fx = ft;
                step = std::min(alpha * 2.0, 0.5);
                accepted = true;
                break;
            }
            alpha *= 0.5;
        }
        if (!accepted) break;
    }
    Candidate out;
    out.point = std::move(x);
    out.af_value = fx;
    return out;
}

Candidate multi_start_maximize(const Matrix& inits, const AfEvaluator& af,
                               const MaximizerConfig& config) {
    if (inits.rows() < 1) throw std::invalid_argument("multi_start_maximize: need at least one start");
    Candidate best;
    bool have = false;
    for (Eigen::Index i = 0; i < inits.rows(); ++i) {
        Candidate cand = ascend(inits.row(i).transpose(), af, config);
        if (!have || cand.af_value > best.af_value) {
            best = std::move(cand);
            have = true;
        }
    }
    return best;
}

Candidate cma_maximize(const Matrix& inits, const AfEvaluator& af, const CmaMaximizerConfig& config,
                       RngStream& rng) {
    if (inits.rows() < 1) throw std::invalid_argument("cma_maximize: need at least one init");
    const int d = static_cast<int>(inits.cols());

    Vector init_scores(inits.rows());
    for (Eigen::Index i = 0; i < inits.rows(); ++i) {
        init_scores[i] = af(inits.row(i).transpose(), false).value;
    }
    Candidate best;
    best.af_value = -std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < inits.rows(); ++i) {
        if (init_scores[i] > best.af_value) {
            best.af_value = init_scores[i];
            best.point = inits.row(i).transpose();
        }
    }

    // CMA-ES minimizes, so feed it the negated AF values.
    CmaState state = init_cmaes(inits, -init_scores, config.sigma0, config.lambda);
    for (int gen = 0; gen < config.generations; ++gen) {
        const Matrix points = cma_ask(state, config.lambda, rng);
        Vector values(config.lambda);
        for (int i = 0; i < config.lambda; ++i) {
            const double v = af(points.row(i).transpose(), false).value;
            values[i] = -v;
            if (v > best.af_value) {
                best.af_value = v;
                best.point = points.row(i).transpose();
            }
        }
        cma_tell(state, points, values);
    }
    return best;
}

} // namespace aibo
