#include <aibo/gp.hpp>

#include <aibo/rng.hpp>

#include <Eigen/Cholesky>
#include <Eigen/Dense>

#include <cmath>
#include <stdexcept>

namespace aibo {

namespace detail {

double matern52_corr(double r) {
    constexpr double kSqrt5 = 2.2360679774997896964;
    const double sr = kSqrt5 * r;
    return (1.0 + sr + sr * sr / 3.0) * std::exp(-sr);
}

// The full derivative is d(corr)/dr = -(5/3) r (1 + sqrt5 r) exp(-sqrt5 r);
// dividing by r leaves a factor that is smooth at r = 0.
double matern52_dcorr_over_r(double r) {
    constexpr double kSqrt5 = 2.2360679774997896964;
    return -(5.0 / 3.0) * (1.0 + kSqrt5 * r) * std::exp(-kSqrt5 * r);
}

double scaled_distance(const Vector& a, const Vector& b, const Vector& lengthscales) {
    double s = 0.0;
    for (int j = 0; j < a.size(); ++j) {
        const double u = (a[j] - b[j]) / lengthscales[j];
        s += u * u;
    }
    return std::sqrt(s);
}

Matrix scaled_distance_matrix(const Matrix& a, const Matrix& b, const Vector& lengthscales) {
    const Matrix as = a * lengthscales.cwiseInverse().asDiagonal();
    const Matrix bs = b * lengthscales.cwiseInverse().asDiagonal();
    const Vector an = as.rowwise().squaredNorm();
    const Vector bn = bs.rowwise().squaredNorm();
    Matrix d2 = -2.0 * as * bs.transpose();
    d2.colwise() += an;
    d2.rowwise() += bn.transpose();
    return d2.cwiseMax(0.0).cwiseSqrt();
}

} // namespace detail

namespace {

using detail::matern52_corr;
using detail::matern52_dcorr_over_r;
using detail::scaled_distance;
using detail::scaled_distance_matrix;

struct LltResult {
    Matrix lower;
    double jitter = 0.0;
};

LltResult llt_with_jitter(Matrix a) {
    double jitter = 0.0;
    for (int attempt = 0; attempt <= 6; ++attempt) {
        Matrix trial = a;
        if (jitter > 0.0) trial.diagonal().array() += jitter;
        Eigen::LLT<Matrix> llt(trial);
        if (llt.info() == Eigen::Success) {
            return {Matrix(llt.matrixL()), jitter};
        }
        jitter = (jitter == 0.0) ? 1e-10 : jitter * 10.0;
    }
    throw std::runtime_error("Cholesky factorization failed after jitter escalation");
}

struct LmlEval {
    double value = 0.0;
    Matrix chol;      // lower factor of K + n2 I (with any jitter applied)
    Vector alpha;
    double mean = 0.0;
};

LmlEval lml_core(const Dataset& data, const Vector& lengthscales, double signal_var,
                 double noise_var, Vector* grad) {
    const int n = data.size();
    const Matrix& x = data.inputs_unit();
    const Vector& y = data.targets_tf();

    Matrix r = scaled_distance_matrix(x, x, lengthscales);
    Matrix kf(n, n);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j <= i; ++j) {
            const double v = signal_var * matern52_corr(r(i, j));
            kf(i, j) = v;
            kf(j, i) = v;
        }
    }
    Matrix a = kf;
    a.diagonal().array() += noise_var;
    LltResult llt = llt_with_jitter(std::move(a));
    const Matrix& lo = llt.lower;

    // Profile the constant mean in closed form: m = (1' A^-1 y) / (1' A^-1 1).
    Vector u = lo.triangularView<Eigen::Lower>().solve(y);
    Vector ones = Vector::Ones(n);
    Vector w = lo.triangularView<Eigen::Lower>().solve(ones);
    const double denom = w.squaredNorm();
    const double mean = (denom > 0.0) ? u.dot(w) / denom : 0.0;
    Vector resid_white = u - mean * w;             // L^-1 (y - m)
    Vector alpha = lo.transpose().triangularView<Eigen::Upper>().solve(resid_white);

    LmlEval out;
    out.chol = llt.lower;
    out.alpha = alpha;
    out.mean = mean;
    out.value = -0.5 * resid_white.squaredNorm() -
                llt.lower.diagonal().array().log().sum() -
                0.5 * n * std::log(2.0 * M_PI);

    if (grad != nullptr) {
        grad->resize(lengthscales.size() + 2);
        // M = alpha alpha' - A^-1; dLML/dtheta = 0.5 tr(M dA/dtheta).
        Matrix ainv = Matrix::Identity(n, n);
        lo.triangularView<Eigen::Lower>().solveInPlace(ainv);
        lo.transpose().triangularView<Eigen::Upper>().solveInPlace(ainv);
        Matrix m = alpha * alpha.transpose() - ainv;

        // Shared elementwise factor for lengthscale directions:
        // dK/dlog l_j = E .* u_j^2 with E = s2 (5/3)(1+sqrt5 r)exp(-sqrt5 r).
        Matrix e(n, n);
        for (int i = 0; i < n; ++i) {
            for (int j = 0; j <= i; ++j) {
                const double v = -signal_var * matern52_dcorr_over_r(r(i, j)) * m(i, j);
                e(i, j) = v;
                e(j, i) = v;
            }
        }
        const Vector e_rowsum = e.rowwise().sum();
        for (int j = 0; j < lengthscales.size(); ++j) {
            const Vector col = x.col(j);
            const double quad = col.dot(e * col);
            const double sum = col.cwiseAbs2().dot(e_rowsum) - quad;
            (*grad)[j] = sum / (lengthscales[j] * lengthscales[j]);
        }
        (*grad)[lengthscales.size()] = 0.5 * m.cwiseProduct(kf).sum();
        (*grad)[lengthscales.size() + 1] = 0.5 * noise_var * m.trace();
    }
    return out;
}

Vector clip(const Vector& v, const Vector& lo, const Vector& hi) {
    return v.cwiseMax(lo).cwiseMin(hi);
}

} // namespace

double matern52_ard(const Vector& x1, const Vector& x2, const GpModel& model) {
    if (x1.size() != model.dim() || x2.size() != model.dim()) {
        throw std::invalid_argument("matern52_ard: dimension mismatch");
    }
    return model.signal_variance * matern52_corr(scaled_distance(x1, x2, model.lengthscales));
}

double log_marginal_likelihood(const GpModel& model, const Dataset& data) {
    const int n = data.size();
    if (model.train_size() != n) {
        throw std::invalid_argument("log_marginal_likelihood: model factor does not match dataset size");
    }
    const Vector resid = data.targets_tf().array() - model.constant_mean;
    return -0.5 * resid.dot(model.alpha) - model.chol.diagonal().array().log().sum() -
           0.5 * n * std::log(2.0 * M_PI);
}

double lml_log_params(const Dataset& data, const Vector& log_params, Vector* grad) {
    const int d = data.dim();
    if (log_params.size() != d + 2) throw std::invalid_argument("lml_log_params: bad parameter length");
    const Vector lengthscales = log_params.head(d).array().exp();
    const double s2 = std::exp(log_params[d]);
    const double n2 = std::exp(log_params[d + 1]);
    return lml_core(data, lengthscales, s2, n2, grad).value;
}

GpModel make_model(const Dataset& data, const Vector& lengthscales, double signal_variance,
                   double noise_variance, std::optional<double> constant_mean) {
    if (lengthscales.size() != data.dim()) throw std::invalid_argument("make_model: dimension mismatch");
    LmlEval eval = lml_core(data, lengthscales, signal_variance, noise_variance, nullptr);
    GpModel model;
    model.lengthscales = lengthscales;
    model.signal_variance = signal_variance;
    model.noise_variance = noise_variance;
    model.chol = std::move(eval.chol);
    if (constant_mean.has_value()) {
        // Re-solve alpha against the requested mean instead of the profiled one.
        model.constant_mean = *constant_mean;
        const Vector resid = data.targets_tf().array() - model.constant_mean;
        model.alpha = model.chol.triangularView<Eigen::Lower>().solve(resid);
        model.alpha = model.chol.transpose().triangularView<Eigen::Upper>().solve(model.alpha);
    } else {
        model.constant_mean = eval.mean;
        model.alpha = std::move(eval.alpha);
    }
    return model;
}

GpModel fit(const Dataset& data, const FitConfig& config) {
    const int n = data.size();
    const int d = data.dim();
    if (n < 2) throw std::invalid_argument("fit: need at least 2 points");

    Vector lo(d + 2), hi(d + 2);
    lo.head(d).setConstant(std::log(config.lengthscale_min));
    hi.head(d).setConstant(std::log(config.lengthscale_max));
    lo[d] = std::log(config.signal_min);
    hi[d] = std::log(config.signal_max);
    lo[d + 1] = std::log(config.noise_min);
    hi[d + 1] = std::log(config.noise_max);

    RngStream rng(config.seed);
    RngStream restart_rng = rng.split("fit/restarts");

    Vector best_theta;
    double best_value = -std::numeric_limits<double>::infinity();

    const int restarts = std::max(1, config.restarts);
    for (int restart = 0; restart < restarts; ++restart) {
        Vector theta(d + 2);
        if (restart == 0) {
            if (config.warm_start.has_value() && config.warm_start->size() == d + 2) {
                theta = *config.warm_start;
            } else {
                theta.head(d).setConstant(std::log(0.5));
                theta[d] = 0.0;
                theta[d + 1] = std::log(1e-4);
            }
        } else {
            for (int j = 0; j < d; ++j) theta[j] = restart_rng.uniform(std::log(0.05), std::log(5.0));
            theta[d] = restart_rng.uniform(std::log(0.3), std::log(3.0));
            theta[d + 1] = restart_rng.uniform(std::log(config.noise_min), std::log(config.noise_max));
        }
        theta = clip(theta, lo, hi);

        Vector grad(d + 2);
        double value = lml_log_params(data, theta, &grad);
        double step = 0.1;
        for (int iter = 0; iter < config.max_iters; ++iter) {
            if (!grad.allFinite()) break;
            bool accepted = false;
            double alpha = step;
            Vector trial;
            double trial_value = 0.0;
            for (int half = 0; half < 30; ++half) {
                trial = clip(theta + alpha * grad, lo, hi);
                const Vector delta = trial - theta;
                if (delta.norm() < 1e-12) break;
                trial_value = lml_log_params(data, trial, nullptr);
                if (std::isfinite(trial_value) && trial_value >= value + 1e-4 * grad.dot(delta)) {
                    accepted = true;
                    break;
                }
                alpha *= 0.5;
                if (alpha < 1e-7) break;
            }
            if (!accepted) break;
            const double improvement = trial_value - value;
            theta = trial;
            value = lml_log_params(data, theta, &grad);
            step = std::min(alpha * 1.5, 1.0);
            if (improvement < config.tol) break;
        }
        if (value > best_value) {
            best_value = value;
            best_theta = theta;
        }
    }

    if (!best_theta.allFinite()) throw std::runtime_error("fit: optimizer produced non-finite parameters");
    const Vector lengthscales = best_theta.head(d).array().exp();
    return make_model(data, lengthscales, std::exp(best_theta[d]), std::exp(best_theta[d + 1]));
}

Posterior posterior(const GpModel& model, const Dataset& data, const Matrix& query, bool want_cov) {
    const int n = data.size();
    const int q = static_cast<int>(query.rows());
    if (q < 1) throw std::invalid_argument("posterior: need at least one query point");
    if (query.cols() != model.dim()) throw std::invalid_argument("posterior: dimension mismatch");
    if (model.train_size() != n) throw std::invalid_argument("posterior: model does not match dataset");

    const Matrix r = scaled_distance_matrix(data.inputs_unit(), query, model.lengthscales);
    Matrix kstar(n, q);
    for (int c = 0; c < q; ++c) {
        for (int i = 0; i < n; ++i) kstar(i, c) = model.signal_variance * matern52_corr(r(i, c));
    }
    const Matrix v = model.chol.triangularView<Eigen::Lower>().solve(kstar);

    Posterior post;
    post.mean = (kstar.transpose() * model.alpha).array() + model.constant_mean;
    post.variance.resize(q);
    for (int c = 0; c < q; ++c) {
        post.variance[c] = std::max(model.signal_variance - v.col(c).squaredNorm(), 0.0);
    }
    if (want_cov) {
        post.cov.resize(q, q);
        for (int i = 0; i < q; ++i) {
            post.cov(i, i) = post.variance[i];
            for (int j = 0; j < i; ++j) {
                const double kq = model.signal_variance *
                                  matern52_corr(scaled_distance(query.row(i).transpose(),
                                                                query.row(j).transpose(),
                                                                model.lengthscales));
                const double cij = kq - v.col(i).dot(v.col(j));
                post.cov(i, j) = cij;
                post.cov(j, i) = cij;
            }
        }
        post.root = psd_lower_root(post.cov);
        post.has_cov = true;
    }
    return post;
}

Matrix psd_lower_root(const Matrix& symmetric) {
    const int q = static_cast<int>(symmetric.rows());
    const double tol = 1e-12 * std::max(1.0, symmetric.diagonal().maxCoeff());
    Matrix lower = Matrix::Zero(q, q);
    for (int k = 0; k < q; ++k) {
        double pivot = symmetric(k, k);
        for (int m = 0; m < k; ++m) pivot -= lower(k, m) * lower(k, m);
        if (pivot <= tol) continue; // degenerate direction: leave the column zero
        const double lkk = std::sqrt(pivot);
        lower(k, k) = lkk;
        for (int i = k + 1; i < q; ++i) {
            double s = symmetric(i, k);
            for (int m = 0; m < k; ++m) s -= lower(i, m) * lower(k, m);
            lower(i, k) = s / lkk;
        }
    }
    return lower;
}

Vector guarded_forward_solve(const Matrix& lower, const Vector& rhs) {
    const int q = static_cast<int>(lower.rows());
    Vector x = Vector::Zero(q);
    for (int i = 0; i < q; ++i) {
        if (lower(i, i) == 0.0) continue;
        double s = rhs[i];
        for (int m = 0; m < i; ++m) s -= lower(i, m) * x[m];
        x[i] = s / lower(i, i);
    }
    return x;
}

} // namespace aibo
