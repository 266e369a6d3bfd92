#include <aibo/acquisition.hpp>

#include <aibo/rng.hpp>

#include <cmath>
#include <stdexcept>

namespace aibo {

namespace {

// sqrt(beta * pi / 2): with this scaling, E|xi - mu| * coeff = sqrt(beta) * sigma,
// so the per-sample batch UCB estimator is consistent with the analytic form.
double ucb_mc_coeff(double beta) {
    return std::sqrt(beta * M_PI / 2.0);
}

double sign_of(double v) {
    return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0);
}

bool is_mc(AfKind kind) {
    return kind == AfKind::ucb_mc || kind == AfKind::ei_mc;
}

bool is_ucb(AfKind kind) {
    return kind == AfKind::ucb_analytic || kind == AfKind::ucb_mc;
}

} // namespace

double ucb(double mu, double sigma, double beta) {
    if (sigma < 0.0) throw std::invalid_argument("ucb: sigma must be non-negative");
    return -mu + std::sqrt(beta) * sigma;
}

double ei_analytic(double mu, double sigma, double incumbent) {
    if (sigma < 0.0) throw std::invalid_argument("ei_analytic: sigma must be non-negative");
    const double delta = incumbent - mu;
    if (sigma == 0.0) return std::max(delta, 0.0);
    const double z = delta / sigma;
    return delta * normal_cdf(z) + sigma * normal_pdf(z);
}

double mc_af_value(const Posterior& post, const AcquisitionSpec& spec) {
    const int q = static_cast<int>(post.mean.size());
    const int n = spec.mc_samples;
    if (!post.has_cov) throw std::invalid_argument("mc_af_value: posterior root missing");
    if (spec.base_samples.rows() < n || spec.base_samples.cols() < q) {
        throw std::invalid_argument("mc_af_value: base-sample bank too small");
    }
    if (!is_mc(spec.kind)) {
        if (q != 1) throw std::invalid_argument("analytic acquisition only defined for a single point");
        const double sigma = std::sqrt(std::max(post.variance[0], kVarianceFloor));
        return spec.kind == AfKind::ucb_analytic ? ucb(post.mean[0], sigma, spec.beta)
                                                 : ei_analytic(post.mean[0], sigma, spec.incumbent);
    }
    if (spec.kind == AfKind::ucb_mc && q == 1) {
        const double sigma = std::sqrt(std::max(post.variance[0], kVarianceFloor));
        return ucb(post.mean[0], sigma, spec.beta);
    }
    const double coeff = ucb_mc_coeff(spec.beta);
    double total = 0.0;
    Vector draw(q);
    for (int i = 0; i < n; ++i) {
        draw.noalias() = post.root * spec.base_samples.row(i).head(q).transpose();
        double best;
        if (spec.kind == AfKind::ei_mc) {
            best = 0.0;
            for (int j = 0; j < q; ++j) {
                best = std::max(best, spec.incumbent - (post.mean[j] + draw[j]));
            }
        } else {
            best = -std::numeric_limits<double>::infinity();
            for (int j = 0; j < q; ++j) {
                best = std::max(best, -post.mean[j] + coeff * std::abs(draw[j]));
            }
        }
        total += best;
    }
    return total / n;
}

AcquisitionFunction::AcquisitionFunction(const GpModel& model, const Dataset& data,
                                         AcquisitionSpec spec)
    : model_(model), data_(data), spec_(std::move(spec)) {
    if (model_.train_size() != data_.size()) {
        throw std::invalid_argument("AcquisitionFunction: model does not match dataset");
    }
    if (spec_.base_samples.rows() < spec_.mc_samples) {
        throw std::invalid_argument("AcquisitionFunction: base-sample bank smaller than mc_samples");
    }
    const int n = data_.size();
    const int d = model_.dim();
    pending_pts_.resize(0, d);
    kp_.resize(n, 0);
    vp_.resize(n, 0);
    wp_.resize(n, 0);
    mu_p_.resize(0);
    lpp_.resize(0, 0);
    max_cache_.bank = &spec_.base_samples;
    max_cache_.rows = spec_.mc_samples;
    sel_cache_.bank = spec_.select_samples.size() > 0 ? &spec_.select_samples : &spec_.base_samples;
    sel_cache_.rows = static_cast<int>(sel_cache_.bank->rows());
    rebuild_bank_cache(max_cache_);
    rebuild_bank_cache(sel_cache_);
    kstar_.resize(n);
    v_.resize(n);
    gx_.resize(n);
    gmat_.resize(n, d);

    auto queued = std::move(spec_.pending);
    spec_.pending.clear();
    for (const auto& x : queued) push_pending(x);
}

void AcquisitionFunction::rebuild_bank_cache(BankCache& cache) const {
    cache.pending_draws.resize(cache.rows, 0);
    cache.best_pending.resize(cache.rows);
    if (spec_.kind == AfKind::ei_mc) {
        cache.best_pending.setZero();
    } else {
        cache.best_pending.setConstant(-std::numeric_limits<double>::infinity());
    }
}

AcquisitionFunction::PointStats AcquisitionFunction::point_stats(const Vector& x) const {
    const int n = data_.size();
    const int p = pending_count();
    PointStats stats;

    const Matrix& xt = data_.inputs_unit();
    for (int i = 0; i < n; ++i) {
        const double r = detail::scaled_distance(xt.row(i).transpose(), x, model_.lengthscales);
        kstar_[i] = model_.signal_variance * detail::matern52_corr(r);
    }
    v_ = model_.chol.triangularView<Eigen::Lower>().solve(kstar_);
    stats.mu = kstar_.dot(model_.alpha) + model_.constant_mean;
    stats.var = std::max(model_.signal_variance - v_.squaredNorm(), 0.0);

    if (p == 0) {
        const double tol = 1e-12 * std::max(1.0, stats.var);
        stats.c = stats.var > tol ? std::sqrt(stats.var) : 0.0;
        return stats;
    }
    stats.sigma_px.resize(p);
    for (int m = 0; m < p; ++m) {
        const double kq = model_.signal_variance *
                          detail::matern52_corr(detail::scaled_distance(
                              pending_pts_.row(m).transpose(), x, model_.lengthscales));
        stats.sigma_px[m] = kq - vp_.col(m).dot(v_);
    }
    stats.b = guarded_forward_solve(lpp_, stats.sigma_px);
    const double c2 = stats.var - stats.b.squaredNorm();
    const double tol = 1e-12 * std::max(1.0, stats.var);
    stats.c = c2 > tol ? std::sqrt(c2) : 0.0;
    return stats;
}

double AcquisitionFunction::analytic_value(double mu, double var) const {
    const double sigma = std::sqrt(std::max(var, kVarianceFloor));
    return is_ucb(spec_.kind) ? ucb(mu, sigma, spec_.beta)
                              : ei_analytic(mu, sigma, spec_.incumbent);
}

double AcquisitionFunction::mc_value(const PointStats& stats, const BankCache& cache) const {
    const int p = pending_count();
    const int n = cache.rows;
    const Matrix& bank = *cache.bank;
    const double inc = spec_.incumbent;
    double total = 0.0;
    if (spec_.kind == AfKind::ei_mc) {
        if (p == 0) {
            for (int i = 0; i < n; ++i) {
                total += std::max(inc - (stats.mu + stats.c * bank(i, 0)), 0.0);
            }
        } else {
            for (int i = 0; i < n; ++i) {
                double t = stats.c * bank(i, p);
                for (int m = 0; m < p; ++m) t += stats.b[m] * bank(i, m);
                total += std::max(cache.best_pending[i], inc - (stats.mu + t));
            }
        }
        return total / n;
    }
    // batch UCB: per-sample max of -mu_j + coeff |zero-mean draw_j|
    const double coeff = ucb_mc_coeff(spec_.beta);
    for (int i = 0; i < n; ++i) {
        double t = stats.c * bank(i, p);
        for (int m = 0; m < p; ++m) t += stats.b[m] * bank(i, m);
        total += std::max(cache.best_pending[i], -stats.mu + coeff * std::abs(t));
    }
    return total / n;
}

double AcquisitionFunction::value(const Vector& x) const {
    const PointStats stats = point_stats(x);
    const int p = pending_count();
    switch (spec_.kind) {
    case AfKind::ucb_analytic:
    case AfKind::ei_analytic:
        if (p != 0) throw std::logic_error("analytic acquisition cannot condition on pending points");
        return analytic_value(stats.mu, stats.var);
    case AfKind::ucb_mc:
        if (p == 0) return analytic_value(stats.mu, stats.var);
        return mc_value(stats, max_cache_);
    case AfKind::ei_mc:
        return mc_value(stats, max_cache_);
    }
    throw std::logic_error("unreachable");
}

double AcquisitionFunction::select_value(const Vector& x) const {
    const PointStats stats = point_stats(x);
    const int p = pending_count();
    if (spec_.kind == AfKind::ucb_analytic || spec_.kind == AfKind::ei_analytic ||
        (spec_.kind == AfKind::ucb_mc && p == 0)) {
        return analytic_value(stats.mu, stats.var);
    }
    return mc_value(stats, sel_cache_);
}

AfEvaluation AcquisitionFunction::value_and_gradient(const Vector& x) const {
    const int n = data_.size();
    const int d = dim();
    const int p = pending_count();
    const PointStats stats = point_stats(x);

    // dmu = G' alpha and dvar = -2 G' (K + n2 I)^-1 kstar, where row i of G is
    // the kernel gradient d k(x_i, x) / dx.
    const Matrix& xt = data_.inputs_unit();
    const Vector inv_sq_ls = model_.lengthscales.cwiseAbs2().cwiseInverse();
    for (int i = 0; i < n; ++i) {
        const double r = detail::scaled_distance(xt.row(i).transpose(), x, model_.lengthscales);
        const double coef = model_.signal_variance * detail::matern52_dcorr_over_r(r);
        gmat_.row(i) = coef * (x.transpose() - xt.row(i)).cwiseProduct(inv_sq_ls.transpose());
    }
    gx_ = model_.chol.transpose().triangularView<Eigen::Upper>().solve(v_);
    const Vector dmu = gmat_.transpose() * model_.alpha;
    const Vector dvar = -2.0 * (gmat_.transpose() * gx_);

    AfEvaluation out;
    if (p == 0) {
        if (spec_.kind == AfKind::ei_mc) {
            const double dc_scale = stats.c > 0.0 ? 1.0 / (2.0 * stats.c) : 0.0;
            const Vector dc = dvar * dc_scale;
            const Matrix& bank = *max_cache_.bank;
            const int rows = max_cache_.rows;
            double total = 0.0;
            long count = 0;
            double eps_sum = 0.0;
            for (int i = 0; i < rows; ++i) {
                const double imp = spec_.incumbent - (stats.mu + stats.c * bank(i, 0));
                if (imp > 0.0) {
                    total += imp;
                    ++count;
                    eps_sum += bank(i, 0);
                }
            }
            out.value = total / rows;
            out.gradient = -(static_cast<double>(count) * dmu + eps_sum * dc) / rows;
            return out;
        }
        const double sigma = std::sqrt(std::max(stats.var, kVarianceFloor));
        const Vector dsigma =
            stats.var > kVarianceFloor ? Vector(dvar / (2.0 * sigma)) : Vector(Vector::Zero(d));
        if (is_ucb(spec_.kind)) {
            out.value = ucb(stats.mu, sigma, spec_.beta);
            out.gradient = -dmu + std::sqrt(spec_.beta) * dsigma;
        } else {
            const double z = (spec_.incumbent - stats.mu) / sigma;
            out.value = ei_analytic(stats.mu, sigma, spec_.incumbent);
            out.gradient = -normal_cdf(z) * dmu + normal_pdf(z) * dsigma;
        }
        return out;
    }

    if (!is_mc(spec_.kind)) {
        throw std::logic_error("analytic acquisition cannot condition on pending points");
    }

    // Jacobians of the conditional root row: db = L_pp^-1 dsigma_px, and
    // dc from c^2 = var - |b|^2.
    Matrix dsigma_px(p, d);
    for (int m = 0; m < p; ++m) {
        const double r = detail::scaled_distance(pending_pts_.row(m).transpose(), x, model_.lengthscales);
        const double coef = model_.signal_variance * detail::matern52_dcorr_over_r(r);
        dsigma_px.row(m) = coef * (x.transpose() - pending_pts_.row(m)).cwiseProduct(inv_sq_ls.transpose());
    }
    dsigma_px.noalias() -= (gmat_.transpose() * wp_).transpose();
    Matrix db(p, d);
    for (int col = 0; col < d; ++col) {
        db.col(col) = guarded_forward_solve(lpp_, dsigma_px.col(col));
    }
    Vector dc = Vector::Zero(d);
    if (stats.c > 0.0) {
        dc = (dvar - 2.0 * (db.transpose() * stats.b)) / (2.0 * stats.c);
    }

    const Matrix& bank = *max_cache_.bank;
    const int rows = max_cache_.rows;
    double total = 0.0;
    long count = 0;
    Vector eps_sum = Vector::Zero(p);
    double last_sum = 0.0;
    if (spec_.kind == AfKind::ei_mc) {
        for (int i = 0; i < rows; ++i) {
            double t = stats.c * bank(i, p);
            for (int m = 0; m < p; ++m) t += stats.b[m] * bank(i, m);
            const double imp = spec_.incumbent - (stats.mu + t);
            if (imp > max_cache_.best_pending[i]) {
                total += imp;
                ++count;
                for (int m = 0; m < p; ++m) eps_sum[m] += bank(i, m);
                last_sum += bank(i, p);
            } else {
                total += max_cache_.best_pending[i];
            }
        }
        out.value = total / rows;
        out.gradient =
            -(static_cast<double>(count) * dmu + db.transpose() * eps_sum + last_sum * dc) / rows;
        return out;
    }
    const double coeff = ucb_mc_coeff(spec_.beta);
    for (int i = 0; i < rows; ++i) {
        double t = stats.c * bank(i, p);
        for (int m = 0; m < p; ++m) t += stats.b[m] * bank(i, m);
        const double u = -stats.mu + coeff * std::abs(t);
        if (u > max_cache_.best_pending[i]) {
            total += u;
            ++count;
            const double s = sign_of(t);
            for (int m = 0; m < p; ++m) eps_sum[m] += s * bank(i, m);
            last_sum += s * bank(i, p);
        } else {
            total += max_cache_.best_pending[i];
        }
    }
    out.value = total / rows;
    out.gradient =
        (-static_cast<double>(count) * dmu + coeff * (db.transpose() * eps_sum + last_sum * dc)) / rows;
    return out;
}

Vector AcquisitionFunction::value_batch(const Matrix& x) const {
    const int n = data_.size();
    const int k = static_cast<int>(x.rows());
    const int p = pending_count();
    if (x.cols() != dim()) throw std::invalid_argument("value_batch: dimension mismatch");

    const Matrix r = detail::scaled_distance_matrix(data_.inputs_unit(), x, model_.lengthscales);
    Matrix kc(n, k);
    for (int c = 0; c < k; ++c) {
        for (int i = 0; i < n; ++i) {
            kc(i, c) = model_.signal_variance * detail::matern52_corr(r(i, c));
        }
    }
    const Matrix vc = model_.chol.triangularView<Eigen::Lower>().solve(kc);
    Vector mu = (kc.transpose() * model_.alpha).array() + model_.constant_mean;
    Vector var(k);
    for (int c = 0; c < k; ++c) {
        var[c] = std::max(model_.signal_variance - vc.col(c).squaredNorm(), 0.0);
    }

    Vector out(k);
    const bool analytic = spec_.kind == AfKind::ucb_analytic || spec_.kind == AfKind::ei_analytic ||
                          (spec_.kind == AfKind::ucb_mc && p == 0);
    if (analytic) {
        if (p != 0 && !is_mc(spec_.kind)) {
            throw std::logic_error("analytic acquisition cannot condition on pending points");
        }
        for (int c = 0; c < k; ++c) out[c] = analytic_value(mu[c], var[c]);
        return out;
    }

    PointStats stats;
    if (p == 0) {
        for (int c = 0; c < k; ++c) {
            stats.mu = mu[c];
            stats.var = var[c];
            const double tol = 1e-12 * std::max(1.0, stats.var);
            stats.c = stats.var > tol ? std::sqrt(stats.var) : 0.0;
            out[c] = mc_value(stats, max_cache_);
        }
        return out;
    }

    const Matrix rp = detail::scaled_distance_matrix(pending_pts_, x, model_.lengthscales);
    const Matrix cross = vp_.transpose() * vc; // p x k
    stats.sigma_px.resize(p);
    for (int c = 0; c < k; ++c) {
        for (int m = 0; m < p; ++m) {
            stats.sigma_px[m] =
                model_.signal_variance * detail::matern52_corr(rp(m, c)) - cross(m, c);
        }
        stats.mu = mu[c];
        stats.var = var[c];
        stats.b = guarded_forward_solve(lpp_, stats.sigma_px);
        const double c2 = stats.var - stats.b.squaredNorm();
        const double tol = 1e-12 * std::max(1.0, stats.var);
        stats.c = c2 > tol ? std::sqrt(c2) : 0.0;
        out[c] = mc_value(stats, max_cache_);
    }
    return out;
}

void AcquisitionFunction::push_pending(const Vector& x) {
    if (x.size() != dim()) throw std::invalid_argument("push_pending: dimension mismatch");
    const int p = pending_count();
    // The new pending point consumes bank column p; evaluating the next free
    // point needs column p + 1.
    if (spec_.base_samples.cols() <= p + 1) {
        throw std::invalid_argument("push_pending: base-sample bank has too few columns for this batch");
    }

    const PointStats stats = point_stats(x);

    pending_pts_.conservativeResize(p + 1, Eigen::NoChange);
    pending_pts_.row(p) = x.transpose();
    kp_.conservativeResize(Eigen::NoChange, p + 1);
    kp_.col(p) = kstar_;
    vp_.conservativeResize(Eigen::NoChange, p + 1);
    vp_.col(p) = v_;
    wp_.conservativeResize(Eigen::NoChange, p + 1);
    wp_.col(p) = model_.chol.transpose().triangularView<Eigen::Upper>().solve(v_);
    mu_p_.conservativeResize(p + 1);
    mu_p_[p] = stats.mu;

    Matrix lpp_new = Matrix::Zero(p + 1, p + 1);
    lpp_new.topLeftCorner(p, p) = lpp_;
    if (p > 0) lpp_new.row(p).head(p) = stats.b.transpose();
    lpp_new(p, p) = stats.c;
    lpp_ = std::move(lpp_new);

    for (BankCache* cache : {&max_cache_, &sel_cache_}) {
        const Matrix& bank = *cache->bank;
        Vector draws(cache->rows);
        for (int i = 0; i < cache->rows; ++i) {
            double t = stats.c * bank(i, p);
            for (int m = 0; m < p; ++m) t += stats.b[m] * bank(i, m);
            draws[i] = t;
        }
        cache->pending_draws.conservativeResize(Eigen::NoChange, p + 1);
        cache->pending_draws.col(p) = draws;
        if (spec_.kind == AfKind::ei_mc) {
            for (int i = 0; i < cache->rows; ++i) {
                cache->best_pending[i] =
                    std::max(cache->best_pending[i], spec_.incumbent - (stats.mu + draws[i]));
            }
        } else {
            const double coeff = ucb_mc_coeff(spec_.beta);
            for (int i = 0; i < cache->rows; ++i) {
                cache->best_pending[i] =
                    std::max(cache->best_pending[i], -stats.mu + coeff * std::abs(draws[i]));
            }
        }
    }
    spec_.pending.push_back(x);
}

AfEvaluator AcquisitionFunction::evaluator() const {
    return [this](const Vector& x, bool want_gradient) -> AfEvaluation {
        if (want_gradient) return value_and_gradient(x);
        return AfEvaluation{value(x), std::nullopt};
    };
}

Matrix greedy_sequential_batch(AcquisitionFunction& af, int q, const SlotSolver& solver) {
    if (q < 1) throw std::invalid_argument("greedy_sequential_batch: q must be >= 1");
    Matrix points(q, af.dim());
    for (int slot = 0; slot < q; ++slot) {
        const Vector x = solver(af, slot);
        points.row(slot) = x.transpose();
        if (slot + 1 < q) af.push_pending(x);
    }
    return points;
}

} // namespace aibo
