#include <aibo/dataset.hpp>

#include <cmath>
#include <stdexcept>

namespace aibo {

Bounds::Bounds(Vector lo, Vector hi) : lower(std::move(lo)), upper(std::move(hi)) {
    if (lower.size() != upper.size()) throw std::invalid_argument("Bounds: dimension mismatch");
    for (int i = 0; i < lower.size(); ++i) {
        if (!(lower[i] < upper[i])) throw std::invalid_argument("Bounds: lower must be < upper");
    }
}

Vector Bounds::to_unit(const Vector& x_raw) const {
    if (x_raw.size() != lower.size()) throw std::invalid_argument("Bounds::to_unit: dimension mismatch");
    return (x_raw - lower).cwiseQuotient(upper - lower);
}

Vector Bounds::from_unit(const Vector& x_unit) const {
    if (x_unit.size() != lower.size()) throw std::invalid_argument("Bounds::from_unit: dimension mismatch");
    return lower + x_unit.cwiseProduct(upper - lower);
}

Matrix Bounds::from_unit_rows(const Matrix& x_unit) const {
    Matrix out(x_unit.rows(), x_unit.cols());
    for (Eigen::Index r = 0; r < x_unit.rows(); ++r) {
        out.row(r) = from_unit(x_unit.row(r).transpose()).transpose();
    }
    return out;
}

Dataset::Dataset(Bounds bounds) : bounds_(std::move(bounds)) {
    inputs_raw_.resize(0, bounds_.dim());
    inputs_unit_.resize(0, bounds_.dim());
    targets_raw_.resize(0);
    targets_tf_.resize(0);
}

void Dataset::append(const Vector& x_raw, double y) {
    append_rows(x_raw, bounds_.to_unit(x_raw), y);
}

void Dataset::append_unit(const Vector& x_unit, double y) {
    append_rows(bounds_.from_unit(x_unit), x_unit, y);
}

void Dataset::append_rows(const Vector& x_raw, const Vector& x_unit, double y) {
    const Eigen::Index n = inputs_raw_.rows();
    inputs_raw_.conservativeResize(n + 1, Eigen::NoChange);
    inputs_unit_.conservativeResize(n + 1, Eigen::NoChange);
    targets_raw_.conservativeResize(n + 1);
    targets_tf_.conservativeResize(n + 1);
    inputs_raw_.row(n) = x_raw.transpose();
    inputs_unit_.row(n) = x_unit.transpose();
    targets_raw_[n] = y;
    targets_tf_[n] = y;
}

void Dataset::set_transformed_targets(Vector targets_tf) {
    if (targets_tf.size() != targets_raw_.size()) {
        throw std::invalid_argument("Dataset: transformed target count mismatch");
    }
    targets_tf_ = std::move(targets_tf);
}

int Dataset::best_index() const {
    if (size() == 0) throw std::logic_error("Dataset::best_index on empty dataset");
    int best = 0;
    for (int i = 1; i < size(); ++i) {
        if (targets_raw_[i] < targets_raw_[best]) best = i;
    }
    return best;
}

double yeo_johnson(double y, double lambda) {
    if (y >= 0.0) {
        if (std::abs(lambda) < 1e-12) return std::log1p(y);
        return std::expm1(lambda * std::log1p(y)) / lambda;
    }
    const double two_ml = 2.0 - lambda;
    if (std::abs(two_ml) < 1e-12) return -std::log1p(-y);
    return -std::expm1(two_ml * std::log1p(-y)) / two_ml;
}

double yeo_johnson_inverse(double z, double lambda) {
    if (z >= 0.0) {
        if (std::abs(lambda) < 1e-12) return std::expm1(z);
        return std::expm1(std::log1p(lambda * z) / lambda);
    }
    const double two_ml = 2.0 - lambda;
    if (std::abs(two_ml) < 1e-12) return -std::expm1(-z);
    return -std::expm1(std::log1p(-two_ml * z) / two_ml);
}

double PowerTransform::apply(double y) const {
    return (yeo_johnson(y, lambda) - mean_tf) / std_tf;
}

double PowerTransform::invert(double z) const {
    return yeo_johnson_inverse(z * std_tf + mean_tf, lambda);
}

Vector PowerTransform::apply(const Vector& y) const {
    Vector out(y.size());
    for (int i = 0; i < y.size(); ++i) out[i] = apply(y[i]);
    return out;
}

namespace {

// Profile log-likelihood of the Yeo-Johnson transform under a Gaussian model.
double yj_log_likelihood(const Vector& y, double lambda) {
    const int n = static_cast<int>(y.size());
    Vector z(n);
    double jac = 0.0;
    for (int i = 0; i < n; ++i) {
        z[i] = yeo_johnson(y[i], lambda);
        if (y[i] >= 0.0) {
            jac += (lambda - 1.0) * std::log1p(y[i]);
        } else {
            jac += (1.0 - lambda) * std::log1p(-y[i]);
        }
    }
    const double mean = z.mean();
    const double var = (z.array() - mean).square().sum() / n;
    if (!(var > 0.0) || !std::isfinite(var)) return -std::numeric_limits<double>::infinity();
    return -0.5 * n * std::log(var) + jac;
}

} // namespace

PowerTransform power_transform_fit(const Vector& targets) {
    const int n = static_cast<int>(targets.size());
    if (n < 2) throw std::invalid_argument("power_transform_fit: need at least 2 targets");

    const double spread = targets.maxCoeff() - targets.minCoeff();
    if (!(spread > 0.0)) {
        PowerTransform identity;
        identity.lambda = 1.0;
        identity.mean_tf = targets[0];
        identity.std_tf = 1.0;
        return identity;
    }

    // Golden-section search for the ML lambda on [-5, 5].
    const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
    double a = -5.0, b = 5.0;
    double c = b - gr * (b - a);
    double d = a + gr * (b - a);
    double fc = yj_log_likelihood(targets, c);
    double fd = yj_log_likelihood(targets, d);
    for (int it = 0; it < 80 && (b - a) > 1e-9; ++it) {
        if (fc > fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - gr * (b - a);
            fc = yj_log_likelihood(targets, c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + gr * (b - a);
            fd = yj_log_likelihood(targets, d);
        }
    }
    const double lambda = 0.5 * (a + b);

    Vector z(n);
    for (int i = 0; i < n; ++i) z[i] = yeo_johnson(targets[i], lambda);
    const double mean = z.mean();
    double sd = std::sqrt((z.array() - mean).square().sum() / (n - 1));
    if (!(sd > 1e-12) || !std::isfinite(sd)) sd = 1.0;

    PowerTransform tf;
    tf.lambda = lambda;
    tf.mean_tf = mean;
    tf.std_tf = sd;
    return tf;
}

} // namespace aibo
