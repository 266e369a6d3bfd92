#include <aibo/gp.hpp>
#include <aibo/rng.hpp>

#include <doctest.h>

#include <Eigen/Dense>

#include <cmath>

using namespace aibo;

namespace {

Dataset unit_dataset(const Matrix& unit_points, const Vector& targets) {
    const int d = static_cast<int>(unit_points.cols());
    Dataset data(Bounds(Vector::Zero(d), Vector::Ones(d)));
    for (int i = 0; i < unit_points.rows(); ++i) {
        data.append_unit(unit_points.row(i).transpose(), targets[i]);
    }
    return data;
}

Dataset random_dataset(int n, int d, std::uint64_t seed) {
    RngStream rng(seed);
    Matrix x(n, d);
    Vector y(n);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < d; ++j) x(i, j) = rng.uniform();
        y[i] = std::sin(4.0 * x(i, 0)) + 0.5 * x.row(i).squaredNorm() + 0.1 * rng.normal();
    }
    const double mean = y.mean();
    const double sd = std::sqrt((y.array() - mean).square().sum() / (n - 1));
    y = (y.array() - mean) / sd;
    return unit_dataset(x, y);
}

GpModel simple_model(const Dataset& data, double ell, double s2, double n2) {
    return make_model(data, Vector::Constant(data.dim(), ell), s2, n2);
}

} // namespace

TEST_CASE("kernel at zero distance returns the signal variance") {
    Dataset data = random_dataset(5, 3, 1);
    GpModel model = simple_model(data, 0.7, 2.3, 1e-4);
    Vector x(3);
    x << 0.2, 0.8, 0.5;
    CHECK(matern52_ard(x, x, model) == doctest::Approx(2.3).epsilon(1e-15));
}

TEST_CASE("kernel closed form at unit scaled distance") {
    Dataset data = random_dataset(4, 1, 2);
    GpModel model = simple_model(data, 1.0, 1.0, 1e-4);
    Vector a(1), b(1);
    a << 0.0;
    b << 1.0;
    // (1 + sqrt5 + 5/3) exp(-sqrt5), frozen from a high-precision evaluation
    CHECK(matern52_ard(a, b, model) == doctest::Approx(0.5239941088318203).epsilon(1e-14));
}

TEST_CASE("kernel symmetry over random pairs") {
    Dataset data = random_dataset(4, 6, 3);
    GpModel model = simple_model(data, 0.31, 1.7, 1e-4);
    RngStream rng(4);
    for (int i = 0; i < 100; ++i) {
        const Vector a = rng.uniform_vector(6);
        const Vector b = rng.uniform_vector(6);
        CHECK(matern52_ard(a, b, model) == matern52_ard(b, a, model));
    }
}

TEST_CASE("kernel dimension mismatch throws") {
    Dataset data = random_dataset(4, 3, 5);
    GpModel model = simple_model(data, 0.5, 1.0, 1e-4);
    CHECK_THROWS_AS(matern52_ard(Vector::Zero(2), Vector::Zero(3), model), std::invalid_argument);
}

TEST_CASE("kernel matrix of random points is PSD before jitter") {
    Dataset data = random_dataset(50, 4, 6);
    GpModel model = simple_model(data, 0.2, 1.0, 1e-4);
    Matrix k(50, 50);
    for (int i = 0; i < 50; ++i) {
        for (int j = 0; j < 50; ++j) {
            k(i, j) = matern52_ard(data.inputs_unit().row(i).transpose(),
                                   data.inputs_unit().row(j).transpose(), model);
        }
    }
    Eigen::SelfAdjointEigenSolver<Matrix> eig(k);
    CHECK(eig.eigenvalues().minCoeff() >= -1e-8);
}

TEST_CASE("cached factor reproduces K + noise I") {
    Dataset data = random_dataset(40, 3, 7);
    GpModel model = simple_model(data, 0.4, 1.5, 1e-3);
    Matrix k(40, 40);
    for (int i = 0; i < 40; ++i) {
        for (int j = 0; j < 40; ++j) {
            k(i, j) = matern52_ard(data.inputs_unit().row(i).transpose(),
                                   data.inputs_unit().row(j).transpose(), model);
        }
    }
    k.diagonal().array() += model.noise_variance;
    const Matrix rebuilt = model.chol * model.chol.transpose();
    CHECK((rebuilt - k).norm() / k.norm() < 1e-8);
}

TEST_CASE("log marginal likelihood of a single standardized point") {
    Matrix x(1, 1);
    x << 0.5;
    Vector y(1);
    y << 0.0;
    Dataset data = unit_dataset(x, y);
    GpModel model = make_model(data, Vector::Constant(1, 1.0), 0.99, 0.01, 0.0);
    // K + noise = 1 exactly, so lml = -0.5 log(2 pi)
    CHECK(log_marginal_likelihood(model, data) ==
          doctest::Approx(-0.9189385332046727).epsilon(1e-12));
}

TEST_CASE("duplicated training point exercises the jitter path without crashing") {
    Matrix x(3, 2);
    x << 0.25, 0.5, 0.25, 0.5, 0.7, 0.1;
    Vector y(3);
    y << 1.0, 1.0, -1.0;
    Dataset data = unit_dataset(x, y);
    GpModel model = make_model(data, Vector::Constant(2, 0.5), 1.0, 1e-6);
    CHECK(std::isfinite(log_marginal_likelihood(model, data)));
}

TEST_CASE("lml is invariant to permutations of the dataset") {
    Dataset data = random_dataset(25, 3, 8);
    GpModel model = simple_model(data, 0.5, 1.0, 1e-3);
    const double base = log_marginal_likelihood(model, data);

    Matrix x = data.inputs_unit();
    Vector y = data.targets_tf();
    // reverse the rows
    Matrix xr = x.colwise().reverse();
    Vector yr = y.reverse();
    Dataset reversed = unit_dataset(xr, yr);
    GpModel model_r = make_model(reversed, model.lengthscales, model.signal_variance,
                                 model.noise_variance, model.constant_mean);
    CHECK(log_marginal_likelihood(model_r, reversed) == doctest::Approx(base).epsilon(1e-9));
}

TEST_CASE("lml gradient matches central finite differences") {
    Dataset data = random_dataset(20, 3, 11);
    RngStream rng(12);
    const double h = 1e-5;
    for (int trial = 0; trial < 10; ++trial) {
        Vector theta(5);
        for (int j = 0; j < 3; ++j) theta[j] = rng.uniform(std::log(0.08), std::log(2.0));
        theta[3] = rng.uniform(std::log(0.3), std::log(3.0));
        theta[4] = rng.uniform(std::log(1e-5), std::log(1e-2));

        Vector grad;
        (void)lml_log_params(data, theta, &grad);
        for (int j = 0; j < 5; ++j) {
            Vector up = theta, down = theta;
            up[j] += h;
            down[j] -= h;
            const double fd = (lml_log_params(data, up) - lml_log_params(data, down)) / (2.0 * h);
            const double scale = std::max({std::abs(fd), std::abs(grad[j]), 1e-8});
            CHECK(std::abs(grad[j] - fd) / scale < 1e-4);
        }
    }
}

TEST_CASE("fit is deterministic") {
    Dataset data = random_dataset(30, 2, 13);
    FitConfig config;
    config.seed = 99;
    GpModel a = fit(data, config);
    GpModel b = fit(data, config);
    CHECK((a.lengthscales - b.lengthscales).norm() == 0.0);
    CHECK(a.signal_variance == b.signal_variance);
    CHECK(a.noise_variance == b.noise_variance);
    CHECK(a.constant_mean == b.constant_mean);
}

TEST_CASE("fit does not lose to its own default starting point") {
    Dataset data = random_dataset(30, 2, 14);
    GpModel model = fit(data);
    Vector theta0(4);
    theta0.head(2).setConstant(std::log(0.5));
    theta0[2] = 0.0;
    theta0[3] = std::log(1e-4);
    const double fitted = log_marginal_likelihood(model, data);
    CHECK(fitted >= lml_log_params(data, theta0) - 1e-9);
}

TEST_CASE("fit recovers short correlation on sin(6x) and beats a grid search") {
    const int n = 30;
    Matrix x(n, 1);
    Vector y(n);
    RngStream rng(15);
    for (int i = 0; i < n; ++i) {
        x(i, 0) = (i + 0.5) / n;
        y[i] = std::sin(6.0 * x(i, 0));
    }
    const double mean = y.mean();
    const double sd = std::sqrt((y.array() - mean).square().sum() / (n - 1));
    Dataset data = unit_dataset(x, Vector((y.array() - mean) / sd));

    GpModel model = fit(data);
    CHECK(model.lengthscales[0] < 1.0);

    // posterior mean interpolates the training targets
    const Posterior post = posterior(model, data, data.inputs_unit(), false);
    for (int i = 0; i < n; ++i) {
        CHECK(std::abs(post.mean[i] - data.targets_tf()[i]) < 1e-2);
    }

    // brute-force grid over (lengthscale, signal, noise) maximizing the same lml
    double best_grid = -std::numeric_limits<double>::infinity();
    for (int a = 0; a < 24; ++a) {
        const double ell = std::exp(std::log(0.02) + (std::log(2.0) - std::log(0.02)) * a / 23.0);
        for (int b = 0; b < 8; ++b) {
            const double s2 = std::exp(std::log(0.1) + (std::log(10.0) - std::log(0.1)) * b / 7.0);
            for (double n2 : {1e-6, 1e-5, 1e-4, 1e-3, 1e-2}) {
                Vector theta(3);
                theta << std::log(ell), std::log(s2), std::log(n2);
                best_grid = std::max(best_grid, lml_log_params(data, theta));
            }
        }
    }
    CHECK(log_marginal_likelihood(model, data) >= best_grid - 1e-6);
}

TEST_CASE("posterior nearly interpolates at the noise floor") {
    Dataset data = random_dataset(25, 2, 16);
    GpModel model = simple_model(data, 0.4, 1.0, 1e-6);
    const Posterior post = posterior(model, data, data.inputs_unit(), false);
    for (int i = 0; i < data.size(); ++i) {
        CHECK(std::abs(post.mean[i] - data.targets_tf()[i]) < 1e-3);
        CHECK(post.variance[i] < 1e-3);
    }
}

TEST_CASE("posterior reverts to the prior far from data") {
    Matrix x(3, 2);
    x << 0.0, 0.0, 0.02, 0.03, 0.05, 0.01;
    Vector y(3);
    y << 0.5, -0.5, 0.2;
    Dataset data = unit_dataset(x, y);
    GpModel model = make_model(data, Vector::Constant(2, 0.05), 1.7, 1e-4);
    Matrix far(1, 2);
    far << 1.0, 1.0;
    const Posterior post = posterior(model, data, far, false);
    CHECK(std::abs(post.mean[0] - model.constant_mean) < 1e-6);
    CHECK(std::abs(post.variance[0] - model.signal_variance) < 1e-6);
}

TEST_CASE("joint covariance matches the entrywise formula") {
    Dataset data = random_dataset(18, 2, 17);
    GpModel model = simple_model(data, 0.35, 1.2, 1e-4);
    RngStream rng(18);
    Matrix query(3, 2);
    for (int i = 0; i < 3; ++i) query.row(i) = rng.uniform_vector(2).transpose();
    const Posterior post = posterior(model, data, query, true);

    // brute force: K** - K*' (K + n I)^-1 K*
    const int n = data.size();
    Matrix k(n, n);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            k(i, j) = matern52_ard(data.inputs_unit().row(i).transpose(),
                                   data.inputs_unit().row(j).transpose(), model);
        }
    }
    k.diagonal().array() += model.noise_variance;
    const Matrix kinv = k.inverse();
    for (int a = 0; a < 3; ++a) {
        for (int b = 0; b < 3; ++b) {
            Vector ka(n), kb(n);
            for (int i = 0; i < n; ++i) {
                ka[i] = matern52_ard(data.inputs_unit().row(i).transpose(),
                                     query.row(a).transpose(), model);
                kb[i] = matern52_ard(data.inputs_unit().row(i).transpose(),
                                     query.row(b).transpose(), model);
            }
            const double direct = matern52_ard(query.row(a).transpose(), query.row(b).transpose(),
                                               model) -
                                  ka.dot(kinv * kb);
            CHECK(post.cov(a, b) == doctest::Approx(direct).epsilon(1e-9));
        }
    }
    CHECK((post.root * post.root.transpose() - post.cov).norm() < 1e-9);
}

TEST_CASE("posterior variance is non-negative over many random queries") {
    Dataset data = random_dataset(60, 3, 19);
    GpModel model = fit(data, FitConfig{.restarts = 2, .max_iters = 40});
    RngStream rng(20);
    Matrix query(10000, 3);
    for (int i = 0; i < query.rows(); ++i) query.row(i) = rng.uniform_vector(3).transpose();
    const Posterior post = posterior(model, data, query, false);
    CHECK(post.variance.minCoeff() >= 0.0);
}

TEST_CASE("adding an observation does not increase variance there") {
    Dataset data = random_dataset(20, 2, 21);
    GpModel model = simple_model(data, 0.4, 1.0, 1e-6);
    RngStream rng(22);
    for (int trial = 0; trial < 10; ++trial) {
        const Vector x = rng.uniform_vector(2);
        const Posterior before = posterior(model, data, x.transpose(), false);

        Dataset extended = data;
        extended.append_unit(x, 0.3);
        extended.set_transformed_targets(extended.targets_raw());
        GpModel refreshed = make_model(extended, model.lengthscales, model.signal_variance,
                                       model.noise_variance, model.constant_mean);
        const Posterior after = posterior(refreshed, extended, x.transpose(), false);
        CHECK(after.variance[0] <= before.variance[0] + 1e-10);
    }
}

TEST_CASE("psd root zeroes degenerate directions") {
    Matrix s(3, 3);
    const double v = 0.8;
    s << v, v, 0.1, v, v, 0.1, 0.1, 0.1, 0.5;
    const Matrix root = psd_lower_root(s);
    CHECK(root(1, 1) == 0.0);
    CHECK((root * root.transpose() - s).norm() < 1e-12);
    // prefix stability: the leading 2x2 factor matches the block factorization
    const Matrix head = psd_lower_root(Matrix(s.topLeftCorner(2, 2)));
    CHECK((root.topLeftCorner(2, 2) - head).norm() == 0.0);
}

TEST_CASE("guarded solve skips zero pivots") {
    Matrix lower(2, 2);
    lower << 2.0, 0.0, 1.0, 0.0;
    Vector rhs(2);
    rhs << 4.0, 2.0;
    const Vector x = guarded_forward_solve(lower, rhs);
    CHECK(x[0] == 2.0);
    CHECK(x[1] == 0.0);
}
