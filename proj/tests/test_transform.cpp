#include <aibo/dataset.hpp>
#include <aibo/rng.hpp>

#include <doctest.h>

#include <cmath>

using namespace aibo;

namespace {

double sample_skewness(const Vector& y) {
    const double n = static_cast<double>(y.size());
    const double mean = y.mean();
    double m2 = 0.0, m3 = 0.0;
    for (int i = 0; i < y.size(); ++i) {
        const double d = y[i] - mean;
        m2 += d * d;
        m3 += d * d * d;
    }
    m2 /= n;
    m3 /= n;
    return m3 / std::pow(m2, 1.5);
}

} // namespace

TEST_CASE("round trip over random targets") {
    RngStream rng(17);
    Vector y(1000);
    for (int i = 0; i < y.size(); ++i) y[i] = rng.uniform(-50.0, 200.0);
    const PowerTransform tf = power_transform_fit(y);
    for (int i = 0; i < y.size(); ++i) {
        const double back = tf.invert(tf.apply(y[i]));
        CHECK(back == doctest::Approx(y[i]).epsilon(1e-8));
    }
}

TEST_CASE("transformed targets are standardized") {
    RngStream rng(23);
    Vector y(400);
    for (int i = 0; i < y.size(); ++i) y[i] = std::exp(rng.normal()) * 3.0 + 1.0;
    const PowerTransform tf = power_transform_fit(y);
    const Vector z = tf.apply(y);
    CHECK(std::abs(z.mean()) < 1e-8);
    const double sd = std::sqrt((z.array() - z.mean()).square().sum() / (z.size() - 1));
    CHECK(sd == doctest::Approx(1.0).epsilon(1e-8));
}

TEST_CASE("skewed samples become less skewed") {
    RngStream rng(31);
    Vector y(2000);
    for (int i = 0; i < y.size(); ++i) y[i] = std::exp(rng.normal()) * 1e3;
    const double before = sample_skewness(y);
    const PowerTransform tf = power_transform_fit(y);
    const double after = sample_skewness(tf.apply(y));
    CHECK(std::abs(after) < std::abs(before));
}

TEST_CASE("constant targets fall back to identity with unit scale") {
    Vector y = Vector::Constant(10, 4.2);
    const PowerTransform tf = power_transform_fit(y);
    CHECK(tf.lambda == 1.0);
    CHECK(tf.std_tf == 1.0);
    CHECK(tf.apply(4.2) == doctest::Approx(0.0).epsilon(1e-14));
    CHECK(tf.invert(tf.apply(7.0)) == doctest::Approx(7.0).epsilon(1e-12));
}

TEST_CASE("fit requires two targets") {
    Vector y(1);
    y << 1.0;
    CHECK_THROWS_AS(power_transform_fit(y), std::invalid_argument);
}

TEST_CASE("yeo-johnson handles negatives and the log branches") {
    for (double lambda : {-2.0, 0.0, 0.7, 1.0, 2.0, 3.5}) {
        for (double y : {-15.0, -1.0, -1e-3, 0.0, 1e-3, 2.0, 40.0}) {
            const double z = yeo_johnson(y, lambda);
            CHECK(std::isfinite(z));
            CHECK(yeo_johnson_inverse(z, lambda) == doctest::Approx(y).epsilon(1e-9));
        }
    }
    // identity at lambda = 1
    CHECK(yeo_johnson(3.25, 1.0) == doctest::Approx(3.25).epsilon(1e-15));
    CHECK(yeo_johnson(-3.25, 1.0) == doctest::Approx(-3.25).epsilon(1e-15));
}

TEST_CASE("monotone in y for fixed lambda") {
    for (double lambda : {-1.0, 0.0, 1.0, 2.2}) {
        double prev = yeo_johnson(-20.0, lambda);
        for (double y = -19.0; y <= 20.0; y += 0.5) {
            const double z = yeo_johnson(y, lambda);
            CHECK(z > prev);
            prev = z;
        }
    }
}

TEST_CASE("dataset normalizes inputs to the unit cube") {
    Bounds bounds((Vector(2) << -5.0, 0.0).finished(), (Vector(2) << 10.0, 2.0).finished());
    Dataset data(bounds);
    data.append((Vector(2) << -5.0, 2.0).finished(), 3.0);
    data.append((Vector(2) << 10.0, 0.0).finished(), 1.0);
    data.append((Vector(2) << 2.5, 1.0).finished(), 2.0);
    CHECK(data.inputs_unit()(0, 0) == 0.0);
    CHECK(data.inputs_unit()(0, 1) == 1.0);
    CHECK(data.inputs_unit()(1, 0) == 1.0);
    CHECK(data.inputs_unit()(1, 1) == 0.0);
    CHECK(data.inputs_unit()(2, 0) == doctest::Approx(0.5));
    CHECK(data.inputs_unit()(2, 1) == doctest::Approx(0.5));
    CHECK(data.best_index() == 1);
    CHECK_THROWS_AS(Bounds((Vector(1) << 1.0).finished(), (Vector(1) << 1.0).finished()),
                    std::invalid_argument);
}
