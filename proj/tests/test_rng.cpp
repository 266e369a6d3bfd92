#include <aibo/rng.hpp>

#include <doctest.h>

#include <cmath>

using namespace aibo;

TEST_CASE("same seed and label reproduce the same sequence") {
    RngStream a(42);
    RngStream b(42);
    RngStream ca = a.split("child");
    RngStream cb = b.split("child");
    for (int i = 0; i < 100; ++i) {
        CHECK(ca.next_u64() == cb.next_u64());
    }
}

TEST_CASE("duplicate split label throws") {
    RngStream root(7);
    (void)root.split("x");
    CHECK_THROWS_AS((void)root.split("x"), std::invalid_argument);
    CHECK_NOTHROW((void)root.split("y"));
}

TEST_CASE("advancing one stream does not affect a sibling") {
    RngStream root(3);
    RngStream a = root.split("a");
    RngStream b = root.split("b");
    RngStream fresh_root(3);
    const double b0 = fresh_root.split("b").uniform();
    for (int i = 0; i < 1000; ++i) (void)a.uniform();
    CHECK(b.uniform() == b0);
}

TEST_CASE("sibling streams are uncorrelated") {
    RngStream root(2024);
    RngStream a = root.split("left");
    RngStream b = root.split("right");
    const int n = 10000;
    double sa = 0, sb = 0, saa = 0, sbb = 0, sab = 0;
    for (int i = 0; i < n; ++i) {
        const double x = a.uniform();
        const double y = b.uniform();
        sa += x;
        sb += y;
        saa += x * x;
        sbb += y * y;
        sab += x * y;
    }
    const double cov = sab / n - (sa / n) * (sb / n);
    const double va = saa / n - (sa / n) * (sa / n);
    const double vb = sbb / n - (sb / n) * (sb / n);
    const double corr = cov / std::sqrt(va * vb);
    CHECK(std::abs(corr) < 0.05);
}

TEST_CASE("uniform draws live in [0,1)") {
    RngStream rng(11);
    for (int i = 0; i < 10000; ++i) {
        const double u = rng.uniform();
        CHECK(u >= 0.0);
        CHECK(u < 1.0);
    }
}

TEST_CASE("standard normal stream moments") {
    RngStream rng(5);
    const int n = 100000;
    double sum = 0.0, sumsq = 0.0;
    for (int i = 0; i < n; ++i) {
        const double z = rng.normal();
        sum += z;
        sumsq += z * z;
    }
    CHECK(std::abs(sum / n) < 0.02);
    CHECK(sumsq / n == doctest::Approx(1.0).epsilon(0.02));
}

TEST_CASE("normal quantile matches reference values") {
    CHECK(std::abs(normal_quantile(0.5)) < 1e-15);
    CHECK(normal_quantile(0.975) == doctest::Approx(1.959963984540054).epsilon(1e-12));
    CHECK(normal_quantile(0.025) == doctest::Approx(-1.9599639845400545).epsilon(1e-12));
    CHECK(normal_quantile(1e-6) == doctest::Approx(-4.753424308822899).epsilon(1e-12));
    CHECK(normal_quantile(1e-12) == doctest::Approx(-7.034483825301131).epsilon(1e-12));
    CHECK(normal_quantile(0.69) == doctest::Approx(0.4958503473474532).epsilon(1e-12));
    for (double p : {1e-10, 1e-4, 0.01, 0.2, 0.5, 0.8, 0.99, 1.0 - 1e-4}) {
        CHECK(normal_cdf(normal_quantile(p)) == doctest::Approx(p).epsilon(1e-10));
    }
}

TEST_CASE("bank is a pure function of the stream state") {
    RngStream rng(9);
    RngStream bank_stream = rng.split("bank");
    const Matrix a = normal_bank(bank_stream, 64, 4);
    const Matrix b = normal_bank(bank_stream, 64, 4);
    CHECK((a - b).norm() == 0.0);
}

TEST_CASE("bank prefix property") {
    RngStream rng(9);
    RngStream s = rng.split("bank");
    for (bool ld : {false, true}) {
        const Matrix wide = normal_bank(s, 128, 5, ld);
        const Matrix narrow = normal_bank(s, 128, 4, ld);
        CHECK((wide.leftCols(4) - narrow).norm() == 0.0);
    }
}

TEST_CASE("bank columns are near-independent standard normals") {
    RngStream rng(123);
    RngStream s = rng.split("bank");
    const int n = 100000, q = 4;
    const Matrix bank = normal_bank(s, n, q);
    const Vector mean = bank.colwise().mean();
    Matrix cov(q, q);
    for (int i = 0; i < q; ++i) {
        for (int j = 0; j < q; ++j) {
            cov(i, j) =
                (bank.col(i).array() - mean[i]).cwiseProduct(bank.col(j).array() - mean[j]).sum() /
                n;
        }
    }
    CHECK((cov - Matrix::Identity(q, q)).norm() / std::sqrt(static_cast<double>(q)) < 0.03);
}

TEST_CASE("low-discrepancy bank has standard-normal columns") {
    RngStream rng(77);
    RngStream s = rng.split("bank");
    const Matrix bank = normal_bank(s, 4096, 3, true);
    for (int j = 0; j < 3; ++j) {
        CHECK(std::abs(bank.col(j).mean()) < 0.02);
        CHECK(bank.col(j).squaredNorm() / 4096 == doctest::Approx(1.0).epsilon(0.03));
    }
}
