#include <aibo/benchmarks.hpp>

#include <doctest.h>

#include <cmath>

using namespace aibo;

TEST_CASE("known minimizers evaluate to zero") {
    for (int d : {2, 5, 20}) {
        CHECK(evaluate(make_benchmark(BenchmarkName::ackley, d), Vector::Zero(d)) ==
              doctest::Approx(0.0).epsilon(1e-12));
        CHECK(evaluate(make_benchmark(BenchmarkName::rosenbrock, d), Vector::Ones(d)) == 0.0);
        CHECK(evaluate(make_benchmark(BenchmarkName::rastrigin, d), Vector::Zero(d)) == 0.0);
        CHECK(evaluate(make_benchmark(BenchmarkName::griewank, d), Vector::Zero(d)) == 0.0);
        CHECK(evaluate(make_benchmark(BenchmarkName::levy, d), Vector::Ones(d)) ==
              doctest::Approx(0.0).epsilon(1e-12));
        CHECK(evaluate(make_benchmark(BenchmarkName::sphere, d), Vector::Zero(d)) == 0.0);
    }
}

TEST_CASE("reference point values") {
    // frozen from a high-precision evaluation of the standard formulas
    Vector x(5);
    x << 0.5, -1.25, 2.0, 3.5, -4.0;
    CHECK(evaluate(make_benchmark(BenchmarkName::ackley, 5), x) ==
          doctest::Approx(9.8518097863624318).epsilon(1e-13));
    CHECK(evaluate(make_benchmark(BenchmarkName::rosenbrock, 5), x) ==
          doctest::Approx(26687.953125).epsilon(1e-13));
    CHECK(evaluate(make_benchmark(BenchmarkName::rastrigin, 5), x) ==
          doctest::Approx(84.0625).epsilon(1e-13));
    CHECK(evaluate(make_benchmark(BenchmarkName::griewank, 5), x) ==
          doctest::Approx(0.99984170843061820).epsilon(1e-13));
    CHECK(evaluate(make_benchmark(BenchmarkName::levy, 5), x) ==
          doctest::Approx(6.3510294299086039).epsilon(1e-13));
}

TEST_CASE("table search ranges") {
    auto box = [](BenchmarkName name) {
        const auto spec = make_benchmark(name, 3);
        return std::make_pair(spec.lower[0], spec.upper[0]);
    };
    CHECK(box(BenchmarkName::ackley) == std::make_pair(-5.0, 10.0));
    CHECK(box(BenchmarkName::rosenbrock) == std::make_pair(-5.0, 10.0));
    CHECK(box(BenchmarkName::rastrigin) == std::make_pair(-5.12, 5.12));
    CHECK(box(BenchmarkName::griewank) == std::make_pair(-10.0, 10.0));
    CHECK(box(BenchmarkName::levy) == std::make_pair(-600.0, 600.0));
}

TEST_CASE("out-of-bounds input is rejected") {
    const auto spec = make_benchmark(BenchmarkName::ackley, 2);
    Vector x(2);
    x << 11.0, 0.0;
    CHECK_THROWS_AS(evaluate(spec, x), std::out_of_range);
    x << 0.0, -5.5;
    CHECK_THROWS_AS(evaluate(spec, x), std::out_of_range);
}

TEST_CASE("functions are non-negative over random in-bounds points") {
    RngStream rng(1);
    for (BenchmarkName name : {BenchmarkName::ackley, BenchmarkName::rosenbrock,
                               BenchmarkName::rastrigin, BenchmarkName::griewank,
                               BenchmarkName::levy, BenchmarkName::sphere}) {
        const auto spec = make_benchmark(name, 6);
        for (int i = 0; i < 20000; ++i) {
            CHECK(evaluate(spec, random_feasible(spec, rng)) >= 0.0);
        }
    }
}

TEST_CASE("evaluation is pure") {
    const auto spec = make_benchmark(BenchmarkName::levy, 8);
    RngStream rng(3);
    for (int i = 0; i < 50; ++i) {
        const Vector x = random_feasible(spec, rng);
        CHECK(evaluate(spec, x) == evaluate(spec, x));
    }
}

TEST_CASE("random_feasible stays in the box and is seeded") {
    const auto spec = make_benchmark(BenchmarkName::rastrigin, 4);
    RngStream rng(10);
    Vector mean = Vector::Zero(4);
    const int n = 10000;
    for (int i = 0; i < n; ++i) {
        const Vector x = random_feasible(spec, rng);
        for (int j = 0; j < 4; ++j) {
            CHECK(x[j] >= spec.lower[j]);
            CHECK(x[j] <= spec.upper[j]);
        }
        mean += x;
    }
    mean /= n;
    const double width = spec.upper[0] - spec.lower[0];
    for (int j = 0; j < 4; ++j) {
        CHECK(std::abs(mean[j] - 0.5 * (spec.lower[j] + spec.upper[j])) < 0.02 * width);
    }

    RngStream r1(99), r2(99);
    for (int i = 0; i < 10; ++i) {
        CHECK((random_feasible(spec, r1) - random_feasible(spec, r2)).norm() == 0.0);
    }
}
