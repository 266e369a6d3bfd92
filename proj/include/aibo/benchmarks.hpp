#pragma once

#include <aibo/rng.hpp>
#include <aibo/types.hpp>

#include <string>
#include <string_view>

namespace aibo {

enum class BenchmarkName { ackley, rosenbrock, rastrigin, griewank, levy, sphere };

BenchmarkName benchmark_from_string(std::string_view name);
const char* to_string(BenchmarkName name);

struct BenchmarkSpec {
    BenchmarkName name = BenchmarkName::ackley;
    int dim = 2;
    Vector lower;
    Vector upper;
};

/// Benchmark with its standard search box.
BenchmarkSpec make_benchmark(BenchmarkName name, int dim);
/// Same, with an explicit box override.
BenchmarkSpec make_benchmark(BenchmarkName name, int dim, double lower, double upper);

/// Evaluate at a point in original-domain coordinates. Throws if the point is
/// outside the box.
double evaluate(const BenchmarkSpec& spec, const Vector& x);

/// Uniform sample inside the box.
Vector random_feasible(const BenchmarkSpec& spec, RngStream& rng);

} // namespace aibo
