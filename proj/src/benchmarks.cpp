#include <aibo/benchmarks.hpp>

#include <cmath>
#include <stdexcept>

namespace aibo {

BenchmarkName benchmark_from_string(std::string_view name) {
    if (name == "ackley") return BenchmarkName::ackley;
    if (name == "rosenbrock") return BenchmarkName::rosenbrock;
    if (name == "rastrigin") return BenchmarkName::rastrigin;
    if (name == "griewank") return BenchmarkName::griewank;
    if (name == "levy") return BenchmarkName::levy;
    if (name == "sphere") return BenchmarkName::sphere;
    throw std::invalid_argument("unknown benchmark function '" + std::string(name) + "'");
}

const char* to_string(BenchmarkName name) {
    switch (name) {
    case BenchmarkName::ackley: return "ackley";
    case BenchmarkName::rosenbrock: return "rosenbrock";
    case BenchmarkName::rastrigin: return "rastrigin";
    case BenchmarkName::griewank: return "griewank";
    case BenchmarkName::levy: return "levy";
    case BenchmarkName::sphere: return "sphere";
    }
    return "unknown";
}

namespace {

std::pair<double, double> default_box(BenchmarkName name) {
    switch (name) {
    case BenchmarkName::ackley: return {-5.0, 10.0};
    case BenchmarkName::rosenbrock: return {-5.0, 10.0};
    case BenchmarkName::rastrigin: return {-5.12, 5.12};
    case BenchmarkName::griewank: return {-10.0, 10.0};
    case BenchmarkName::levy: return {-600.0, 600.0};
    case BenchmarkName::sphere: return {-5.12, 5.12};
    }
    return {-1.0, 1.0};
}

double ackley(const Vector& x) {
    const double a = 20.0, b = 0.2, c = 2.0 * M_PI;
    const double d = static_cast<double>(x.size());
    const double sum_sq = x.squaredNorm() / d;
    double sum_cos = 0.0;
    for (int i = 0; i < x.size(); ++i) sum_cos += std::cos(c * x[i]);
    sum_cos /= d;
    return -a * std::exp(-b * std::sqrt(sum_sq)) - std::exp(sum_cos) + a + std::exp(1.0);
}

double rosenbrock(const Vector& x) {
    double total = 0.0;
    for (int i = 0; i + 1 < x.size(); ++i) {
        const double t1 = x[i + 1] - x[i] * x[i];
        const double t2 = 1.0 - x[i];
        total += 100.0 * t1 * t1 + t2 * t2;
    }
    return total;
}

double rastrigin(const Vector& x) {
    double total = 10.0 * static_cast<double>(x.size());
    for (int i = 0; i < x.size(); ++i) {
        total += x[i] * x[i] - 10.0 * std::cos(2.0 * M_PI * x[i]);
    }
    return total;
}

double griewank(const Vector& x) {
    double sum = 0.0, prod = 1.0;
    for (int i = 0; i < x.size(); ++i) {
        sum += x[i] * x[i];
        prod *= std::cos(x[i] / std::sqrt(static_cast<double>(i + 1)));
    }
    return sum / 4000.0 - prod + 1.0;
}

double levy(const Vector& x) {
    const int d = static_cast<int>(x.size());
    auto w = [&](int i) { return 1.0 + (x[i] - 1.0) / 4.0; };
    const double s0 = std::sin(M_PI * w(0));
    double total = s0 * s0;
    for (int i = 0; i + 1 < d; ++i) {
        const double wi = w(i);
        const double s = std::sin(M_PI * wi + 1.0);
        total += (wi - 1.0) * (wi - 1.0) * (1.0 + 10.0 * s * s);
    }
    const double wd = w(d - 1);
    const double sd = std::sin(2.0 * M_PI * wd);
    total += (wd - 1.0) * (wd - 1.0) * (1.0 + sd * sd);
    return total;
}

} // namespace

BenchmarkSpec make_benchmark(BenchmarkName name, int dim) {
    const auto [lo, hi] = default_box(name);
    return make_benchmark(name, dim, lo, hi);
}

BenchmarkSpec make_benchmark(BenchmarkName name, int dim, double lower, double upper) {
    if (dim < 1) throw std::invalid_argument("benchmark dimension must be >= 1");
    if (!(lower < upper)) throw std::invalid_argument("benchmark bounds must satisfy lower < upper");
    BenchmarkSpec spec;
    spec.name = name;
    spec.dim = dim;
    spec.lower = Vector::Constant(dim, lower);
    spec.upper = Vector::Constant(dim, upper);
    return spec;
}

double evaluate(const BenchmarkSpec& spec, const Vector& x) {
    if (x.size() != spec.dim) throw std::invalid_argument("benchmark input dimension mismatch");
    for (int i = 0; i < x.size(); ++i) {
        if (x[i] < spec.lower[i] || x[i] > spec.upper[i]) {
            throw std::out_of_range("benchmark input outside the search box");
        }
    }
    switch (spec.name) {
    case BenchmarkName::ackley: return ackley(x);
    case BenchmarkName::rosenbrock: return rosenbrock(x);
    case BenchmarkName::rastrigin: return rastrigin(x);
    case BenchmarkName::griewank: return griewank(x);
    case BenchmarkName::levy: return levy(x);
    case BenchmarkName::sphere: return x.squaredNorm();
    }
    throw std::logic_error("unreachable");
}

Vector random_feasible(const BenchmarkSpec& spec, RngStream& rng) {
    Vector x(spec.dim);
    for (int i = 0; i < spec.dim; ++i) x[i] = rng.uniform(spec.lower[i], spec.upper[i]);
    return x;
}

} // namespace aibo
