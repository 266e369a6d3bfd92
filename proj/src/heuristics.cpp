#include <aibo/heuristics.hpp>

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace aibo {

double expected_norm_gaussian(int dim) {
    const double n = static_cast<double>(dim);
    return std::sqrt(n) * (1.0 - 1.0 / (4.0 * n) + 1.0 / (21.0 * n * n));
}

double expected_norm_gaussian_exact(int dim) {
    const double n = static_cast<double>(dim);
    return std::sqrt(2.0) * std::exp(std::lgamma((n + 1.0) / 2.0) - std::lgamma(n / 2.0));
}

int default_cma_lambda(int dim) {
    return 4 + static_cast<int>(std::floor(3.0 * std::log(static_cast<double>(dim))));
}

CmaParams make_cma_params(int dim, int lambda) {
    if (lambda < 2) throw std::invalid_argument("make_cma_params: lambda must be >= 2");
    CmaParams p;
    const double n = static_cast<double>(dim);
    p.lambda = lambda;
    p.mu = lambda / 2;
    p.weights.resize(p.mu);
    for (int i = 0; i < p.mu; ++i) {
        p.weights[i] = std::log(p.mu + 0.5) - std::log(static_cast<double>(i + 1));
    }
    p.weights /= p.weights.sum();
    p.mu_w = 1.0 / p.weights.squaredNorm();
    p.c_sigma = (p.mu_w + 2.0) / (n + p.mu_w + 5.0);
    p.d_sigma = 1.0 + 2.0 * std::max(0.0, std::sqrt((p.mu_w - 1.0) / (n + 1.0)) - 1.0) + p.c_sigma;
    p.c_c = (4.0 + p.mu_w / n) / (n + 4.0 + 2.0 * p.mu_w / n);
    p.c_1 = 2.0 / ((n + 1.3) * (n + 1.3) + p.mu_w);
    p.c_mu = std::min(1.0 - p.c_1,
                      2.0 * (p.mu_w - 2.0 + 1.0 / p.mu_w) / ((n + 2.0) * (n + 2.0) + p.mu_w));
    p.chi_n = expected_norm_gaussian(dim);
    return p;
}

namespace {

void refresh_cov_factors(CmaState& state) {
    state.cov = 0.5 * (state.cov + state.cov.transpose()).eval();
    Eigen::SelfAdjointEigenSolver<Matrix> eig(state.cov);
    Vector evals = eig.eigenvalues();
    const double floor = std::max(1e-20, 1e-14 * evals.maxCoeff());
    for (int i = 0; i < evals.size(); ++i) evals[i] = std::max(evals[i], floor);
    const Matrix& basis = eig.eigenvectors();
    state.cov = basis * evals.asDiagonal() * basis.transpose();
    state.cov = 0.5 * (state.cov + state.cov.transpose()).eval();
    state.sqrt_cov = basis * evals.cwiseSqrt().asDiagonal() * basis.transpose();
    state.inv_sqrt_cov = basis * evals.cwiseSqrt().cwiseInverse().asDiagonal() * basis.transpose();
}

std::vector<int> sort_ascending(const Vector& values) {
    std::vector<int> order(values.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b) { return values[a] < values[b]; });
    return order;
}

int argmin_lowest_index(const Vector& values) {
    int best = 0;
    for (int i = 1; i < values.size(); ++i) {
        if (values[i] < values[best]) best = i;
    }
    return best;
}

void generation_update(CmaState& state) {
    auto& p = state.params;
    const int n = state.dim();

    std::stable_sort(state.gen_buffer.begin(), state.gen_buffer.end(),
                     [](const auto& a, const auto& b) { return a.second < b.second; });

    const Vector old_mean = state.mean;
    Vector new_mean = Vector::Zero(n);
    for (int i = 0; i < p.mu; ++i) new_mean += p.weights[i] * state.gen_buffer[i].first;

    const Vector y_w = (new_mean - old_mean) / state.sigma;

    state.path_sigma = (1.0 - p.c_sigma) * state.path_sigma +
                       std::sqrt(1.0 - (1.0 - p.c_sigma) * (1.0 - p.c_sigma)) *
                           std::sqrt(p.mu_w) * (state.inv_sqrt_cov * y_w);
    const double ps_norm = state.path_sigma.norm();
    const double sigma_new =
        state.sigma * std::exp((p.c_sigma / p.d_sigma) * (ps_norm / p.chi_n - 1.0));

    const bool stalled = ps_norm > p.alpha_indicator * std::sqrt(static_cast<double>(n));
    const double h = stalled ? 0.0 : 1.0;
    state.path_c = (1.0 - p.c_c) * state.path_c +
                   h * std::sqrt(1.0 - (1.0 - p.c_c) * (1.0 - p.c_c)) * std::sqrt(p.mu_w) * y_w;
    // c_s compensates the variance lost when the indicator gates the path update
    const double c_s = (1.0 - h) * p.c_1 * p.c_c * (2.0 - p.c_c);

    Matrix rank_mu = Matrix::Zero(n, n);
    for (int i = 0; i < p.mu; ++i) {
        const Vector z = (state.gen_buffer[i].first - old_mean) / state.sigma;
        rank_mu.noalias() += p.weights[i] * z * z.transpose();
    }
    state.cov = (1.0 - p.c_1 - p.c_mu + c_s) * state.cov +
                p.c_1 * state.path_c * state.path_c.transpose() + p.c_mu * rank_mu;

    state.mean = new_mean;
    state.sigma = sigma_new;
    refresh_cov_factors(state);
    state.gen_buffer.clear();
    ++state.generations;
}

} // namespace

CmaState init_cmaes(const Matrix& unit_points, const Vector& values, double sigma0, int lambda) {
    if (unit_points.rows() == 0) throw std::invalid_argument("init_cmaes: empty initial dataset");
    if (unit_points.rows() != values.size()) throw std::invalid_argument("init_cmaes: size mismatch");
    const int d = static_cast<int>(unit_points.cols());
    CmaState state;
    state.mean = unit_points.row(argmin_lowest_index(values)).transpose();
    state.sigma = sigma0;
    state.cov = Matrix::Identity(d, d);
    state.sqrt_cov = state.cov;
    state.inv_sqrt_cov = state.cov;
    state.path_sigma = Vector::Zero(d);
    state.path_c = Vector::Zero(d);
    state.params = make_cma_params(d, lambda);
    return state;
}

CmaState init_cmaes(const Dataset& data, double sigma0, int lambda) {
    return init_cmaes(data.inputs_unit(), data.targets_raw(), sigma0, lambda);
}

Matrix cma_ask(const CmaState& state, int k, RngStream& rng) {
    const int d = state.dim();
    Matrix out(k, d);
    for (int i = 0; i < k; ++i) {
        const Vector z = rng.normal_vector(d);
        out.row(i) = (state.mean + state.sigma * (state.sqrt_cov * z))
                         .cwiseMax(0.0)
                         .cwiseMin(1.0)
                         .transpose();
    }
    return out;
}

void cma_tell(CmaState& state, const Matrix& points, const Vector& values) {
    if (points.rows() != values.size()) throw std::invalid_argument("cma_tell: size mismatch");
    if (!values.allFinite()) throw std::invalid_argument("cma_tell: non-finite values in batch");
    for (Eigen::Index i = 0; i < points.rows(); ++i) {
        state.gen_buffer.emplace_back(points.row(i).transpose(), values[i]);
    }
    if (static_cast<int>(state.gen_buffer.size()) >= state.params.lambda) {
        generation_update(state);
    }
}

GaState init_ga(const Matrix& unit_points, const Vector& values, int pop_size) {
    if (pop_size < 2) throw std::invalid_argument("init_ga: pop_size must be >= 2");
    if (unit_points.rows() == 0) throw std::invalid_argument("init_ga: empty initial dataset");
    GaState state;
    state.pop_size = pop_size;
    const auto order = sort_ascending(values);
    const int keep = std::min<int>(pop_size, static_cast<int>(order.size()));
    state.population.resize(keep, unit_points.cols());
    state.fitness.resize(keep);
    for (int i = 0; i < keep; ++i) {
        state.population.row(i) = unit_points.row(order[i]);
        state.fitness[i] = values[order[i]];
    }
    return state;
}

GaState init_ga(const Dataset& data, int pop_size) {
    return init_ga(data.inputs_unit(), data.targets_raw(), pop_size);
}

namespace {

int tournament_pick(const GaState& state, RngStream& rng) {
    const int pop = static_cast<int>(state.population.rows());
    int best = std::min(static_cast<int>(rng.uniform() * pop), pop - 1);
    for (int t = 1; t < state.params.tournament_size; ++t) {
        const int challenger = std::min(static_cast<int>(rng.uniform() * pop), pop - 1);
        if (state.fitness[challenger] < state.fitness[best]) best = challenger;
    }
    return best;
}

// Bounded simulated binary crossover on the unit cube (Deb & Agrawal).
void sbx_crossover(Vector& c1, Vector& c2, double eta, RngStream& rng) {
    for (int j = 0; j < c1.size(); ++j) {
        if (rng.uniform() > 0.5) continue;
        double y1 = c1[j], y2 = c2[j];
        if (std::abs(y1 - y2) < 1e-14) continue;
        if (y1 > y2) std::swap(y1, y2);
        const double rand = rng.uniform();
        const double span = y2 - y1;

        double beta = 1.0 + 2.0 * y1 / span;
        double alpha = 2.0 - std::pow(beta, -(eta + 1.0));
        double betaq = rand <= 1.0 / alpha
                           ? std::pow(rand * alpha, 1.0 / (eta + 1.0))
                           : std::pow(1.0 / (2.0 - rand * alpha), 1.0 / (eta + 1.0));
        double out1 = 0.5 * ((y1 + y2) - betaq * span);

        beta = 1.0 + 2.0 * (1.0 - y2) / span;
        alpha = 2.0 - std::pow(beta, -(eta + 1.0));
        betaq = rand <= 1.0 / alpha ? std::pow(rand * alpha, 1.0 / (eta + 1.0))
                                    : std::pow(1.0 / (2.0 - rand * alpha), 1.0 / (eta + 1.0));
        double out2 = 0.5 * ((y1 + y2) + betaq * span);

        out1 = std::clamp(out1, 0.0, 1.0);
        out2 = std::clamp(out2, 0.0, 1.0);
        if (rng.uniform() < 0.5) std::swap(out1, out2);
        c1[j] = out1;
        c2[j] = out2;
    }
}

// Bounded polynomial mutation on the unit cube, per-gene probability 1/d.
void polynomial_mutation(Vector& x, double eta, RngStream& rng) {
    const double gene_prob = 1.0 / static_cast<double>(x.size());
    for (int j = 0; j < x.size(); ++j) {
        if (rng.uniform() >= gene_prob) continue;
        const double y = x[j];
        const double u = rng.uniform();
        const double mut_pow = 1.0 / (eta + 1.0);
        double delta;
        if (u < 0.5) {
            const double xy = 1.0 - y;
            const double val = 2.0 * u + (1.0 - 2.0 * u) * std::pow(xy, eta + 1.0);
            delta = std::pow(val, mut_pow) - 1.0;
        } else {
            const double xy = y;
            const double val = 2.0 * (1.0 - u) + (2.0 * u - 1.0) * std::pow(xy, eta + 1.0);
            delta = 1.0 - std::pow(val, mut_pow);
        }
        x[j] = std::clamp(y + delta, 0.0, 1.0);
    }
}

} // namespace

Matrix ga_ask(const GaState& state, int k, RngStream& rng) {
    const int d = state.dim();
    Matrix out(k, d);
    int produced = 0;
    while (produced < k) {
        const int i1 = tournament_pick(state, rng);
        const int i2 = tournament_pick(state, rng);
        Vector c1 = state.population.row(i1).transpose();
        Vector c2 = state.population.row(i2).transpose();
        if (rng.uniform() < state.params.crossover_prob) {
            sbx_crossover(c1, c2, state.params.eta_crossover, rng);
        }
        if (rng.uniform() < state.params.mutation_prob) {
            polynomial_mutation(c1, state.params.eta_mutation, rng);
        }
        if (rng.uniform() < state.params.mutation_prob) {
            polynomial_mutation(c2, state.params.eta_mutation, rng);
        }
        out.row(produced++) = c1.transpose();
        if (produced < k) out.row(produced++) = c2.transpose();
    }
    return out;
}

void ga_tell(GaState& state, const Matrix& points, const Vector& values) {
    if (points.rows() != values.size()) throw std::invalid_argument("ga_tell: size mismatch");
    const int old = static_cast<int>(state.population.rows());
    const int added = static_cast<int>(points.rows());
    Matrix merged(old + added, state.dim());
    Vector merged_fitness(old + added);
    merged.topRows(old) = state.population;
    merged_fitness.head(old) = state.fitness;
    merged.bottomRows(added) = points;
    merged_fitness.tail(added) = values;

    const auto order = sort_ascending(merged_fitness);
    const int keep = std::min(state.pop_size, old + added);
    Matrix population(keep, state.dim());
    Vector fitness(keep);
    for (int i = 0; i < keep; ++i) {
        population.row(i) = merged.row(order[i]);
        fitness[i] = merged_fitness[order[i]];
    }
    state.population = std::move(population);
    state.fitness = std::move(fitness);
}

Matrix random_ask(int k, int dim, RngStream& rng) {
    Matrix out(k, dim);
    for (int i = 0; i < k; ++i) {
        for (int j = 0; j < dim; ++j) out(i, j) = rng.uniform();
    }
    return out;
}

Matrix gaussian_spray_ask(const Vector& incumbent, double spread, int k, RngStream& rng) {
    const int d = static_cast<int>(incumbent.size());
    Matrix out(k, d);
    for (int i = 0; i < k; ++i) {
        for (int j = 0; j < d; ++j) {
            out(i, j) = std::clamp(incumbent[j] + spread * rng.normal(), 0.0, 1.0);
        }
    }
    return out;
}

namespace {

class CmaEsStrategy final : public Strategy {
public:
    CmaEsStrategy(const Matrix& init_points, const Vector& init_values, double sigma0, int lambda,
                  RngStream rng)
        : state_(init_cmaes(init_points, init_values, sigma0, lambda)), rng_(std::move(rng)) {}

    StrategyKind kind() const override { return StrategyKind::cmaes; }
    Matrix ask(int k) override { return cma_ask(state_, k, rng_); }
    void tell(const Matrix& points, const Vector& values) override {
        cma_tell(state_, points, values);
    }

private:
    CmaState state_;
    RngStream rng_;
};

class GaStrategy final : public Strategy {
public:
    GaStrategy(const Matrix& init_points, const Vector& init_values, int pop_size, RngStream rng)
        : state_(init_ga(init_points, init_values, pop_size)), rng_(std::move(rng)) {}

    StrategyKind kind() const override { return StrategyKind::ga; }
    Matrix ask(int k) override { return ga_ask(state_, k, rng_); }
    void tell(const Matrix& points, const Vector& values) override {
        ga_tell(state_, points, values);
    }

private:
    GaState state_;
    RngStream rng_;
};

class RandomStrategy final : public Strategy {
public:
    RandomStrategy(int dim, RngStream rng) : dim_(dim), rng_(std::move(rng)) {}

    StrategyKind kind() const override { return StrategyKind::random_search; }
    Matrix ask(int k) override { return random_ask(k, dim_, rng_); }
    void tell(const Matrix&, const Vector&) override {}

private:
    int dim_;
    RngStream rng_;
};

class GaussianSprayStrategy final : public Strategy {
public:
    GaussianSprayStrategy(const Matrix& init_points, const Vector& init_values, double spread,
                          RngStream rng)
        : spread_(spread), rng_(std::move(rng)) {
        const int best = argmin_lowest_index(init_values);
        incumbent_ = init_points.row(best).transpose();
        incumbent_value_ = init_values[best];
    }

    StrategyKind kind() const override { return StrategyKind::gaussian_spray; }
    Matrix ask(int k) override { return gaussian_spray_ask(incumbent_, spread_, k, rng_); }
    void tell(const Matrix& points, const Vector& values) override {
        for (Eigen::Index i = 0; i < points.rows(); ++i) {
            if (values[i] < incumbent_value_) {
                incumbent_value_ = values[i];
                incumbent_ = points.row(i).transpose();
            }
        }
    }

private:
    Vector incumbent_;
    double incumbent_value_ = 0.0;
    double spread_;
    RngStream rng_;
};

} // namespace

std::unique_ptr<Strategy> make_strategy(StrategyKind kind, const Matrix& init_points,
                                        const Vector& init_values, const StrategyOptions& options,
                                        RngStream rng) {
    switch (kind) {
    case StrategyKind::cmaes: {
        const int lambda = options.cma_lambda > 0
                               ? options.cma_lambda
                               : default_cma_lambda(static_cast<int>(init_points.cols()));
        return std::make_unique<CmaEsStrategy>(init_points, init_values, options.cma_sigma0,
                                               lambda, std::move(rng));
    }
    case StrategyKind::ga:
        return std::make_unique<GaStrategy>(init_points, init_values, options.ga_pop_size,
                                            std::move(rng));
    case StrategyKind::random_search:
        return std::make_unique<RandomStrategy>(static_cast<int>(init_points.cols()),
                                                std::move(rng));
    case StrategyKind::gaussian_spray:
        return std::make_unique<GaussianSprayStrategy>(init_points, init_values,
                                                       options.spray_spread, std::move(rng));
    }
    throw std::logic_error("unreachable");
}

} // namespace aibo
