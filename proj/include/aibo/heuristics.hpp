#pragma once

#include <aibo/dataset.hpp>
#include <aibo/rng.hpp>
#include <aibo/types.hpp>

#include <memory>
#include <utility>
#include <vector>

namespace aibo {

/// E||N(0,I)|| via the series approximation sqrt(n)(1 - 1/(4n) + 1/(21 n^2)).
double expected_norm_gaussian(int dim);
/// Exact gamma-function form sqrt(2) Gamma((n+1)/2) / Gamma(n/2).
double expected_norm_gaussian_exact(int dim);

/// 4 + floor(3 ln d)
int default_cma_lambda(int dim);

struct CmaParams {
    int lambda = 0;
    int mu = 0;
    Vector weights;               // mu entries, descending, sum to one
    double mu_w = 0.0;            // variance effective selection mass
    double c_sigma = 0.0;
    double d_sigma = 0.0;
    double c_c = 0.0;
    double c_1 = 0.0;
    double c_mu = 0.0;
    double alpha_indicator = 1.5; // stall threshold on |p_sigma| / sqrt(n)
    double chi_n = 0.0;           // E||N(0,I)||
};
CmaParams make_cma_params(int dim, int lambda);

struct CmaState {
    Vector mean;                  // unit-cube coordinates
    double sigma = 0.2;
    Matrix cov;
    Vector path_sigma;
    Vector path_c;
    CmaParams params;
    Matrix sqrt_cov;              // symmetric square root of cov
    Matrix inv_sqrt_cov;
    std::vector<std::pair<Vector, double>> gen_buffer;
    long generations = 0;

    int dim() const { return static_cast<int>(mean.size()); }
};

/// Mean starts at the best evaluated sample; C = I, paths zero.
CmaState init_cmaes(const Matrix& unit_points, const Vector& values, double sigma0, int lambda);
CmaState init_cmaes(const Dataset& data, double sigma0, int lambda);

/// k draws from N(mean, sigma^2 C), clamped to the unit cube. Only the RNG
/// stream advances.
Matrix cma_ask(const CmaState& state, int k, RngStream& rng);

/// Buffer told samples; once a full generation has accumulated, run one
/// mean / step-size / covariance update on the whole buffer and clear it.
void cma_tell(CmaState& state, const Matrix& points, const Vector& values);

struct GaParams {
    int tournament_size = 2;
    double crossover_prob = 0.5;  // per mating pair
    double mutation_prob = 0.9;   // per offspring
    double eta_crossover = 15.0;
    double eta_mutation = 20.0;
};

struct GaState {
    Matrix population;            // sorted by fitness ascending
    Vector fitness;
    int pop_size = 50;
    GaParams params;

    int dim() const { return static_cast<int>(population.cols()); }
};

GaState init_ga(const Matrix& unit_points, const Vector& values, int pop_size);
GaState init_ga(const Dataset& data, int pop_size);

/// k offspring via tournament selection -> SBX -> polynomial mutation.
Matrix ga_ask(const GaState& state, int k, RngStream& rng);

/// Merge and keep the best pop_size individuals.
void ga_tell(GaState& state, const Matrix& points, const Vector& values);

Matrix random_ask(int k, int dim, RngStream& rng);
Matrix gaussian_spray_ask(const Vector& incumbent, double spread, int k, RngStream& rng);

struct StrategyOptions {
    double cma_sigma0 = 0.2;
    int cma_lambda = 0;           // 0 -> derived by the owner (batch size rule)
    int ga_pop_size = 50;
    double spray_spread = 0.1;
};

/// Ask/tell interface shared by all initialization strategies. ask never
/// mutates distribution state (only the owned RNG stream advances); tell is
/// the only mutator.
class Strategy {
public:
    virtual ~Strategy() = default;
    virtual StrategyKind kind() const = 0;
    virtual Matrix ask(int k) = 0;
    virtual void tell(const Matrix& points, const Vector& values) = 0;
};

std::unique_ptr<Strategy> make_strategy(StrategyKind kind, const Matrix& init_points,
                                        const Vector& init_values, const StrategyOptions& options,
                                        RngStream rng);

} // namespace aibo
