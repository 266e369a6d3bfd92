#include <aibo/rng.hpp>

#include <cmath>
#include <limits>
#include <stdexcept>

namespace aibo {

namespace {

constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ull;

constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
    z ^= z >> 30;
    z *= 0xBF58476D1CE4E5B9ull;
    z ^= z >> 27;
    z *= 0x94D049BB133111EBull;
    z ^= z >> 31;
    return z;
}

constexpr std::uint64_t block(std::uint64_t key, std::uint64_t counter) noexcept {
    return mix64(key ^ mix64(counter * kGolden + 0x1D8E4E27C47D124Full));
}

std::uint64_t hash_label(std::string_view label) noexcept {
    // FNV-1a
    std::uint64_t h = 0xCBF29CE484222325ull;
    for (unsigned char c : label) {
        h ^= c;
        h *= 0x100000001B3ull;
    }
    return h;
}

double u64_to_unit(std::uint64_t u) noexcept {
    return static_cast<double>(u >> 11) * 0x1.0p-53;
}

constexpr int kHaltonPrimes[64] = {
    2,   3,   5,   7,   11,  13,  17,  19,  23,  29,  31,  37,  41,  43,  47,  53,
    59,  61,  67,  71,  73,  79,  83,  89,  97,  101, 103, 107, 109, 113, 127, 131,
    137, 139, 149, 151, 157, 163, 167, 173, 179, 181, 191, 193, 197, 199, 211, 223,
    227, 229, 233, 239, 241, 251, 257, 263, 269, 271, 277, 281, 283, 293, 307, 311};

double radical_inverse(std::uint64_t index, int base) {
    double inv_base = 1.0 / base;
    double scale = inv_base;
    double result = 0.0;
    while (index > 0) {
        result += static_cast<double>(index % base) * scale;
        index /= base;
        scale *= inv_base;
    }
    return result;
}

double clamp_open_unit(double u) {
    const double lo = 0x1.0p-53;
    const double hi = 1.0 - 0x1.0p-53;
    return u < lo ? lo : (u > hi ? hi : u);
}

} // namespace

RngStream::RngStream(std::uint64_t seed) : key_(mix64(seed ^ 0xA5A5A5A55A5A5A5Aull)) {}

RngStream RngStream::split(std::string_view label) {
    const std::uint64_t h = hash_label(label);
    if (!child_labels_.insert(h).second) {
        throw std::invalid_argument("RngStream::split: duplicate label '" + std::string(label) + "'");
    }
    return RngStream(mix64(key_ ^ mix64(h)), 0);
}

std::uint64_t RngStream::next_u64() {
    return block(key_, counter_++);
}

double RngStream::uniform() {
    return u64_to_unit(next_u64());
}

double RngStream::uniform(double lo, double hi) {
    return lo + (hi - lo) * uniform();
}

double RngStream::normal() {
    return normal_quantile(clamp_open_unit(uniform()));
}

Vector RngStream::uniform_vector(int dim) {
    Vector v(dim);
    for (int i = 0; i < dim; ++i) v[i] = uniform();
    return v;
}

Vector RngStream::normal_vector(int dim) {
    Vector v(dim);
    for (int i = 0; i < dim; ++i) v[i] = normal();
    return v;
}

// AS 241 (Wichura 1988), PPND16: max relative error about 1e-16 on (0,1).
double normal_quantile(double p) {
    if (!(p > 0.0 && p < 1.0)) {
        if (p == 0.0) return -std::numeric_limits<double>::infinity();
        if (p == 1.0) return std::numeric_limits<double>::infinity();
        return std::numeric_limits<double>::quiet_NaN();
    }
    const double q = p - 0.5;
    if (std::abs(q) <= 0.425) {
        const double r = 0.180625 - q * q;
        return q *
               (((((((2.5090809287301226727e+3 * r + 3.3430575583588128105e+4) * r +
                     6.7265770927008700853e+4) *
                        r +
                    4.5921953931549871457e+4) *
                       r +
                   1.3731693765509461125e+4) *
                      r +
                  1.9715909503065514427e+3) *
                     r +
                 1.3314166789178437745e+2) *
                    r +
                3.3871328727963666080e+0) /
               (((((((5.2264952788528545610e+3 * r + 2.8729085735721942674e+4) * r +
                     3.9307895800092710610e+4) *
                        r +
                    2.1213794301586595867e+4) *
                       r +
                   5.3941960214247511077e+3) *
                      r +
                  6.8718700749205790830e+2) *
                     r +
                 4.2313330701600911252e+1) *
                    r +
                1.0);
    }
    double r = q < 0.0 ? p : 1.0 - p;
    r = std::sqrt(-std::log(r));
    double value;
    if (r <= 5.0) {
        r -= 1.6;
        value = (((((((7.74545014278341407640e-4 * r + 2.27238449892691845833e-2) * r +
                      2.41780725177450611770e-1) *
                         r +
                     1.27045825245236838258e+0) *
                        r +
                    3.64784832476320460504e+0) *
                       r +
                   5.76949722146069140550e+0) *
                      r +
                  4.63033784615654529590e+0) *
                     r +
                 1.42343711074968357734e+0) /
                (((((((1.05075007164441684324e-9 * r + 5.47593808499534494600e-4) * r +
                      1.51986665636164571966e-2) *
                         r +
                     1.48103976427480074590e-1) *
                        r +
                    6.89767334985100004550e-1) *
                       r +
                   1.67638483018380384940e+0) *
                      r +
                  2.05319162663775882187e+0) *
                     r +
                 1.0);
    } else {
        r -= 5.0;
        value = (((((((2.01033439929228813265e-7 * r + 2.71155556874348757815e-5) * r +
                      1.24266094738807843860e-3) *
                         r +
                     2.65321895265761230930e-2) *
                        r +
                    2.96560571828504891230e-1) *
                       r +
                   1.78482653991729133580e+0) *
                      r +
                  5.46378491116411436990e+0) *
                     r +
                 6.65790464350110377720e+0) /
                (((((((2.04426310338993978564e-15 * r + 1.42151175831644588870e-7) * r +
                      1.84631831751005468180e-5) *
                         r +
                     7.86869131145613259100e-4) *
                        r +
                    1.48753612908506148525e-2) *
                       r +
                   1.36929880922735805310e-1) *
                      r +
                  5.99832206555887937690e-1) *
                     r +
                 1.0);
    }
    return q < 0.0 ? -value : value;
}

double normal_cdf(double x) {
    return 0.5 * std::erfc(-x * M_SQRT1_2);
}

double normal_pdf(double x) {
    return std::exp(-0.5 * x * x) / std::sqrt(2.0 * M_PI);
}

Matrix normal_bank(const RngStream& stream, int rows, int cols, bool low_discrepancy) {
    if (rows < 1 || cols < 1) throw std::invalid_argument("normal_bank: rows and cols must be >= 1");
    Matrix bank(rows, cols);
    const std::uint64_t state_key = mix64(stream.key() ^ mix64(stream.position() + 0x0B4E5ull));
    for (int j = 0; j < cols; ++j) {
        const std::uint64_t col_key = mix64(state_key ^ mix64(static_cast<std::uint64_t>(j) + 0xC01ull));
        if (low_discrepancy && j < 64) {
            const double shift = u64_to_unit(block(col_key, 0));
            const int base = kHaltonPrimes[j];
            for (int i = 0; i < rows; ++i) {
                double u = radical_inverse(static_cast<std::uint64_t>(i) + 1, base) + shift;
                u -= std::floor(u);
                bank(i, j) = normal_quantile(clamp_open_unit(u));
            }
        } else {
            for (int i = 0; i < rows; ++i) {
                const double u = u64_to_unit(block(col_key, static_cast<std::uint64_t>(i) + 1));
                bank(i, j) = normal_quantile(clamp_open_unit(u));
            }
        }
    }
    return bank;
}

const char* to_string(StrategyKind kind) {
    switch (kind) {
    case StrategyKind::cmaes: return "cmaes";
    case StrategyKind::ga: return "ga";
    case StrategyKind::random_search: return "random";
    case StrategyKind::gaussian_spray: return "spray";
    }
    return "unknown";
}

} // namespace aibo
