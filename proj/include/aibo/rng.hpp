#pragma once

#include <aibo/types.hpp>

#include <cstdint>
#include <string>
#include <string_view>
#include <unordered_set>

namespace aibo {

/// Counter-based deterministic random stream. A stream is identified by a
/// 64-bit key derived from the root seed and the chain of split labels, plus
/// a draw counter. Draws depend only on (key, counter), so replaying a stream
/// from the same state reproduces the same sequence on any platform, and
/// sibling streams are independent by construction.
class RngStream {
public:
    explicit RngStream(std::uint64_t seed);

    /// Derive an independent child stream. The label must be unique among the
    /// labels already split off this stream.
    RngStream split(std::string_view label);

    std::uint64_t next_u64();

    /// Uniform on [0, 1).
    double uniform();
    double uniform(double lo, double hi);

    /// Standard normal via inverse-CDF.
    double normal();

    Vector uniform_vector(int dim);
    Vector normal_vector(int dim);

    std::uint64_t key() const { return key_; }
    std::uint64_t position() const { return counter_; }

private:
    RngStream(std::uint64_t key, int /*tag*/) : key_(key) {}

    std::uint64_t key_ = 0;
    std::uint64_t counter_ = 0;
    std::unordered_set<std::uint64_t> child_labels_;
};

/// Standard normal quantile (Wichura's AS 241, double precision).
double normal_quantile(double p);
double normal_cdf(double x);
double normal_pdf(double x);

/// rows x cols matrix of standard normal draws, a pure function of the
/// stream's current state (the stream is not advanced). Column j depends only
/// on the state and j, so the first q-1 columns of a q-column bank equal the
/// (q-1)-column bank from the same state. With low_discrepancy set, each
/// column is a shift-scrambled Halton sequence pushed through the normal
/// inverse CDF.
Matrix normal_bank(const RngStream& stream, int rows, int cols, bool low_discrepancy = false);

} // namespace aibo
