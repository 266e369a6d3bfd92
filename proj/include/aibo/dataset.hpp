#pragma once

#include <aibo/types.hpp>

namespace aibo {

/// Rectangular search box in original-domain coordinates.
struct Bounds {
    Vector lower;
    Vector upper;

    Bounds() = default;
    Bounds(Vector lo, Vector hi);

    int dim() const { return static_cast<int>(lower.size()); }

    Vector to_unit(const Vector& x_raw) const;
    Vector from_unit(const Vector& x_unit) const;
    Matrix from_unit_rows(const Matrix& x_unit) const;
};

/// Evaluated samples in both original and normalized coordinates. Rows are
/// points. Transformed targets are refreshed by the owner whenever the power
/// transform is refitted.
class Dataset {
public:
    explicit Dataset(Bounds bounds);

    void append(const Vector& x_raw, double y);
    void append_unit(const Vector& x_unit, double y);

    int size() const { return static_cast<int>(targets_raw_.size()); }
    int dim() const { return bounds_.dim(); }

    const Bounds& bounds() const { return bounds_; }
    const Matrix& inputs_raw() const { return inputs_raw_; }
    const Matrix& inputs_unit() const { return inputs_unit_; }
    const Vector& targets_raw() const { return targets_raw_; }
    const Vector& targets_tf() const { return targets_tf_; }

    void set_transformed_targets(Vector targets_tf);

    /// Index of the lowest raw target (lowest index on ties).
    int best_index() const;

private:
    void append_rows(const Vector& x_raw, const Vector& x_unit, double y);

    Bounds bounds_;
    Matrix inputs_raw_;
    Matrix inputs_unit_;
    Vector targets_raw_;
    Vector targets_tf_;
};

/// Yeo-Johnson power transform followed by standardization to zero mean and
/// unit variance on the fitted sample.
struct PowerTransform {
    double lambda = 1.0;
    double mean_tf = 0.0;
    double std_tf = 1.0;

    double apply(double y) const;
    double invert(double z) const;
    Vector apply(const Vector& y) const;
};

/// Fit lambda by maximum likelihood (golden-section search on [-5, 5]), then
/// standardize. Constant targets fall back to the identity transform with
/// unit scale.
PowerTransform power_transform_fit(const Vector& targets);

double yeo_johnson(double y, double lambda);
double yeo_johnson_inverse(double z, double lambda);

} // namespace aibo
