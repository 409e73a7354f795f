#pragma once

#include "ddmpc/types.hpp"

#include <initializer_list>
#include <vector>

namespace ddmpc {

/// Time series of equally sized real vectors, stored one sample per column.
///
/// A `Sequence` always holds at least one sample of dimension at least one.
/// It is immutable after construction.
class Sequence {
 public:
    /// `samples` is dim x length; column k is the sample at time k.
    explicit Sequence(Matrix samples);

    /// Scalar sequence.
    static Sequence scalar(const std::vector<double>& values);
    static Sequence from_samples(const std::vector<Vector>& samples);
    /// Builds a dim x length sequence from a stacked vector (u_0, u_1, ...).
    static Sequence from_stacked(const Vector& stacked, Index dim);

    Index dim() const { return samples_.rows(); }
    Index length() const { return samples_.cols(); }

    Vector at(Index k) const { return samples_.col(k); }
    const Matrix& samples() const { return samples_; }

    /// Samples [start, start + count).
    Sequence window(Index start, Index count) const;
    /// Column-stacked vector (u_0; u_1; ...; u_{N-1}).
    Vector stacked() const;

    friend bool operator==(const Sequence& a, const Sequence& b) {
        return same_values(a.samples_, b.samples_);
    }

 private:
    Matrix samples_;
};

}  // namespace ddmpc
