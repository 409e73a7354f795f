#pragma once

#include "ddmpc/sequence.hpp"

#include <string>

namespace ddmpc {

inline constexpr double kDefaultRankTolerance = 1e-9;
inline constexpr double kDefaultTrajectoryTolerance = 1e-6;

/// Raised when a Hankel depth exceeds the sequence length.
class DepthExceedsLength : public std::invalid_argument {
 public:
    DepthExceedsLength(Index depth, Index length);
    Index depth;
    Index length;
};

/// Depth-L block-Hankel matrix of a sequence.
///
/// Column j holds the window (s_j, ..., s_{j+L-1}) stacked, so block (i, j)
/// equals s_{i+j}. The matrix has d*L rows and N-L+1 columns.
class HankelMatrix {
 public:
    HankelMatrix(Sequence source, Index depth);

    const Sequence& source() const { return source_; }
    Index depth() const { return depth_; }
    const Matrix& entries() const { return entries_; }
    Index rows() const { return entries_.rows(); }
    Index cols() const { return entries_.cols(); }

    /// d x 1 block at block-row i, column j.
    Vector block(Index i, Index j) const { return entries_.block(i * source_.dim(), j, source_.dim(), 1); }

 private:
    Sequence source_;
    Index depth_;
    Matrix entries_;
};

HankelMatrix build_hankel(const Sequence& s, Index depth);

/// Entries only; avoids copying the source when the caller just needs the matrix.
Matrix hankel_entries(const Matrix& samples, Index depth);

struct PeReport {
    Index order = 0;
    Index required_rank = 0;
    Index computed_rank = 0;
    double smallest_retained_singular_value = 0.0;
    double largest_singular_value = 0.0;
    bool is_pe = false;
    // Empty unless the check could not be carried out as asked (e.g. too few samples).
    std::string reason;
};

/// Rank test of H_order(s) against d*order.
///
/// Singular values at or below `rank_tolerance` times the largest one are
/// treated as zero. Sequences shorter than (d+1)*order-1 are reported as not
/// persistently exciting with a reason.
PeReport persistence_order_check(const Sequence& s, Index order, double rank_tolerance = kDefaultRankTolerance);

struct TrajectoryCheck {
    bool is_trajectory = false;
    // ||H alpha - w|| / ||w|| (absolute when w == 0).
    double residual = 0.0;
    double absolute_residual = 0.0;
    Vector alpha;
};

/// Least-squares test whether (u_test, y_test) lies in the column span of the
/// stacked Hankel matrices [H_L(u_data); H_L(y_data)], L = test length.
TrajectoryCheck validate_trajectory(const Sequence& u_data, const Sequence& y_data, const Sequence& u_test,
                                    const Sequence& y_test, double tolerance = kDefaultTrajectoryTolerance);

}  // namespace ddmpc
