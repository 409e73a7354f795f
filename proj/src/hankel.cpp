#include "ddmpc/hankel.hpp"

#include <Eigen/SVD>

#include <string>

namespace ddmpc {

DepthExceedsLength::DepthExceedsLength(Index d, Index n)
    : std::invalid_argument("Hankel depth " + std::to_string(d) + " exceeds sequence length " + std::to_string(n)),
      depth(d),
      length(n) {}

Matrix hankel_entries(const Matrix& samples, Index depth) {
    const Index d = samples.rows();
    const Index n = samples.cols();
    if (depth < 1) throw std::invalid_argument("Hankel depth must be positive");
    if (depth > n) throw DepthExceedsLength(depth, n);
    const Index cols = n - depth + 1;
    Matrix h(d * depth, cols);
    for (Index j = 0; j < cols; ++j) {
        // Column j is the contiguous stacked window s_j .. s_{j+depth-1}.
        h.col(j) = Eigen::Map<const Vector>(samples.data() + j * d, d * depth);
    }
    return h;
}

HankelMatrix::HankelMatrix(Sequence source, Index depth)
    : source_(std::move(source)), depth_(depth), entries_(hankel_entries(source_.samples(), depth)) {}

HankelMatrix build_hankel(const Sequence& s, Index depth) { return HankelMatrix(s, depth); }

PeReport persistence_order_check(const Sequence& s, Index order, double rank_tolerance) {
    if (order < 1) throw std::invalid_argument("persistence order must be positive");
    PeReport report;
    report.order = order;
    report.required_rank = s.dim() * order;
    if (s.length() < order) {
        report.reason = "sequence shorter than the requested order";
        return report;
    }
    const Matrix h = hankel_entries(s.samples(), order);
    const Vector sv = Eigen::BDCSVD<Matrix>(h).singularValues();
    report.largest_singular_value = sv.size() > 0 ? sv(0) : 0.0;
    const double threshold = rank_tolerance * report.largest_singular_value;
    for (Index i = 0; i < sv.size(); ++i) {
        if (sv(i) > threshold && sv(i) > 0.0) {
            ++report.computed_rank;
            report.smallest_retained_singular_value = sv(i);
        }
    }
    report.is_pe = report.computed_rank == report.required_rank;
    if (s.length() < (s.dim() + 1) * order - 1) {
        report.reason = "sequence shorter than (d+1)*order-1 samples";
    }
    return report;
}

TrajectoryCheck validate_trajectory(const Sequence& u_data, const Sequence& y_data, const Sequence& u_test,
                                    const Sequence& y_test, double tolerance) {
    require_dims(u_data.length() == y_data.length(), "validate_trajectory: data input/output lengths differ");
    require_dims(u_test.length() == y_test.length(), "validate_trajectory: test input/output lengths differ");
    require_dims(u_data.dim() == u_test.dim(), "validate_trajectory: input dimensions differ");
    require_dims(y_data.dim() == y_test.dim(), "validate_trajectory: output dimensions differ");
    const Index depth = u_test.length();
    require_dims(depth <= u_data.length(), "validate_trajectory: test trajectory longer than data");

    const Matrix hu = hankel_entries(u_data.samples(), depth);
    const Matrix hy = hankel_entries(y_data.samples(), depth);
    Matrix stacked(hu.rows() + hy.rows(), hu.cols());
    stacked << hu, hy;
    Vector w(stacked.rows());
    w << u_test.stacked(), y_test.stacked();

    TrajectoryCheck out;
    out.alpha = stacked.completeOrthogonalDecomposition().solve(w);
    out.absolute_residual = (stacked * out.alpha - w).norm();
    const double scale = w.norm();
    out.residual = scale > 0.0 ? out.absolute_residual / scale : out.absolute_residual;
    out.is_trajectory = out.residual <= tolerance;
    return out;
}

}  // namespace ddmpc
