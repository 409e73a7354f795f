#include "ddmpc/types.hpp"

#include <limits>

namespace ddmpc {

Box Box::unbounded(Index dim) {
    const double inf = std::numeric_limits<double>::infinity();
    return Box{Vector::Constant(dim, -inf), Vector::Constant(dim, inf)};
}

Box Box::uniform(Index dim, double lo, double hi) {
    return Box{Vector::Constant(dim, lo), Vector::Constant(dim, hi)};
}

bool Box::is_bounded() const {
    return lower.array().isFinite().any() || upper.array().isFinite().any();
}

bool Box::contains(const Vector& v, double tol) const {
    if (v.size() != dim()) return false;
    return ((v.array() >= lower.array() - tol) && (v.array() <= upper.array() + tol)).all();
}

bool Box::strictly_contains(const Box& inner) const {
    if (inner.dim() != dim()) return false;
    return ((inner.lower.array() > lower.array()) && (inner.upper.array() < upper.array())).all();
}

Vector Box::clamp(const Vector& v) const { return v.cwiseMax(lower).cwiseMin(upper); }

void Box::validate(const std::string& name) const {
    if (lower.size() != upper.size()) {
        throw DimensionError(name + ": lower and upper bounds differ in dimension");
    }
    if ((lower.array() > upper.array()).any()) {
        throw ConfigError(name + ": lower bound exceeds upper bound");
    }
}

bool operator==(const Box& a, const Box& b) {
    return same_values(a.lower, b.lower) && same_values(a.upper, b.upper);
}

bool same_values(const Matrix& a, const Matrix& b) {
    return a.rows() == b.rows() && a.cols() == b.cols() && (a.array() == b.array()).all();
}

void require_dims(bool ok, const std::string& what) {
    if (!ok) throw DimensionError(what);
}

Matrix repeat_block_diag(const Matrix& block, Index count) {
    Matrix out = Matrix::Zero(block.rows() * count, block.cols() * count);
    for (Index k = 0; k < count; ++k) {
        out.block(k * block.rows(), k * block.cols(), block.rows(), block.cols()) = block;
    }
    return out;
}

bool is_symmetric_positive_definite(const Matrix& m) {
    if (m.rows() != m.cols() || m.size() == 0) return false;
    if (!m.isApprox(m.transpose(), 1e-12)) return false;
    Eigen::LLT<Matrix> llt(m);
    return llt.info() == Eigen::Success;
}

}  // namespace ddmpc
