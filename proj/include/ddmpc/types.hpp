#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>

namespace ddmpc {

using Index = Eigen::Index;
using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Raised when operand dimensions do not agree.
class DimensionError : public std::invalid_argument {
 public:
    using std::invalid_argument::invalid_argument;
};

/// Raised when a configuration value violates its documented range.
class ConfigError : public std::invalid_argument {
 public:
    using std::invalid_argument::invalid_argument;
};

/// Raised by file readers and writers.
class IoError : public std::runtime_error {
 public:
    using std::runtime_error::runtime_error;
};

// Per-channel interval set, e.g. the input constraint set U = [lo, hi]^m.
struct Box {
    Vector lower;
    Vector upper;

    static Box unbounded(Index dim);
    static Box uniform(Index dim, double lo, double hi);

    Index dim() const { return lower.size(); }
    bool is_bounded() const;
    bool contains(const Vector& v, double tol = 0.0) const;
    // Strictly inside, with margin on every channel.
    bool strictly_contains(const Box& inner) const;
    Vector clamp(const Vector& v) const;
    void validate(const std::string& name) const;

    friend bool operator==(const Box& a, const Box& b);
};

void require_dims(bool ok, const std::string& what);

// Exact equality that tolerates differing sizes.
bool same_values(const Matrix& a, const Matrix& b);

// Kronecker-style block diagonal of `count` copies of `block`.
Matrix repeat_block_diag(const Matrix& block, Index count);

bool is_symmetric_positive_definite(const Matrix& m);

}  // namespace ddmpc
