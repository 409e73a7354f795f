#include "ddmpc/sequence.hpp"

#include <string>

namespace ddmpc {

Sequence::Sequence(Matrix samples) : samples_(std::move(samples)) {
    if (samples_.rows() < 1) throw DimensionError("Sequence: sample dimension must be at least 1");
    if (samples_.cols() < 1) throw DimensionError("Sequence: length must be at least 1");
}

Sequence Sequence::scalar(const std::vector<double>& values) {
    Matrix m(1, static_cast<Index>(values.size()));
    for (std::size_t k = 0; k < values.size(); ++k) m(0, static_cast<Index>(k)) = values[k];
    return Sequence(std::move(m));
}

Sequence Sequence::from_samples(const std::vector<Vector>& samples) {
    if (samples.empty()) throw DimensionError("Sequence: length must be at least 1");
    const Index d = samples.front().size();
    Matrix m(d, static_cast<Index>(samples.size()));
    for (std::size_t k = 0; k < samples.size(); ++k) {
        require_dims(samples[k].size() == d, "Sequence: sample " + std::to_string(k) + " has dimension " +
                                                 std::to_string(samples[k].size()) + ", expected " +
                                                 std::to_string(d));
        m.col(static_cast<Index>(k)) = samples[k];
    }
    return Sequence(std::move(m));
}

Sequence Sequence::from_stacked(const Vector& stacked, Index dim) {
    require_dims(dim >= 1 && stacked.size() % dim == 0, "Sequence: stacked vector length not a multiple of dim");
    return Sequence(Eigen::Map<const Matrix>(stacked.data(), dim, stacked.size() / dim));
}

Sequence Sequence::window(Index start, Index count) const {
    require_dims(start >= 0 && count >= 1 && start + count <= length(), "Sequence::window: range out of bounds");
    return Sequence(samples_.middleCols(start, count));
}

Vector Sequence::stacked() const { return Eigen::Map<const Vector>(samples_.data(), samples_.size()); }

}  // namespace ddmpc
