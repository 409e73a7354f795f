#include "ddmpc/controller.hpp"

namespace ddmpc {

ControllerInfeasible::ControllerInfeasible(const std::string& what, double distance)
    : std::runtime_error(what + " (initial window distance " + std::to_string(distance) + ")"),
      initial_window_distance(distance) {}

PastWindow::PastWindow(Index n, Index m, Index p) : n_(n), u_(Matrix::Zero(m, n)), y_(Matrix::Zero(p, n)) {
    if (n < 1 || m < 1 || p < 1) throw std::invalid_argument("PastWindow: dimensions must be positive");
}

void PastWindow::push(const Vector& u, const Vector& y) {
    require_dims(u.size() == u_.rows() && y.size() == y_.rows(), "PastWindow::push: dimension mismatch");
    if (n_ > 1) {
        u_.leftCols(n_ - 1) = u_.rightCols(n_ - 1).eval();
        y_.leftCols(n_ - 1) = y_.rightCols(n_ - 1).eval();
    }
    u_.col(n_ - 1) = u;
    y_.col(n_ - 1) = y;
    ++count_;
}

}  // namespace ddmpc
