#include "replaymod/spline.hpp"

#include <algorithm>
#include <stdexcept>

namespace replaymod {

CubicSpline CubicSpline::fit_natural(const std::vector<double>& x,
                                     const std::vector<double>& y) {
    const size_t n = x.size();
    if (n < 2 || y.size() != n)
        throw std::invalid_argument("spline needs >= 2 matching knots");
    for (size_t i = 1; i < n; ++i)
        if (!(x[i] > x[i - 1]))
            throw std::invalid_argument("knot abscissae must be strictly increasing");

    CubicSpline s;
    s.x_ = x;
    s.a_ = y;
    s.b_.assign(n, 0.0);
    s.c_.assign(n, 0.0);
    s.d_.assign(n, 0.0);
    if (n == 2) {
        s.b_[0] = (y[1] - y[0]) / (x[1] - x[0]);
        return s;
    }

    // Tridiagonal system for the second-derivative coefficients c (natural
    // boundary: c[0] = c[n-1] = 0), solved with the Thomas algorithm; the
    // matrix is strictly diagonally dominant.
    std::vector<double> h(n - 1);
    for (size_t i = 0; i + 1 < n; ++i) h[i] = x[i + 1] - x[i];

    std::vector<double> diag(n, 1.0), upper(n, 0.0), rhs(n, 0.0);
    for (size_t i = 1; i + 1 < n; ++i) {
        diag[i] = 2.0 * (h[i - 1] + h[i]);
        upper[i] = h[i];
        rhs[i] = 3.0 * ((y[i + 1] - y[i]) / h[i] - (y[i] - y[i - 1]) / h[i - 1]);
    }

    // Forward sweep (lower diagonal for row i is h[i-1]).
    for (size_t i = 1; i + 1 < n; ++i) {
        const double lower = (i == 1) ? 0.0 : h[i - 1];
        const double m = diag[i] - lower * upper[i - 1];
        upper[i] /= m;
        rhs[i] = (rhs[i] - lower * rhs[i - 1]) / m;
    }
    for (size_t i = n - 2; i >= 1; --i) {
        s.c_[i] = rhs[i] - upper[i] * s.c_[i + 1];
        if (i == 1) break;
    }

    for (size_t i = 0; i + 1 < n; ++i) {
        s.b_[i] = (y[i + 1] - y[i]) / h[i] - h[i] * (2.0 * s.c_[i] + s.c_[i + 1]) / 3.0;
        s.d_[i] = (s.c_[i + 1] - s.c_[i]) / (3.0 * h[i]);
    }
    return s;
}

size_t CubicSpline::piece_index(double x) const {
    // Largest i with x_[i] <= x, clamped to a valid piece.
    const auto it = std::upper_bound(x_.begin(), x_.end(), x);
    if (it == x_.begin()) return 0;
    size_t i = static_cast<size_t>(it - x_.begin()) - 1;
    if (i >= x_.size() - 1) i = x_.size() - 2;
    return i;
}

double CubicSpline::eval(double x) const {
    if (x <= x_.front()) return a_.front();
    if (x >= x_.back()) return a_.back();
    const size_t i = piece_index(x);
    const double dx = x - x_[i];
    return a_[i] + dx * (b_[i] + dx * (c_[i] + dx * d_[i]));
}

double CubicSpline::deriv1(double x) const {
    if (x < x_.front() || x > x_.back()) return 0.0;
    const size_t i = piece_index(x);
    const double dx = x - x_[i];
    return b_[i] + dx * (2.0 * c_[i] + dx * 3.0 * d_[i]);
}

double CubicSpline::deriv2(double x) const {
    if (x < x_.front() || x > x_.back()) return 0.0;
    const size_t i = piece_index(x);
    const double dx = x - x_[i];
    return 2.0 * c_[i] + 6.0 * d_[i] * dx;
}

}  // namespace replaymod
