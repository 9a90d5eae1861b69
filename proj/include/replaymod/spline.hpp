#pragma once

#include <cstddef>
#include <vector>

namespace replaymod {

// Natural cubic spline: interpolates every knot exactly, C2-continuous at
// interior knots, second derivative zero at both end knots. Evaluation
// outside [x_front, x_back] clamps to the nearest end knot's value.
class CubicSpline {
public:
    // Requires >= 2 strictly increasing abscissae (>= 4 for the toolkit's
    // response fits; that check lives at the call site).
    static CubicSpline fit_natural(const std::vector<double>& x,
                                   const std::vector<double>& y);

    double operator()(double x) const { return eval(x); }
    double eval(double x) const;
    double deriv1(double x) const;
    double deriv2(double x) const;

    double x_front() const { return x_.front(); }
    double x_back() const { return x_.back(); }
    size_t knot_count() const { return x_.size(); }

    // Piece i covers [x_[i], x_[i+1]] with
    // s(x) = a[i] + b[i]*dx + c[i]*dx^2 + d[i]*dx^3, dx = x - x_[i].
    const std::vector<double>& knots_x() const { return x_; }
    const std::vector<double>& coeff_a() const { return a_; }
    const std::vector<double>& coeff_b() const { return b_; }
    const std::vector<double>& coeff_c() const { return c_; }
    const std::vector<double>& coeff_d() const { return d_; }

private:
    size_t piece_index(double x) const;

    std::vector<double> x_;
    std::vector<double> a_, b_, c_, d_;
};

}  // namespace replaymod
