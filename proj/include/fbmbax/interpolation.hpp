#pragma once

// Barycentric Chebyshev interpolation on Lobatto points. Used to memoize
// expensive kernel evaluations on smooth one-dimensional sections; the
// barycentric form is numerically stable for the node counts used here.

#include <cmath>
#include <cstddef>
#include <numbers>
#include <utility>
#include <vector>

#include "errors.hpp"

namespace fbmbax {

class chebyshev_interpolant {
public:
    chebyshev_interpolant() = default;

    template <class F>
    static chebyshev_interpolant build(F&& f, double lo, double hi, int n) {
        if (!(lo < hi))
            throw validation_error("chebyshev_interpolant: requires lo < hi");
        if (n < 2)
            throw validation_error("chebyshev_interpolant: needs at least 2 nodes");
        chebyshev_interpolant c;
        c.lo_ = lo;
        c.hi_ = hi;
        c.x_.resize(n + 1);
        c.y_.resize(n + 1);
        c.w_.resize(n + 1);
        const double mid = 0.5 * (lo + hi);
        const double half = 0.5 * (hi - lo);
        for (int j = 0; j <= n; ++j) {
            const double theta = std::numbers::pi * j / n;
            c.x_[j] = mid + half * std::cos(theta);
            c.y_[j] = f(c.x_[j]);
            double w = (j % 2 == 0) ? 1.0 : -1.0;
            if (j == 0 || j == n) w *= 0.5;
            c.w_[j] = w;
        }
        return c;
    }

    double operator()(double x) const {
        double num = 0.0, den = 0.0;
        for (std::size_t j = 0; j < x_.size(); ++j) {
            const double d = x - x_[j];
            if (d == 0.0) return y_[j];
            const double r = w_[j] / d;
            num += r * y_[j];
            den += r;
        }
        return num / den;
    }

    double lo() const { return lo_; }
    double hi() const { return hi_; }
    bool empty() const { return x_.empty(); }

private:
    double lo_ = 0.0, hi_ = 0.0;
    std::vector<double> x_, y_, w_;
};

} // namespace fbmbax
