#pragma once

#include <utility>
#include <vector>

namespace llnlab {

/// Piecewise-linear function given by knots with strictly increasing x.
/// Outside the knot range it extends by its boundary values (constant), so
/// the global Lipschitz constant is the largest interior slope magnitude.
class TestFunction {
public:
    explicit TestFunction(std::vector<std::pair<double, double>> knots);

    double operator()(double x) const;
    /// Largest absolute slope across segments.
    double lip() const { return lip_; }
    const std::vector<std::pair<double, double>>& knots() const { return knots_; }
    /// Pointwise negation (knot-wise; same x grid).
    TestFunction negated() const;

    /// x on [lo, hi], constant outside.
    static TestFunction identity(double lo, double hi);
    /// |x - c| clipped to [lo, hi].
    static TestFunction abs_dev(double c, double lo, double hi);
    /// Hat centered at `peak`, zero at and beyond a and b, slopes in [-1, 1],
    /// height min(peak - a, b - peak).
    static TestFunction tent(double a, double peak, double b);
    /// Trapezoid approximating the indicator of [a, b]: 1 on [a, b], linear
    /// ramp of width w > 0 on each side, 0 outside [a - w, b + w].
    static TestFunction indicator_smoothed(double a, double b, double w);
    /// (x - c)^+ on [lo, hi].
    static TestFunction pos_part_above(double c, double lo, double hi);
    /// (c - x)^+ on [lo, hi].
    static TestFunction neg_part_below(double c, double lo, double hi);

private:
    std::vector<std::pair<double, double>> knots_;
    double lip_ = 0.0;
};

} // namespace llnlab
