#pragma once

#include "slbdim/geometry.hpp"

namespace slbdim {

/// Gaussian radial kernel exp(-(eps r)^2).
class GaussianKernel {
public:
    explicit GaussianKernel(double epsilon);

    [[nodiscard]] double epsilon() const noexcept { return eps_; }

    [[nodiscard]] double value(double r) const;
    [[nodiscard]] double value(Point2 p, Point2 center) const;
    [[nodiscard]] Point2 gradient(Point2 p, Point2 center) const;
    /// (4 eps^4 r^2 - 4 eps^2) exp(-eps^2 r^2)
    [[nodiscard]] double laplacian(Point2 p, Point2 center) const;

private:
    double eps_;
};

inline double gaussian_value(const GaussianKernel& k, double r) { return k.value(r); }
inline double gaussian_laplacian(const GaussianKernel& k, Point2 p, Point2 center) {
    return k.laplacian(p, center);
}

/// Free-space Laplace fundamental solution (1/2pi) ln|x - xi|.
double fundamental_solution(Point2 x, Point2 xi);

/// Green-Dirichlet function of a disk with the source at its center,
/// G = (1/2pi) ln(r/R), which vanishes on the circle.
class DiskGreen {
public:
    DiskGreen(Point2 center, double radius);

    [[nodiscard]] Point2 center() const noexcept { return center_; }
    [[nodiscard]] double radius() const noexcept { return radius_; }

    [[nodiscard]] double value(Point2 x) const;
    /// Outward normal derivative on the circle, 1/(2 pi R).
    [[nodiscard]] double normal_derivative(Point2 x_on_boundary) const;
    /// The normal derivative without the on-circle check.
    [[nodiscard]] double flux() const noexcept;

private:
    Point2 center_;
    double radius_;
};

inline double disk_green_value(const DiskGreen& g, Point2 x) { return g.value(x); }
inline double disk_green_normal_derivative(const DiskGreen& g, Point2 x) {
    return g.normal_derivative(x);
}

} // namespace slbdim
