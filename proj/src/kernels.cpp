#include "slbdim/kernels.hpp"

#include "slbdim/error.hpp"

#include <cmath>
#include <numbers>

namespace slbdim {

GaussianKernel::GaussianKernel(double epsilon) : eps_(epsilon) {
    if (!(epsilon > 0.0) || !std::isfinite(epsilon))
        throw InvalidParameter("shape parameter must be positive and finite");
}

double GaussianKernel::value(double r) const {
    if (!(r >= 0.0)) throw InvalidParameter("distance must be non-negative");
    const double er = eps_ * r;
    return std::exp(-er * er);
}

double GaussianKernel::value(Point2 p, Point2 center) const {
    const Point2 d = p - center;
    return std::exp(-eps_ * eps_ * dot(d, d));
}

Point2 GaussianKernel::gradient(Point2 p, Point2 center) const {
    const Point2 d = p - center;
    const double e2 = eps_ * eps_;
    return (-2.0 * e2 * std::exp(-e2 * dot(d, d))) * d;
}

double GaussianKernel::laplacian(Point2 p, Point2 center) const {
    const Point2 d = p - center;
    const double r2 = dot(d, d);
    const double e2 = eps_ * eps_;
    return (4.0 * e2 * e2 * r2 - 4.0 * e2) * std::exp(-e2 * r2);
}

double fundamental_solution(Point2 x, Point2 xi) {
    const double r = distance(x, xi);
    if (r == 0.0) throw SingularityError("fundamental solution evaluated at its source");
    return std::log(r) / (2.0 * std::numbers::pi);
}

DiskGreen::DiskGreen(Point2 center, double radius) : center_(center), radius_(radius) {
    if (!(radius > 0.0) || !std::isfinite(radius))
        throw InvalidParameter("disk radius must be positive");
}

double DiskGreen::value(Point2 x) const {
    const double r = distance(x, center_);
    if (r == 0.0) throw SingularityError("Green function evaluated at its source");
    if (r > radius_ * (1.0 + 1e-12)) throw OutOfSubdomain("point lies outside the disk");
    return std::log(r / radius_) / (2.0 * std::numbers::pi);
}

double DiskGreen::normal_derivative(Point2 x_on_boundary) const {
    const double r = distance(x_on_boundary, center_);
    if (std::abs(r - radius_) > 1e-10 * radius_)
        throw InvalidParameter("normal derivative requested off the circle");
    return flux();
}

double DiskGreen::flux() const noexcept { return 1.0 / (2.0 * std::numbers::pi * radius_); }

} // namespace slbdim
