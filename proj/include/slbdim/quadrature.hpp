#pragma once

#include "slbdim/geometry.hpp"
#include "slbdim/stable_basis.hpp"

#include <Eigen/Dense>

#include <cstddef>
#include <functional>
#include <vector>

namespace slbdim {

/// Gauss-Legendre rule on [-1, 1].
struct QuadratureRule1D {
    std::vector<double> nodes;
    std::vector<double> weights;
};

QuadratureRule1D gauss_legendre(int order);

struct WeightedPoint {
    Point2 point;
    double weight = 0.0;
};

/// Mapped Gauss-Legendre rule in theta on the circle |x - c| = R.
std::vector<WeightedPoint> circle_rule(const Subdomain& sub, int order);

/// Polar product rule on the disk. The radial rule is Gauss-Legendre on
/// t in (0, 1) with r = R t^3; the graded map and the polar Jacobian r
/// together smooth the r ln r behaviour of the Green kernel at the center.
std::vector<WeightedPoint> disk_rule(const Subdomain& sub, int radial_order, int angular_order);

struct QuadratureOrders {
    int circle = 32;
    int radial = 16;
    int angular = 32;
};

/// Integrals of the disk Green kernels against a local basis:
///   h_j = circle integral of Q * basis_j,
///   g_j = disk integral of G * basis_j,
///   f_tilde = disk integral of G * f.
struct InfluenceCoefficients {
    Eigen::VectorXd h;
    Eigen::VectorXd g;
    double f_tilde = 0.0;
};

/// Quadrature points and Green-kernel weights for one subdomain, reusable
/// across several bases on the same disk.
class SubdomainQuadrature {
public:
    explicit SubdomainQuadrature(const Subdomain& sub, const QuadratureOrders& orders = {});

    [[nodiscard]] const Subdomain& subdomain() const noexcept { return sub_; }
    [[nodiscard]] const std::vector<Point2>& circle_points() const noexcept { return circle_pts_; }
    /// w * Q on the circle.
    [[nodiscard]] const std::vector<double>& circle_weights() const noexcept { return circle_w_; }
    [[nodiscard]] const std::vector<Point2>& disk_points() const noexcept { return disk_pts_; }
    /// w * G on the disk.
    [[nodiscard]] const std::vector<double>& disk_weights() const noexcept { return disk_w_; }

private:
    Subdomain sub_;
    std::vector<Point2> circle_pts_;
    std::vector<double> circle_w_;
    std::vector<Point2> disk_pts_;
    std::vector<double> disk_w_;
};

/// `stencil_id` only labels a NumericFailure when the basis produces
/// non-finite integrals.
InfluenceCoefficients influence_coefficients(const SubdomainQuadrature& quad,
                                             const LocalBasis& basis,
                                             const std::function<double(Point2)>& source,
                                             std::size_t stencil_id = 0);

InfluenceCoefficients influence_coefficients(const Subdomain& sub, const LocalBasis& basis,
                                             const std::function<double(Point2)>& source,
                                             const QuadratureOrders& orders = {},
                                             std::size_t stencil_id = 0);

} // namespace slbdim
