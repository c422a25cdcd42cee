#include "slbdim/quadrature.hpp"

#include "slbdim/error.hpp"
#include "slbdim/kernels.hpp"

#include <cmath>
#include <numbers>

namespace slbdim {

QuadratureRule1D gauss_legendre(int order) {
    if (order < 1) throw InvalidParameter("Gauss-Legendre order must be at least 1");
    const auto n = static_cast<std::size_t>(order);
    QuadratureRule1D rule;
    rule.nodes.resize(n);
    rule.weights.resize(n);
    const std::size_t half = (n + 1) / 2;
    for (std::size_t i = 0; i < half; ++i) {
        // Newton iteration on P_n from the Chebyshev-like initial guess.
        double z = std::cos(std::numbers::pi * (static_cast<double>(i) + 0.75) /
                            (static_cast<double>(n) + 0.5));
        double dp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0;
            double p1 = 0.0;
            for (std::size_t j = 1; j <= n; ++j) {
                const double p2 = p1;
                p1 = p0;
                p0 = ((2.0 * static_cast<double>(j) - 1.0) * z * p1 -
                      (static_cast<double>(j) - 1.0) * p2) /
                     static_cast<double>(j);
            }
            dp = static_cast<double>(n) * (z * p0 - p1) / (z * z - 1.0);
            const double step = p0 / dp;
            z -= step;
            if (std::abs(step) < 1e-16) break;
        }
        if (n % 2 == 1 && i == half - 1) z = 0.0;
        const double w = 2.0 / ((1.0 - z * z) * dp * dp);
        rule.nodes[i] = -z;
        rule.nodes[n - 1 - i] = z;
        rule.weights[i] = w;
        rule.weights[n - 1 - i] = w;
    }
    return rule;
}

std::vector<WeightedPoint> circle_rule(const Subdomain& sub, int order) {
    const QuadratureRule1D gl = gauss_legendre(order);
    std::vector<WeightedPoint> out;
    out.reserve(gl.nodes.size());
    for (std::size_t i = 0; i < gl.nodes.size(); ++i) {
        const double theta = std::numbers::pi * (gl.nodes[i] + 1.0);
        out.push_back({sub.center + sub.radius * Point2{std::cos(theta), std::sin(theta)},
                       std::numbers::pi * gl.weights[i] * sub.radius});
    }
    return out;
}

std::vector<WeightedPoint> disk_rule(const Subdomain& sub, int radial_order, int angular_order) {
    const QuadratureRule1D radial = gauss_legendre(radial_order);
    const QuadratureRule1D angular = gauss_legendre(angular_order);
    std::vector<WeightedPoint> out;
    out.reserve(radial.nodes.size() * angular.nodes.size());
    for (std::size_t i = 0; i < radial.nodes.size(); ++i) {
        const double t = 0.5 * (radial.nodes[i] + 1.0);
        const double r = sub.radius * t * t * t;
        // dr = 3 R t^2 dt, times the polar Jacobian r.
        const double wr = 0.5 * radial.weights[i] * 3.0 * sub.radius * t * t * r;
        for (std::size_t j = 0; j < angular.nodes.size(); ++j) {
            const double theta = std::numbers::pi * (angular.nodes[j] + 1.0);
            out.push_back({sub.center + r * Point2{std::cos(theta), std::sin(theta)},
                           wr * std::numbers::pi * angular.weights[j]});
        }
    }
    return out;
}

SubdomainQuadrature::SubdomainQuadrature(const Subdomain& sub, const QuadratureOrders& orders)
    : sub_(sub) {
    const DiskGreen green(sub.center, sub.radius);
    for (const WeightedPoint& wp : circle_rule(sub, orders.circle)) {
        circle_pts_.push_back(wp.point);
        circle_w_.push_back(wp.weight * green.flux());
    }
    for (const WeightedPoint& wp : disk_rule(sub, orders.radial, orders.angular)) {
        disk_pts_.push_back(wp.point);
        disk_w_.push_back(wp.weight * green.value(wp.point));
    }
}

InfluenceCoefficients influence_coefficients(const SubdomainQuadrature& quad,
                                             const LocalBasis& basis,
                                             const std::function<double(Point2)>& source,
                                             std::size_t stencil_id) {
    InfluenceCoefficients out;
    out.h = basis.weighted_sum(quad.circle_points(), quad.circle_weights());
    out.g = basis.weighted_sum(quad.disk_points(), quad.disk_weights());
    if (source) {
        const auto& pts = quad.disk_points();
        const auto& w = quad.disk_weights();
        for (std::size_t q = 0; q < pts.size(); ++q) out.f_tilde += w[q] * source(pts[q]);
    }
    if (!out.h.allFinite() || !out.g.allFinite() || !std::isfinite(out.f_tilde))
        throw NumericFailure(stencil_id, "non-finite influence coefficients");
    return out;
}

InfluenceCoefficients influence_coefficients(const Subdomain& sub, const LocalBasis& basis,
                                             const std::function<double(Point2)>& source,
                                             const QuadratureOrders& orders,
                                             std::size_t stencil_id) {
    return influence_coefficients(SubdomainQuadrature(sub, orders), basis, source, stencil_id);
}

} // namespace slbdim
