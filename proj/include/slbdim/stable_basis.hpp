#pragma once

#include "slbdim/geometry.hpp"
#include "slbdim/kernels.hpp"

#include <Eigen/Dense>

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

namespace slbdim {

enum class BoundaryOperator { dirichlet, neumann };

/// A finite function space attached to one stencil, evaluated in batches.
/// Rows of every returned matrix are points, columns are basis functions.
class LocalBasis {
public:
    virtual ~LocalBasis() = default;

    [[nodiscard]] virtual std::size_t size() const = 0;
    [[nodiscard]] virtual Eigen::MatrixXd values(std::span<const Point2> points) const = 0;
    [[nodiscard]] virtual Eigen::MatrixXd normal_derivatives(std::span<const Point2> points,
                                                             std::span<const Point2> normals) const = 0;
    [[nodiscard]] virtual Eigen::MatrixXd laplacians(std::span<const Point2> points) const = 0;

    /// sum_q w_q * basis(points_q), one entry per basis function.
    [[nodiscard]] virtual Eigen::VectorXd weighted_sum(std::span<const Point2> points,
                                                       std::span<const double> weights) const;
};

/// Gaussians centered at the stencil nodes: phi_k(x) = exp(-eps^2 |x - x_k|^2).
class DirectGaussianBasis final : public LocalBasis {
public:
    DirectGaussianBasis(std::vector<Point2> centers, double epsilon);

    [[nodiscard]] std::size_t size() const override { return centers_.size(); }
    [[nodiscard]] Eigen::MatrixXd values(std::span<const Point2> points) const override;
    [[nodiscard]] Eigen::MatrixXd normal_derivatives(std::span<const Point2> points,
                                                     std::span<const Point2> normals) const override;
    [[nodiscard]] Eigen::MatrixXd laplacians(std::span<const Point2> points) const override;

    [[nodiscard]] const std::vector<Point2>& centers() const noexcept { return centers_; }
    [[nodiscard]] const GaussianKernel& kernel() const noexcept { return kernel_; }

private:
    std::vector<Point2> centers_;
    GaussianKernel kernel_;
};

/// Identifies one expansion function exp(-e^2 r^2) r^nu P(r^2) {cos, sin}(nu theta)
/// of total polynomial degree `degree`.
struct ExpansionIndex {
    int degree = 0;
    int frequency = 0;
    bool sine = false;

    friend bool operator==(const ExpansionIndex&, const ExpansionIndex&) = default;
};

/// All expansion functions of one degree in storage order: frequencies
/// degree%2, degree%2 + 2, ..., degree; cosine before sine; no sine at 0.
std::vector<ExpansionIndex> expansion_block(int degree);

struct FactorizeOptions {
    /// Use the direct Gaussian basis when eps * scale exceeds this value.
    double direct_threshold = 2.0;
    bool allow_direct = true;
    /// Relative residual below which an expansion column counts as dependent.
    double rank_tolerance = 1e-10;
};

/// Stable basis {psi_k} for the span of the Gaussians on one stencil, built
/// by the RBF-QR change of basis. Nodes are mapped to the unit disk,
/// each Gaussian is expanded in Chebyshev-radial / trigonometric-angular
/// functions with the eps-power scaling pulled into a diagonal, and a QR
/// factorization of the eps-free coefficient matrix yields
///
///     psi(x) = V_lead(x) + V_tail(x) * Rt^T,
///
/// where V holds the retained expansion functions (leading n first) and Rt
/// is the scaled correction D1^-1 R1^-1 R2 D2.
class BasisFactorization final : public LocalBasis {
public:
    static BasisFactorization factorize(std::span<const Point2> nodes, double epsilon,
                                        const FactorizeOptions& options = {});

    [[nodiscard]] std::size_t size() const override { return nodes_.size(); }
    [[nodiscard]] Eigen::MatrixXd values(std::span<const Point2> points) const override;
    [[nodiscard]] Eigen::MatrixXd normal_derivatives(std::span<const Point2> points,
                                                     std::span<const Point2> normals) const override;
    [[nodiscard]] Eigen::MatrixXd laplacians(std::span<const Point2> points) const override;
    [[nodiscard]] Eigen::VectorXd weighted_sum(std::span<const Point2> points,
                                               std::span<const double> weights) const override;

    [[nodiscard]] bool uses_direct() const noexcept { return direct_.has_value(); }
    [[nodiscard]] double epsilon() const noexcept { return epsilon_; }
    [[nodiscard]] double scale() const noexcept { return scale_; }
    [[nodiscard]] Point2 shift() const noexcept { return shift_; }
    [[nodiscard]] const std::vector<Point2>& stencil_nodes() const noexcept { return nodes_; }
    /// n x (M - n); empty when the direct basis is in use.
    [[nodiscard]] const Eigen::MatrixXd& correction() const noexcept { return correction_; }
    /// Retained expansion functions, leading n first.
    [[nodiscard]] const std::vector<ExpansionIndex>& expansion_index() const noexcept {
        return index_;
    }
    /// Expansion functions at points (|points| x M), in expansion_index order.
    [[nodiscard]] Eigen::MatrixXd expansion_values(std::span<const Point2> points) const;

private:
    BasisFactorization() = default;

    friend class ExpansionEvaluator;

    [[nodiscard]] Eigen::MatrixXd apply_correction(const Eigen::MatrixXd& expansion) const;

    std::vector<Point2> nodes_;
    double epsilon_ = 0.0;
    double scaled_epsilon_ = 0.0;
    double scale_ = 1.0;
    Point2 shift_;
    std::vector<ExpansionIndex> index_;
    int max_degree_ = 0;
    Eigen::MatrixXd correction_;
    std::optional<DirectGaussianBasis> direct_;
};

inline BasisFactorization factorize(std::span<const Point2> nodes, double epsilon,
                                    const FactorizeOptions& options = {}) {
    return BasisFactorization::factorize(nodes, epsilon, options);
}

inline Eigen::MatrixXd eval_values(const LocalBasis& basis, std::span<const Point2> points) {
    return basis.values(points);
}

/// Dirichlet rows are basis values; Neumann rows are n . grad(basis).
Eigen::MatrixXd eval_boundary_operator(const LocalBasis& basis, std::span<const Point2> points,
                                       std::span<const Point2> normals, BoundaryOperator kind);

/// 2-norm condition number from singular values; +inf when the smallest
/// singular value is zero.
double condition_number(const Eigen::MatrixXd& m);

} // namespace slbdim
