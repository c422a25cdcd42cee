#pragma once

#include "slbdim/geometry.hpp"
#include "slbdim/quadrature.hpp"
#include "slbdim/stable_basis.hpp"

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <cstddef>
#include <functional>
#include <iosfwd>
#include <limits>
#include <span>
#include <string_view>
#include <vector>

namespace slbdim {

using ScalarField = std::function<double(Point2)>;

/// (Laplacian + lambda) u = f in the domain, u = g1 on Dirichlet segments and
/// du/dn = g2 on Neumann segments.
struct ProblemSpec {
    double lambda = 0.0;
    ScalarField source;    ///< f
    ScalarField dirichlet; ///< g1
    ScalarField neumann;   ///< g2, outward normal derivative
    ScalarField exact;     ///< optional, error reporting only
};

enum class Method { lbdim, slbdim };

std::string_view to_string(Method m);
Method parse_method(std::string_view s);

/// u_i = z . d_i + f_tilde, where d_i lists the stencil data in member order:
/// nodal unknowns for interior members, boundary data for boundary members.
struct LocalOperator {
    std::size_t stencil = 0;
    Eigen::VectorXd z;
    double f_tilde = 0.0;
    /// 2-norm condition number of the stencil interpolation matrix, NaN
    /// when it was not computed.
    double condition = std::numeric_limits<double>::quiet_NaN();
};

struct LocalOperatorOptions {
    QuadratureOrders orders;
    /// Direct stencils above this condition number are rejected.
    double condition_limit = 1e15;
    /// Compute the interpolation-matrix condition number for stable stencils.
    bool stable_condition = false;
    FactorizeOptions factorize;
};

/// Source-term operator for the split b = f - lambda u: entries -lambda * basis_k(y_j).
Eigen::MatrixXd operator_matrix_b(const Eigen::MatrixXd& basis_at_centers,
                                  const ProblemSpec& problem);

LocalOperator build_local_operator_direct(const NodeSet& nodes, const Stencil& stencil,
                                          const Subdomain& sub, const ProblemSpec& problem,
                                          double epsilon, const LocalOperatorOptions& options = {});

LocalOperator build_local_operator_stable(const NodeSet& nodes, const Stencil& stencil,
                                          const Subdomain& sub, const ProblemSpec& problem,
                                          double epsilon, const LocalOperatorOptions& options = {});

/// Local operator for an arbitrary basis spanning the stencil space.
LocalOperator build_local_operator(const NodeSet& nodes, const Stencil& stencil,
                                   const Subdomain& sub, const ProblemSpec& problem,
                                   const LocalBasis& basis, const QuadratureOrders& orders);

/// Interior unknowns only; boundary data enters the right-hand side.
struct GlobalSystem {
    Eigen::SparseMatrix<double, Eigen::RowMajor> matrix;
    Eigen::VectorXd rhs;
};

GlobalSystem assemble(std::span<const LocalOperator> local_ops, std::span<const Stencil> stencils,
                      const NodeSet& nodes, const ProblemSpec& problem);

struct SolverOptions {
    double tolerance = 1e-12;
    int restart = 50;
    int max_iterations = 1000;
};

enum class SolveMethod { gmres, direct };

struct SolveReport {
    Eigen::VectorXd solution;
    int iterations = 0;
    double residual = 0.0; ///< relative, |b - Ax| / |b|
    SolveMethod method = SolveMethod::gmres;
    bool converged = false;
};

/// Restarted GMRES from a zero initial guess; falls back to a sparse LU
/// factorization when the iteration budget runs out.
SolveReport solve(const GlobalSystem& system, const SolverOptions& options = {});

struct SolveConfig {
    double spacing = 0.0;               ///< node spacing h; used when > 0
    std::size_t target_interior = 0;    ///< otherwise pick h to match this interior count
    std::size_t stencil = 25;
    double epsilon = 1.0;
    Method method = Method::slbdim;
    double subdomain_factor = 0.9;      ///< c_R
    LocalOperatorOptions local;
    SolverOptions solver;
    NodeOptions nodes;
};

struct BvpSolution {
    NodeSet nodes;
    std::vector<Stencil> stencils;
    std::vector<Subdomain> subdomains;
    Eigen::VectorXd values; ///< at interior nodes
    SolveReport report;
    /// Largest interpolation-matrix condition number over the stencils (NaN
    /// when not computed).
    double max_condition = std::numeric_limits<double>::quiet_NaN();
};

/// Nodes for a configuration: explicit spacing or a target interior count.
NodeSet make_nodes(const Domain& domain, const SolveConfig& config);

BvpSolution solve_bvp(const Domain& domain, const ProblemSpec& problem, const SolveConfig& config);
BvpSolution solve_bvp(const Domain& domain, const ProblemSpec& problem, const SolveConfig& config,
                      NodeSet nodes);

/// "field v1 N_int" followed by "x y u" per interior node.
void write_field(std::ostream& out, const NodeSet& nodes, const Eigen::VectorXd& values);

} // namespace slbdim
