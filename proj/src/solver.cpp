#include "slbdim/solver.hpp"

#include "slbdim/error.hpp"

#include <Eigen/SparseLU>

#include <algorithm>
#include <cmath>
#include <exception>
#include <ostream>
#include <sstream>
#include <string>

namespace slbdim {

std::string_view to_string(Method m) { return m == Method::lbdim ? "lbdim" : "slbdim"; }

Method parse_method(std::string_view s) {
    if (s == "lbdim") return Method::lbdim;
    if (s == "slbdim") return Method::slbdim;
    throw InvalidParameter("unknown method '" + std::string(s) + "'");
}

Eigen::MatrixXd operator_matrix_b(const Eigen::MatrixXd& basis_at_centers,
                                  const ProblemSpec& problem) {
    return -problem.lambda * basis_at_centers;
}

namespace {

std::vector<Point2> member_points(const NodeSet& nodes, const Stencil& stencil) {
    std::vector<Point2> pts;
    pts.reserve(stencil.size());
    for (std::size_t id : stencil.members) {
        if (id >= nodes.size()) throw AssemblyError("stencil references unknown node id");
        pts.push_back(nodes.point(id));
    }
    return pts;
}

// Interpolation matrix with Neumann boundary members replaced by their
// normal-derivative rows; `values` are plain basis values at the members.
Eigen::MatrixXd boundary_condition_matrix(const NodeSet& nodes, const Stencil& stencil,
                                          const LocalBasis& basis, const Eigen::MatrixXd& values,
                                          bool& has_neumann) {
    Eigen::MatrixXd b = values;
    has_neumann = false;
    for (std::size_t j = stencil.n_int; j < stencil.size(); ++j) {
        const std::size_t id = stencil.members[j];
        if (!nodes.is_boundary(id)) continue;
        const BoundaryNode& bn = nodes.boundary[id - nodes.interior_count()];
        if (bn.kind != BoundaryKind::neumann) continue;
        has_neumann = true;
        const Point2 p = bn.point;
        const Point2 nrm = bn.normal;
        b.row(static_cast<Eigen::Index>(j)) =
            eval_boundary_operator(basis, {&p, 1}, {&nrm, 1}, BoundaryOperator::neumann).row(0);
    }
    return b;
}

} // namespace

LocalOperator build_local_operator(const NodeSet& nodes, const Stencil& stencil,
                                   const Subdomain& sub, const ProblemSpec& problem,
                                   const LocalBasis& basis, const QuadratureOrders& orders) {
    const std::vector<Point2> pts = member_points(nodes, stencil);
    const Eigen::MatrixXd values = basis.values(pts);
    bool has_neumann = false;
    const Eigen::MatrixXd b = boundary_condition_matrix(nodes, stencil, basis, values, has_neumann);
    const Eigen::MatrixXd ab = operator_matrix_b(values, problem);
    const InfluenceCoefficients infl =
        influence_coefficients(SubdomainQuadrature(sub, orders), basis, problem.source, stencil.center);

    // z^T = h^T B^-1 + g^T Bt^-1 Ab B^-1 without forming inverses:
    // Bt^T s = g, then B^T z = h + Ab^T s.
    const Eigen::PartialPivLU<Eigen::MatrixXd> lu_values(values);
    const Eigen::VectorXd s = lu_values.transpose().solve(infl.g);
    const Eigen::VectorXd rhs = infl.h + ab.transpose() * s;

    LocalOperator op;
    op.stencil = stencil.center;
    op.f_tilde = infl.f_tilde;
    if (has_neumann) {
        const Eigen::PartialPivLU<Eigen::MatrixXd> lu_b(b);
        op.z = lu_b.transpose().solve(rhs);
    } else {
        op.z = lu_values.transpose().solve(rhs);
    }
    if (!op.z.allFinite()) throw NumericFailure(stencil.center, "singular local interpolation system");
    return op;
}

LocalOperator build_local_operator_direct(const NodeSet& nodes, const Stencil& stencil,
                                          const Subdomain& sub, const ProblemSpec& problem,
                                          double epsilon, const LocalOperatorOptions& options) {
    const DirectGaussianBasis basis(member_points(nodes, stencil), epsilon);
    bool has_neumann = false;
    const Eigen::MatrixXd a =
        boundary_condition_matrix(nodes, stencil, basis, basis.values(basis.centers()), has_neumann);
    const double cond = condition_number(a);
    if (!(cond <= options.condition_limit)) throw IllConditionedStencil(stencil.center, cond);
    LocalOperator op = build_local_operator(nodes, stencil, sub, problem, basis, options.orders);
    op.condition = cond;
    return op;
}

LocalOperator build_local_operator_stable(const NodeSet& nodes, const Stencil& stencil,
                                          const Subdomain& sub, const ProblemSpec& problem,
                                          double epsilon, const LocalOperatorOptions& options) {
    const std::vector<Point2> pts = member_points(nodes, stencil);
    const BasisFactorization basis = BasisFactorization::factorize(pts, epsilon, options.factorize);
    LocalOperator op;
    try {
        op = build_local_operator(nodes, stencil, sub, problem, basis, options.orders);
    } catch (const NumericFailure& e) {
        throw RankDeficient(std::string("unstable factorization: ") + e.what());
    }
    if (options.stable_condition) {
        bool has_neumann = false;
        op.condition = condition_number(
            boundary_condition_matrix(nodes, stencil, basis, basis.values(pts), has_neumann));
    }
    return op;
}

GlobalSystem assemble(std::span<const LocalOperator> local_ops, std::span<const Stencil> stencils,
                      const NodeSet& nodes, const ProblemSpec& problem) {
    const std::size_t n_int = nodes.interior_count();
    if (local_ops.size() != n_int || stencils.size() != n_int)
        throw AssemblyError("one local operator and stencil per interior node is required");

    std::vector<Eigen::Triplet<double>> triplets;
    GlobalSystem sys;
    sys.rhs = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n_int));
    for (std::size_t i = 0; i < n_int; ++i) {
        const LocalOperator& op = local_ops[i];
        const Stencil& st = stencils[i];
        if (op.stencil != i || st.center != i)
            throw AssemblyError("local operators must be ordered by interior node");
        if (static_cast<std::size_t>(op.z.size()) != st.size())
            throw AssemblyError("local operator size does not match its stencil");
        const auto row = static_cast<Eigen::Index>(i);
        triplets.emplace_back(row, row, 1.0);
        double rhs = op.f_tilde;
        for (std::size_t j = 0; j < st.size(); ++j) {
            const std::size_t id = st.members[j];
            const double zj = op.z[static_cast<Eigen::Index>(j)];
            if (id >= nodes.size()) throw AssemblyError("stencil references unknown node id");
            if (!nodes.is_boundary(id)) {
                triplets.emplace_back(row, static_cast<Eigen::Index>(id), -zj);
                continue;
            }
            const BoundaryNode& bn = nodes.boundary[id - n_int];
            const ScalarField& data =
                bn.kind == BoundaryKind::dirichlet ? problem.dirichlet : problem.neumann;
            if (!data) throw AssemblyError("missing boundary data for a boundary stencil member");
            rhs += zj * data(bn.point);
        }
        sys.rhs[row] = rhs;
    }
    sys.matrix.resize(static_cast<Eigen::Index>(n_int), static_cast<Eigen::Index>(n_int));
    sys.matrix.setFromTriplets(triplets.begin(), triplets.end());
    sys.matrix.makeCompressed();
    return sys;
}

namespace {

double relative_residual(const GlobalSystem& sys, const Eigen::VectorXd& x, double bnorm) {
    return (sys.rhs - sys.matrix * x).norm() / bnorm;
}

} // namespace

SolveReport solve(const GlobalSystem& system, const SolverOptions& options) {
    if (!(options.tolerance > 0.0)) throw InvalidParameter("solver tolerance must be positive");
    if (options.restart < 1 || options.max_iterations < 1)
        throw InvalidParameter("restart and iteration limits must be positive");
    const Eigen::Index n = system.rhs.size();
    if (system.matrix.rows() != n || system.matrix.cols() != n)
        throw InvalidParameter("system matrix and right-hand side sizes differ");

    SolveReport report;
    report.solution = Eigen::VectorXd::Zero(n);
    const double bnorm = system.rhs.norm();
    if (n == 0 || bnorm == 0.0) {
        report.converged = true;
        return report;
    }

    const auto m = static_cast<Eigen::Index>(options.restart);
    Eigen::VectorXd& x = report.solution;
    Eigen::MatrixXd v(n, m + 1);
    Eigen::MatrixXd h = Eigen::MatrixXd::Zero(m + 1, m);
    Eigen::VectorXd cs(m);
    Eigen::VectorXd sn(m);
    Eigen::VectorXd g(m + 1);

    while (report.iterations < options.max_iterations) {
        const Eigen::VectorXd r = system.rhs - system.matrix * x;
        const double beta = r.norm();
        if (beta / bnorm <= options.tolerance) break;
        h.setZero();
        g.setZero();
        g[0] = beta;
        v.col(0) = r / beta;
        Eigen::Index used = 0;
        while (used < m && report.iterations < options.max_iterations) {
            const Eigen::Index k = used;
            Eigen::VectorXd w = system.matrix * v.col(k);
            ++report.iterations;
            for (Eigen::Index i = 0; i <= k; ++i) {
                h(i, k) = w.dot(v.col(i));
                w -= h(i, k) * v.col(i);
            }
            h(k + 1, k) = w.norm();
            const bool breakdown = h(k + 1, k) <= 1e-300;
            if (!breakdown) v.col(k + 1) = w / h(k + 1, k);
            for (Eigen::Index i = 0; i < k; ++i) {
                const double t = cs[i] * h(i, k) + sn[i] * h(i + 1, k);
                h(i + 1, k) = -sn[i] * h(i, k) + cs[i] * h(i + 1, k);
                h(i, k) = t;
            }
            const double denom = std::hypot(h(k, k), h(k + 1, k));
            if (denom == 0.0) break; // A v_k = 0: no progress possible in this cycle
            cs[k] = h(k, k) / denom;
            sn[k] = h(k + 1, k) / denom;
            h(k, k) = denom;
            h(k + 1, k) = 0.0;
            g[k + 1] = -sn[k] * g[k];
            g[k] = cs[k] * g[k];
            used = k + 1;
            if (breakdown || std::abs(g[k + 1]) / bnorm <= options.tolerance) break;
        }
        if (used == 0) break;
        const Eigen::VectorXd y = h.topLeftCorner(used, used)
                                      .triangularView<Eigen::Upper>()
                                      .solve(g.head(used));
        x += v.leftCols(used) * y;
    }

    report.residual = relative_residual(system, x, bnorm);
    if (report.residual <= options.tolerance) {
        report.converged = true;
        report.method = SolveMethod::gmres;
        return report;
    }

    Eigen::SparseMatrix<double> colmajor = system.matrix;
    Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
    lu.analyzePattern(colmajor);
    lu.factorize(colmajor);
    if (lu.info() != Eigen::Success) throw SingularSystem("sparse LU factorization failed");
    Eigen::VectorXd xd = lu.solve(system.rhs);
    if (lu.info() != Eigen::Success || !xd.allFinite())
        throw SingularSystem("sparse LU solve failed");
    report.solution = std::move(xd);
    report.method = SolveMethod::direct;
    report.residual = relative_residual(system, report.solution, bnorm);
    report.converged = report.residual <= options.tolerance;
    return report;
}

NodeSet make_nodes(const Domain& domain, const SolveConfig& config) {
    if (config.spacing > 0.0) return generate_quasi_uniform(domain, config.spacing, config.nodes);
    if (config.target_interior > 0)
        return generate_quasi_uniform(
            domain, spacing_for_interior_count(domain, config.target_interior, config.nodes),
            config.nodes);
    throw InvalidParameter("either a spacing or a target interior count is required");
}

BvpSolution solve_bvp(const Domain& domain, const ProblemSpec& problem, const SolveConfig& config) {
    return solve_bvp(domain, problem, config, make_nodes(domain, config));
}

BvpSolution solve_bvp(const Domain& domain, const ProblemSpec& problem, const SolveConfig& config,
                      NodeSet nodes) {
    if (!(config.epsilon > 0.0)) throw InvalidParameter("shape parameter must be positive");
    BvpSolution out;
    out.nodes = std::move(nodes);
    out.stencils = build_stencils(out.nodes, config.stencil);
    const std::size_t n_int = out.nodes.interior_count();
    out.subdomains.reserve(n_int);
    for (std::size_t i = 0; i < n_int; ++i)
        out.subdomains.push_back(build_subdomain(out.nodes, domain, i, config.subdomain_factor));

    std::vector<LocalOperator> ops(n_int);
    std::vector<std::exception_ptr> failures(n_int);
    const auto count = static_cast<long>(n_int);
#pragma omp parallel for schedule(dynamic, 8)
    for (long li = 0; li < count; ++li) {
        const auto i = static_cast<std::size_t>(li);
        try {
            ops[i] = config.method == Method::lbdim
                         ? build_local_operator_direct(out.nodes, out.stencils[i], out.subdomains[i],
                                                       problem, config.epsilon, config.local)
                         : build_local_operator_stable(out.nodes, out.stencils[i], out.subdomains[i],
                                                       problem, config.epsilon, config.local);
        } catch (...) {
            failures[i] = std::current_exception();
        }
    }

    // Report the worst ill-conditioned stencil; any other failure wins.
    std::exception_ptr first_other;
    std::size_t worst = n_int;
    double worst_cond = 0.0;
    for (std::size_t i = 0; i < n_int; ++i) {
        if (!failures[i]) continue;
        try {
            std::rethrow_exception(failures[i]);
        } catch (const IllConditionedStencil& e) {
            if (worst == n_int || e.condition() > worst_cond) {
                worst = i;
                worst_cond = e.condition();
            }
        } catch (...) {
            if (!first_other) first_other = failures[i];
        }
    }
    if (first_other) std::rethrow_exception(first_other);
    if (worst < n_int) throw IllConditionedStencil(worst, worst_cond);

    for (const LocalOperator& op : ops) {
        if (std::isnan(op.condition)) continue;
        if (std::isnan(out.max_condition) || op.condition > out.max_condition)
            out.max_condition = op.condition;
    }

    const GlobalSystem sys = assemble(ops, out.stencils, out.nodes, problem);
    out.report = solve(sys, config.solver);
    out.values = out.report.solution;
    return out;
}

void write_field(std::ostream& out, const NodeSet& nodes, const Eigen::VectorXd& values) {
    if (static_cast<std::size_t>(values.size()) != nodes.interior_count())
        throw InvalidParameter("field size does not match the interior node count");
    std::ostringstream s;
    s.precision(17);
    s << "field v1 " << nodes.interior_count() << '\n';
    for (std::size_t i = 0; i < nodes.interior_count(); ++i)
        s << nodes.interior[i].x << ' ' << nodes.interior[i].y << ' '
          << values[static_cast<Eigen::Index>(i)] << '\n';
    out << s.str();
}

} // namespace slbdim
