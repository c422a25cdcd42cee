#pragma once

#include "slbdim/geometry.hpp"
#include "slbdim/solver.hpp"

#include <cstddef>
#include <iosfwd>
#include <limits>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace slbdim {

/// sqrt(sum (exact - approx)^2 / sum exact^2). Throws UndefinedMetric when
/// `exact` is identically zero.
double l2_error(std::span<const double> exact, std::span<const double> approx);

/// sqrt(sum (exact - approx)^2 / N).
double rms(std::span<const double> exact, std::span<const double> approx);

struct ErrorReport {
    double l2_error = 0.0;
    double rms = 0.0;
    std::size_t n_samples = 0;
};

ErrorReport error_report(std::span<const double> exact, std::span<const double> approx);

/// 2-norm condition number of the direct Gaussian interpolation matrix on the
/// stencil; +inf when the smallest singular value is zero.
double local_condition_number(const NodeSet& nodes, const Stencil& stencil, double epsilon);

double max_local_condition_number(const NodeSet& nodes, std::span<const Stencil> stencils,
                                  double epsilon);

/// Manufactured-solution benchmark with Dirichlet data taken from the exact
/// solution.
struct TestCase {
    int id = 0;
    Domain domain;
    ProblemSpec problem;
};

/// Case 1: (Laplacian - 81) u = f on [-1,1]^2, u = sin(x^2 + y).
/// Case 2: (Laplacian + 2) u = 2x - 4y on [0,1]^2,
///         u = sin(sqrt3 x) sinh y + cos(sqrt2 y) + x - 2y.
TestCase make_case(int id);

struct SweepRow {
    int case_id = 0;
    Method method = Method::slbdim;
    std::size_t n_int = 0;
    std::size_t n_bnd = 0;
    std::size_t stencil = 0;
    double epsilon = 0.0;
    double l2_error = std::numeric_limits<double>::quiet_NaN();
    double rms = std::numeric_limits<double>::quiet_NaN();
    double log10_max_cond = std::numeric_limits<double>::quiet_NaN();
    int iterations = 0;
    double runtime_ms = 0.0;
    std::string status = "ok"; ///< "ok", "unstable" or "error"
    std::string message;       ///< failure description, not written to CSV
};

/// Solves one configuration. Numerical breakdowns (ill-conditioned or
/// rank-deficient stencils, singular systems) come back as status
/// "unstable"; for LBDIM the offending condition number is kept. Other errors
/// propagate with the configuration prefixed to the message.
SweepRow run_case(int case_id, const SolveConfig& config);
/// `field`, when given, receives the interior solution of a successful run.
SweepRow run_case(const TestCase& tc, const SolveConfig& config, const NodeSet& nodes,
                  Eigen::VectorXd* field = nullptr);

struct SweepGrid {
    std::vector<double> epsilons;
    std::vector<std::size_t> stencils;
    /// Interior-count targets; when empty the base config's spacing or
    /// target is used once.
    std::vector<std::size_t> interior_targets;
    std::vector<Method> methods;
};

/// Cartesian product over the grid. Every failure becomes a row. Rows are
/// sorted by (method, N_int, n, eps).
std::vector<SweepRow> run_sweep(int case_id, const SweepGrid& grid, const SolveConfig& base = {});

/// "a:b:step" or a single value. Values a, a + step, ... up to b inclusive
/// (with a relative slack for rounding).
std::vector<double> parse_grid(std::string_view text);

inline constexpr std::string_view csv_header =
    "case,method,N_int,N_bnd,n,eps,l2_error,rms,log10_max_cond,iters,runtime_ms,status";

/// Floating fields in %.5e, LF line endings.
void write_csv(std::ostream& out, std::span<const SweepRow> rows);

struct IsolineCell {
    std::size_t stencil = 0;
    double epsilon = 0.0;
    double log10_value = std::numeric_limits<double>::quiet_NaN();
};

/// log10 of the largest local condition number over the stencils for each
/// (n, eps) cell; no solves are performed.
std::vector<IsolineCell> condition_isolines(const NodeSet& nodes, std::span<const double> epsilons,
                                            std::span<const std::size_t> stencils);

/// "method,N_int,n,eps,log10_l2_error", one line per sweep row.
void write_error_isolines(std::ostream& out, std::span<const SweepRow> rows);

/// "N_int,n,eps,log10_max_cond".
void write_condition_isolines(std::ostream& out, std::size_t n_int,
                              std::span<const IsolineCell> cells);

} // namespace slbdim
