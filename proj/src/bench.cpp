#include "slbdim/bench.hpp"

#include "slbdim/error.hpp"
#include "slbdim/stable_basis.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <tuple>

namespace slbdim {

namespace {

void check_lengths(std::span<const double> exact, std::span<const double> approx) {
    if (exact.empty() || exact.size() != approx.size())
        throw InvalidParameter("error metrics need equal, non-empty sample vectors");
}

double squared_difference(std::span<const double> exact, std::span<const double> approx) {
    double s = 0.0;
    for (std::size_t i = 0; i < exact.size(); ++i) s += (exact[i] - approx[i]) * (exact[i] - approx[i]);
    return s;
}

} // namespace

double l2_error(std::span<const double> exact, std::span<const double> approx) {
    check_lengths(exact, approx);
    double den = 0.0;
    for (double e : exact) den += e * e;
    if (den == 0.0) throw UndefinedMetric("L2 error undefined for an identically zero exact solution");
    return std::sqrt(squared_difference(exact, approx) / den);
}

double rms(std::span<const double> exact, std::span<const double> approx) {
    check_lengths(exact, approx);
    return std::sqrt(squared_difference(exact, approx) / static_cast<double>(exact.size()));
}

ErrorReport error_report(std::span<const double> exact, std::span<const double> approx) {
    return {l2_error(exact, approx), rms(exact, approx), exact.size()};
}

double local_condition_number(const NodeSet& nodes, const Stencil& stencil, double epsilon) {
    std::vector<Point2> pts;
    pts.reserve(stencil.size());
    for (std::size_t id : stencil.members) pts.push_back(nodes.point(id));
    const DirectGaussianBasis basis(pts, epsilon);
    return condition_number(basis.values(pts));
}

double max_local_condition_number(const NodeSet& nodes, std::span<const Stencil> stencils,
                                  double epsilon) {
    double worst = 0.0;
    for (const Stencil& st : stencils)
        worst = std::max(worst, local_condition_number(nodes, st, epsilon));
    return worst;
}

TestCase make_case(int id) {
    ProblemSpec p;
    if (id == 1) {
        p.lambda = -81.0;
        p.exact = [](Point2 q) { return std::sin(q.x * q.x + q.y); };
        p.source = [](Point2 q) {
            const double a = q.x * q.x + q.y;
            return 2.0 * std::cos(a) - (4.0 * q.x * q.x + 1.0 + 81.0) * std::sin(a);
        };
        p.dirichlet = p.exact;
        return {1, Domain::rectangle(-1.0, 1.0, -1.0, 1.0), p};
    }
    if (id == 2) {
        p.lambda = 2.0;
        p.exact = [](Point2 q) {
            return std::sin(std::sqrt(3.0) * q.x) * std::sinh(q.y) + std::cos(std::sqrt(2.0) * q.y) +
                   q.x - 2.0 * q.y;
        };
        p.source = [](Point2 q) { return 2.0 * q.x - 4.0 * q.y; };
        p.dirichlet = p.exact;
        return {2, Domain::rectangle(0.0, 1.0, 0.0, 1.0), p};
    }
    throw InvalidParameter("unknown test case " + std::to_string(id));
}

namespace {

std::string describe(int case_id, const SolveConfig& c) {
    char buf[160];
    std::snprintf(buf, sizeof buf, "case %d, %s, n = %zu, eps = %g: ", case_id,
                  std::string(to_string(c.method)).c_str(), c.stencil, c.epsilon);
    return buf;
}

} // namespace

SweepRow run_case(const TestCase& tc, const SolveConfig& config, const NodeSet& nodes,
                  Eigen::VectorXd* field) {
    SweepRow row;
    row.case_id = tc.id;
    row.method = config.method;
    row.n_int = nodes.interior_count();
    row.n_bnd = nodes.boundary_count();
    row.stencil = config.stencil;
    row.epsilon = config.epsilon;

    SolveConfig cfg = config;
    if (cfg.method == Method::slbdim) cfg.local.stable_condition = true;
    const auto t0 = std::chrono::steady_clock::now();
    const auto elapsed = [&] {
        return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
            .count();
    };
    try {
        const BvpSolution sol = solve_bvp(tc.domain, tc.problem, cfg, nodes);
        row.runtime_ms = elapsed();
        std::vector<double> exact(row.n_int);
        for (std::size_t i = 0; i < row.n_int; ++i) exact[i] = tc.problem.exact(nodes.interior[i]);
        const std::span<const double> approx(sol.values.data(), row.n_int);
        row.l2_error = l2_error(exact, approx);
        row.rms = rms(exact, approx);
        row.log10_max_cond = std::log10(sol.max_condition);
        row.iterations = sol.report.iterations;
        if (field) *field = sol.values;
    } catch (const IllConditionedStencil& e) {
        row.runtime_ms = elapsed();
        row.status = "unstable";
        row.message = e.what();
        row.log10_max_cond = std::log10(e.condition());
    } catch (const RankDeficient& e) {
        row.runtime_ms = elapsed();
        row.status = "unstable";
        row.message = e.what();
    } catch (const NumericFailure& e) {
        row.runtime_ms = elapsed();
        row.status = "unstable";
        row.message = e.what();
    } catch (const SingularSystem& e) {
        row.runtime_ms = elapsed();
        row.status = "unstable";
        row.message = e.what();
    } catch (const std::exception& e) {
        throw Error(describe(tc.id, config) + e.what());
    }
    return row;
}

SweepRow run_case(int case_id, const SolveConfig& config) {
    const TestCase tc = make_case(case_id);
    return run_case(tc, config, make_nodes(tc.domain, config));
}

std::vector<SweepRow> run_sweep(int case_id, const SweepGrid& grid, const SolveConfig& base) {
    std::vector<SweepRow> rows;
    if (grid.methods.empty() || grid.epsilons.empty() || grid.stencils.empty()) return rows;
    const TestCase tc = make_case(case_id);

    std::vector<NodeSet> node_sets;
    if (grid.interior_targets.empty()) {
        node_sets.push_back(make_nodes(tc.domain, base));
    } else {
        for (std::size_t target : grid.interior_targets) {
            SolveConfig c = base;
            c.spacing = 0.0;
            c.target_interior = target;
            node_sets.push_back(make_nodes(tc.domain, c));
        }
    }

    for (const NodeSet& nodes : node_sets)
        for (Method m : grid.methods)
            for (std::size_t n : grid.stencils)
                for (double eps : grid.epsilons) {
                    SolveConfig c = base;
                    c.method = m;
                    c.stencil = n;
                    c.epsilon = eps;
                    try {
                        rows.push_back(run_case(tc, c, nodes));
                    } catch (const std::exception& e) {
                        SweepRow row;
                        row.case_id = case_id;
                        row.method = m;
                        row.n_int = nodes.interior_count();
                        row.n_bnd = nodes.boundary_count();
                        row.stencil = n;
                        row.epsilon = eps;
                        row.status = "error";
                        row.message = e.what();
                        rows.push_back(std::move(row));
                    }
                }

    std::stable_sort(rows.begin(), rows.end(), [](const SweepRow& a, const SweepRow& b) {
        return std::tuple(static_cast<int>(a.method), a.n_int, a.stencil, a.epsilon) <
               std::tuple(static_cast<int>(b.method), b.n_int, b.stencil, b.epsilon);
    });
    return rows;
}

namespace {

double parse_number(std::string_view s) {
    double v = 0.0;
    const auto* end = s.data() + s.size();
    const auto [ptr, ec] = std::from_chars(s.data(), end, v);
    if (ec != std::errc() || ptr != end || !std::isfinite(v))
        throw InvalidParameter("bad number '" + std::string(s) + "' in grid");
    return v;
}

} // namespace

std::vector<double> parse_grid(std::string_view text) {
    const auto c1 = text.find(':');
    if (c1 == std::string_view::npos) return {parse_number(text)};
    const auto c2 = text.find(':', c1 + 1);
    if (c2 == std::string_view::npos || text.find(':', c2 + 1) != std::string_view::npos)
        throw InvalidParameter("grid must be 'a:b:step' or a single value");
    const double a = parse_number(text.substr(0, c1));
    const double b = parse_number(text.substr(c1 + 1, c2 - c1 - 1));
    const double step = parse_number(text.substr(c2 + 1));
    if (!(step > 0.0) || b < a) throw InvalidParameter("grid needs a <= b and step > 0");
    const auto count = static_cast<std::size_t>(std::floor((b - a) / step + 1e-9)) + 1;
    std::vector<double> out(count);
    for (std::size_t k = 0; k < count; ++k) out[k] = a + static_cast<double>(k) * step;
    return out;
}

namespace {

std::string sci(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.5e", v);
    return buf;
}

} // namespace

void write_csv(std::ostream& out, std::span<const SweepRow> rows) {
    std::string s(csv_header);
    s += '\n';
    for (const SweepRow& r : rows) {
        s += std::to_string(r.case_id) + ',' + std::string(to_string(r.method)) + ',' +
             std::to_string(r.n_int) + ',' + std::to_string(r.n_bnd) + ',' +
             std::to_string(r.stencil) + ',' + sci(r.epsilon) + ',' + sci(r.l2_error) + ',' +
             sci(r.rms) + ',' + sci(r.log10_max_cond) + ',' + std::to_string(r.iterations) + ',' +
             sci(r.runtime_ms) + ',' + r.status + '\n';
    }
    out << s;
}

std::vector<IsolineCell> condition_isolines(const NodeSet& nodes, std::span<const double> epsilons,
                                            std::span<const std::size_t> stencils) {
    std::vector<IsolineCell> cells;
    cells.reserve(epsilons.size() * stencils.size());
    for (std::size_t n : stencils) {
        const std::vector<Stencil> st = build_stencils(nodes, n);
        for (double eps : epsilons)
            cells.push_back({n, eps, std::log10(max_local_condition_number(nodes, st, eps))});
    }
    return cells;
}

void write_error_isolines(std::ostream& out, std::span<const SweepRow> rows) {
    std::string s = "method,N_int,n,eps,log10_l2_error\n";
    for (const SweepRow& r : rows)
        s += std::string(to_string(r.method)) + ',' + std::to_string(r.n_int) + ',' +
             std::to_string(r.stencil) + ',' + sci(r.epsilon) + ',' + sci(std::log10(r.l2_error)) +
             '\n';
    out << s;
}

void write_condition_isolines(std::ostream& out, std::size_t n_int,
                              std::span<const IsolineCell> cells) {
    std::string s = "N_int,n,eps,log10_max_cond\n";
    for (const IsolineCell& c : cells)
        s += std::to_string(n_int) + ',' + std::to_string(c.stencil) + ',' + sci(c.epsilon) + ',' +
             sci(c.log10_value) + '\n';
    out << s;
}

} // namespace slbdim
