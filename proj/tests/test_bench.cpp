#include <doctest.h>

#include "slbdim/bench.hpp"
#include "slbdim/error.hpp"

#include <cmath>
#include <random>
#include <sstream>

using namespace slbdim;
using doctest::Approx;

namespace {

// Hand-derived Laplacians of the manufactured solutions.
double case1_laplacian(Point2 p) {
    const double a = p.x * p.x + p.y;
    return 2.0 * std::cos(a) - 4.0 * p.x * p.x * std::sin(a) - std::sin(a);
}

double case2_laplacian(Point2 p) {
    const double s3 = std::sqrt(3.0);
    const double s2 = std::sqrt(2.0);
    return -3.0 * std::sin(s3 * p.x) * std::sinh(p.y) + std::sin(s3 * p.x) * std::sinh(p.y) -
           2.0 * std::cos(s2 * p.y);
}

template <class F>
double fd_laplacian(F f, Point2 p, double h) {
    return (f(p + Point2{h, 0}) + f(p - Point2{h, 0}) + f(p + Point2{0, h}) + f(p - Point2{0, h}) -
            4.0 * f(p)) /
           (h * h);
}

std::string drop_runtime(const std::string& csv) {
    std::istringstream in(csv);
    std::string line;
    std::string out;
    while (std::getline(in, line)) {
        std::vector<std::string> fields;
        std::stringstream ls(line);
        std::string f;
        while (std::getline(ls, f, ',')) fields.push_back(f);
        fields.erase(fields.begin() + 10);
        for (const auto& x : fields) out += x + ',';
        out += '\n';
    }
    return out;
}

} // namespace

TEST_CASE("l2_error") {
    const std::vector<double> a{0.3, -1.2, 4.0};
    CHECK(l2_error(a, a) == 0.0);
    CHECK(l2_error(std::vector<double>{1, 0}, std::vector<double>{0, 0}) == 1.0);
    CHECK(l2_error(std::vector<double>{3, 4}, std::vector<double>{3, 0}) == Approx(0.8).epsilon(1e-15));
    CHECK_THROWS_AS(l2_error(std::vector<double>{0, 0}, std::vector<double>{1, 0}), UndefinedMetric);
    CHECK_THROWS_AS(l2_error(std::vector<double>{1, 0}, std::vector<double>{1}), InvalidParameter);
    CHECK_THROWS_AS(l2_error(std::vector<double>{}, std::vector<double>{}), InvalidParameter);
}

TEST_CASE("rms") {
    const std::vector<double> a{0.3, -1.2, 4.0};
    CHECK(rms(a, a) == 0.0);
    CHECK(rms(a, std::vector<double>{0.3 - 0.25, -1.2 - 0.25, 4.0 - 0.25}) == Approx(0.25).epsilon(1e-14));
    CHECK(rms(std::vector<double>{1, 1, 1, 1}, std::vector<double>{0, 2, 1, 1}) == Approx(0.7071067812).epsilon(1e-10));
    CHECK(rms(std::vector<double>{0, 0}, std::vector<double>{0, 0}) == 0.0);
}

TEST_CASE("metric identity rms^2 N = l2^2 sum exact^2") {
    std::mt19937 rng(2);
    std::normal_distribution<double> nd;
    for (int t = 0; t < 200; ++t) {
        const std::size_t n = 1 + rng() % 500;
        std::vector<double> e(n);
        std::vector<double> a(n);
        double sum = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            e[i] = nd(rng);
            a[i] = e[i] + 1e-3 * nd(rng);
            sum += e[i] * e[i];
        }
        const ErrorReport r = error_report(e, a);
        CHECK(r.n_samples == n);
        CHECK(r.rms * r.rms * double(n) == Approx(r.l2_error * r.l2_error * sum).epsilon(1e-12));
    }
}

TEST_CASE("local_condition_number") {
    const Domain d = Domain::rectangle(0, 1, 0, 1);
    const NodeSet ns = generate_quasi_uniform(d, 0.1);
    CHECK(local_condition_number(ns, build_stencils(ns, 1)[5], 1.0) == Approx(1.0));

    const auto st = build_stencils(ns, 20);
    CHECK(local_condition_number(ns, st[10], 1.0) > local_condition_number(ns, st[10], 10.0));

    // Gaussian matrices are symmetric: compare with eigenvalue magnitudes.
    for (std::size_t n : {3u, 6u, 10u}) {
        const Stencil s = build_stencils(ns, n)[7];
        std::vector<Point2> pts;
        for (std::size_t id : s.members) pts.push_back(ns.point(id));
        for (double eps : {5.0, 20.0}) {
            const Eigen::MatrixXd a = DirectGaussianBasis(pts, eps).values(pts);
            const Eigen::VectorXd ev = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(a).eigenvalues().cwiseAbs();
            CHECK(local_condition_number(ns, s, eps) == Approx(ev.maxCoeff() / ev.minCoeff()).epsilon(1e-10));
        }
    }
    CHECK(max_local_condition_number(ns, st, 3.0) >= local_condition_number(ns, st[0], 3.0));
}

TEST_CASE("manufactured solutions satisfy their PDEs") {
    std::mt19937 rng(12);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const TestCase c1 = make_case(1);
    const TestCase c2 = make_case(2);
    CHECK(c1.problem.lambda == -81.0);
    CHECK(c2.problem.lambda == 2.0);
    for (int i = 0; i < 1000; ++i) {
        const Point2 p1{-1.0 + 2.0 * u(rng), -1.0 + 2.0 * u(rng)};
        const Point2 p2{u(rng), u(rng)};
        CHECK(std::abs(case1_laplacian(p1) + c1.problem.lambda * c1.problem.exact(p1) - c1.problem.source(p1)) <= 1e-10);
        CHECK(std::abs(case2_laplacian(p2) + c2.problem.lambda * c2.problem.exact(p2) - c2.problem.source(p2)) <= 1e-10);
        CHECK(c1.problem.dirichlet(p1) == c1.problem.exact(p1));
        CHECK(c2.problem.dirichlet(p2) == c2.problem.exact(p2));
    }
    // The hand derivatives themselves against finite differences.
    for (int i = 0; i < 50; ++i) {
        const Point2 p{u(rng), u(rng)};
        CHECK(case1_laplacian(p) == Approx(fd_laplacian(c1.problem.exact, p, 1e-4)).epsilon(1e-5));
        CHECK(case2_laplacian(p) == Approx(fd_laplacian(c2.problem.exact, p, 1e-4)).epsilon(1e-5).scale(1.0));
    }
    CHECK_THROWS_AS(make_case(3), InvalidParameter);
}

TEST_CASE("parse_grid") {
    CHECK(parse_grid("1:10:0.5").size() == 19);
    CHECK(parse_grid("1:10:0.5").back() == 10.0);
    const auto n = parse_grid("10:100:10");
    CHECK(n.size() == 10);
    CHECK(n.front() == 10.0);
    CHECK(n.back() == 100.0);
    CHECK(parse_grid("0.1:0.3:0.1").size() == 3);
    CHECK(parse_grid("2.5") == std::vector<double>{2.5});
    CHECK_THROWS_AS(parse_grid("1:2"), InvalidParameter);
    CHECK_THROWS_AS(parse_grid("1:2:0"), InvalidParameter);
    CHECK_THROWS_AS(parse_grid("3:2:1"), InvalidParameter);
    CHECK_THROWS_AS(parse_grid("a:2:1"), InvalidParameter);
    CHECK_THROWS_AS(parse_grid("1:2:3:4"), InvalidParameter);
}

TEST_CASE("run_case") {
    SolveConfig c;
    c.target_interior = 121;
    c.stencil = 25;
    const SweepRow ok = run_case(2, c);
    CHECK(ok.status == "ok");
    CHECK(ok.rms <= 10 * 1.2028e-6);
    CHECK(std::isfinite(ok.log10_max_cond));
    CHECK(ok.iterations > 0);

    c.method = Method::lbdim;
    c.epsilon = 1e-3;
    const SweepRow bad = run_case(2, c);
    CHECK(bad.status == "unstable");
    CHECK(std::isnan(bad.l2_error));
    CHECK(std::isnan(bad.rms));
    CHECK(bad.log10_max_cond > 15.0);

    SolveConfig broken;
    CHECK_THROWS_AS(run_case(2, broken), Error);
}

TEST_CASE("run_sweep") {
    SweepGrid g;
    g.epsilons = {2.0, 1e-3};
    g.stencils = {9, 16};
    SolveConfig base;
    base.target_interior = 121;
    CHECK(run_sweep(2, g, base).empty());

    g.methods = {Method::slbdim, Method::lbdim};
    const auto rows = run_sweep(2, g, base);
    REQUIRE(rows.size() == 8);
    for (std::size_t i = 0; i + 1 < rows.size(); ++i) {
        const auto& a = rows[i];
        const auto& b = rows[i + 1];
        CHECK(std::tuple(int(a.method), a.n_int, a.stencil, a.epsilon) <
              std::tuple(int(b.method), b.n_int, b.stencil, b.epsilon));
    }
    for (const SweepRow& r : rows) {
        if (r.method == Method::slbdim) CHECK(r.status == "ok");
        if (r.status == "ok") {
            CHECK(std::isfinite(r.l2_error));
            CHECK(r.rms * r.rms * double(r.n_int) > 0.0);
        }
    }
    CHECK(rows.front().method == Method::lbdim);
    CHECK(rows[0].epsilon == 1e-3);
    CHECK(rows[0].status == "unstable");
}

TEST_CASE("CSV output") {
    SweepGrid g;
    g.epsilons = {0.5, 1.0};
    g.stencils = {12};
    g.interior_targets = {121};
    g.methods = {Method::slbdim};
    const auto a = run_sweep(2, g);
    const auto b = run_sweep(2, g);
    std::ostringstream sa;
    std::ostringstream sb;
    write_csv(sa, a);
    write_csv(sb, b);
    CHECK(drop_runtime(sa.str()) == drop_runtime(sb.str()));

    const std::string text = sa.str();
    CHECK(text.rfind(std::string(csv_header) + "\n", 0) == 0);
    CHECK(text.find('\r') == std::string::npos);
    std::istringstream in(text);
    std::string line;
    std::getline(in, line);
    std::getline(in, line);
    // case,method,N_int,N_bnd,n,eps,...
    CHECK(line.rfind("2,slbdim,", 0) == 0);
    CHECK(line.find(",5.00000e-01,") != std::string::npos);
    CHECK(line.substr(line.size() - 3) == ",ok");

    SweepRow r;
    r.case_id = 1;
    r.method = Method::lbdim;
    r.n_int = 10;
    r.n_bnd = 4;
    r.stencil = 5;
    r.epsilon = 1.25;
    r.iterations = 3;
    r.runtime_ms = 12.5;
    r.status = "unstable";
    std::ostringstream s;
    write_csv(s, std::span(&r, 1));
    CHECK(s.str() == std::string(csv_header) +
                         "\n1,lbdim,10,4,5,1.25000e+00,nan,nan,nan,3,1.25000e+01,unstable\n");
}

TEST_CASE("isoline output") {
    const Domain d = Domain::rectangle(0, 1, 0, 1);
    const NodeSet ns = generate_quasi_uniform(d, 0.2);
    const std::vector<double> eps{2.0, 8.0};
    const std::vector<std::size_t> n{4, 8};
    const auto cells = condition_isolines(ns, eps, n);
    REQUIRE(cells.size() == 4);
    for (const IsolineCell& c : cells)
        CHECK(c.log10_value ==
              Approx(std::log10(max_local_condition_number(ns, build_stencils(ns, c.stencil), c.epsilon))));
    std::ostringstream out;
    write_condition_isolines(out, ns.interior_count(), cells);
    CHECK(out.str().rfind("N_int,n,eps,log10_max_cond\n", 0) == 0);

    SweepRow r;
    r.method = Method::slbdim;
    r.n_int = 7;
    r.stencil = 5;
    r.epsilon = 2.0;
    r.l2_error = 1e-3;
    std::ostringstream e;
    write_error_isolines(e, std::span(&r, 1));
    CHECK(e.str() == "method,N_int,n,eps,log10_l2_error\nslbdim,7,5,2.00000e+00,-3.00000e+00\n");
}

TEST_CASE("error-optimal and condition-optimal shape parameters differ") {
    SweepGrid g;
    g.epsilons = {2.0, 4.0, 6.0, 8.0, 10.0};
    g.stencils = {10, 20};
    g.methods = {Method::lbdim};
    SolveConfig base;
    base.target_interior = 225;
    const auto rows = run_sweep(2, g, base);
    const TestCase tc = make_case(2);
    const NodeSet ns = make_nodes(tc.domain, base);

    const SweepRow* best = nullptr;
    for (const SweepRow& r : rows)
        if (r.status == "ok" && (!best || r.l2_error < best->l2_error)) best = &r;
    REQUIRE(best != nullptr);

    double kbest = INFINITY;
    double keps = 0.0;
    for (const IsolineCell& c : condition_isolines(ns, g.epsilons, g.stencils))
        if (c.log10_value < kbest) {
            kbest = c.log10_value;
            keps = c.epsilon;
        }
    CHECK(best->epsilon < keps);
}
