// Command-line front end: single solves, parameter sweeps and isoline data.

#include "slbdim/bench.hpp"
#include "slbdim/error.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

namespace {

using namespace slbdim;

struct Flags {
    std::string config;
    int case_id = 2;
    std::string method = "slbdim";
    std::vector<std::string> methods{"lbdim", "slbdim"};
    double eps = 1.0;
    std::size_t stencil = 0;
    double spacing = 0.0;
    std::size_t n_int = 0;
    std::vector<std::size_t> n_int_grid;
    std::string eps_grid = "1:10:0.5";
    std::string n_grid;
    int circle = QuadratureOrders{}.circle;
    int radial = QuadratureOrders{}.radial;
    int angular = QuadratureOrders{}.angular;
    double tol = SolverOptions{}.tolerance;
    std::string nodes_out;
    std::string field_out;
    std::string out;
    std::string out_error;
    std::string out_cond;
};

void add_common(CLI::App* sub, Flags& f) {
    sub->add_option("--config", f.config, "JSON file with option values; flags override it");
    sub->add_option("--case", f.case_id, "test case (1 or 2)")->check(CLI::IsMember({1, 2}));
    sub->add_option("--spacing", f.spacing, "node spacing h");
    sub->add_option("--n-int", f.n_int, "target interior node count (used without --spacing)");
    sub->add_option("--circle-order", f.circle, "quadrature points on the subdomain circle");
    sub->add_option("--radial-order", f.radial, "radial quadrature points on the subdomain disk");
    sub->add_option("--angular-order", f.angular, "angular quadrature points on the subdomain disk");
    sub->add_option("--tol", f.tol, "GMRES relative tolerance");
}

// Values from the JSON file fill every option the command line left unset.
void apply_config(CLI::App* sub, const std::string& path) {
    std::ifstream in(path);
    if (!in) throw CLI::FileError::Missing(path);
    const nlohmann::json j = nlohmann::json::parse(in);
    if (!j.is_object()) throw CLI::ValidationError("--config", "expected a JSON object");
    for (const auto& [key, value] : j.items()) {
        std::string name = "--" + key;
        for (char& c : name)
            if (c == '_') c = '-';
        CLI::Option* opt = sub->get_option_no_throw(name);
        if (!opt) throw CLI::ValidationError("--config", "unknown key '" + key + "'");
        if (opt->count() > 0) continue;
        std::vector<std::string> values;
        const auto text = [](const nlohmann::json& v) {
            return v.is_string() ? v.get<std::string>() : v.dump();
        };
        if (value.is_array())
            for (const auto& v : value) values.push_back(text(v));
        else
            values.push_back(text(value));
        for (const std::string& v : values) opt->add_result(v);
        opt->run_callback();
    }
}

std::vector<std::size_t> to_sizes(const std::vector<double>& grid) {
    std::vector<std::size_t> out;
    for (double v : grid) {
        if (v < 1.0 || v != std::floor(v)) throw InvalidParameter("stencil sizes must be positive integers");
        out.push_back(static_cast<std::size_t>(v));
    }
    return out;
}

std::vector<Method> to_methods(const std::vector<std::string>& names) {
    std::vector<Method> out;
    for (const std::string& s : names) out.push_back(parse_method(s));
    return out;
}

SolveConfig base_config(const Flags& f) {
    SolveConfig c;
    c.spacing = f.spacing;
    c.target_interior = f.n_int;
    if (c.spacing <= 0.0 && c.target_interior == 0) c.target_interior = f.case_id == 1 ? 916 : 628;
    c.stencil = f.stencil > 0 ? f.stencil : (f.case_id == 1 ? 50 : 25);
    c.epsilon = f.eps;
    c.method = parse_method(f.method);
    c.local.orders = {f.circle, f.radial, f.angular};
    c.solver.tolerance = f.tol;
    return c;
}

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot open '" + path + "' for writing");
    return out;
}

int run_solve(const Flags& f) {
    const SolveConfig c = base_config(f);
    const TestCase tc = make_case(f.case_id);
    const NodeSet nodes = make_nodes(tc.domain, c);
    Eigen::VectorXd field;
    const SweepRow row = run_case(tc, c, nodes, &field);
    if (!f.nodes_out.empty()) {
        auto out = open_out(f.nodes_out);
        write_nodeset(out, nodes);
    }
    if (!f.field_out.empty() && row.status == "ok") {
        auto out = open_out(f.field_out);
        write_field(out, nodes, field);
    }
    write_csv(std::cout, std::span(&row, 1));
    if (row.status != "ok") {
        std::cerr << "slbdim: " << row.message << '\n';
        return 2;
    }
    return 0;
}

int run_sweep_cmd(const Flags& f) {
    const SolveConfig c = base_config(f);
    SweepGrid grid;
    grid.epsilons = parse_grid(f.eps_grid);
    grid.stencils = f.n_grid.empty() ? std::vector<std::size_t>{c.stencil} : to_sizes(parse_grid(f.n_grid));
    grid.interior_targets = f.n_int_grid;
    grid.methods = to_methods(f.methods);
    const std::vector<SweepRow> rows = run_sweep(f.case_id, grid, c);
    if (f.out.empty()) {
        write_csv(std::cout, rows);
    } else {
        auto out = open_out(f.out);
        write_csv(out, rows);
    }
    for (const SweepRow& r : rows)
        if (r.status == "error") std::cerr << "slbdim: " << r.message << '\n';
    return 0;
}

int run_isolines(const Flags& f) {
    const SolveConfig c = base_config(f);
    SweepGrid grid;
    grid.epsilons = parse_grid(f.eps_grid);
    grid.stencils = to_sizes(parse_grid(f.n_grid.empty() ? "10:100:10" : f.n_grid));
    grid.methods = to_methods(f.methods);
    const TestCase tc = make_case(f.case_id);
    const NodeSet nodes = make_nodes(tc.domain, c);
    if (!f.out_cond.empty()) {
        const auto cells = condition_isolines(nodes, grid.epsilons, grid.stencils);
        auto out = open_out(f.out_cond);
        write_condition_isolines(out, nodes.interior_count(), cells);
    }
    if (!f.out_error.empty()) {
        const std::vector<SweepRow> rows = run_sweep(f.case_id, grid, c);
        auto out = open_out(f.out_error);
        write_error_isolines(out, rows);
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Meshless local boundary-domain integral solver for (Laplacian + lambda) u = f"};
    app.require_subcommand(1);
    Flags f;

    CLI::App* solve = app.add_subcommand("solve", "solve one test case and print its CSV row");
    add_common(solve, f);
    solve->add_option("--method", f.method, "lbdim or slbdim");
    solve->add_option("--eps", f.eps, "shape parameter");
    solve->add_option("--stencil", f.stencil, "stencil size n (default 50 for case 1, 25 for case 2)");
    solve->add_option("--nodes-out", f.nodes_out, "write the node set here");
    solve->add_option("--field-out", f.field_out, "write the interior solution here");

    CLI::App* sweep = app.add_subcommand("sweep", "run an (eps, n, N_int, method) grid to CSV");
    add_common(sweep, f);
    sweep->add_option("--eps-grid", f.eps_grid, "a:b:step");
    sweep->add_option("--n-grid", f.n_grid, "stencil sizes a:b:step");
    sweep->add_option("--n-int-grid", f.n_int_grid, "interior count targets");
    sweep->add_option("--methods", f.methods, "methods to run");
    sweep->add_option("--out", f.out, "CSV output (stdout when omitted)");

    CLI::App* iso = app.add_subcommand("isolines", "accuracy and conditioning over (eps, n)");
    add_common(iso, f);
    iso->add_option("--eps-grid", f.eps_grid, "a:b:step");
    iso->add_option("--n-grid", f.n_grid, "stencil sizes a:b:step (default 10:100:10)");
    iso->add_option("--methods", f.methods, "methods for the error isolines");
    iso->add_option("--out-error", f.out_error, "log10 L2 error CSV");
    iso->add_option("--out-cond", f.out_cond, "log10 max condition number CSV");

    try {
        app.parse(argc, argv);
        CLI::App* sub = app.get_subcommands().front();
        if (!f.config.empty()) apply_config(sub, f.config);
        if (sub == solve) return run_solve(f);
        if (sub == sweep) return run_sweep_cmd(f);
        return run_isolines(f);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    } catch (const std::exception& e) {
        std::cerr << "slbdim: " << e.what() << '\n';
        return 1;
    }
}
