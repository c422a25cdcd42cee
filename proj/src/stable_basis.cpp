#include "slbdim/stable_basis.hpp"

#include "slbdim/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace slbdim {

Eigen::VectorXd LocalBasis::weighted_sum(std::span<const Point2> points,
                                         std::span<const double> weights) const {
    const Eigen::MatrixXd v = values(points);
    const Eigen::Map<const Eigen::VectorXd> w(weights.data(), static_cast<Eigen::Index>(weights.size()));
    return v.transpose() * w;
}

DirectGaussianBasis::DirectGaussianBasis(std::vector<Point2> centers, double epsilon)
    : centers_(std::move(centers)), kernel_(epsilon) {}

Eigen::MatrixXd DirectGaussianBasis::values(std::span<const Point2> points) const {
    Eigen::MatrixXd out(points.size(), centers_.size());
    for (std::size_t p = 0; p < points.size(); ++p)
        for (std::size_t k = 0; k < centers_.size(); ++k)
            out(p, k) = kernel_.value(points[p], centers_[k]);
    return out;
}

Eigen::MatrixXd DirectGaussianBasis::normal_derivatives(std::span<const Point2> points,
                                                        std::span<const Point2> normals) const {
    if (normals.size() != points.size())
        throw InvalidParameter("one normal per evaluation point is required");
    Eigen::MatrixXd out(points.size(), centers_.size());
    for (std::size_t p = 0; p < points.size(); ++p)
        for (std::size_t k = 0; k < centers_.size(); ++k)
            out(p, k) = dot(normals[p], kernel_.gradient(points[p], centers_[k]));
    return out;
}

Eigen::MatrixXd DirectGaussianBasis::laplacians(std::span<const Point2> points) const {
    Eigen::MatrixXd out(points.size(), centers_.size());
    for (std::size_t p = 0; p < points.size(); ++p)
        for (std::size_t k = 0; k < centers_.size(); ++k)
            out(p, k) = kernel_.laplacian(points[p], centers_[k]);
    return out;
}

std::vector<ExpansionIndex> expansion_block(int degree) {
    std::vector<ExpansionIndex> block;
    block.reserve(static_cast<std::size_t>(degree) + 1);
    for (int nu = degree % 2; nu <= degree; nu += 2) {
        block.push_back({degree, nu, false});
        if (nu > 0) block.push_back({degree, nu, true});
    }
    return block;
}

namespace {

// Even radial factor P(rho) of an expansion function: T_s(2 rho - 1) for
// even degree, V_s(2 rho - 1) (third kind) for odd degree. With rho = r^2
// these are T_{2s}(r) and T_{2s+1}(r) / r.
struct RadialTable {
    std::vector<double> t, dt, ddt, v, dv, ddv; // derivatives with respect to u = 2 rho - 1

    explicit RadialTable(int max_s) {
        const auto n = static_cast<std::size_t>(max_s) + 2;
        for (auto* a : {&t, &dt, &ddt, &v, &dv, &ddv}) a->assign(n, 0.0);
    }

    void fill(double u) {
        const std::size_t n = t.size();
        t[0] = 1.0;
        t[1] = u;
        dt[1] = 1.0;
        v[0] = 1.0;
        v[1] = 2.0 * u - 1.0;
        dv[1] = 2.0;
        dt[0] = ddt[0] = ddt[1] = dv[0] = ddv[0] = ddv[1] = 0.0;
        for (std::size_t k = 1; k + 1 < n; ++k) {
            t[k + 1] = 2.0 * u * t[k] - t[k - 1];
            dt[k + 1] = 2.0 * t[k] + 2.0 * u * dt[k] - dt[k - 1];
            ddt[k + 1] = 4.0 * dt[k] + 2.0 * u * ddt[k] - ddt[k - 1];
            v[k + 1] = 2.0 * u * v[k] - v[k - 1];
            dv[k + 1] = 2.0 * v[k] + 2.0 * u * dv[k] - dv[k - 1];
            ddv[k + 1] = 4.0 * dv[k] + 2.0 * u * ddv[k] - ddv[k - 1];
        }
    }
};

// log of the eps-power scale factor: 2j ln(eps) + ln a(t,t) - ln s! - ln (s+nu)!
double log_scale(const ExpansionIndex& e, double log_eps) {
    const int p = e.degree % 2;
    const int s = (e.degree - e.frequency) / 2;
    const int t = p + 2 * s;
    const double log_a = t > 0 ? (1.0 - t) * std::numbers::ln2 : 0.0;
    return 2.0 * e.degree * log_eps + log_a - std::lgamma(s + 1.0) -
           std::lgamma(s + e.frequency + 1.0);
}

// Real and imaginary parts of z^nu for nu = 0..max_nu.
void complex_powers(double x, double y, int max_nu, std::vector<double>& re, std::vector<double>& im) {
    re.resize(static_cast<std::size_t>(max_nu) + 1);
    im.resize(static_cast<std::size_t>(max_nu) + 1);
    re[0] = 1.0;
    im[0] = 0.0;
    for (int k = 1; k <= max_nu; ++k) {
        re[k] = re[k - 1] * x - im[k - 1] * y;
        im[k] = re[k - 1] * y + im[k - 1] * x;
    }
}

// Column of the eps-free coefficient matrix: coefficient of expansion
// function e in the Gaussian centered at each scaled node.
Eigen::VectorXd coefficient_column(const ExpansionIndex& e, std::span<const Point2> scaled,
                                   double eps) {
    const int nu = e.frequency;
    const int s = (e.degree - nu) / 2;
    const int t = e.degree % 2 + 2 * s;
    const double sigma = nu == 0 ? 1.0 : 2.0;
    const double e4 = eps * eps * eps * eps;
    std::vector<double> re;
    std::vector<double> im;
    Eigen::VectorXd col(scaled.size());
    for (std::size_t k = 0; k < scaled.size(); ++k) {
        const Point2 y = scaled[k];
        const double rho = dot(y, y);
        complex_powers(y.x, y.y, nu, re, im);
        const double harmonic = e.sine ? im[nu] : re[nu];
        // Positive series in eps^4 rho (a confluent hypergeometric tail).
        double term = 1.0;
        double sum = 1.0;
        for (int u = 1; u < 2000; ++u) {
            term *= e4 * rho * (t + 2.0 * u) * (t + 2.0 * u - 1.0) /
                    (4.0 * u * (t + u) * (s + u) * (s + u + nu));
            sum += term;
            if (term <= 1e-17 * sum) break;
        }
        col[static_cast<Eigen::Index>(k)] =
            sigma * harmonic * std::pow(rho, s) * std::exp(-eps * eps * rho) * sum;
    }
    return col;
}

struct Column {
    ExpansionIndex index;
    Eigen::VectorXd coeffs;
    double log_d = 0.0;
};

} // namespace

// Evaluates every retained expansion function (value, gradient or
// Laplacian in unscaled coordinates) at one point, reusing scratch space.
class ExpansionEvaluator {
public:
    explicit ExpansionEvaluator(const BasisFactorization& f)
        : f_(f), radial_(f.max_degree_ / 2 + 1) {}

    enum class Quantity { value, normal_derivative, laplacian };

    void operator()(Point2 x, Point2 normal, Quantity q, double* out) {
        const double inv = 1.0 / f_.scale_;
        const Point2 y = inv * (x - f_.shift_);
        const double rho = dot(y, y);
        const double e2 = f_.scaled_epsilon_ * f_.scaled_epsilon_;
        const double g = std::exp(-e2 * rho);
        radial_.fill(2.0 * rho - 1.0);
        complex_powers(y.x, y.y, f_.max_degree_, re_, im_);

        std::size_t col = 0;
        for (const ExpansionIndex& e : f_.index_) {
            const int nu = e.frequency;
            const auto s = static_cast<std::size_t>((e.degree - nu) / 2);
            const bool odd = e.degree % 2 == 1;
            const double P = odd ? radial_.v[s] : radial_.t[s];
            const double H = e.sine ? im_[nu] : re_[nu];
            if (q == Quantity::value) {
                out[col++] = g * P * H;
                continue;
            }
            const double Pr = 2.0 * (odd ? radial_.dv[s] : radial_.dt[s]);
            const double dE = g * (Pr - e2 * P);
            if (q == Quantity::normal_derivative) {
                double hx = 0.0;
                double hy = 0.0;
                if (nu > 0) {
                    const double a = re_[nu - 1];
                    const double b = im_[nu - 1];
                    hx = e.sine ? nu * b : nu * a;
                    hy = e.sine ? nu * a : -nu * b;
                }
                const double E = g * P;
                const double gx = 2.0 * dE * y.x * H + E * hx;
                const double gy = 2.0 * dE * y.y * H + E * hy;
                out[col++] = inv * (normal.x * gx + normal.y * gy);
            } else {
                const double Prr = 4.0 * (odd ? radial_.ddv[s] : radial_.ddt[s]);
                const double ddE = g * (Prr - 2.0 * e2 * Pr + e2 * e2 * P);
                out[col++] = inv * inv * H * (4.0 * dE + 4.0 * rho * ddE + 4.0 * nu * dE);
            }
        }
    }

private:
    const BasisFactorization& f_;
    RadialTable radial_;
    std::vector<double> re_;
    std::vector<double> im_;
};

BasisFactorization BasisFactorization::factorize(std::span<const Point2> nodes, double epsilon,
                                                 const FactorizeOptions& options) {
    if (!(epsilon > 0.0) || !std::isfinite(epsilon))
        throw InvalidParameter("shape parameter must be positive and finite");
    if (nodes.empty()) throw InvalidParameter("stable basis needs at least one node");
    for (const Point2& p : nodes)
        if (!is_finite(p)) throw InvalidParameter("stencil nodes must be finite");
    for (std::size_t i = 0; i < nodes.size(); ++i)
        for (std::size_t j = i + 1; j < nodes.size(); ++j)
            if (nodes[i] == nodes[j]) throw RankDeficient("duplicate stencil nodes");

    BasisFactorization f;
    f.nodes_.assign(nodes.begin(), nodes.end());
    f.epsilon_ = epsilon;
    const auto n = nodes.size();
    Point2 c;
    for (const Point2& p : nodes) c = c + p;
    c = (1.0 / static_cast<double>(n)) * c;
    double scale = 0.0;
    for (const Point2& p : nodes) scale = std::max(scale, distance(p, c));
    f.shift_ = c;
    f.scale_ = scale > 0.0 ? scale : 1.0;
    f.scaled_epsilon_ = epsilon * f.scale_;

    if (options.allow_direct && f.scaled_epsilon_ > options.direct_threshold) {
        f.direct_.emplace(f.nodes_, epsilon);
        return f;
    }

    std::vector<Point2> scaled(n);
    for (std::size_t k = 0; k < n; ++k) scaled[k] = (1.0 / f.scale_) * (nodes[k] - c);
    const double log_eps = std::log(f.scaled_epsilon_);
    auto make_block = [&](int degree) {
        std::vector<Column> block;
        for (const ExpansionIndex& e : expansion_block(degree))
            block.push_back({e, coefficient_column(e, scaled, f.scaled_epsilon_),
                             log_scale(e, log_eps)});
        return block;
    };

    // Leading columns: degree blocks in order, greedy Gram-Schmidt with
    // pivoting inside each block. Columns that are numerically dependent on
    // earlier ones move to the tail.
    const auto ni = static_cast<Eigen::Index>(n);
    Eigen::MatrixXd q(ni, ni);
    Eigen::Index accepted = 0;
    std::vector<Column> lead;
    std::vector<Column> tail;
    int degree = 0;
    for (; accepted < ni; ++degree) {
        if (degree > static_cast<int>(n) + 1)
            throw RankDeficient("stencil nodes do not span the expansion space");
        std::vector<Column> block = make_block(degree);
        while (accepted < ni && !block.empty()) {
            double best_ratio = -1.0;
            std::size_t best = 0;
            Eigen::VectorXd best_res;
            for (std::size_t b = 0; b < block.size(); ++b) {
                const Eigen::VectorXd& col = block[b].coeffs;
                const double cn = col.norm();
                Eigen::VectorXd res = col;
                for (int pass = 0; pass < 2; ++pass)
                    res -= q.leftCols(accepted) * (q.leftCols(accepted).transpose() * res);
                const double ratio = cn > 0.0 ? res.norm() / cn : 0.0;
                if (ratio > best_ratio) {
                    best_ratio = ratio;
                    best = b;
                    best_res = std::move(res);
                }
            }
            if (best_ratio < options.rank_tolerance) break;
            q.col(accepted++) = best_res / best_res.norm();
            lead.push_back(std::move(block[best]));
            block.erase(block.begin() + static_cast<long>(best));
        }
        for (Column& col : block) tail.push_back(std::move(col));
    }

    // Tail blocks whose scale relative to the smallest leading scale is
    // still representable in double precision.
    double min_lead = std::numeric_limits<double>::infinity();
    for (const Column& col : lead) min_lead = std::min(min_lead, col.log_d);
    const double cutoff = std::log(std::numeric_limits<double>::epsilon());
    constexpr int hard_max_degree = 160;
    for (;; ++degree) {
        if (degree > hard_max_degree)
            throw NumericFailure(0, "expansion did not converge; shape parameter too large");
        double block_max = -std::numeric_limits<double>::infinity();
        for (const ExpansionIndex& e : expansion_block(degree))
            block_max = std::max(block_max, log_scale(e, log_eps));
        if (block_max - min_lead < cutoff) break;
        for (Column& col : make_block(degree)) tail.push_back(std::move(col));
    }

    const auto nt = static_cast<Eigen::Index>(tail.size());
    Eigen::MatrixXd c_lead(ni, ni);
    Eigen::MatrixXd c_tail(ni, nt);
    for (Eigen::Index k = 0; k < ni; ++k) c_lead.col(k) = lead[static_cast<std::size_t>(k)].coeffs;
    for (Eigen::Index k = 0; k < nt; ++k) c_tail.col(k) = tail[static_cast<std::size_t>(k)].coeffs;
    const Eigen::MatrixXd r1 = q.transpose() * c_lead;
    const Eigen::MatrixXd r2 = q.transpose() * c_tail;
    Eigen::MatrixXd x = r1.triangularView<Eigen::Upper>().solve(r2);
    for (Eigen::Index j = 0; j < nt; ++j)
        for (Eigen::Index i = 0; i < ni; ++i)
            x(i, j) *= std::exp(tail[static_cast<std::size_t>(j)].log_d -
                                lead[static_cast<std::size_t>(i)].log_d);
    if (!x.allFinite()) throw RankDeficient("non-finite correction after truncation");
    f.correction_ = std::move(x);

    f.index_.reserve(lead.size() + tail.size());
    for (const Column& col : lead) f.index_.push_back(col.index);
    for (const Column& col : tail) f.index_.push_back(col.index);
    for (const ExpansionIndex& e : f.index_) f.max_degree_ = std::max(f.max_degree_, e.degree);
    return f;
}

Eigen::MatrixXd BasisFactorization::expansion_values(std::span<const Point2> points) const {
    if (direct_) return direct_->values(points);
    ExpansionEvaluator eval(*this);
    // Row-major scratch so each point fills a contiguous row.
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> v(
        points.size(), index_.size());
    for (std::size_t p = 0; p < points.size(); ++p)
        eval(points[p], {}, ExpansionEvaluator::Quantity::value, v.row(static_cast<Eigen::Index>(p)).data());
    return v;
}

Eigen::MatrixXd BasisFactorization::apply_correction(const Eigen::MatrixXd& expansion) const {
    const auto n = static_cast<Eigen::Index>(nodes_.size());
    const Eigen::Index tail = expansion.cols() - n;
    Eigen::MatrixXd out = expansion.leftCols(n);
    if (tail > 0) out.noalias() += expansion.rightCols(tail) * correction_.transpose();
    return out;
}

Eigen::MatrixXd BasisFactorization::values(std::span<const Point2> points) const {
    if (direct_) return direct_->values(points);
    return apply_correction(expansion_values(points));
}

Eigen::MatrixXd BasisFactorization::normal_derivatives(std::span<const Point2> points,
                                                       std::span<const Point2> normals) const {
    if (normals.size() != points.size())
        throw InvalidParameter("one normal per evaluation point is required");
    if (direct_) return direct_->normal_derivatives(points, normals);
    ExpansionEvaluator eval(*this);
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> v(
        points.size(), index_.size());
    for (std::size_t p = 0; p < points.size(); ++p)
        eval(points[p], normals[p], ExpansionEvaluator::Quantity::normal_derivative,
             v.row(static_cast<Eigen::Index>(p)).data());
    return apply_correction(v);
}

Eigen::MatrixXd BasisFactorization::laplacians(std::span<const Point2> points) const {
    if (direct_) return direct_->laplacians(points);
    ExpansionEvaluator eval(*this);
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> v(
        points.size(), index_.size());
    for (std::size_t p = 0; p < points.size(); ++p)
        eval(points[p], {}, ExpansionEvaluator::Quantity::laplacian,
             v.row(static_cast<Eigen::Index>(p)).data());
    return apply_correction(v);
}

Eigen::VectorXd BasisFactorization::weighted_sum(std::span<const Point2> points,
                                                 std::span<const double> weights) const {
    if (direct_) return direct_->weighted_sum(points, weights);
    ExpansionEvaluator eval(*this);
    const auto m = static_cast<Eigen::Index>(index_.size());
    Eigen::VectorXd acc = Eigen::VectorXd::Zero(m);
    Eigen::VectorXd row(m);
    for (std::size_t p = 0; p < points.size(); ++p) {
        eval(points[p], {}, ExpansionEvaluator::Quantity::value, row.data());
        acc += weights[p] * row;
    }
    const auto n = static_cast<Eigen::Index>(nodes_.size());
    Eigen::VectorXd out = acc.head(n);
    if (m > n) out.noalias() += correction_ * acc.tail(m - n);
    return out;
}

Eigen::MatrixXd eval_boundary_operator(const LocalBasis& basis, std::span<const Point2> points,
                                       std::span<const Point2> normals, BoundaryOperator kind) {
    if (kind == BoundaryOperator::dirichlet) return basis.values(points);
    if (normals.size() != points.size())
        throw InvalidParameter("neumann rows need one unit normal per point");
    return basis.normal_derivatives(points, normals);
}

double condition_number(const Eigen::MatrixXd& m) {
    if (m.size() == 0) return 1.0;
    const Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
    const auto& s = svd.singularValues();
    const double smin = s[s.size() - 1];
    if (!(smin > 0.0)) return std::numeric_limits<double>::infinity();
    return s[0] / smin;
}

} // namespace slbdim
