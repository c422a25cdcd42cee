#include "slbdim/geometry.hpp"

#include "slbdim/error.hpp"

#include <algorithm>
#include <istream>
#include <limits>
#include <numeric>
#include <ostream>
#include <random>
#include <sstream>
#include <string>
#include <utility>

namespace slbdim {

namespace {

double segment_distance(Point2 p, Point2 a, Point2 b) {
    const Point2 d = b - a;
    const double len2 = dot(d, d);
    double t = len2 > 0.0 ? dot(p - a, d) / len2 : 0.0;
    t = std::clamp(t, 0.0, 1.0);
    return distance(p, a + t * d);
}

// A vertex shared by a Dirichlet and a Neumann segment is Dirichlet: its
// bisector normal matches neither side's flux.
BoundaryKind corner_kind(const Domain& domain, std::size_t s) {
    const std::size_t prev = (s + domain.segment_count() - 1) % domain.segment_count();
    return domain.segment_kind(s) == BoundaryKind::neumann &&
                   domain.segment_kind(prev) == BoundaryKind::neumann
               ? BoundaryKind::neumann
               : BoundaryKind::dirichlet;
}

Point2 normalized(Point2 v) {
    const double n = norm(v);
    return {v.x / n, v.y / n};
}

// Bucket grid over all nodes for k-nearest-neighbour queries.
class NeighborGrid {
public:
    explicit NeighborGrid(const NodeSet& nodes) : nodes_(nodes) {
        lo_ = {std::numeric_limits<double>::max(), std::numeric_limits<double>::max()};
        Point2 hi{std::numeric_limits<double>::lowest(), std::numeric_limits<double>::lowest()};
        for (std::size_t id = 0; id < nodes.size(); ++id) {
            const Point2 p = nodes.point(id);
            lo_ = {std::min(lo_.x, p.x), std::min(lo_.y, p.y)};
            hi = {std::max(hi.x, p.x), std::max(hi.y, p.y)};
        }
        const double extent = std::max({hi.x - lo_.x, hi.y - lo_.y, 1e-300});
        cell_ = nodes.spacing > 0.0
                    ? nodes.spacing
                    : extent / std::max(1.0, std::sqrt(static_cast<double>(nodes.size())));
        cell_ = std::max(cell_, extent / 4096.0);
        nx_ = static_cast<long>((hi.x - lo_.x) / cell_) + 1;
        ny_ = static_cast<long>((hi.y - lo_.y) / cell_) + 1;
        cells_.assign(static_cast<std::size_t>(nx_ * ny_), {});
        for (std::size_t id = 0; id < nodes.size(); ++id) {
            const auto [cx, cy] = cell_of(nodes.point(id));
            cells_[static_cast<std::size_t>(cy * nx_ + cx)].push_back(id);
        }
    }

    // The k nearest node ids to p sorted by (distance, id).
    [[nodiscard]] std::vector<std::pair<double, std::size_t>> nearest(Point2 p,
                                                                      std::size_t k) const {
        std::vector<std::pair<double, std::size_t>> found;
        const auto [cx, cy] = cell_of(p);
        const long max_ring = std::max(nx_, ny_);
        for (long ring = 0; ring <= max_ring; ++ring) {
            for (long iy = cy - ring; iy <= cy + ring; ++iy) {
                if (iy < 0 || iy >= ny_) continue;
                const bool edge_row = iy == cy - ring || iy == cy + ring;
                for (long ix = cx - ring; ix <= cx + ring; ++ix) {
                    if (ix < 0 || ix >= nx_) continue;
                    if (!edge_row && ix != cx - ring && ix != cx + ring) continue;
                    for (std::size_t id : cells_[static_cast<std::size_t>(iy * nx_ + ix)]) {
                        const Point2 d = nodes_.point(id) - p;
                        found.emplace_back(dot(d, d), id);
                    }
                }
            }
            if (found.size() >= k) {
                std::nth_element(found.begin(), found.begin() + static_cast<long>(k - 1),
                                 found.end());
                const double reach = static_cast<double>(ring) * cell_;
                if (found[k - 1].first < reach * reach) break;
            }
        }
        std::sort(found.begin(), found.end());
        found.resize(std::min(k, found.size()));
        return found;
    }

private:
    [[nodiscard]] std::pair<long, long> cell_of(Point2 p) const {
        auto cx = static_cast<long>((p.x - lo_.x) / cell_);
        auto cy = static_cast<long>((p.y - lo_.y) / cell_);
        return {std::clamp(cx, 0L, nx_ - 1), std::clamp(cy, 0L, ny_ - 1)};
    }

    const NodeSet& nodes_;
    Point2 lo_;
    double cell_ = 1.0;
    long nx_ = 1;
    long ny_ = 1;
    std::vector<std::vector<std::size_t>> cells_;
};

// Deterministic uniform sample in [-1, 1] independent of the standard
// library's distribution implementation.
double symmetric_unit(std::mt19937& rng) {
    return 2.0 * (static_cast<double>(rng()) / 4294967296.0) - 1.0;
}

} // namespace

Domain Domain::rectangle(double xmin, double xmax, double ymin, double ymax,
                         std::array<BoundaryKind, 4> labels) {
    if (!(std::isfinite(xmin) && std::isfinite(xmax) && std::isfinite(ymin) &&
          std::isfinite(ymax)))
        throw InvalidDomain("rectangle bounds must be finite");
    if (!(xmin < xmax) || !(ymin < ymax))
        throw InvalidDomain("rectangle requires xmin < xmax and ymin < ymax");
    Domain d = polygon({{xmin, ymin}, {xmax, ymin}, {xmax, ymax}, {xmin, ymax}},
                       {labels.begin(), labels.end()});
    d.rectangle_ = true;
    return d;
}

Domain Domain::polygon(std::vector<Point2> vertices, std::vector<BoundaryKind> labels) {
    if (vertices.size() < 3) throw InvalidDomain("polygon needs at least 3 vertices");
    if (labels.size() != vertices.size())
        throw InvalidDomain("one boundary label per polygon segment is required");
    for (const Point2& v : vertices)
        if (!is_finite(v)) throw InvalidDomain("polygon vertices must be finite");

    double area2 = 0.0;
    const std::size_t n = vertices.size();
    for (std::size_t i = 0; i < n; ++i) {
        const Point2 a = vertices[i];
        const Point2 b = vertices[(i + 1) % n];
        area2 += a.x * b.y - b.x * a.y;
    }
    Point2 lo = vertices[0];
    Point2 hi = vertices[0];
    for (const Point2& v : vertices) {
        lo = {std::min(lo.x, v.x), std::min(lo.y, v.y)};
        hi = {std::max(hi.x, v.x), std::max(hi.y, v.y)};
    }
    const double scale = std::max(hi.x - lo.x, hi.y - lo.y);
    if (!(std::abs(area2) > 1e-12 * scale * scale)) throw InvalidDomain("polygon has zero area");

    if (area2 < 0.0) {
        // Reverse to counter-clockwise; segment i of the reversed loop is the
        // old segment n-2-i traversed backwards.
        std::vector<Point2> v(vertices.rbegin(), vertices.rend());
        std::vector<BoundaryKind> l(n);
        for (std::size_t i = 0; i < n; ++i) l[i] = labels[(2 * n - 2 - i) % n];
        vertices = std::move(v);
        labels = std::move(l);
    }

    Domain d;
    d.vertices_ = std::move(vertices);
    d.labels_ = std::move(labels);
    d.lo_ = lo;
    d.hi_ = hi;
    return d;
}

Point2 Domain::outward_normal(std::size_t s) const {
    const Point2 d = segment_end(s) - segment_start(s);
    return normalized({d.y, -d.x});
}

bool Domain::contains(Point2 p) const {
    bool inside = false;
    const std::size_t n = vertices_.size();
    for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
        const Point2 a = vertices_[i];
        const Point2 b = vertices_[j];
        if ((a.y > p.y) != (b.y > p.y) && p.x < (b.x - a.x) * (p.y - a.y) / (b.y - a.y) + a.x)
            inside = !inside;
    }
    const double scale = std::max(hi_.x - lo_.x, hi_.y - lo_.y);
    return inside && distance_to_boundary(p) > 1e-14 * scale;
}

double Domain::distance_to_boundary(Point2 p) const {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t s = 0; s < segment_count(); ++s)
        best = std::min(best, segment_distance(p, segment_start(s), segment_end(s)));
    return best;
}

std::size_t Domain::nearest_segment(Point2 p) const {
    std::size_t best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t s = 0; s < segment_count(); ++s) {
        const double d = segment_distance(p, segment_start(s), segment_end(s));
        if (d < best_d) {
            best_d = d;
            best = s;
        }
    }
    return best;
}

NodeSet generate_quasi_uniform(const Domain& domain, double h, const NodeOptions& options) {
    if (!(h > 0.0) || !std::isfinite(h)) throw InvalidParameter("spacing h must be positive");
    const Point2 lo = domain.lower_corner();
    const Point2 hi = domain.upper_corner();
    const double width = hi.x - lo.x;
    const double height = hi.y - lo.y;
    if (!(h < std::min(width, height)))
        throw InvalidParameter("spacing h must be smaller than the domain extent");
    if (options.jitter < 0.0 || options.jitter > 0.2)
        throw InvalidParameter("jitter must lie in [0, 0.2]");

    NodeSet nodes;
    nodes.spacing = h;

    const std::size_t segments = domain.segment_count();
    for (std::size_t s = 0; s < segments; ++s) {
        const Point2 a = domain.segment_start(s);
        const Point2 b = domain.segment_end(s);
        const auto pieces = std::max(1L, std::lround(distance(a, b) / h));
        const Point2 n_here = domain.outward_normal(s);
        const Point2 n_prev = domain.outward_normal((s + segments - 1) % segments);
        for (long i = 0; i < pieces; ++i) {
            const double t = static_cast<double>(i) / static_cast<double>(pieces);
            BoundaryNode node;
            node.point = a + t * (b - a);
            node.normal = i == 0 ? normalized(n_prev + n_here) : n_here;
            node.segment = s;
            node.kind = i == 0 ? corner_kind(domain, s) : domain.segment_kind(s);
            nodes.boundary.push_back(node);
        }
    }

    // Staggered rows with in-row spacing a and row spacing a*sqrt(3)/2, so
    // the node density matches 1/h^2.
    const double in_row = h * std::sqrt(2.0 / std::sqrt(3.0));
    const double row_gap = in_row * std::sqrt(3.0) / 2.0;
    const long rows = std::max(1L, std::lround(height / row_gap) - 1);
    const double dy = height / static_cast<double>(rows + 1);
    const long cols = std::max(1L, std::lround(width / in_row));
    const double dx = width / static_cast<double>(cols);

    std::mt19937 rng(options.seed);
    const double amp = options.jitter * h;
    const double margin = 0.5 * h;
    auto place = [&](double x, double y) {
        Point2 p{x + amp * symmetric_unit(rng), y + amp * symmetric_unit(rng)};
        if (domain.contains(p) && domain.distance_to_boundary(p) >= margin)
            nodes.interior.push_back(p);
    };

    for (long k = 1; k <= rows; ++k) {
        const double y = lo.y + static_cast<double>(k) * dy;
        if (cols == 1) {
            place(lo.x + 0.5 * width, y);
        } else if (k % 2 == 1) {
            for (long i = 1; i < cols; ++i) place(lo.x + static_cast<double>(i) * dx, y);
        } else {
            for (long i = 0; i < cols; ++i) {
                double x = lo.x + (static_cast<double>(i) + 0.5) * dx;
                if (i == 0) x = lo.x + 0.7 * dx;
                if (i == cols - 1) x = hi.x - 0.7 * dx;
                place(x, y);
            }
        }
    }
    return nodes;
}

double spacing_for_interior_count(const Domain& domain, std::size_t target,
                                  const NodeOptions& options) {
    if (target == 0) throw InvalidParameter("target interior count must be positive");
    const Point2 lo = domain.lower_corner();
    const Point2 hi = domain.upper_corner();
    const double guess = std::sqrt((hi.x - lo.x) * (hi.y - lo.y) / static_cast<double>(target));
    double best_h = guess;
    std::size_t best_miss = std::numeric_limits<std::size_t>::max();
    constexpr int steps = 400;
    for (int i = 0; i <= steps; ++i) {
        const double h = guess * (0.75 + 0.5 * i / steps);
        if (!(h < std::min(hi.x - lo.x, hi.y - lo.y))) break;
        const std::size_t count = generate_quasi_uniform(domain, h, options).interior_count();
        const std::size_t miss = count > target ? count - target : target - count;
        if (miss < best_miss) {
            best_miss = miss;
            best_h = h;
        }
    }
    return best_h;
}

double spacing_for_boundary_count(const Domain& domain, std::size_t target) {
    if (target == 0) throw InvalidParameter("target boundary count must be positive");
    double perimeter = 0.0;
    for (std::size_t s = 0; s < domain.segment_count(); ++s)
        perimeter += distance(domain.segment_start(s), domain.segment_end(s));
    return perimeter / static_cast<double>(target);
}

std::vector<Stencil> build_stencils(const NodeSet& nodes, std::size_t n) {
    if (n < 1 || n > nodes.size())
        throw InvalidParameter("stencil size must lie in [1, total node count]");
    const NeighborGrid grid(nodes);
    std::vector<Stencil> stencils(nodes.interior_count());
    for (std::size_t i = 0; i < nodes.interior_count(); ++i) {
        auto near = grid.nearest(nodes.interior[i], n);
        // Interior before boundary; within each group by (distance, id).
        std::stable_partition(near.begin(), near.end(),
                              [&](const auto& e) { return !nodes.is_boundary(e.second); });
        Stencil& st = stencils[i];
        st.center = i;
        st.members.reserve(n);
        for (const auto& [d2, id] : near) st.members.push_back(id);
        st.n_int = static_cast<std::size_t>(std::count_if(
            st.members.begin(), st.members.end(),
            [&](std::size_t id) { return !nodes.is_boundary(id); }));
        // Coincident nodes could displace the center from the front.
        auto it = std::find(st.members.begin(), st.members.end(), i);
        std::rotate(st.members.begin(), it, it + 1);
    }
    return stencils;
}

std::vector<double> nearest_neighbor_distances(const NodeSet& nodes) {
    std::vector<double> out(nodes.interior_count(), std::numeric_limits<double>::infinity());
    if (nodes.size() < 2) return out;
    const NeighborGrid grid(nodes);
    for (std::size_t i = 0; i < nodes.interior_count(); ++i) {
        for (const auto& [d2, id] : grid.nearest(nodes.interior[i], 2))
            if (id != i) out[i] = std::sqrt(d2);
    }
    return out;
}

Subdomain build_subdomain(const NodeSet& nodes, const Domain& domain, std::size_t center_index,
                          double c_R) {
    if (center_index >= nodes.interior_count())
        throw InvalidParameter("subdomain center must be an interior node");
    if (!(c_R > 0.0 && c_R < 1.0)) throw InvalidParameter("c_R must lie in (0, 1)");
    const Point2 c = nodes.interior[center_index];
    double nearest = std::numeric_limits<double>::infinity();
    for (std::size_t id = 0; id < nodes.size(); ++id)
        if (id != center_index) nearest = std::min(nearest, distance(c, nodes.point(id)));
    const double radius = c_R * std::min(nearest, domain.distance_to_boundary(c));
    if (!(radius > 0.0)) throw InvalidParameter("subdomain radius collapsed to zero");
    return {c, radius};
}

void write_nodeset(std::ostream& out, const NodeSet& nodes) {
    std::ostringstream s;
    s.precision(17);
    s << "nodeset v1 " << nodes.interior_count() << ' ' << nodes.boundary_count() << '\n';
    for (const Point2& p : nodes.interior) s << p.x << ' ' << p.y << '\n';
    for (const BoundaryNode& b : nodes.boundary)
        s << b.point.x << ' ' << b.point.y << ' ' << b.normal.x << ' ' << b.normal.y << ' '
          << b.segment << '\n';
    out << s.str();
}

NodeSet read_nodeset(std::istream& in, const Domain& domain) {
    std::string tag;
    std::string version;
    std::size_t n_int = 0;
    std::size_t n_bnd = 0;
    if (!(in >> tag >> version >> n_int >> n_bnd) || tag != "nodeset" || version != "v1")
        throw InvalidParameter("not a 'nodeset v1' stream");
    NodeSet nodes;
    nodes.interior.resize(n_int);
    for (Point2& p : nodes.interior)
        if (!(in >> p.x >> p.y)) throw InvalidParameter("truncated interior node list");
    nodes.boundary.resize(n_bnd);
    for (BoundaryNode& b : nodes.boundary) {
        if (!(in >> b.point.x >> b.point.y >> b.normal.x >> b.normal.y >> b.segment))
            throw InvalidParameter("truncated boundary node list");
        if (b.segment >= domain.segment_count())
            throw InvalidParameter("boundary segment label out of range");
        b.kind = b.point == domain.segment_start(b.segment) ? corner_kind(domain, b.segment)
                                                             : domain.segment_kind(b.segment);
    }
    const auto nn = nearest_neighbor_distances(nodes);
    if (!nn.empty()) {
        nodes.spacing = std::accumulate(nn.begin(), nn.end(), 0.0) / static_cast<double>(nn.size());
    }
    return nodes;
}

} // namespace slbdim
