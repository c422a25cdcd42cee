#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <vector>

namespace slbdim {

struct Point2 {
    double x = 0.0;
    double y = 0.0;

    friend constexpr Point2 operator+(Point2 a, Point2 b) { return {a.x + b.x, a.y + b.y}; }
    friend constexpr Point2 operator-(Point2 a, Point2 b) { return {a.x - b.x, a.y - b.y}; }
    friend constexpr Point2 operator*(double s, Point2 a) { return {s * a.x, s * a.y}; }
    friend constexpr Point2 operator*(Point2 a, double s) { return {s * a.x, s * a.y}; }
    friend constexpr bool operator==(Point2 a, Point2 b) = default;
};

constexpr double dot(Point2 a, Point2 b) { return a.x * b.x + a.y * b.y; }
inline double norm(Point2 a) { return std::hypot(a.x, a.y); }
inline double distance(Point2 a, Point2 b) { return norm(a - b); }
inline bool is_finite(Point2 p) { return std::isfinite(p.x) && std::isfinite(p.y); }

enum class BoundaryKind { dirichlet, neumann };

/// Simply connected polygonal domain given as a counter-clockwise vertex
/// loop. Segment i runs from vertex i to vertex i+1 and carries one
/// boundary-condition label, so the labels partition the boundary.
class Domain {
public:
    static Domain rectangle(double xmin, double xmax, double ymin, double ymax,
                            std::array<BoundaryKind, 4> labels = {BoundaryKind::dirichlet,
                                                                  BoundaryKind::dirichlet,
                                                                  BoundaryKind::dirichlet,
                                                                  BoundaryKind::dirichlet});
    static Domain polygon(std::vector<Point2> vertices, std::vector<BoundaryKind> labels);

    [[nodiscard]] const std::vector<Point2>& vertices() const noexcept { return vertices_; }
    [[nodiscard]] std::size_t segment_count() const noexcept { return vertices_.size(); }
    [[nodiscard]] Point2 segment_start(std::size_t s) const { return vertices_[s]; }
    [[nodiscard]] Point2 segment_end(std::size_t s) const {
        return vertices_[(s + 1) % vertices_.size()];
    }
    [[nodiscard]] BoundaryKind segment_kind(std::size_t s) const { return labels_[s]; }
    [[nodiscard]] Point2 outward_normal(std::size_t s) const;

    /// Strict interior test (points on the boundary are not contained).
    [[nodiscard]] bool contains(Point2 p) const;
    [[nodiscard]] double distance_to_boundary(Point2 p) const;
    [[nodiscard]] std::size_t nearest_segment(Point2 p) const;

    [[nodiscard]] Point2 lower_corner() const noexcept { return lo_; }
    [[nodiscard]] Point2 upper_corner() const noexcept { return hi_; }
    [[nodiscard]] bool is_axis_rectangle() const noexcept { return rectangle_; }

private:
    Domain() = default;

    std::vector<Point2> vertices_;
    std::vector<BoundaryKind> labels_;
    Point2 lo_;
    Point2 hi_;
    bool rectangle_ = false;
};

struct BoundaryNode {
    Point2 point;
    Point2 normal;           ///< unit outward normal
    std::size_t segment = 0; ///< index of the owning domain segment
    BoundaryKind kind = BoundaryKind::dirichlet;
};

/// Collocation nodes. Global node ids number the interior nodes first
/// (0 .. N_int-1) followed by the boundary nodes.
struct NodeSet {
    std::vector<Point2> interior;
    std::vector<BoundaryNode> boundary;
    double spacing = 0.0;

    [[nodiscard]] std::size_t interior_count() const noexcept { return interior.size(); }
    [[nodiscard]] std::size_t boundary_count() const noexcept { return boundary.size(); }
    [[nodiscard]] std::size_t size() const noexcept { return interior.size() + boundary.size(); }
    [[nodiscard]] bool is_boundary(std::size_t id) const noexcept { return id >= interior.size(); }
    [[nodiscard]] Point2 point(std::size_t id) const {
        return id < interior.size() ? interior[id] : boundary[id - interior.size()].point;
    }
};

struct NodeOptions {
    /// Uniform perturbation of interior nodes, as a fraction of h.
    double jitter = 0.1;
    std::uint32_t seed = 5489u;
};

/// Quasi-uniform nodes at target spacing h. Boundary nodes are equispaced per
/// segment (vertices included); interior nodes are laid out row by row from
/// the lower boundary in a staggered pattern of density 1/h^2 and then
/// jittered deterministically.
NodeSet generate_quasi_uniform(const Domain& domain, double h, const NodeOptions& options = {});

/// Spacing whose node set has the interior count closest to `target`.
double spacing_for_interior_count(const Domain& domain, std::size_t target,
                                  const NodeOptions& options = {});

/// Spacing whose node set has exactly `target` boundary nodes on an
/// axis-aligned rectangle (perimeter / target when that divides evenly).
double spacing_for_boundary_count(const Domain& domain, std::size_t target);

struct Stencil {
    std::size_t center = 0;           ///< global id of the collocation node
    std::vector<std::size_t> members; ///< global ids, center first, interior before boundary
    std::size_t n_int = 0;            ///< number of interior members

    [[nodiscard]] std::size_t size() const noexcept { return members.size(); }
};

/// One stencil per interior node: its n nearest nodes (ties by lower id).
std::vector<Stencil> build_stencils(const NodeSet& nodes, std::size_t n);

/// Circular integration subdomain centered at a collocation node.
struct Subdomain {
    Point2 center;
    double radius = 0.0;
};

Subdomain build_subdomain(const NodeSet& nodes, const Domain& domain, std::size_t center_index,
                          double c_R = 0.9);

/// Distance from every interior node to its nearest other node.
std::vector<double> nearest_neighbor_distances(const NodeSet& nodes);

// Text format: "nodeset v1 N_int N_bnd", N_int lines "x y", then N_bnd lines
// "x y nx ny segment".
void write_nodeset(std::ostream& out, const NodeSet& nodes);
/// Reads a node set; boundary kinds are taken from `domain` by segment index.
NodeSet read_nodeset(std::istream& in, const Domain& domain);

} // namespace slbdim
