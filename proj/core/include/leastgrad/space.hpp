#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "leastgrad/config.hpp"

namespace leastgrad {

enum class StencilKind { Grid4, Grid8, Grid16, Generic };

enum class NodeClass : uint8_t { Omega = 0, Exterior = 1, Null = 2 };

/// Discretized weighted metric measure space: an embedded graph with node
/// measures and Cauchy-Crofton edge weights. Immutable after construction;
/// all queries are read-only and reentrant.
struct Space {
    // Grid metadata (h > 0 only for lattice-built spaces).
    double h = 0.0;
    int nx = 0, ny = 0;
    double x0 = 0.0, y0 = 0.0;
    StencilKind stencil = StencilKind::Generic;

    // Nodes (parallel arrays, id = index).
    std::vector<double> px, py;   // positions
    std::vector<double> mu;       // measure, = h^2 * rho on grids
    std::vector<double> rho;      // density

    // Edges, each unordered pair listed once with i < j.
    std::vector<int> edge_i, edge_j;
    std::vector<double> edge_len;      // Euclidean length
    std::vector<double> edge_crofton;  // geometric Crofton weight (no density)

    // CSR adjacency: for node v, entries adj_off[v]..adj_off[v+1].
    std::vector<int> adj_off, adj_node, adj_edge;

    int node_count() const { return static_cast<int>(px.size()); }
    int edge_count() const { return static_cast<int>(edge_i.size()); }

    bool is_grid() const { return h > 0.0; }
    int grid_index(int ix, int iy) const { return iy * nx + ix; }

    /// Effective density of a node as seen by an edge weight: null-measure
    /// nodes are transparent, the neighbor's density is used instead.
    double effective_density(int node, int other, double null_thresh) const {
        if (rho[node] <= null_thresh && rho[other] > null_thresh) return rho[other];
        return rho[node];
    }

    /// All nodes with Euclidean distance to `center`'s position < r.
    std::vector<int> ball(int center, double r) const;
    /// Same, around an arbitrary position.
    std::vector<int> ball_at(double cx, double cy, double r) const;

    /// Sum of node measures over a set.
    double measure_of(const std::vector<int>& nodes) const;

    void finalize();  // builds adjacency and validates invariants

private:
    // Bucket index for radius queries on generic graphs (grids use window scans).
    mutable std::vector<std::vector<int>> buckets_;
    mutable double bucket_size_ = 0, bx0_ = 0, by0_ = 0;
    mutable int bnx_ = 0, bny_ = 0;
    void build_buckets() const;
};

/// Density assignment rule for build_grid.
struct MeasureWeights {
    enum class Rule { Uniform, TwoPhase, Custom };
    Rule rule = Rule::Uniform;
    double uniform_density = 1.0;
    double inside_density = 1.0;   // two-phase: density on omega
    double outside_density = 1.0;  // two-phase: density on the exterior
    std::vector<double> custom;    // per-node densities

    static MeasureWeights uniform(double density = 1.0) {
        MeasureWeights w; w.rule = Rule::Uniform; w.uniform_density = density; return w;
    }
    static MeasureWeights two_phase(double inside, double outside) {
        MeasureWeights w; w.rule = Rule::TwoPhase;
        w.inside_density = inside; w.outside_density = outside; return w;
    }
};

/// Classified node/edge structure of a domain within a Space.
struct Region {
    std::vector<NodeClass> cls;           // per node
    std::vector<int> omega, exterior, null_set;  // sorted id lists
    std::vector<int> interface_edges;     // edges whose endpoints differ in class
    std::vector<double> dist_to_interface;  // graph-metric distance per node

    bool in_omega(int v) const { return cls[v] == NodeClass::Omega; }
    bool is_null(int v) const { return cls[v] == NodeClass::Null; }

    /// Nodes within `width` of the interface (any class). collar(w) is
    /// monotone in w by construction.
    std::vector<int> collar(double width) const;
};

struct Segment { double x1, y1, x2, y2; };

/// Named shape for build_grid.
struct DomainSpec {
    enum class Kind { Disk, Annulus, Square, SlitDisk, NSlitDisk };
    Kind kind = Kind::Disk;
    double radius = 1.0;              // disk / slit disks
    double inner = 0.5, outer = 1.0;  // annulus
    double side = 1.0;                // square
    std::vector<Segment> slits;       // slit disk
    int slit_count = 0;               // n-slit disk

    static DomainSpec disk(double r) { DomainSpec d; d.kind = Kind::Disk; d.radius = r; return d; }
    static DomainSpec annulus(double a, double b) {
        DomainSpec d; d.kind = Kind::Annulus; d.inner = a; d.outer = b; return d;
    }
    static DomainSpec square(double s) { DomainSpec d; d.kind = Kind::Square; d.side = s; return d; }
    static DomainSpec slit_disk(std::vector<Segment> segs, double r = 1.0) {
        DomainSpec d; d.kind = Kind::SlitDisk; d.slits = std::move(segs); d.radius = r; return d;
    }
    static DomainSpec n_slit_disk(int n, double r = 1.0) {
        DomainSpec d; d.kind = Kind::NSlitDisk; d.slit_count = n; d.radius = r; return d;
    }

    std::string name() const;
};

struct GridOptions {
    StencilKind stencil = StencilKind::Grid16;
    double padding = 0.0;             // extra exterior margin; 0 = automatic
    double slit_band_factor = 1.0;    // null band half-width = factor * h
    Tolerances tol = default_tolerances();
};

/// Builds a lattice Space over the shape's bounding box plus padding and the
/// Region classifying nodes into omega / exterior / null-set.
std::pair<Space, Region> build_grid(const DomainSpec& shape, double hstep,
                                    const MeasureWeights& weights,
                                    const GridOptions& opts = {});

/// Ball-density boundary classification at scale r (requires r >= 2h).
struct BoundaryClassification {
    std::vector<int> interior;       // I_E
    std::vector<int> exterior;       // O_E
    std::vector<int> star_boundary;  // everything else
    std::vector<double> density;     // delta(x) per node, for diagnostics
};
BoundaryClassification classify_boundary(const Space& space, const std::vector<bool>& in_E,
                                         double r, double theta_tol = 0.05);

/// Empirical doubling constant: max over sampled balls of mu(2B)/mu(B).
double doubling_constant_estimate(const Space& space, double rmin, double rmax,
                                  int samples, uint64_t seed);

/// Slit angles of the accumulating n-slit construction: theta_k = sum_{j<=k} pi/2^j.
std::vector<double> n_slit_angles(int n);

/// Indicator of the union of sectors (theta_1,theta_2), (theta_3,theta_4), ...
/// of the n-slit disk, excluding null-band nodes. Used as the test family E_N.
std::vector<bool> alternating_sector_set(const Space& space, const Region& region, int n);

// --- External interfaces (JSON / CSV) ---------------------------------------

std::string space_to_json(const Space& space, const Region& region);
std::pair<Space, Region> space_from_json(const std::string& text);

} // namespace leastgrad
