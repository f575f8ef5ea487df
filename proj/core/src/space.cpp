#include "leastgrad/space.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <queue>

#include "json.hpp"

namespace leastgrad {

namespace {

constexpr double kPi = 3.14159265358979323846;

struct Offset { int dx, dy; };

std::vector<Offset> stencil_offsets(StencilKind k) {
    switch (k) {
        case StencilKind::Grid4:  return {{1, 0}, {0, 1}};
        case StencilKind::Grid8:  return {{1, 0}, {0, 1}, {1, 1}, {1, -1}};
        case StencilKind::Grid16:
            return {{1, 0}, {0, 1}, {1, 1}, {1, -1}, {2, 1}, {1, 2}, {2, -1}, {1, -2}};
        default: throw std::invalid_argument("stencil_offsets: generic stencil has no offsets");
    }
}

/// Cauchy-Crofton weight per offset family: h * dphi / (2 |o|), where dphi is
/// the angular cell of the family direction among all families mod pi. With
/// these weights the cut length of a straight boundary matches its Euclidean
/// length to ~1% on the 16-neighbor stencil.
std::vector<double> crofton_weights(const std::vector<Offset>& offs, double h) {
    const int k = static_cast<int>(offs.size());
    std::vector<double> theta(k);
    for (int a = 0; a < k; ++a) {
        double t = std::atan2(static_cast<double>(offs[a].dy), static_cast<double>(offs[a].dx));
        while (t < 0) t += kPi;
        while (t >= kPi) t -= kPi;
        theta[a] = t;
    }
    std::vector<int> order(k);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int a, int b) { return theta[a] < theta[b]; });

    std::vector<double> w(k);
    for (int r = 0; r < k; ++r) {
        const int cur = order[r];
        const int nxt = order[(r + 1) % k];
        const int prv = order[(r + k - 1) % k];
        double gap_next = theta[nxt] - theta[cur];
        if (r + 1 == k) gap_next += kPi;
        double gap_prev = theta[cur] - theta[prv];
        if (r == 0) gap_prev += kPi;
        const double dphi = 0.5 * (gap_next + gap_prev);
        const double len = std::hypot(offs[cur].dx, offs[cur].dy);
        w[cur] = h * dphi / (2.0 * len);
    }
    return w;
}

double dist_point_segment(double px, double py, const Segment& s) {
    const double vx = s.x2 - s.x1, vy = s.y2 - s.y1;
    const double wx = px - s.x1, wy = py - s.y1;
    const double vv = vx * vx + vy * vy;
    double t = vv > 0 ? (wx * vx + wy * vy) / vv : 0.0;
    t = std::clamp(t, 0.0, 1.0);
    const double dx = px - (s.x1 + t * vx), dy = py - (s.y1 + t * vy);
    return std::hypot(dx, dy);
}

struct ShapeGeometry {
    double half_extent;                 // bounding half-width of the closed shape
    std::vector<Segment> slits;
};

ShapeGeometry shape_geometry(const DomainSpec& d, double h) {
    ShapeGeometry g;
    switch (d.kind) {
        case DomainSpec::Kind::Disk:
            g.half_extent = d.radius;
            break;
        case DomainSpec::Kind::Annulus:
            if (d.inner >= d.outer)
                throw std::invalid_argument("annulus: inner radius must be below outer radius");
            g.half_extent = d.outer;
            break;
        case DomainSpec::Kind::Square:
            g.half_extent = 0.5 * d.side;
            break;
        case DomainSpec::Kind::SlitDisk: {
            g.half_extent = d.radius;
            for (const auto& s : d.slits) {
                if (std::hypot(s.x1, s.y1) > d.radius + 1e-12 ||
                    std::hypot(s.x2, s.y2) > d.radius + 1e-12)
                    throw std::invalid_argument("slit_disk: slit segment leaves the disk");
            }
            g.slits = d.slits;
            break;
        }
        case DomainSpec::Kind::NSlitDisk: {
            if (d.slit_count < 1) throw std::invalid_argument("n_slit_disk: need at least one slit");
            // Adjacent slit angles accumulate like pi/2^k; the narrowest gap must
            // leave at least one free lattice column at the rim.
            const double narrowest = kPi / std::pow(2.0, d.slit_count);
            if (narrowest * d.radius < 3.0 * h)
                throw std::invalid_argument("n_slit_disk: slit family unresolvable at this h (gap " +
                                            std::to_string(narrowest * d.radius) + " < 3h)");
            g.half_extent = d.radius;
            for (double a : n_slit_angles(d.slit_count))
                g.slits.push_back({0.0, 0.0, d.radius * std::cos(a), d.radius * std::sin(a)});
            break;
        }
    }
    return g;
}

/// Strictly-inside test for the open shape (slits handled separately).
bool inside_shape(const DomainSpec& d, double x, double y) {
    switch (d.kind) {
        case DomainSpec::Kind::Disk: return std::hypot(x, y) < d.radius;
        case DomainSpec::Kind::Annulus: {
            const double r = std::hypot(x, y);
            return r > d.inner && r < d.outer;
        }
        case DomainSpec::Kind::Square:
            return std::abs(x) < 0.5 * d.side && std::abs(y) < 0.5 * d.side;
        case DomainSpec::Kind::SlitDisk:
        case DomainSpec::Kind::NSlitDisk:
            return std::hypot(x, y) < d.radius;
    }
    return false;
}

} // namespace

std::string DomainSpec::name() const {
    switch (kind) {
        case Kind::Disk: return "disk";
        case Kind::Annulus: return "annulus";
        case Kind::Square: return "square";
        case Kind::SlitDisk: return "slit_disk";
        case Kind::NSlitDisk: return "n_slit_disk";
    }
    return "?";
}

std::vector<double> n_slit_angles(int n) {
    std::vector<double> a(static_cast<size_t>(n));
    double acc = 0.0;
    for (int k = 1; k <= n; ++k) {
        acc += kPi / std::pow(2.0, k);
        a[static_cast<size_t>(k - 1)] = acc;
    }
    return a;
}

void Space::finalize() {
    const int n = node_count();
    const int m = edge_count();
    for (int e = 0; e < m; ++e) {
        if (edge_i[e] == edge_j[e]) throw std::invalid_argument("Space: self-loop edge");
        if (edge_len[e] <= 0 || edge_crofton[e] <= 0)
            throw std::invalid_argument("Space: nonpositive edge length or weight");
    }
    for (int v = 0; v < n; ++v) {
        if (!(mu[v] > 0) || !(rho[v] > 0))
            throw std::invalid_argument("Space: nonpositive node measure or density");
    }
    adj_off.assign(static_cast<size_t>(n) + 1, 0);
    for (int e = 0; e < m; ++e) {
        ++adj_off[static_cast<size_t>(edge_i[e]) + 1];
        ++adj_off[static_cast<size_t>(edge_j[e]) + 1];
    }
    for (int v = 0; v < n; ++v) adj_off[static_cast<size_t>(v) + 1] += adj_off[v];
    adj_node.assign(adj_off[static_cast<size_t>(n)], 0);
    adj_edge.assign(adj_off[static_cast<size_t>(n)], 0);
    std::vector<int> cursor(adj_off.begin(), adj_off.end() - 1);
    for (int e = 0; e < m; ++e) {
        adj_node[cursor[edge_i[e]]] = edge_j[e];
        adj_edge[cursor[edge_i[e]]++] = e;
        adj_node[cursor[edge_j[e]]] = edge_i[e];
        adj_edge[cursor[edge_j[e]]++] = e;
    }
}

void Space::build_buckets() const {
    if (!buckets_.empty()) return;
    const int n = node_count();
    double xmin = 1e300, xmax = -1e300, ymin = 1e300, ymax = -1e300;
    double mind = 1e300;
    for (int e = 0; e < std::min(edge_count(), 4096); ++e) mind = std::min(mind, edge_len[e]);
    for (int v = 0; v < n; ++v) {
        xmin = std::min(xmin, px[v]); xmax = std::max(xmax, px[v]);
        ymin = std::min(ymin, py[v]); ymax = std::max(ymax, py[v]);
    }
    bucket_size_ = std::max(mind, (xmax - xmin + ymax - ymin) / 2048.0 + 1e-300);
    bx0_ = xmin; by0_ = ymin;
    bnx_ = static_cast<int>((xmax - bx0_) / bucket_size_) + 1;
    bny_ = static_cast<int>((ymax - by0_) / bucket_size_) + 1;
    buckets_.assign(static_cast<size_t>(bnx_) * bny_, {});
    for (int v = 0; v < n; ++v) {
        const int bx = static_cast<int>((px[v] - bx0_) / bucket_size_);
        const int by = static_cast<int>((py[v] - by0_) / bucket_size_);
        buckets_[static_cast<size_t>(by) * bnx_ + bx].push_back(v);
    }
}

std::vector<int> Space::ball_at(double cx, double cy, double r) const {
    std::vector<int> out;
    if (r <= 0) return out;
    const double r2 = r * r;
    if (is_grid()) {
        const int ix_lo = std::max(0, static_cast<int>(std::ceil((cx - r - x0) / h)));
        const int ix_hi = std::min(nx - 1, static_cast<int>(std::floor((cx + r - x0) / h)));
        const int iy_lo = std::max(0, static_cast<int>(std::ceil((cy - r - y0) / h)));
        const int iy_hi = std::min(ny - 1, static_cast<int>(std::floor((cy + r - y0) / h)));
        for (int iy = iy_lo; iy <= iy_hi; ++iy)
            for (int ix = ix_lo; ix <= ix_hi; ++ix) {
                const int v = grid_index(ix, iy);
                const double dx = px[v] - cx, dy = py[v] - cy;
                if (dx * dx + dy * dy < r2) out.push_back(v);
            }
        return out;
    }
    build_buckets();
    const int bx_lo = std::max(0, static_cast<int>((cx - r - bx0_) / bucket_size_));
    const int bx_hi = std::min(bnx_ - 1, static_cast<int>((cx + r - bx0_) / bucket_size_));
    const int by_lo = std::max(0, static_cast<int>((cy - r - by0_) / bucket_size_));
    const int by_hi = std::min(bny_ - 1, static_cast<int>((cy + r - by0_) / bucket_size_));
    for (int by = by_lo; by <= by_hi; ++by)
        for (int bx = bx_lo; bx <= bx_hi; ++bx)
            for (int v : buckets_[static_cast<size_t>(by) * bnx_ + bx]) {
                const double dx = px[v] - cx, dy = py[v] - cy;
                if (dx * dx + dy * dy < r2) out.push_back(v);
            }
    std::sort(out.begin(), out.end());
    return out;
}

std::vector<int> Space::ball(int center, double r) const {
    if (center < 0 || center >= node_count())
        throw std::invalid_argument("ball: unknown node id");
    if (r <= 0) throw std::invalid_argument("ball: radius must be positive");
    return ball_at(px[center], py[center], r);
}

double Space::measure_of(const std::vector<int>& nodes) const {
    double s = 0;
    for (int v : nodes) s += mu[v];
    return s;
}

std::vector<int> Region::collar(double width) const {
    std::vector<int> out;
    for (int v = 0; v < static_cast<int>(cls.size()); ++v)
        if (dist_to_interface[v] <= width) out.push_back(v);
    return out;
}

std::pair<Space, Region> build_grid(const DomainSpec& shape, double hstep,
                                    const MeasureWeights& weights, const GridOptions& opts) {
    if (!(hstep > 0)) throw std::invalid_argument("build_grid: h must be positive");
    const ShapeGeometry geom = shape_geometry(shape, hstep);

    double pad = opts.padding;
    if (pad <= 0) pad = std::max(0.15 * geom.half_extent, 20.0 * hstep);
    const double half = geom.half_extent + pad;

    Space sp;
    sp.h = hstep;
    sp.stencil = opts.stencil;
    const int half_cells = static_cast<int>(std::ceil(half / hstep));
    sp.nx = 2 * half_cells + 1;
    sp.ny = sp.nx;
    sp.x0 = -half_cells * hstep;
    sp.y0 = -half_cells * hstep;

    const int n = sp.nx * sp.ny;
    sp.px.resize(n); sp.py.resize(n);
    for (int iy = 0; iy < sp.ny; ++iy)
        for (int ix = 0; ix < sp.nx; ++ix) {
            const int v = sp.grid_index(ix, iy);
            sp.px[v] = sp.x0 + ix * hstep;
            sp.py[v] = sp.y0 + iy * hstep;
        }

    // Classify nodes.
    Region rg;
    rg.cls.assign(n, NodeClass::Exterior);
    const double band = opts.slit_band_factor * hstep * (1.0 + 1e-12);
    for (int v = 0; v < n; ++v) {
        if (!inside_shape(shape, sp.px[v], sp.py[v])) continue;
        bool in_band = false;
        for (const auto& s : geom.slits)
            if (dist_point_segment(sp.px[v], sp.py[v], s) <= band) { in_band = true; break; }
        rg.cls[v] = in_band ? NodeClass::Null : NodeClass::Omega;
    }
    for (int v = 0; v < n; ++v) {
        if (rg.cls[v] == NodeClass::Omega) rg.omega.push_back(v);
        else if (rg.cls[v] == NodeClass::Exterior) rg.exterior.push_back(v);
        else rg.null_set.push_back(v);
    }
    if (rg.omega.empty()) throw std::invalid_argument("build_grid: shape resolves to no interior nodes");

    // Densities and measures.
    sp.rho.resize(n);
    for (int v = 0; v < n; ++v) {
        double d;
        switch (weights.rule) {
            case MeasureWeights::Rule::Uniform: d = weights.uniform_density; break;
            case MeasureWeights::Rule::TwoPhase:
                d = (rg.cls[v] == NodeClass::Exterior) ? weights.outside_density
                                                       : weights.inside_density;
                break;
            case MeasureWeights::Rule::Custom:
                if (static_cast<int>(weights.custom.size()) != n)
                    throw std::invalid_argument("build_grid: custom density size mismatch");
                d = weights.custom[v];
                break;
            default: d = 1.0;
        }
        if (!(d > 0)) throw std::invalid_argument("build_grid: densities must be positive");
        if (rg.cls[v] == NodeClass::Null) d *= opts.tol.slit_epsilon;
        sp.rho[v] = d;
    }
    sp.mu.resize(n);
    for (int v = 0; v < n; ++v) sp.mu[v] = hstep * hstep * sp.rho[v];

    // Edges with Crofton weights.
    const auto offs = stencil_offsets(opts.stencil);
    const auto cw = crofton_weights(offs, hstep);
    for (int iy = 0; iy < sp.ny; ++iy)
        for (int ix = 0; ix < sp.nx; ++ix) {
            for (size_t k = 0; k < offs.size(); ++k) {
                const int jx = ix + offs[k].dx, jy = iy + offs[k].dy;
                if (jx < 0 || jx >= sp.nx || jy < 0 || jy >= sp.ny) continue;
                const int a = sp.grid_index(ix, iy), b = sp.grid_index(jx, jy);
                sp.edge_i.push_back(std::min(a, b));
                sp.edge_j.push_back(std::max(a, b));
                sp.edge_len.push_back(hstep * std::hypot(offs[k].dx, offs[k].dy));
                sp.edge_crofton.push_back(cw[k]);
            }
        }
    sp.finalize();

    // Interface edges and distances.
    for (int e = 0; e < sp.edge_count(); ++e)
        if (rg.cls[sp.edge_i[e]] != rg.cls[sp.edge_j[e]]) rg.interface_edges.push_back(e);

    // Multi-source Dijkstra from interface endpoints; the 16-stencil graph
    // metric tracks the Euclidean one to about a percent, which is all the
    // collar machinery needs.
    rg.dist_to_interface.assign(n, 1e300);
    using QE = std::pair<double, int>;
    std::priority_queue<QE, std::vector<QE>, std::greater<QE>> pq;
    for (int e : rg.interface_edges) {
        for (int v : {sp.edge_i[e], sp.edge_j[e]}) {
            if (rg.dist_to_interface[v] > 0) { rg.dist_to_interface[v] = 0; pq.push({0.0, v}); }
        }
    }
    while (!pq.empty()) {
        auto [d, v] = pq.top(); pq.pop();
        if (d > rg.dist_to_interface[v]) continue;
        for (int it = sp.adj_off[v]; it < sp.adj_off[v + 1]; ++it) {
            const int w = sp.adj_node[it];
            const double nd = d + sp.edge_len[sp.adj_edge[it]];
            if (nd < rg.dist_to_interface[w]) { rg.dist_to_interface[w] = nd; pq.push({nd, w}); }
        }
    }
    return {std::move(sp), std::move(rg)};
}

BoundaryClassification classify_boundary(const Space& space, const std::vector<bool>& in_E,
                                         double r, double theta_tol) {
    if (space.is_grid() && r < 2.0 * space.h - 1e-12)
        throw std::invalid_argument("classify_boundary: r must be at least 2h");
    const int n = space.node_count();
    BoundaryClassification out;
    out.density.resize(n);
    for (int v = 0; v < n; ++v) {
        double inside = 0, total = 0;
        for (int w : space.ball(v, r)) {
            total += space.mu[w];
            if (in_E[w]) inside += space.mu[w];
        }
        const double d = total > 0 ? inside / total : 0.0;
        out.density[v] = d;
        if (d > 1.0 - theta_tol) out.interior.push_back(v);
        else if (d < theta_tol) out.exterior.push_back(v);
        else out.star_boundary.push_back(v);
    }
    return out;
}

double doubling_constant_estimate(const Space& space, double rmin, double rmax,
                                  int samples, uint64_t seed) {
    RngStream rng(seed, 0xD0B1);
    double worst = 0;
    const int n = space.node_count();
    for (int s = 0; s < samples; ++s) {
        const int v = static_cast<int>(rng.next_below(static_cast<uint64_t>(n)));
        const double r = rng.uniform(rmin, rmax);
        const double small = space.measure_of(space.ball(v, r));
        const double big = space.measure_of(space.ball(v, 2 * r));
        if (small > 0) worst = std::max(worst, big / small);
    }
    return worst;
}

std::vector<bool> alternating_sector_set(const Space& space, const Region& region, int n) {
    const auto ang = n_slit_angles(n);
    std::vector<bool> out(static_cast<size_t>(space.node_count()), false);
    for (int v = 0; v < space.node_count(); ++v) {
        if (region.cls[v] != NodeClass::Omega) continue;
        double a = std::atan2(space.py[v], space.px[v]);
        if (a < 0) a += 2 * kPi;
        for (size_t k = 0; k + 1 < ang.size(); k += 2)
            if (a > ang[k] && a < ang[k + 1]) { out[v] = true; break; }
    }
    return out;
}

std::string space_to_json(const Space& space, const Region& region) {
    nlohmann::json j;
    auto& nodes = j["nodes"] = nlohmann::json::array();
    for (int v = 0; v < space.node_count(); ++v)
        nodes.push_back({{"id", v}, {"x", space.px[v]}, {"y", space.py[v]},
                         {"mu", space.mu[v]}, {"rho", space.rho[v]}});
    auto& edges = j["edges"] = nlohmann::json::array();
    for (int e = 0; e < space.edge_count(); ++e)
        edges.push_back({{"i", space.edge_i[e]}, {"j", space.edge_j[e]},
                         {"len", space.edge_len[e]}, {"w", space.edge_crofton[e]}});
    j["region"] = {{"omega", region.omega}, {"exterior", region.exterior},
                   {"null", region.null_set}};
    return j.dump();
}

std::pair<Space, Region> space_from_json(const std::string& text) {
    const auto j = nlohmann::json::parse(text);
    Space sp;
    sp.stencil = StencilKind::Generic;
    const auto& nodes = j.at("nodes");
    const int n = static_cast<int>(nodes.size());
    sp.px.resize(n); sp.py.resize(n); sp.mu.resize(n); sp.rho.resize(n);
    for (const auto& nd : nodes) {
        const int id = nd.at("id").get<int>();
        if (id < 0 || id >= n) throw std::invalid_argument("space_from_json: bad node id");
        sp.px[id] = nd.at("x").get<double>();
        sp.py[id] = nd.at("y").get<double>();
        sp.mu[id] = nd.at("mu").get<double>();
        sp.rho[id] = nd.at("rho").get<double>();
    }
    for (const auto& ed : j.at("edges")) {
        const int a = ed.at("i").get<int>(), b = ed.at("j").get<int>();
        sp.edge_i.push_back(std::min(a, b));
        sp.edge_j.push_back(std::max(a, b));
        sp.edge_len.push_back(ed.at("len").get<double>());
        sp.edge_crofton.push_back(ed.at("w").get<double>());
    }
    sp.finalize();

    Region rg;
    rg.cls.assign(n, NodeClass::Exterior);
    for (int v : j.at("region").at("omega").get<std::vector<int>>()) rg.cls[v] = NodeClass::Omega;
    for (int v : j.at("region").at("null").get<std::vector<int>>()) rg.cls[v] = NodeClass::Null;
    for (int v = 0; v < n; ++v) {
        if (rg.cls[v] == NodeClass::Omega) rg.omega.push_back(v);
        else if (rg.cls[v] == NodeClass::Null) rg.null_set.push_back(v);
        else rg.exterior.push_back(v);
    }
    for (int e = 0; e < sp.edge_count(); ++e)
        if (rg.cls[sp.edge_i[e]] != rg.cls[sp.edge_j[e]]) rg.interface_edges.push_back(e);
    rg.dist_to_interface.assign(n, 0.0);
    return {std::move(sp), std::move(rg)};
}

} // namespace leastgrad
