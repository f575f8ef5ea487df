#include "leastgrad/calculus.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace leastgrad {

double edge_tv_weight(const Space& s, int e, WeightRule rule, const Region* region,
                      double null_thresh) {
    const int i = s.edge_i[e], j = s.edge_j[e];
    const double a = s.effective_density(i, j, null_thresh);
    const double b = s.effective_density(j, i, null_thresh);
    double factor;
    switch (rule) {
        case WeightRule::Average: factor = 0.5 * (a + b); break;
        case WeightRule::MinSide: factor = std::min(a, b); break;
        case WeightRule::InteriorSide: {
            if (region == nullptr)
                throw std::invalid_argument("edge_tv_weight: InteriorSide needs a region");
            if (region->in_omega(i)) factor = a;
            else if (region->in_omega(j)) factor = b;
            else factor = 0.5 * (a + b);
            break;
        }
        default: factor = 0.5 * (a + b);
    }
    return s.edge_crofton[e] * factor;
}

EdgeSelection EdgeSelection::within(const Space& s, const std::vector<bool>& nodes) {
    EdgeSelection sel;
    for (int e = 0; e < s.edge_count(); ++e)
        if (nodes[s.edge_i[e]] && nodes[s.edge_j[e]]) sel.edges.push_back(e);
    return sel;
}

EdgeSelection EdgeSelection::touching(const Space& s, const std::vector<bool>& nodes) {
    EdgeSelection sel;
    for (int e = 0; e < s.edge_count(); ++e)
        if (nodes[s.edge_i[e]] || nodes[s.edge_j[e]]) sel.edges.push_back(e);
    return sel;
}

EdgeSelection EdgeSelection::all(const Space& s) {
    EdgeSelection sel;
    sel.edges.resize(static_cast<size_t>(s.edge_count()));
    for (int e = 0; e < s.edge_count(); ++e) sel.edges[e] = e;
    return sel;
}

double total_variation(const Space& s, const ScalarField& u, const EdgeSelection& sel,
                       WeightRule rule, const Region* region) {
    double acc = 0;
    for (int e : sel.edges)
        acc += edge_tv_weight(s, e, rule, region) * std::abs(u[s.edge_i[e]] - u[s.edge_j[e]]);
    return acc;
}

ScalarField gradient_magnitude(const Space& s, const ScalarField& u, GradientFlavor flavor,
                               std::vector<int>* isolated_nodes) {
    const int n = s.node_count();
    ScalarField g(n);
    g.flavor_tag = flavor == GradientFlavor::EdgeTV ? "edgeTV" : "nodeIsotropic";
    for (int v = 0; v < n; ++v) {
        const int deg = s.adj_off[v + 1] - s.adj_off[v];
        if (deg == 0) {
            if (isolated_nodes) isolated_nodes->push_back(v);
            g[v] = 0;
            continue;
        }
        if (flavor == GradientFlavor::EdgeTV) {
            double acc = 0;
            for (int it = s.adj_off[v]; it < s.adj_off[v + 1]; ++it) {
                const int e = s.adj_edge[it];
                acc += 0.5 * edge_tv_weight(s, e, WeightRule::Average, nullptr) *
                       std::abs(u[s.edge_i[e]] - u[s.edge_j[e]]);
            }
            g[v] = acc / s.mu[v];
        } else {
            // Least-squares affine fit over the stencil neighborhood.
            double sxx = 0, sxy = 0, syy = 0, bx = 0, by = 0;
            for (int it = s.adj_off[v]; it < s.adj_off[v + 1]; ++it) {
                const int w = s.adj_node[it];
                const double dx = s.px[w] - s.px[v], dy = s.py[w] - s.py[v];
                const double du = u[w] - u[v];
                sxx += dx * dx; sxy += dx * dy; syy += dy * dy;
                bx += dx * du; by += dy * du;
            }
            const double det = sxx * syy - sxy * sxy;
            if (std::abs(det) < 1e-300) {
                g[v] = deg > 0 ? std::abs(bx) / std::max(sxx, 1e-300) : 0.0;
                continue;
            }
            const double gx = (syy * bx - sxy * by) / det;
            const double gy = (sxx * by - sxy * bx) / det;
            g[v] = std::hypot(gx, gy);
        }
    }
    return g;
}

std::vector<double> exact_thresholds(const ScalarField& u) {
    std::vector<double> t(u.values);
    std::sort(t.begin(), t.end());
    t.erase(std::unique(t.begin(), t.end()), t.end());
    return t;
}

CoareaProfile coarea_profile(const Space& s, const ScalarField& u, const EdgeSelection& sel,
                             std::vector<double> thresholds, WeightRule rule,
                             const Region* region) {
    if (!std::is_sorted(thresholds.begin(), thresholds.end()))
        throw std::invalid_argument("coarea_profile: thresholds must be sorted");
    CoareaProfile prof;
    prof.thresholds = thresholds;

    // Cache edge weights once; both the profile and the quadrature reuse them.
    std::vector<double> w(sel.edges.size());
    for (size_t k = 0; k < sel.edges.size(); ++k)
        w[k] = edge_tv_weight(s, sel.edges[k], rule, region);

    auto cut_at = [&](double t) {
        double acc = 0;
        for (size_t k = 0; k < sel.edges.size(); ++k) {
            const int e = sel.edges[k];
            const bool a = u[s.edge_i[e]] > t, b = u[s.edge_j[e]] > t;
            if (a != b) acc += w[k];
        }
        return acc;
    };

    prof.perimeters.resize(thresholds.size());
    for (size_t k = 0; k < thresholds.size(); ++k) prof.perimeters[k] = cut_at(thresholds[k]);

    // Midpoint quadrature on the threshold grid. When the grid lists every
    // distinct value of u the level sets are constant between consecutive
    // thresholds and the sum is the exact layer-cake value.
    double integral = 0;
    for (size_t k = 0; k + 1 < thresholds.size(); ++k) {
        const double dt = thresholds[k + 1] - thresholds[k];
        if (dt <= 0) continue;
        integral += dt * cut_at(0.5 * (thresholds[k] + thresholds[k + 1]));
    }
    prof.integral = integral;
    return prof;
}

TraceResult interior_trace(const Space& s, const Region& region, const ScalarField& u,
                           int node, const std::vector<double>& radii, double trace_tol) {
    if (radii.size() < 2) throw std::invalid_argument("interior_trace: need at least two radii");
    for (size_t k = 1; k < radii.size(); ++k)
        if (radii[k] >= radii[k - 1])
            throw std::invalid_argument("interior_trace: radii must be decreasing");
    TraceResult out;
    for (double r : radii) {
        double mass = 0, acc = 0;
        for (int w : s.ball(node, r)) {
            if (!region.in_omega(w)) continue;
            mass += s.mu[w];
            acc += s.mu[w] * u[w];
        }
        if (mass <= 0) throw std::runtime_error("interior_trace: no interior mass at node " +
                                                std::to_string(node));
        out.averages.push_back(acc / mass);
    }
    // Half-ball averaging biases a Lipschitz field by O(r); Richardson in r
    // from the last two radii removes the leading term.
    const size_t k = out.averages.size() - 1;
    const double r1 = radii[k - 1], r2 = radii[k];
    const double t1 = out.averages[k - 1], t2 = out.averages[k];
    out.value = t2 + (t2 - t1) * r2 / (r1 - r2);
    out.converged = std::abs(t2 - t1) < trace_tol;
    return out;
}

ApproxLimits approx_limits(const Space& s, const ScalarField& u, int node,
                           const std::vector<double>& radii, double theta_tol, double jump_tol) {
    if (radii.empty()) throw std::invalid_argument("approx_limits: need at least one radius");
    const double r = *std::min_element(radii.begin(), radii.end());
    if (s.is_grid() && r < 2.0 * s.h - 1e-12)
        throw std::invalid_argument("approx_limits: radii must be at least 2h");

    const auto ball = s.ball(node, r);
    std::vector<std::pair<double, double>> vals;  // (value, measure)
    double total = 0;
    for (int w : ball) { vals.push_back({u[w], s.mu[w]}); total += s.mu[w]; }
    std::sort(vals.begin(), vals.end());

    // lower: largest t with mu({u < t}) <= theta_tol * mu(B);
    // upper: smallest t with mu({u > t}) <= theta_tol * mu(B).
    ApproxLimits out;
    double below = 0;
    out.lower = vals.front().first;
    for (const auto& [val, m] : vals) {
        if (below <= theta_tol * total) out.lower = val;
        else break;
        below += m;
    }
    double above = 0;
    out.upper = vals.back().first;
    for (auto it = vals.rbegin(); it != vals.rend(); ++it) {
        if (above <= theta_tol * total) out.upper = it->first;
        else break;
        above += it->second;
    }
    if (jump_tol < 0) {
        const double range = field_max(u) - field_min(u);
        jump_tol = default_tolerances().jump_tol_factor * range;
    }
    out.is_jump_node = (out.upper - out.lower) > jump_tol;
    return out;
}

void write_coarea_csv(const std::string& path, const CoareaProfile& prof) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("write_coarea_csv: cannot open " + path);
    out << "threshold,perimeter\n";
    char buf[96];
    for (size_t k = 0; k < prof.thresholds.size(); ++k) {
        std::snprintf(buf, sizeof(buf), "%.12g,%.12g\n", prof.thresholds[k], prof.perimeters[k]);
        out << buf;
    }
}

} // namespace leastgrad
