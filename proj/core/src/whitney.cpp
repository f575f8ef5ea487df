#include "leastgrad/whitney.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "json.hpp"

namespace leastgrad {

Covering whitney_cover(const Space& s, const std::vector<bool>& U, double R) {
    if (s.is_grid() && R < 4.0 * s.h - 1e-12)
        throw std::invalid_argument("whitney_cover: scale must be at least 4h");
    const int n = s.node_count();
    std::vector<int> unodes;
    std::vector<int> boundary;  // complement nodes adjacent to U
    for (int v = 0; v < n; ++v)
        if (U[v]) unodes.push_back(v);
    if (unodes.empty()) throw std::invalid_argument("whitney_cover: U is empty");
    for (int e = 0; e < s.edge_count(); ++e) {
        const int i = s.edge_i[e], j = s.edge_j[e];
        if (U[i] && !U[j]) boundary.push_back(j);
        if (U[j] && !U[i]) boundary.push_back(i);
    }
    std::sort(boundary.begin(), boundary.end());
    boundary.erase(std::unique(boundary.begin(), boundary.end()), boundary.end());
    if (boundary.empty()) throw std::invalid_argument("whitney_cover: U has no complement");

    // Exact Euclidean distance to the complement's contact layer.
    std::vector<double> dist(static_cast<size_t>(n), 0.0);
    for (int v : unodes) {
        double best = 1e300;
        for (int b : boundary) {
            const double dx = s.px[v] - s.px[b], dy = s.py[v] - s.py[b];
            best = std::min(best, dx * dx + dy * dy);
        }
        dist[v] = std::sqrt(best);
    }

    auto radius_rule = [&](int v) { return std::min(dist[v] / 40.0, R); };

    Covering cov;
    cov.scale = R;
    cov.covered_mask.assign(static_cast<size_t>(n), false);

    // Farthest-point traversal: the next center maximizes the distance to the
    // chosen centers among uncovered nodes (first pick: deepest node).
    std::vector<double> dmin(static_cast<size_t>(n), 1e300);
    int remaining = static_cast<int>(unodes.size());
    while (remaining > 0) {
        int pick = -1;
        double best = -1;
        for (int v : unodes) {
            if (cov.covered_mask[v]) continue;
            const double score = cov.centers.empty() ? dist[v] : dmin[v];
            if (score > best + 1e-15 || (score > best - 1e-15 && (pick < 0 || v < pick))) {
                best = score;
                pick = v;
            }
        }
        const double r = radius_rule(pick);
        cov.centers.push_back(pick);
        cov.radii.push_back(r);
        std::vector<int> mem;
        if (r > 0)
            for (int w : s.ball(pick, r))
                if (U[w]) mem.push_back(w);
        if (mem.empty()) mem.push_back(pick);  // radius below resolution: singleton
        for (int w : mem)
            if (!cov.covered_mask[w]) { cov.covered_mask[w] = true; --remaining; }
        cov.members.push_back(std::move(mem));
        for (int v : unodes) {
            const double dx = s.px[v] - s.px[pick], dy = s.py[v] - s.py[pick];
            dmin[v] = std::min(dmin[v], std::hypot(dx, dy));
        }
    }

    // Property (3): intersecting 10-dilations need r_j <= 2 r_k. The radius
    // rule with unit dilation satisfies this identically; clamp and count if
    // numerical ties ever violate it.
    const int nb = static_cast<int>(cov.centers.size());
    for (int a = 0; a < nb; ++a)
        for (int b = 0; b < nb; ++b) {
            if (a == b) continue;
            const double d = std::hypot(s.px[cov.centers[a]] - s.px[cov.centers[b]],
                                        s.py[cov.centers[a]] - s.py[cov.centers[b]]);
            if (d < 10.0 * (cov.radii[a] + cov.radii[b]) &&
                cov.radii[a] > 2.0 * cov.radii[b] + 1e-15) {
                cov.radii[a] = 2.0 * cov.radii[b];
                ++cov.radius_repairs;
            }
        }

    // Max overlap of the 10-dilations.
    std::vector<int> overlap(static_cast<size_t>(n), 0);
    for (int b = 0; b < nb; ++b) {
        const double r10 = 10.0 * std::max(cov.radii[b], 1e-12);
        for (int v : s.ball(cov.centers[b], r10)) ++overlap[v];
    }
    cov.overlap_count = *std::max_element(overlap.begin(), overlap.end());
    return cov;
}

PartitionOfUnity partition_of_unity(const Space& s, const Covering& cover) {
    const int n = s.node_count();
    const int nb = static_cast<int>(cover.centers.size());
    PartitionOfUnity pou;
    pou.weights.resize(static_cast<size_t>(nb));
    std::vector<double> sum(static_cast<size_t>(n), 0.0);

    std::vector<std::vector<std::pair<int, double>>> raw(static_cast<size_t>(nb));
    for (int b = 0; b < nb; ++b) {
        const double r = std::max(cover.radii[b], 1e-300);
        const double reach = 2.0 * r;
        auto near = s.ball(cover.centers[b], std::max(reach, 1e-12));
        if (near.empty()) near.push_back(cover.centers[b]);
        bool self_included = false;
        for (int v : near) self_included |= (v == cover.centers[b]);
        if (!self_included) near.push_back(cover.centers[b]);
        for (int v : near) {
            const double d = std::hypot(s.px[v] - s.px[cover.centers[b]],
                                        s.py[v] - s.py[cover.centers[b]]);
            const double outside = std::max(0.0, d - cover.radii[b]);
            const double tent = std::max(0.0, 1.0 - outside / r);
            if (tent > 0) {
                raw[b].push_back({v, tent});
                sum[v] += tent;
            }
        }
    }
    pou.node_terms.resize(static_cast<size_t>(n));
    for (int b = 0; b < nb; ++b)
        for (auto& [v, tent] : raw[b]) {
            if (!cover.covered_mask[v]) continue;  // partition defined on the covered set
            if (sum[v] <= 0)
                throw std::runtime_error("partition_of_unity: covered node " + std::to_string(v) +
                                         " received zero weight");
            const double w = tent / sum[v];
            pou.weights[b].push_back({v, w});
            pou.node_terms[v].push_back({b, w});
        }

    // Measured Lipschitz constants over incident edges.
    pou.lipschitz_per_ball.assign(static_cast<size_t>(nb), 0.0);
    std::vector<double> phi(static_cast<size_t>(n), 0.0);
    for (int b = 0; b < nb; ++b) {
        for (auto& [v, w] : pou.weights[b]) phi[v] = w;
        double lip = 0;
        for (auto& [v, w] : pou.weights[b]) {
            for (int it = s.adj_off[v]; it < s.adj_off[v + 1]; ++it) {
                const int u = s.adj_node[it];
                if (!cover.covered_mask[u] || !cover.covered_mask[v]) continue;
                lip = std::max(lip, std::abs(phi[v] - phi[u]) / s.edge_len[s.adj_edge[it]]);
            }
        }
        pou.lipschitz_per_ball[b] = lip;
        for (auto& [v, w] : pou.weights[b]) phi[v] = 0;
    }
    return pou;
}

ConvolutionResult discrete_convolution(const Space& s, const ScalarField& u,
                                       const Covering& cover, const PartitionOfUnity& pou) {
    const int nb = static_cast<int>(cover.centers.size());
    ConvolutionResult out;
    out.field = u;

    double xmin = 1e300, xmax = -1e300, ymin = 1e300, ymax = -1e300;
    for (int v = 0; v < s.node_count(); ++v) {
        xmin = std::min(xmin, s.px[v]); xmax = std::max(xmax, s.px[v]);
        ymin = std::min(ymin, s.py[v]); ymax = std::max(ymax, s.py[v]);
    }

    std::vector<double> avg(static_cast<size_t>(nb), 0.0);
    for (int b = 0; b < nb; ++b) {
        const double r5 = 5.0 * std::max(cover.radii[b], 1e-12);
        const double cx = s.px[cover.centers[b]], cy = s.py[cover.centers[b]];
        if (cx - r5 < xmin || cx + r5 > xmax || cy - r5 < ymin || cy + r5 > ymax)
            out.clipped.push_back(b);
        double mass = 0, acc = 0;
        auto nodes = s.ball(cover.centers[b], r5);
        if (nodes.empty()) nodes.push_back(cover.centers[b]);
        for (int v : nodes) { mass += s.mu[v]; acc += s.mu[v] * u[v]; }
        avg[b] = acc / mass;
    }
    for (int v = 0; v < s.node_count(); ++v) {
        if (!cover.covered_mask[v]) continue;
        double val = 0;
        for (auto& [b, w] : pou.node_terms[v]) val += w * avg[b];
        out.field[v] = val;
    }
    return out;
}

DcBoundsReport verify_dc_bounds(const Space& s, const ScalarField& u, const Covering& cover,
                                const PartitionOfUnity& pou, const std::vector<bool>& U) {
    const int n = s.node_count();
    const int nb = static_cast<int>(cover.centers.size());
    DcBoundsReport rep;

    const ConvolutionResult conv = discrete_convolution(s, u, cover, pou);
    const ScalarField& v = conv.field;

    // Partition exactness.
    for (int x = 0; x < n; ++x) {
        if (!cover.covered_mask[x]) continue;
        double sum = 0;
        for (auto& [b, w] : pou.node_terms[x]) sum += w;
        rep.partition_defect = std::max(rep.partition_defect, std::abs(sum - 1.0));
    }

    // Nodewise Lip of the convolution (difference quotients inside the cover).
    std::vector<double> lipv(static_cast<size_t>(n), 0.0);
    for (int e = 0; e < s.edge_count(); ++e) {
        const int i = s.edge_i[e], j = s.edge_j[e];
        if (!cover.covered_mask[i] || !cover.covered_mask[j]) continue;
        const double q = std::abs(v[i] - v[j]) / s.edge_len[e];
        lipv[i] = std::max(lipv[i], q);
        lipv[j] = std::max(lipv[j], q);
    }

    // Covering functional sum_j chi_{B_j}(x) TV(u, 10B_j) / mu(B_j).
    std::vector<double> bound(static_cast<size_t>(n), 0.0);
    for (int b = 0; b < nb; ++b) {
        const double r10 = 10.0 * std::max(cover.radii[b], 1e-12);
        const auto window = s.ball(cover.centers[b], r10);
        std::vector<bool> inw(static_cast<size_t>(n), false);
        for (int w : window) inw[w] = true;
        double tv = 0;
        for (int w : window)
            for (int it = s.adj_off[w]; it < s.adj_off[w + 1]; ++it) {
                const int z = s.adj_node[it];
                if (z < w || !inw[z]) continue;
                const int e = s.adj_edge[it];
                tv += edge_tv_weight(s, e, WeightRule::Average, nullptr) * std::abs(u[w] - u[z]);
            }
        double mass = 0;
        for (int w : cover.members[b]) mass += s.mu[w];
        const double contrib = tv / std::max(mass, 1e-300);
        for (int w : cover.members[b]) bound[w] += contrib;
    }

    double cbest = 0;
    for (int x = 0; x < n; ++x) {
        if (!cover.covered_mask[x]) continue;
        if (bound[x] > 0) cbest = std::max(cbest, lipv[x] / bound[x]);
        else if (lipv[x] > 1e-12) ++rep.uncontrolled_nodes;
    }
    rep.lip_constant = cbest;
    rep.pointwise_ok = rep.uncontrolled_nodes == 0;

    double lip_integral = 0;
    for (int x = 0; x < n; ++x)
        if (cover.covered_mask[x]) lip_integral += lipv[x] * s.mu[x];
    rep.lip_integral = lip_integral;
    rep.tv_u = total_variation(s, u, EdgeSelection::within(s, U));
    rep.integral_constant = rep.tv_u > 0 ? lip_integral / rep.tv_u : 0.0;
    return rep;
}

std::string covering_to_json(const Covering& cover) {
    nlohmann::json j;
    auto& balls = j["balls"] = nlohmann::json::array();
    for (size_t b = 0; b < cover.centers.size(); ++b)
        balls.push_back({{"center", cover.centers[b]},
                         {"r", cover.radii[b]},
                         {"members", cover.members[b]}});
    return j.dump();
}

} // namespace leastgrad
