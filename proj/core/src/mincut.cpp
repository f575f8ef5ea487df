#include "leastgrad/tv_problem.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace leastgrad {

bool TvProblem::finalize_box() {
    bool any = false;
    lo = std::numeric_limits<double>::infinity();
    hi = -std::numeric_limits<double>::infinity();
    for (const auto& terms : unary)
        for (const auto& t : terms) {
            lo = std::min(lo, t.b);
            hi = std::max(hi, t.b);
            any = true;
        }
    if (!any) { lo = hi = 0; }
    return any;
}

double TvProblem::objective(const std::vector<double>& v) const {
    double acc = constant;
    for (const auto& e : edges) acc += e.c * std::abs(v[e.i] - v[e.j]);
    for (int i = 0; i < n; ++i)
        for (const auto& t : unary[static_cast<size_t>(i)]) acc += t.a * std::abs(v[i] - t.b);
    return acc;
}

namespace {

/// Dinic max-flow on doubles. Nodes 0..n-1 plus source n and sink n+1.
class Dinic {
public:
    explicit Dinic(int n) : n_(n + 2), head_(n + 2, -1), level_(n + 2), iter_(n + 2) {}

    int source() const { return n_ - 2; }
    int sink() const { return n_ - 1; }

    void add_arc(int a, int b, double cap_ab, double cap_ba) {
        to_.push_back(b); cap_.push_back(cap_ab); next_.push_back(head_[a]);
        head_[a] = static_cast<int>(to_.size()) - 1;
        to_.push_back(a); cap_.push_back(cap_ba); next_.push_back(head_[b]);
        head_[b] = static_cast<int>(to_.size()) - 1;
    }

    double run(double eps) {
        double flow = 0;
        while (bfs(eps)) {
            iter_ = head_;
            double f;
            while ((f = dfs(source(), std::numeric_limits<double>::infinity(), eps)) > 0)
                flow += f;
        }
        return flow;
    }

    /// Minimal min-cut source side after run(): nodes reachable in the residual.
    std::vector<bool> source_side(double eps) const {
        std::vector<bool> vis(n_, false);
        std::vector<int> stack{source()};
        vis[source()] = true;
        while (!stack.empty()) {
            const int v = stack.back(); stack.pop_back();
            for (int a = head_[v]; a >= 0; a = next_[a])
                if (cap_[a] > eps && !vis[to_[a]]) { vis[to_[a]] = true; stack.push_back(to_[a]); }
        }
        return vis;
    }

private:
    bool bfs(double eps) {
        std::fill(level_.begin(), level_.end(), -1);
        std::vector<int> q{source()};
        level_[source()] = 0;
        for (size_t qi = 0; qi < q.size(); ++qi) {
            const int v = q[qi];
            for (int a = head_[v]; a >= 0; a = next_[a])
                if (cap_[a] > eps && level_[to_[a]] < 0) {
                    level_[to_[a]] = level_[v] + 1;
                    q.push_back(to_[a]);
                }
        }
        return level_[sink()] >= 0;
    }

    double dfs(int v, double limit, double eps) {
        if (v == sink()) return limit;
        for (int& a = iter_[v]; a >= 0; a = next_[a]) {
            const int w = to_[a];
            if (cap_[a] > eps && level_[w] == level_[v] + 1) {
                const double f = dfs(w, std::min(limit, cap_[a]), eps);
                if (f > 0) {
                    cap_[a] -= f;
                    cap_[a ^ 1] += f;
                    return f;
                }
            }
        }
        return 0;
    }

    int n_;
    std::vector<int> head_, next_, to_;
    std::vector<double> cap_;
    std::vector<int> level_, iter_;
};

/// Threshold decomposition state. Values land on breakpoints; the divide and
/// conquer preserves the nesting of the minimal level sets, so each node is
/// touched by O(log #breakpoints) cuts.
struct ThresholdSolver {
    const TvProblem& p;
    const std::vector<double>& bps;
    std::vector<double> v;
    // adjacency over the variable graph
    std::vector<int> off, nbr, eid;
    double cap_eps;

    ThresholdSolver(const TvProblem& prob, const std::vector<double>& breakpoints)
        : p(prob), bps(breakpoints), v(static_cast<size_t>(prob.n), breakpoints.front()) {
        off.assign(static_cast<size_t>(p.n) + 1, 0);
        for (const auto& e : p.edges) { ++off[e.i + 1]; ++off[e.j + 1]; }
        for (int i = 0; i < p.n; ++i) off[i + 1] += off[i];
        nbr.resize(2 * p.edges.size());
        eid.resize(2 * p.edges.size());
        std::vector<int> cur(off.begin(), off.end() - 1);
        for (size_t k = 0; k < p.edges.size(); ++k) {
            const auto& e = p.edges[k];
            nbr[cur[e.i]] = e.j; eid[cur[e.i]++] = static_cast<int>(k);
            nbr[cur[e.j]] = e.i; eid[cur[e.j]++] = static_cast<int>(k);
        }
        double cmax = 1e-12;
        for (const auto& e : p.edges) cmax = std::max(cmax, e.c);
        for (const auto& terms : p.unary)
            for (const auto& t : terms) cmax = std::max(cmax, t.a);
        cap_eps = 1e-13 * cmax;
    }

    /// Right derivative of the unary sum at threshold t.
    double slope(int i, double t) const {
        double s = 0;
        for (const auto& term : p.unary[static_cast<size_t>(i)])
            s += (t >= term.b) ? term.a : -term.a;
        return s;
    }

    // Solves intervals [mlo, mhi] (between bps[m] and bps[m+1]) on `nodes`.
    // Entry invariant: every node outside `nodes` has a final value outside
    // (bps[mlo], bps[mhi+1]).
    void solve(int mlo, int mhi, std::vector<int>& nodes) {
        if (nodes.empty()) return;
        if (mlo > mhi) return;
        const int mid = mlo + (mhi - mlo) / 2;
        const double t = 0.5 * (bps[mid] + bps[mid + 1]);

        std::vector<int> local(static_cast<size_t>(p.n), -1);
        for (size_t k = 0; k < nodes.size(); ++k) local[nodes[k]] = static_cast<int>(k);

        Dinic g(static_cast<int>(nodes.size()));
        const int src = g.source(), snk = g.sink();
        for (size_t k = 0; k < nodes.size(); ++k) {
            const int i = nodes[k];
            double to_sink = 0, from_src = 0;  // paid when i in S / not in S
            const double s = slope(i, t);
            if (s >= 0) to_sink += s; else from_src -= s;
            for (int a = off[i]; a < off[i + 1]; ++a) {
                const int j = nbr[a];
                if (local[j] >= 0) continue;  // handled as a pair arc below
                const double c = p.edges[static_cast<size_t>(eid[a])].c;
                if (v[j] > t) from_src += c;  // neighbor fixed high: pay c when i low
                else to_sink += c;            // neighbor fixed low: pay c when i high
            }
            if (from_src > 0) g.add_arc(src, static_cast<int>(k), from_src, 0);
            if (to_sink > 0) g.add_arc(static_cast<int>(k), snk, to_sink, 0);
        }
        for (size_t k = 0; k < p.edges.size(); ++k) {
            const auto& e = p.edges[k];
            if (local[e.i] >= 0 && local[e.j] >= 0 && e.i < e.j)
                g.add_arc(local[e.i], local[e.j], e.c, e.c);
        }
        g.run(cap_eps);
        const auto side = g.source_side(cap_eps);

        std::vector<int> high, low;
        for (size_t k = 0; k < nodes.size(); ++k)
            (side[k] ? high : low).push_back(nodes[k]);
        for (int i : high) v[i] = bps[static_cast<size_t>(mid) + 1];
        // low nodes keep their current (lower) values; deeper recursion refines.
        solve(mid + 1, mhi, high);
        solve(mlo, mid - 1, low);
    }
};

} // namespace

ConvexSolution solve_min_cut(const TvProblem& p) {
    ConvexSolution sol;
    TvProblem q = p;  // local copy to derive the box
    if (!q.finalize_box()) {
        sol.v.assign(static_cast<size_t>(p.n), 0.0);
        sol.energy = p.objective(sol.v);
        return sol;
    }
    std::vector<double> bps;
    for (const auto& terms : q.unary)
        for (const auto& t : terms) bps.push_back(t.b);
    std::sort(bps.begin(), bps.end());
    bps.erase(std::unique(bps.begin(), bps.end()), bps.end());

    if (bps.size() == 1) {
        sol.v.assign(static_cast<size_t>(p.n), bps[0]);
        sol.energy = p.objective(sol.v);
        return sol;
    }

    ThresholdSolver ts(p, bps);
    std::vector<int> all(static_cast<size_t>(p.n));
    for (int i = 0; i < p.n; ++i) all[i] = i;
    ts.solve(0, static_cast<int>(bps.size()) - 2, all);

    sol.v = std::move(ts.v);
    sol.energy = p.objective(sol.v);
    sol.gap = 0;
    sol.iterations = static_cast<int>(bps.size()) - 1;
    return sol;
}

} // namespace leastgrad
