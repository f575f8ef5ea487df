#include "leastgrad/tv_problem.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace leastgrad {

namespace {

/// prox_{tau g}(x) for g(v) = sum_k a_k |v - b_k| + box indicator, with the
/// AbsTerm list sorted by breakpoint. The subgradient is monotone, so a single
/// sweep over the breakpoints locates the root.
double prox_unary(double x, double tau, const std::vector<TvProblem::AbsTerm>& terms,
                  double lo, double hi) {
    double slope = 0;  // sum of -a_k (to the left of all breakpoints)
    for (const auto& t : terms) slope -= t.a;
    double prev = lo;
    for (size_t k = 0; k <= terms.size(); ++k) {
        const double right = (k < terms.size()) ? terms[k].b : hi;
        // On (prev, right) the minimizer candidate solves (v-x)/tau + slope = 0.
        const double cand = x - tau * slope;
        if (cand >= prev && cand <= right) return std::clamp(cand, lo, hi);
        if (cand < prev) return std::clamp(prev, lo, hi);
        if (k < terms.size()) {
            prev = terms[k].b;
            slope += 2 * terms[k].a;
        }
    }
    return std::clamp(hi, lo, hi);
}

/// Boxed conjugate g*(z) = max_{v in [lo,hi]} (z v - g(v)); the max of a
/// concave piecewise-linear function is attained at a breakpoint or endpoint.
double boxed_conjugate(double z, const std::vector<TvProblem::AbsTerm>& terms,
                       double lo, double hi) {
    auto g = [&](double v) {
        double acc = 0;
        for (const auto& t : terms) acc += t.a * std::abs(v - t.b);
        return acc;
    };
    double best = std::max(z * lo - g(lo), z * hi - g(hi));
    for (const auto& t : terms) {
        if (t.b >= lo && t.b <= hi) best = std::max(best, z * t.b - g(t.b));
    }
    return best;
}

} // namespace

ConvexSolution solve_pdhg(const TvProblem& p, const ConvexOptions& opts) {
    TvProblem q = p;
    const bool has_unary = q.finalize_box();
    ConvexSolution sol;
    if (!has_unary) {
        sol.v.assign(static_cast<size_t>(p.n), 0.0);
        sol.energy = p.objective(sol.v);
        return sol;
    }
    const double lo = q.lo, hi = q.hi;
    const int n = p.n;
    const int m = static_cast<int>(p.edges.size());

    // Sorted unary lists for the prox sweep.
    std::vector<std::vector<TvProblem::AbsTerm>> unary = p.unary;
    for (auto& terms : unary)
        std::sort(terms.begin(), terms.end(),
                  [](const TvProblem::AbsTerm& a, const TvProblem::AbsTerm& b) { return a.b < b.b; });

    // Diagonal preconditioning (alpha = 1): tau_i = 1/sum_e |K_ei|, sigma_e = 1/sum_i |K_ei|.
    std::vector<double> tau(static_cast<size_t>(n), 0.0), sigma(static_cast<size_t>(m));
    for (int e = 0; e < m; ++e) {
        tau[p.edges[e].i] += p.edges[e].c;
        tau[p.edges[e].j] += p.edges[e].c;
        sigma[e] = 1.0 / (2.0 * p.edges[e].c);
    }
    for (int i = 0; i < n; ++i) tau[i] = 1.0 / std::max(tau[i], 1e-12);

    // Warm start at the unary minimizer (weighted median), dual at zero.
    std::vector<double> v(static_cast<size_t>(n)), vbar, y(static_cast<size_t>(m), 0.0);
    for (int i = 0; i < n; ++i)
        v[i] = prox_unary(0.5 * (lo + hi), 1e9, unary[static_cast<size_t>(i)], lo, hi);
    vbar = v;

    std::vector<double> kty(static_cast<size_t>(n));
    double primal = p.objective(v);
    sol.converged = false;
    int it = 0;
    for (; it < opts.max_iterations; ++it) {
        // Dual ascent with projection onto |y_e| <= 1 (TV written as c_e (Dv) y).
        for (int e = 0; e < m; ++e) {
            const auto& ed = p.edges[e];
            const double z = y[e] + sigma[e] * ed.c * (vbar[ed.i] - vbar[ed.j]);
            y[e] = std::clamp(z, -1.0, 1.0);
        }
        std::fill(kty.begin(), kty.end(), 0.0);
        for (int e = 0; e < m; ++e) {
            const auto& ed = p.edges[e];
            const double cy = ed.c * y[e];
            kty[ed.i] += cy;
            kty[ed.j] -= cy;
        }
        for (int i = 0; i < n; ++i) {
            const double x = v[i] - tau[i] * kty[i];
            const double vn = prox_unary(x, tau[i], unary[static_cast<size_t>(i)], lo, hi);
            vbar[i] = 2.0 * vn - v[i];
            v[i] = vn;
        }
        if ((it + 1) % opts.gap_check_interval == 0) {
            primal = p.objective(v);
            double dual = p.constant;
            for (int i = 0; i < n; ++i)
                dual -= boxed_conjugate(-kty[i], unary[static_cast<size_t>(i)], lo, hi);
            const double gap = primal - dual;
            sol.gap = gap;
            if (gap <= opts.gap_tol * std::max(1.0, std::abs(primal))) {
                sol.converged = true;
                break;
            }
        }
    }
    sol.v = std::move(v);
    sol.energy = primal;
    sol.iterations = it + 1;
    return sol;
}

} // namespace leastgrad
