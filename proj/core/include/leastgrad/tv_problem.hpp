#pragma once

#include <string>
#include <vector>

#include "leastgrad/config.hpp"

namespace leastgrad {

/// Convex problem class shared by the perimeter estimators and the p=1
/// Dirichlet solvers:
///
///   minimize  sum_e c_e |v_i - v_j|  +  sum_i sum_k a_ik |v_i - b_ik|
///   over      v in [lo, hi]^n.
///
/// Every objective in this library is of this form: fidelity terms are
/// a = mu_i/tau against b = chi_E, fixed-neighbor terms are a = c_e * rho
/// against b = f_j. The box is the breakpoint hull; clamping into it never
/// increases the objective, so it does not change minimizers.
struct TvProblem {
    struct PairTerm { int i, j; double c; };
    struct AbsTerm { double a, b; };

    int n = 0;
    std::vector<PairTerm> edges;
    std::vector<std::vector<AbsTerm>> unary;  // size n
    double lo = 0, hi = 0;
    double constant = 0;  // objective offset from eliminated fixed-fixed terms

    void init(int nvars) {
        n = nvars;
        unary.assign(static_cast<size_t>(nvars), {});
    }
    void add_edge(int i, int j, double c) {
        if (c > 0) edges.push_back({i, j, c});
    }
    void add_abs(int i, double a, double b) {
        if (a > 0) unary[static_cast<size_t>(i)].push_back({a, b});
    }
    /// Sets [lo,hi] to the hull of all unary breakpoints. Returns false when no
    /// unary term exists anywhere (objective minimized by any constant field).
    bool finalize_box();

    double objective(const std::vector<double>& v) const;
};

enum class ConvexBackend { MinCutParametric, FirstOrderConvex };

struct ConvexOptions {
    ConvexBackend backend = ConvexBackend::MinCutParametric;
    double gap_tol = default_tolerances().gap_tol;  // relative to max(1,|energy|)
    int max_iterations = 400000;                    // first-order budget
    int gap_check_interval = 32;
};

struct ConvexSolution {
    std::vector<double> v;
    double energy = 0;
    double gap = 0;  // certified duality gap (0 for the exact min-cut backend)
    int iterations = 0;
    bool converged = true;
};

/// Exact solver: threshold decomposition into nested minimum cuts
/// (divide-and-conquer over the breakpoint intervals, Dinic max-flow).
ConvexSolution solve_min_cut(const TvProblem& p);

/// First-order primal-dual solver (diagonally preconditioned, over-relaxed)
/// with a duality-gap certificate computed against the boxed conjugates.
ConvexSolution solve_pdhg(const TvProblem& p, const ConvexOptions& opts);

inline ConvexSolution solve_tv_problem(const TvProblem& p, const ConvexOptions& opts) {
    return opts.backend == ConvexBackend::MinCutParametric ? solve_min_cut(p)
                                                           : solve_pdhg(p, opts);
}

} // namespace leastgrad
