#include "leastgrad/dirichlet.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <stdexcept>

namespace leastgrad {

namespace {

const double kNullThresh = default_tolerances().null_density_threshold;

std::vector<bool> omega_mask(const Space& s, const Region& region) {
    std::vector<bool> m(static_cast<size_t>(s.node_count()), false);
    for (int v : region.omega) m[v] = true;
    return m;
}

/// Interior-side density of an interface edge; falls back to the average for
/// edges with no omega endpoint (null-exterior contacts carry no trace term).
double interior_density(const Space& s, const Region& region, int e) {
    const int i = s.edge_i[e], j = s.edge_j[e];
    if (region.in_omega(i)) return s.effective_density(i, j, kNullThresh);
    if (region.in_omega(j)) return s.effective_density(j, i, kNullThresh);
    return 0.0;
}

} // namespace

double trace_jump_energy(const Space& s, const Region& region, const ScalarField& v,
                         const ScalarField& f) {
    double acc = 0;
    for (int e : region.interface_edges) {
        const int i = s.edge_i[e], j = s.edge_j[e];
        int in = -1, out = -1;
        if (region.in_omega(i)) { in = i; out = j; }
        else if (region.in_omega(j)) { in = j; out = i; }
        else continue;
        acc += s.edge_crofton[e] * interior_density(s, region, e) * std::abs(v[in] - f[out]);
    }
    return acc;
}

double energy_T(const Space& s, const Region& region, const ScalarField& v,
                const ScalarField& f) {
    const auto om = omega_mask(s, region);
    return total_variation(s, v, EdgeSelection::within(s, om)) + trace_jump_energy(s, region, v, f);
}

double energy_B(const Space& s, const Region& region, const ScalarField& v,
                const ScalarField& f) {
    const auto om = omega_mask(s, region);
    double acc = 0;
    for (int e = 0; e < s.edge_count(); ++e) {
        const int i = s.edge_i[e], j = s.edge_j[e];
        const bool oi = om[i], oj = om[j];
        if (!oi && !oj) continue;
        const double a = oi ? v[i] : f[i];
        const double b = oj ? v[j] : f[j];
        const WeightRule rule = (oi != oj) ? WeightRule::MinSide : WeightRule::Average;
        acc += edge_tv_weight(s, e, rule, nullptr, kNullThresh) * std::abs(a - b);
    }
    return acc;
}

namespace {

DirichletSolution solve_variant(const Space& s, const Region& region, const ScalarField& f,
                                DirichletVariant variant, const ConvexOptions& opts) {
    if (region.omega.empty()) throw std::invalid_argument("dirichlet: empty omega");
    const auto om = omega_mask(s, region);

    std::vector<int> var_of(static_cast<size_t>(s.node_count()), -1);
    for (size_t k = 0; k < region.omega.size(); ++k) var_of[region.omega[k]] = static_cast<int>(k);

    TvProblem p;
    p.init(static_cast<int>(region.omega.size()));
    bool has_interface = false;
    for (int e = 0; e < s.edge_count(); ++e) {
        const int i = s.edge_i[e], j = s.edge_j[e];
        const bool oi = om[i], oj = om[j];
        if (oi && oj) {
            p.add_edge(var_of[i], var_of[j],
                       edge_tv_weight(s, e, WeightRule::Average, nullptr, kNullThresh));
        } else if (oi || oj) {
            has_interface = true;
            const int in = oi ? i : j, out = oi ? j : i;
            const double w = variant == DirichletVariant::T
                                 ? s.edge_crofton[e] * interior_density(s, region, e)
                                 : edge_tv_weight(s, e, WeightRule::MinSide, nullptr, kNullThresh);
            p.add_abs(var_of[in], w, f[out]);
        }
    }

    DirichletSolution sol;
    if (!has_interface)
        sol.report.notes.push_back("empty interface: unconstrained TV minimization");

    const ConvexSolution cs = solve_tv_problem(p, opts);
    sol.field = f;
    for (size_t k = 0; k < region.omega.size(); ++k) sol.field[region.omega[k]] = cs.v[k];
    sol.report.residual = cs.gap;
    sol.report.iterations = cs.iterations;
    sol.report.converged = cs.converged;
    if (variant == DirichletVariant::T) {
        sol.report.boundary_term = trace_jump_energy(s, region, sol.field, f);
        sol.report.tv = total_variation(s, sol.field, EdgeSelection::within(s, om));
        sol.report.energy = sol.report.tv + sol.report.boundary_term;
    } else {
        sol.report.energy = energy_B(s, region, sol.field, f);
        sol.report.tv = sol.report.energy;
    }
    return sol;
}

} // namespace

DirichletSolution solve_problem_T(const Space& s, const Region& region, const ScalarField& f,
                                  const ConvexOptions& opts) {
    return solve_variant(s, region, f, DirichletVariant::T, opts);
}

DirichletSolution solve_problem_B(const Space& s, const Region& region, const ScalarField& f,
                                  const ConvexOptions& opts) {
    return solve_variant(s, region, f, DirichletVariant::B, opts);
}

namespace {

PipelineResult run_pipeline(const Space& s, const Region& region, const ScalarField& f,
                            const std::vector<double>& widths,
                            const std::vector<double>& p_schedule, const SolverConfig& cfg,
                            bool outer) {
    if (widths.empty() || p_schedule.empty())
        throw std::invalid_argument("pipeline: empty schedule");
    for (size_t k = 0; k < widths.size(); ++k) {
        if (s.is_grid() && widths[k] < 2.0 * s.h - 1e-12)
            throw std::invalid_argument("pipeline: collar width below resolution (2h)");
        if (k > 0 && widths[k] >= widths[k - 1])
            throw std::invalid_argument("pipeline: widths must decrease");
    }

    const size_t stages = std::max(widths.size(), p_schedule.size());
    PipelineResult out;
    ScalarField warm = f;
    for (size_t k = 0; k < stages; ++k) {
        const double w = widths[std::min(k, widths.size() - 1)];
        const double p = p_schedule[std::min(k, p_schedule.size() - 1)];

        std::vector<bool> free_mask(static_cast<size_t>(s.node_count()), false);
        int free_count = 0;
        for (int v = 0; v < s.node_count(); ++v) {
            bool in;
            if (outer) {
                in = region.in_omega(v) ||
                     (region.cls[v] == NodeClass::Exterior && region.dist_to_interface[v] <= w);
            } else {
                in = region.in_omega(v) && region.dist_to_interface[v] > w;
            }
            free_mask[v] = in;
            free_count += in ? 1 : 0;
        }
        if (free_count == 0) throw std::invalid_argument("pipeline: approximant is empty");

        SolverConfig scfg = cfg;
        scfg.p = p;
        auto [u, rep] = solve_p_dirichlet_on(s, free_mask, f, scfg, &warm);
        const double stage_energy = outer ? energy_B(s, region, u, f) : energy_T(s, region, u, f);
        out.stage_energies.push_back(stage_energy);
        out.iterates.push_back(u);
        warm = std::move(u);
    }
    out.field = out.iterates.back();
    out.report.energy = out.stage_energies.back();
    out.report.tv = total_variation(s, out.field, EdgeSelection::within(s, omega_mask(s, region)));
    out.report.iterations = static_cast<int>(stages);
    return out;
}

} // namespace

PipelineResult outer_approximation_pipeline(const Space& s, const Region& region,
                                            const ScalarField& f,
                                            const std::vector<double>& shrink_widths,
                                            const std::vector<double>& p_schedule,
                                            const SolverConfig& cfg) {
    return run_pipeline(s, region, f, shrink_widths, p_schedule, cfg, /*outer=*/true);
}

PipelineResult inner_approximation_pipeline(const Space& s, const Region& region,
                                            const ScalarField& f,
                                            const std::vector<double>& grow_widths,
                                            const std::vector<double>& p_schedule,
                                            const SolverConfig& cfg) {
    return run_pipeline(s, region, f, grow_widths, p_schedule, cfg, /*outer=*/false);
}

namespace {

/// Distance to the omega-exterior interface only; null-set contacts excluded.
/// Distinguishes the weak zero-trace class, whose members keep free values
/// next to the null set.
std::vector<double> distance_to_exterior_interface(const Space& s, const Region& region) {
    std::vector<double> dist(static_cast<size_t>(s.node_count()), 1e300);
    using QE = std::pair<double, int>;
    std::priority_queue<QE, std::vector<QE>, std::greater<QE>> pq;
    for (int e : region.interface_edges) {
        const NodeClass a = region.cls[s.edge_i[e]], b = region.cls[s.edge_j[e]];
        const bool omega_ext = (a == NodeClass::Omega && b == NodeClass::Exterior) ||
                               (b == NodeClass::Omega && a == NodeClass::Exterior);
        if (!omega_ext) continue;
        for (int v : {s.edge_i[e], s.edge_j[e]})
            if (dist[v] > 0) { dist[v] = 0; pq.push({0.0, v}); }
    }
    while (!pq.empty()) {
        auto [d, v] = pq.top(); pq.pop();
        if (d > dist[v]) continue;
        for (int it = s.adj_off[v]; it < s.adj_off[v + 1]; ++it) {
            const double nd = d + s.edge_len[s.adj_edge[it]];
            const int w = s.adj_node[it];
            if (nd < dist[w]) { dist[w] = nd; pq.push({nd, w}); }
        }
    }
    return dist;
}

} // namespace

VerifierReport verify_least_gradient(const Space& s, const Region& region, const ScalarField& u,
                                     TestClass test_class, int trials, uint64_t seed,
                                     bool adversarial, const ConvexOptions& opts) {
    VerifierReport rep;
    rep.test_class = test_class;
    rep.trials = trials;

    const auto om = omega_mask(s, region);
    const EdgeSelection omega_edges = EdgeSelection::within(s, om);
    const double tv_u = total_variation(s, u, omega_edges);
    rep.slack = default_tolerances().verifier_slack_factor * opts.gap_tol * std::max(1.0, tv_u);

    const double reach = 3.0 * (s.is_grid() ? s.h : 0.0);
    const double damp_width = 8.0 * (s.is_grid() ? s.h : 0.1);
    std::vector<double> ext_dist;
    if (test_class == TestClass::WeakZeroTrace) ext_dist = distance_to_exterior_interface(s, region);

    // Nodes allowed to carry nonzero psi.
    std::vector<int> support;
    for (int v : region.omega) {
        const double d = test_class == TestClass::WeakZeroTrace ? ext_dist[v]
                                                                : region.dist_to_interface[v];
        if (test_class == TestClass::CompactSupport ? d > reach : true) support.push_back(v);
    }
    if (support.empty())
        throw std::invalid_argument("verify_least_gradient: omega too small for the test class");

    const double range = std::max(field_max(u) - field_min(u), 1e-12);
    double extent = 0;
    for (int v : region.omega)
        extent = std::max(extent, std::hypot(s.px[v], s.py[v]));
    extent = std::max(extent, 4 * reach + 1e-9);

    ScalarField perturbed = u;
    for (int t = 0; t < trials; ++t) {
        RngStream rng(seed, 0x7E57 + static_cast<uint64_t>(t));
        const int center = support[rng.next_below(support.size())];
        const double radius = rng.uniform(3.0 * s.h, 0.35 * extent);
        const double amp = (rng.next_u64() & 1 ? 1.0 : -1.0) * 0.5 * range * rng.uniform(0.25, 1.0);

        perturbed.values = u.values;
        for (int v : s.ball(center, radius)) {
            if (!om[v]) continue;
            const double rel = std::hypot(s.px[v] - s.px[center], s.py[v] - s.py[center]) / radius;
            double psi = amp * (1.0 - rel) * (1.0 - rel);
            switch (test_class) {
                case TestClass::CompactSupport:
                    if (region.dist_to_interface[v] <= reach) psi = 0;
                    break;
                case TestClass::ZeroTrace:
                    psi *= std::min(1.0, region.dist_to_interface[v] / damp_width);
                    break;
                case TestClass::WeakZeroTrace:
                    psi *= std::min(1.0, ext_dist[v] / damp_width);
                    break;
            }
            perturbed[v] += psi;
        }
        const double delta = total_variation(s, perturbed, omega_edges) - tv_u;
        rep.worst_delta = std::min(rep.worst_delta, delta);
    }

    if (adversarial) {
        // Exact minimization of TV(u+psi) over the class surrogate: psi free on
        // the support set, zero elsewhere.
        std::vector<bool> free_mask(static_cast<size_t>(s.node_count()), false);
        for (int v : support) {
            const double d = test_class == TestClass::CompactSupport
                                 ? region.dist_to_interface[v]
                                 : (test_class == TestClass::WeakZeroTrace ? ext_dist[v]
                                                                           : region.dist_to_interface[v]);
            if (test_class == TestClass::CompactSupport ? d > reach : d > damp_width)
                free_mask[v] = true;
        }
        std::vector<int> var_of(static_cast<size_t>(s.node_count()), -1);
        std::vector<int> vars;
        for (int v = 0; v < s.node_count(); ++v)
            if (free_mask[v]) { var_of[v] = static_cast<int>(vars.size()); vars.push_back(v); }
        if (!vars.empty()) {
            TvProblem p;
            p.init(static_cast<int>(vars.size()));
            double fixed_part = 0;  // omega edges not touching any variable
            for (int e : omega_edges.edges) {
                const int i = s.edge_i[e], j = s.edge_j[e];
                const double w = edge_tv_weight(s, e, WeightRule::Average, nullptr, kNullThresh);
                if (var_of[i] >= 0 && var_of[j] >= 0) p.add_edge(var_of[i], var_of[j], w);
                else if (var_of[i] >= 0) p.add_abs(var_of[i], w, u[j]);
                else if (var_of[j] >= 0) p.add_abs(var_of[j], w, u[i]);
                else fixed_part += w * std::abs(u[i] - u[j]);
            }
            const ConvexSolution cs = solve_tv_problem(p, opts);
            ScalarField best = u;
            for (size_t k = 0; k < vars.size(); ++k) best[vars[k]] = cs.v[k];
            const double tv_best = total_variation(s, best, omega_edges);
            rep.adversarial_improvement = std::max(0.0, tv_u - tv_best);
            rep.adversarial_field = std::move(best);
            (void)fixed_part;
        }
    }

    rep.pass = rep.worst_delta >= -rep.slack && rep.adversarial_improvement <= rep.slack;
    return rep;
}

} // namespace leastgrad
