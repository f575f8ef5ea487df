#include "leastgrad/pharmonic.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

#include <Eigen/IterativeLinearSolvers>
#include <Eigen/SparseCore>

namespace leastgrad {

namespace {
constexpr double kPi = 3.14159265358979323846;
}

void SolverConfig::validate() const {
    if (!(p > 1.0)) throw std::invalid_argument("SolverConfig: p must exceed 1 (use the dirichlet module for p = 1)");
    if (epsilon_schedule.empty()) throw std::invalid_argument("SolverConfig: empty epsilon schedule");
    for (size_t k = 0; k < epsilon_schedule.size(); ++k) {
        if (epsilon_schedule[k] < 1e-12)
            throw std::invalid_argument("SolverConfig: epsilon below 1e-12");
        if (k > 0 && epsilon_schedule[k] >= epsilon_schedule[k - 1])
            throw std::invalid_argument("SolverConfig: epsilon schedule must decrease");
    }
    if (!(residual_tol > 0)) throw std::invalid_argument("SolverConfig: residual_tol must be positive");
}

double p_energy_normalization(double p) {
    // (pi/2) * average over directions of |cos|^p = (pi/2) G((p+1)/2) / (sqrt(pi) G(p/2+1)).
    return 0.5 * kPi * std::tgamma(0.5 * (p + 1)) / (std::sqrt(kPi) * std::tgamma(0.5 * p + 1.0));
}

double p_energy(const Space& s, const ScalarField& u, double p, const EdgeSelection& sel) {
    if (!(p >= 1.0)) throw std::invalid_argument("p_energy: p must be at least 1");
    double acc = 0;
    for (int e : sel.edges) {
        const double w = edge_tv_weight(s, e, WeightRule::Average, nullptr) * s.edge_len[e];
        const double t = std::abs(u[s.edge_i[e]] - u[s.edge_j[e]]) / s.edge_len[e];
        acc += w * std::pow(t, p);
    }
    return acc / p_energy_normalization(p);
}

namespace {

/// One p-Dirichlet solve: damped Newton on the epsilon-smoothed energy.
struct PSolver {
    const Space& s;
    const std::vector<bool>& free_nodes;
    double p;

    std::vector<int> var_of;   // node -> variable index (-1 fixed)
    std::vector<int> vars;     // variable -> node
    std::vector<int> edges;    // edges touching at least one variable
    std::vector<double> W;     // c_e * rho_avg * d_e per relevant edge
    std::vector<double> invd;  // 1/d_e

    PSolver(const Space& space, const std::vector<bool>& free_mask, double pexp)
        : s(space), free_nodes(free_mask), p(pexp) {
        const int n = s.node_count();
        var_of.assign(static_cast<size_t>(n), -1);
        for (int v = 0; v < n; ++v)
            if (free_nodes[v]) {
                var_of[v] = static_cast<int>(vars.size());
                vars.push_back(v);
            }
        for (int e = 0; e < s.edge_count(); ++e) {
            if (var_of[s.edge_i[e]] < 0 && var_of[s.edge_j[e]] < 0) continue;
            edges.push_back(e);
            W.push_back(edge_tv_weight(s, e, WeightRule::Average, nullptr) * s.edge_len[e]);
            invd.push_back(1.0 / s.edge_len[e]);
        }
    }

    double smoothed_energy(const std::vector<double>& u, double eps) const {
        double acc = 0;
        for (size_t k = 0; k < edges.size(); ++k) {
            const int e = edges[k];
            const double t = (u[s.edge_i[e]] - u[s.edge_j[e]]) * invd[k];
            acc += W[k] * std::pow(t * t + eps * eps, 0.5 * p);
        }
        return acc;
    }

    /// mu-normalized sup-norm of the energy gradient over the variables.
    double gradient(const std::vector<double>& u, double eps, std::vector<double>& g) const {
        g.assign(vars.size(), 0.0);
        for (size_t k = 0; k < edges.size(); ++k) {
            const int e = edges[k];
            const int i = s.edge_i[e], j = s.edge_j[e];
            const double t = (u[i] - u[j]) * invd[k];
            const double phi1 = p * t * std::pow(t * t + eps * eps, 0.5 * p - 1.0);
            const double gi = W[k] * phi1 * invd[k];
            if (var_of[i] >= 0) g[var_of[i]] += gi;
            if (var_of[j] >= 0) g[var_of[j]] -= gi;
        }
        double sup = 0;
        for (size_t k = 0; k < vars.size(); ++k)
            sup = std::max(sup, std::abs(g[k]) / s.mu[vars[k]]);
        return sup;
    }

    /// Newton iterations at fixed epsilon; returns the residual reached.
    /// Near the double-precision noise floor of the energy sum, step
    /// acceptance switches from the Armijo test to residual decrease; the
    /// stage stops once neither makes progress.
    double run_stage(std::vector<double>& u, double eps, double tol, int& iter_budget,
                     std::vector<double>& energy_log) const {
        std::vector<double> g;
        double res = gradient(u, eps, g);
        int stalls = 0;
        while (res > tol && iter_budget > 0 && stalls < 3) {
            --iter_budget;
            // Assemble the Hessian: per edge q = W phi''(t) / d^2, SPD.
            std::vector<Eigen::Triplet<double>> trip;
            trip.reserve(edges.size() * 4 + vars.size());
            for (size_t k = 0; k < edges.size(); ++k) {
                const int e = edges[k];
                const int i = s.edge_i[e], j = s.edge_j[e];
                const double t = (u[i] - u[j]) * invd[k];
                const double r2 = t * t + eps * eps;
                const double phi2 =
                    p * std::pow(r2, 0.5 * p - 2.0) * ((p - 1.0) * t * t + eps * eps);
                const double q = W[k] * phi2 * invd[k] * invd[k];
                const int a = var_of[i], b = var_of[j];
                if (a >= 0) trip.emplace_back(a, a, q);
                if (b >= 0) trip.emplace_back(b, b, q);
                if (a >= 0 && b >= 0) {
                    trip.emplace_back(a, b, -q);
                    trip.emplace_back(b, a, -q);
                }
            }
            Eigen::SparseMatrix<double> H(static_cast<int>(vars.size()),
                                          static_cast<int>(vars.size()));
            H.setFromTriplets(trip.begin(), trip.end());

            Eigen::VectorXd rhs(static_cast<int>(vars.size()));
            for (size_t k = 0; k < vars.size(); ++k) rhs[static_cast<int>(k)] = -g[k];

            Eigen::ConjugateGradient<Eigen::SparseMatrix<double>, Eigen::Lower | Eigen::Upper,
                                     Eigen::IncompleteCholesky<double>>
                cg;
            cg.setTolerance(1e-10);
            cg.setMaxIterations(1500);
            cg.compute(H);
            Eigen::VectorXd step = cg.solve(rhs);

            // Backtracking line search keeps the smoothed energy monotone, with
            // an allowance for the roundoff floor of the energy sum.
            const double e0 = smoothed_energy(u, eps);
            const double noise = 1e-13 * std::abs(e0);
            double alpha = 1.0;
            double gdotstep = 0;
            for (size_t k = 0; k < vars.size(); ++k) gdotstep += g[k] * step[static_cast<int>(k)];
            std::vector<double> trial(u);
            bool accepted = false;
            for (int ls = 0; ls < 24; ++ls) {
                for (size_t k = 0; k < vars.size(); ++k)
                    trial[vars[k]] = u[vars[k]] + alpha * step[static_cast<int>(k)];
                if (smoothed_energy(trial, eps) <= e0 + 1e-4 * alpha * gdotstep + noise) {
                    accepted = true;
                    break;
                }
                alpha *= 0.5;
            }
            if (!accepted) {
                // Energy differences have sunk into roundoff; take the full
                // Newton step when it still reduces the residual.
                for (size_t k = 0; k < vars.size(); ++k)
                    trial[vars[k]] = u[vars[k]] + step[static_cast<int>(k)];
            }
            std::vector<double> gt;
            const double res_t = gradient(trial, eps, gt);
            if (!accepted && res_t >= 0.9 * res) {
                ++stalls;
                continue;
            }
            u = trial;
            g.swap(gt);
            if (res_t >= 0.9999 * res) ++stalls;
            else stalls = 0;
            res = res_t;
            energy_log.push_back(smoothed_energy(u, eps));
        }
        return res;
    }
};

} // namespace

std::pair<ScalarField, EnergyReport> solve_p_dirichlet_on(const Space& s,
                                                          const std::vector<bool>& free_nodes,
                                                          const ScalarField& f,
                                                          const SolverConfig& cfg,
                                                          const ScalarField* init) {
    cfg.validate();
    for (double v : f.values)
        if (!std::isfinite(v)) throw std::invalid_argument("solve_p_dirichlet: boundary data not finite");
    bool any_fixed = false, any_free = false;
    for (int v = 0; v < s.node_count(); ++v) {
        if (free_nodes[v]) any_free = true;
        else any_fixed = true;
    }
    if (!any_free) throw std::invalid_argument("solve_p_dirichlet: empty free set");
    if (!any_fixed)
        throw std::invalid_argument("solve_p_dirichlet: exterior carries no measure (capacity surrogate fails)");

    PSolver solver(s, free_nodes, cfg.p);
    std::vector<double> u(f.values);
    if (init != nullptr) {
        for (int v = 0; v < s.node_count(); ++v)
            if (free_nodes[v]) u[v] = (*init)[v];
    }

    EnergyReport rep;
    int budget = cfg.max_iterations;
    double res = 0;
    for (size_t stage = 0; stage < cfg.epsilon_schedule.size(); ++stage) {
        const double eps = cfg.epsilon_schedule[stage];
        const bool last = stage + 1 == cfg.epsilon_schedule.size();
        // Intermediate stages only track the warm-start chain; full accuracy
        // is demanded at the final epsilon.
        const double tol = last ? cfg.residual_tol : std::max(cfg.residual_tol, 0.5 * eps);
        int stage_budget = std::min(budget, last ? std::max(8, cfg.max_iterations / 4)
                                                 : std::max(8, cfg.max_iterations / 12));
        const int before = stage_budget;
        res = solver.run_stage(u, eps, tol, stage_budget, rep.energy_iterates);
        budget -= before - stage_budget;
        if (budget <= 0 && res > cfg.residual_tol && last) break;
    }
    rep.iterations = cfg.max_iterations - budget;
    rep.residual = res;
    rep.converged = res <= cfg.residual_tol;
    if (!rep.converged)
        throw std::runtime_error("solve_p_dirichlet: no convergence within iteration budget (residual " +
                                 std::to_string(res) + ")");

    ScalarField out;
    out.values = std::move(u);
    rep.energy = p_energy(s, out, cfg.p, EdgeSelection::from_edges(solver.edges));
    rep.tv = total_variation(s, out, EdgeSelection::from_edges(solver.edges));
    return {std::move(out), std::move(rep)};
}

std::pair<ScalarField, EnergyReport> solve_p_dirichlet(const Space& s, const Region& region,
                                                       const ScalarField& f,
                                                       const SolverConfig& cfg) {
    std::vector<bool> free_mask(static_cast<size_t>(s.node_count()), false);
    for (int v : region.omega) free_mask[v] = true;
    double ext_measure = 0;
    for (int v : region.exterior) ext_measure += s.mu[v];
    if (!(ext_measure > 0))
        throw std::invalid_argument("solve_p_dirichlet: exterior measure must be positive");
    return solve_p_dirichlet_on(s, free_mask, f, cfg);
}

std::vector<double> default_p_schedule() { return {1.5, 1.25, 1.1, 1.05, 1.02, 1.01}; }

ContinuationResult continuation_p_to_1(const Space& s, const Region& region,
                                       const ScalarField& f, std::vector<double> p_schedule,
                                       const SolverConfig& cfg) {
    if (p_schedule.empty()) p_schedule = default_p_schedule();
    for (size_t k = 0; k < p_schedule.size(); ++k) {
        if (!(p_schedule[k] > 1.0) || p_schedule[k] > 2.0)
            throw std::invalid_argument("continuation: p schedule must lie in (1,2]");
        if (k > 0 && p_schedule[k] >= p_schedule[k - 1])
            throw std::invalid_argument("continuation: p schedule must decrease");
    }

    double omega_measure = 0;
    for (int v : region.omega) omega_measure += s.mu[v];

    std::vector<bool> in_omega(static_cast<size_t>(s.node_count()), false);
    for (int v : region.omega) in_omega[v] = true;
    const EdgeSelection omega_edges = EdgeSelection::touching(s, in_omega);
    double edge_mass = 0;  // sum of W_e over the energy's edge set
    for (int e : omega_edges.edges)
        edge_mass += edge_tv_weight(s, e, WeightRule::Average, nullptr) * s.edge_len[e];
    const double fmin = field_min(f), fmax = field_max(f);

    ContinuationResult result;
    ScalarField warm = f;
    ScalarField prev = f;
    double prev_delta = -1;
    for (double p : p_schedule) {
        SolverConfig scfg = cfg;
        scfg.p = p;
        ScalarField u;
        EnergyReport rep;
        try {
            std::tie(u, rep) = solve_p_dirichlet_on(s, in_omega, f, scfg, &warm);
        } catch (const std::exception& ex) {
            result.aborted = true;
            result.abort_reason = ex.what();
            break;
        }
        ContinuationStep step;
        step.p = p;
        step.energy_p = rep.energy;
        step.iterations = rep.iterations;
        step.residual = rep.residual;
        step.tv = total_variation(s, u, omega_edges);
        step.l1_delta = l1_distance(s, u, prev, region.omega);
        // Minimality gives E_p(u_p) <= E_p(f); Hoelder turns either energy into
        // a uniform TV bound along the whole continuation.
        const double nu = p_energy_normalization(p);
        const double ef = p_energy(s, f, p, omega_edges);
        step.tv_bound = std::pow(nu * ef, 1.0 / p) * std::pow(edge_mass, 1.0 - 1.0 / p);
        step.tv_bound_ok = step.tv <= step.tv_bound * (1.0 + 1e-9);
        step.holder_ok = step.tv <= std::pow(omega_measure, 1.0 - 1.0 / p) *
                                        std::pow(rep.energy, 1.0 / p) * (1.0 + 1e-9);
        step.max_principle_ok =
            field_max(u) <= fmax + 1e-9 && field_min(u) >= fmin - 1e-9;
        if (prev_delta >= 0 && step.l1_delta > prev_delta + 1e-12) result.l1_cauchy_flag = false;
        prev_delta = step.l1_delta;

        result.p_sequence.push_back(p);
        result.fields.push_back(u);
        result.trace.push_back(step);
        prev = u;
        warm = std::move(u);
    }
    if (!result.fields.empty()) result.limit_field = result.fields.back();
    return result;
}

void write_energy_trace_csv(const std::string& path, const ContinuationResult& r) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("write_energy_trace_csv: cannot open " + path);
    out << "p,energy_p,tv,l1_delta,iters,residual\n";
    char buf[192];
    for (const auto& t : r.trace) {
        std::snprintf(buf, sizeof(buf), "%.12g,%.12g,%.12g,%.12g,%d,%.12g\n", t.p, t.energy_p,
                      t.tv, t.l1_delta, t.iterations, t.residual);
        out << buf;
    }
}

} // namespace leastgrad
