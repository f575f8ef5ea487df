#pragma once

#include <string>
#include <vector>

#include "leastgrad/calculus.hpp"
#include "leastgrad/field.hpp"

namespace leastgrad {

struct SolverConfig {
    double p = 2.0;
    std::vector<double> epsilon_schedule = {1e-2, 1e-3, 1e-4, 1e-5, 1e-6, 1e-7, 1e-8};
    int max_iterations = 400;       // Newton steps across the whole schedule
    double residual_tol = 1e-4;     // sup-norm of the mu-normalized energy gradient
    uint64_t seed = 0;

    void validate() const;
};

struct EnergyReport {
    double energy = 0;        // primary objective value
    double tv = 0;            // total variation of the returned field
    double boundary_term = 0; // trace-jump part, when the objective has one
    double residual = 0;      // Euler-Lagrange defect or duality gap
    int iterations = 0;
    bool converged = true;
    bool degenerate_minimizer = false;
    std::vector<double> energy_iterates;  // per-iteration objective values
    std::vector<std::string> notes;
};

/// Direction-averaged normalization of the discrete p-energy: with this factor
/// a field of unit gradient has E_p equal to the region's area, matching the
/// continuum integral of |grad u|^p. Equals 1 at p = 1.
double p_energy_normalization(double p);

/// Normalized discrete p-energy over the selected edges (average density rule).
double p_energy(const Space& s, const ScalarField& u, double p, const EdgeSelection& sel);

/// Minimizes E_p(u) over fields with u = f outside the free set, by damped
/// Newton over the epsilon-smoothing schedule ((t^2+eps^2)^{p/2} edge terms,
/// SPD solves with an incomplete-Cholesky preconditioned conjugate gradient).
/// `init` provides a warm start on the free nodes; defaults to f itself.
std::pair<ScalarField, EnergyReport> solve_p_dirichlet_on(const Space& s,
                                                          const std::vector<bool>& free_nodes,
                                                          const ScalarField& f,
                                                          const SolverConfig& cfg,
                                                          const ScalarField* init = nullptr);

/// Standard form: free nodes are the region's omega; requires positive
/// exterior measure (the discrete surrogate of a nontrivial complement).
std::pair<ScalarField, EnergyReport> solve_p_dirichlet(const Space& s, const Region& region,
                                                       const ScalarField& f,
                                                       const SolverConfig& cfg);

struct ContinuationStep {
    double p = 0;
    double energy_p = 0;
    double tv = 0;
    double l1_delta = 0;   // L1 distance to the previous step's field
    int iterations = 0;
    double residual = 0;
    // Uniform TV bound from minimality and Hoelder: (nu_p E_p(f))^{1/p} (sum W)^{1-1/p}.
    double tv_bound = 0;
    bool tv_bound_ok = true;
    // Hoelder bridge TV(u_p) <= mu(Omega)^{1-1/p} E_p(u_p)^{1/p}.
    bool holder_ok = true;
    bool max_principle_ok = true;
};

struct ContinuationResult {
    std::vector<double> p_sequence;
    std::vector<ScalarField> fields;
    ScalarField limit_field;
    std::vector<ContinuationStep> trace;
    bool l1_cauchy_flag = true;  // set false when l1 deltas fail to shrink
    bool aborted = false;        // an inner solve failed; fields hold partial results
    std::string abort_reason;
};

/// Warm-started p -> 1 continuation producing a least-gradient candidate.
ContinuationResult continuation_p_to_1(const Space& s, const Region& region,
                                       const ScalarField& f, std::vector<double> p_schedule,
                                       const SolverConfig& cfg);

std::vector<double> default_p_schedule();

/// CSV with header `p,energy_p,tv,l1_delta,iters,residual`.
void write_energy_trace_csv(const std::string& path, const ContinuationResult& r);

} // namespace leastgrad
