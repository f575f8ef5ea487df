#pragma once

#include <cstdint>
#include <vector>

namespace leastgrad {

/// Shared numeric defaults. Every tolerance used by the estimators and
/// solvers is pinned here so that runs are reproducible from a config alone.
struct Tolerances {
    /// Ball-density threshold for the measure-theoretic interior/exterior split.
    double theta_tol = 0.05;
    /// Measure factor for null-set (slit) nodes: mu = slit_epsilon * h^2.
    double slit_epsilon = 1e-9;
    /// Densities at or below this are treated as carrying no measure when
    /// edge weights are formed (the non-null endpoint's density is used).
    double null_density_threshold = 1e-6;
    /// Duality-gap target for convex solves, relative to max(1, |energy|).
    double gap_tol = 1e-3;
    /// verifier_slack = verifier_slack_factor * gap_tol (times energy scale).
    double verifier_slack_factor = 10.0;
    /// Relative agreement required between pipeline and direct energies.
    double pipeline_tol = 0.03;
    /// Convergence threshold for interior-trace extrapolation.
    double trace_tol = 1e-3;
    /// Jump detector: |upper-lower| > jump_tol_factor * range(u).
    double jump_tol_factor = 0.1;
};

inline const Tolerances& default_tolerances() {
    static const Tolerances t{};
    return t;
}

/// Counter-based splittable RNG: every random quantity in the library is a
/// pure function of (seed, stream, counter), so concurrent and re-ordered
/// evaluation cannot change results.
class RngStream {
public:
    RngStream(uint64_t seed, uint64_t stream)
        : state_(mix(mix(seed + 0x9e3779b97f4a7c15ULL) ^ mix(stream + 0x7f4a7c159e3779b9ULL))) {}

    uint64_t next_u64() {
        state_ += 0x9e3779b97f4a7c15ULL;
        return mix(state_);
    }

    /// Uniform in [0,1).
    double next_double() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    /// Uniform in [a,b).
    double uniform(double a, double b) { return a + (b - a) * next_double(); }

    /// Uniform integer in [0,n).
    uint64_t next_below(uint64_t n) { return n ? next_u64() % n : 0; }

    static uint64_t mix(uint64_t z) {
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

private:
    uint64_t state_;
};

} // namespace leastgrad
