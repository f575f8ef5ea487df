#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "leastgrad/calculus.hpp"
#include "leastgrad/tv_problem.hpp"

namespace leastgrad {

struct PerimeterEstimate {
    double value = 0;
    double tau = 0;
    ConvexBackend method = ConvexBackend::MinCutParametric;
    double residual = 0;  // duality gap (0 for min-cut)
    std::vector<std::pair<double, double>> sweep;  // optional (tau, value) trace
    std::vector<double> field;                     // minimizing v on the space
};

/// Relaxed perimeter of E within U:
///   min_v  TV(v over U; min-side rule)  +  (1/tau) sum_U mu_i |v_i - chi_E(i)|.
/// The fidelity weight realizes the L^1-closeness of the defining relaxation;
/// the min-side interface rule lets the transition layer sit on the cheap side.
PerimeterEstimate perimeter_relaxed(const Space& s, const std::vector<bool>& E,
                                    const std::vector<bool>& U, double tau,
                                    const ConvexOptions& opts = {});

/// Inner perimeter: same objective with the hard constraint v = 0 on U minus
/// omega and the interior-side density on interface edges.
PerimeterEstimate inner_perimeter(const Space& s, const Region& region,
                                  const std::vector<bool>& U, double tau,
                                  const ConvexOptions& opts = {});

/// Runs perimeter_relaxed over a tau schedule, returning the smallest-tau
/// estimate with the sweep recorded.
PerimeterEstimate perimeter_tau_sweep(const Space& s, const std::vector<bool>& E,
                                      const std::vector<bool>& U,
                                      const std::vector<double>& taus,
                                      const ConvexOptions& opts = {});

struct KappaSweepResult {
    std::vector<std::pair<double, double>> values;  // (kappa, P_kappa)
    double inner_reference = 0;                     // P_+ on the base space
};

/// Rebuilds the measure as mu_kappa = (chi_omega + kappa chi_exterior) mu and
/// computes the relaxed perimeter of omega for each kappa.
KappaSweepResult kappa_sweep(const Space& base, const Region& region,
                             const std::vector<double>& kappas, double tau,
                             const ConvexOptions& opts = {});

struct MinkowskiResult {
    std::vector<double> per_radius;
    double liminf_estimate = 0;
};

/// Codimension-1 Minkowski content estimate mu(union of R-balls over A)/(2R).
MinkowskiResult minkowski_content(const Space& s, const std::vector<int>& A,
                                  const std::vector<double>& radii);

/// Greedy ball-cover estimate of the codimension-1 Hausdorff content at scale
/// R: sum of mu(B_i)/R over a largest-first residual cover. An upper bound on
/// the true infimum. With unit_density the ambient measure is replaced by the
/// unweighted cell measure (geometric content).
double hausdorff_content(const Space& s, const std::vector<int>& A, double R,
                         bool unit_density = false);

/// Per-node ratio of local cut mass to local geometric boundary content; the
/// content is calibrated by 2/pi so a straight unit-density interface measures
/// one per unit length.
std::map<int, double> density_theta_estimate(const Space& s, const std::vector<bool>& E,
                                             const std::vector<bool>& U, double tau, double r,
                                             WeightRule rule = WeightRule::MinSide);

struct RadonTrial {
    bool additivity = true, subadditivity = true, monotonicity = true, inner_regularity = true;
};

struct RadonReport {
    int trials = 0;
    int additivity_failures = 0, subadditivity_failures = 0;
    int monotonicity_failures = 0, inner_regularity_failures = 0;
    std::vector<RadonTrial> detail;
    bool all_passed() const {
        return additivity_failures + subadditivity_failures + monotonicity_failures +
                   inner_regularity_failures == 0;
    }
};

/// Randomized measure-property suite for the inner perimeter: disjoint
/// additivity (to solver tolerance), subadditivity, monotonicity in U, and
/// one-ring inner regularity (within 5%).
RadonReport radon_property_suite(const Space& s, const Region& region, uint64_t seed,
                                 int trials, double tau = 1e-3,
                                 const ConvexOptions& opts = {});

} // namespace leastgrad
