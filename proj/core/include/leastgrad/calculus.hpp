#pragma once

#include <optional>
#include <vector>

#include "leastgrad/field.hpp"
#include "leastgrad/space.hpp"

namespace leastgrad {

/// Density factor applied to an edge in total-variation sums. Only edges whose
/// endpoints carry different densities (region interfaces) distinguish the
/// rules; everywhere else they coincide with the plain average.
enum class WeightRule {
    Average,       // mean of effective endpoint densities
    MinSide,       // min of effective endpoint densities (problem (B) / relaxed P)
    InteriorSide,  // density of the omega-side endpoint (problem (T) / inner P)
};

enum class GradientFlavor {
    EdgeTV,         // Crofton-weighted edge differences; used by all energies
    NodeIsotropic,  // least-squares affine fit magnitude; diagnostic only
};

/// TV weight of a single edge: crofton * densityFactor(rule). `region` is only
/// consulted by InteriorSide; pass nullptr for the density-only rules.
double edge_tv_weight(const Space& s, int e, WeightRule rule, const Region* region,
                      double null_thresh = default_tolerances().null_density_threshold);

/// Edge selection for TV-type sums. Either an explicit edge list or a node set
/// (edges with both endpoints inside).
struct EdgeSelection {
    std::vector<int> edges;
    static EdgeSelection from_edges(std::vector<int> e) { return {std::move(e)}; }
    static EdgeSelection within(const Space& s, const std::vector<bool>& nodes);
    /// Edges with at least one endpoint in the set.
    static EdgeSelection touching(const Space& s, const std::vector<bool>& nodes);
    static EdgeSelection all(const Space& s);
};

/// Sum over selected edges of c_e * densityFactor * |u_i - u_j|.
double total_variation(const Space& s, const ScalarField& u, const EdgeSelection& sel,
                       WeightRule rule = WeightRule::Average, const Region* region = nullptr);

/// Per-node gradient magnitude surrogate.
/// EdgeTV: sum_{e at i} c_e * rho_avg * |u_i-u_j| / (2 mu_i), a density of
/// variation whose mu-integral equals total_variation. NodeIsotropic: Euclidean
/// norm of the least-squares affine fit over the stencil; exact on affine data.
ScalarField gradient_magnitude(const Space& s, const ScalarField& u, GradientFlavor flavor,
                               std::vector<int>* isolated_nodes = nullptr);

struct CoareaProfile {
    std::vector<double> thresholds;
    std::vector<double> perimeters;   // P({u > t}, region) at each listed threshold
    double integral = 0;              // midpoint quadrature of t -> P({u>t})
};

/// Level-set perimeter profile and its integral. With thresholds containing
/// every distinct value of u the integral reproduces total_variation exactly
/// (layer-cake identity per edge).
CoareaProfile coarea_profile(const Space& s, const ScalarField& u, const EdgeSelection& sel,
                             std::vector<double> thresholds, WeightRule rule = WeightRule::Average,
                             const Region* region = nullptr);

/// Thresholds enumerating all distinct values of u (exact coarea mode).
std::vector<double> exact_thresholds(const ScalarField& u);

struct TraceResult {
    std::vector<double> averages;  // mu-weighted means over ball(x,r) cap omega
    double value = 0;              // Richardson extrapolation from the last two radii
    bool converged = false;
};

/// Interior trace at a boundary node: averages of u over omega-side half balls.
/// Throws if no radius captures interior mass.
TraceResult interior_trace(const Space& s, const Region& region, const ScalarField& u,
                           int node, const std::vector<double>& radii,
                           double trace_tol = default_tolerances().trace_tol);

struct ApproxLimits {
    double lower = 0, upper = 0;
    bool is_jump_node = false;
};

/// Lower/upper approximate limits from ball densities at the smallest resolved
/// radius; jump flag per jump_tol = jump_tol_factor * range(u).
ApproxLimits approx_limits(const Space& s, const ScalarField& u, int node,
                           const std::vector<double>& radii,
                           double theta_tol = default_tolerances().theta_tol,
                           double jump_tol = -1.0);

/// CSV with header `threshold,perimeter`.
void write_coarea_csv(const std::string& path, const CoareaProfile& prof);

} // namespace leastgrad
