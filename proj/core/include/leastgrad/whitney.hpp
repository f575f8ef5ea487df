#pragma once

#include <string>
#include <vector>

#include "leastgrad/calculus.hpp"
#include "leastgrad/field.hpp"

namespace leastgrad {

/// Whitney-type ball cover of a node set U at scale R: radii follow
/// min(dist(center, complement)/40, R) with unit Poincare dilation, centers by
/// greedy farthest-point selection until U is covered.
struct Covering {
    double scale = 0;
    std::vector<int> centers;
    std::vector<double> radii;
    std::vector<std::vector<int>> members;  // nodes within r_j of the center
    std::vector<bool> covered_mask;         // over all nodes
    int overlap_count = 0;                  // max overlap of the 10-dilations
    int radius_repairs = 0;                 // property-(3) clampings applied
};

Covering whitney_cover(const Space& s, const std::vector<bool>& U, double R);

struct PartitionOfUnity {
    // weights[j] lists (node, phi_j(node)) with support in the 2-dilation.
    std::vector<std::vector<std::pair<int, double>>> weights;
    std::vector<double> lipschitz_per_ball;  // measured difference quotients
    // per-node view for evaluation
    std::vector<std::vector<std::pair<int, double>>> node_terms;  // (ball, weight)
};

/// Tent functions 1 - dist(x, B_j)/r_j clipped at 0, normalized to unit sum on
/// the covered set. Throws when a covered node receives zero total weight.
PartitionOfUnity partition_of_unity(const Space& s, const Covering& cover);

struct ConvolutionResult {
    ScalarField field;             // u outside the covered set
    std::vector<int> clipped;      // balls whose 5-dilation left the space
};

/// Discrete convolution sum_j (mu-average of u over 5B_j) phi_j.
ConvolutionResult discrete_convolution(const Space& s, const ScalarField& u,
                                       const Covering& cover, const PartitionOfUnity& pou);

struct DcBoundsReport {
    double lip_constant = 0;      // smallest C with Lip v <= C sum chi_Bj TV(u,10Bj)/mu(Bj)
    double integral_constant = 0; // smallest C' with int Lip v dmu <= C' TV(u,U)
    double partition_defect = 0;  // max |sum_j phi_j - 1| over covered nodes
    int uncontrolled_nodes = 0;   // Lip v > 0 where the covering bound vanishes
    bool pointwise_ok = true;
    double tv_u = 0;
    double lip_integral = 0;
};

DcBoundsReport verify_dc_bounds(const Space& s, const ScalarField& u, const Covering& cover,
                                const PartitionOfUnity& pou, const std::vector<bool>& U);

/// Covering JSON: {"balls":[{"center","r","members"}]}.
std::string covering_to_json(const Covering& cover);

} // namespace leastgrad
