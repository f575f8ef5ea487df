#pragma once

#include <functional>
#include <string>
#include <vector>

#include "leastgrad/space.hpp"

namespace leastgrad {

/// Node-indexed real field. Fields are stored densely over the Space; the
/// region a field is meaningful on is contextual to the operation using it.
struct ScalarField {
    std::vector<double> values;
    std::string flavor_tag;  // records which gradient flavor produced derived data

    ScalarField() = default;
    explicit ScalarField(int n, double fill = 0.0) : values(static_cast<size_t>(n), fill) {}

    double& operator[](int i) { return values[static_cast<size_t>(i)]; }
    double operator[](int i) const { return values[static_cast<size_t>(i)]; }
    int size() const { return static_cast<int>(values.size()); }

    static ScalarField from_function(const Space& s, const std::function<double(double, double)>& f);
    static ScalarField indicator(const Space& s, const std::vector<bool>& set);
    static ScalarField constant(const Space& s, double c);
};

double field_min(const ScalarField& u);
double field_max(const ScalarField& u);
/// Sum of mu_i |u_i - v_i| over the given nodes (all nodes if empty).
double l1_distance(const Space& s, const ScalarField& u, const ScalarField& v,
                   const std::vector<int>& nodes = {});

/// CSV node dump, header `node_id,x,y,value`.
void write_field_csv(const std::string& path, const Space& s, const ScalarField& u);
ScalarField read_field_csv(const std::string& path, const Space& s);

} // namespace leastgrad
