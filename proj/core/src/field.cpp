#include "leastgrad/field.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace leastgrad {

ScalarField ScalarField::from_function(const Space& s,
                                       const std::function<double(double, double)>& f) {
    ScalarField u(s.node_count());
    for (int v = 0; v < s.node_count(); ++v) u[v] = f(s.px[v], s.py[v]);
    return u;
}

ScalarField ScalarField::indicator(const Space& s, const std::vector<bool>& set) {
    ScalarField u(s.node_count());
    for (int v = 0; v < s.node_count(); ++v) u[v] = set[v] ? 1.0 : 0.0;
    return u;
}

ScalarField ScalarField::constant(const Space& s, double c) {
    return ScalarField(s.node_count(), c);
}

double field_min(const ScalarField& u) {
    return *std::min_element(u.values.begin(), u.values.end());
}

double field_max(const ScalarField& u) {
    return *std::max_element(u.values.begin(), u.values.end());
}

double l1_distance(const Space& s, const ScalarField& u, const ScalarField& v,
                   const std::vector<int>& nodes) {
    double acc = 0;
    if (nodes.empty()) {
        for (int i = 0; i < s.node_count(); ++i) acc += s.mu[i] * std::abs(u[i] - v[i]);
    } else {
        for (int i : nodes) acc += s.mu[i] * std::abs(u[i] - v[i]);
    }
    return acc;
}

void write_field_csv(const std::string& path, const Space& s, const ScalarField& u) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("write_field_csv: cannot open " + path);
    out << "node_id,x,y,value\n";
    char buf[160];
    for (int v = 0; v < s.node_count(); ++v) {
        std::snprintf(buf, sizeof(buf), "%d,%.12g,%.12g,%.12g\n", v, s.px[v], s.py[v], u[v]);
        out << buf;
    }
}

ScalarField read_field_csv(const std::string& path, const Space& s) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("read_field_csv: cannot open " + path);
    std::string line;
    std::getline(in, line);  // header
    ScalarField u(s.node_count());
    std::vector<bool> seen(static_cast<size_t>(s.node_count()), false);
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string tok;
        std::getline(ss, tok, ',');
        const int id = std::stoi(tok);
        if (id < 0 || id >= s.node_count())
            throw std::runtime_error("read_field_csv: node id out of range");
        std::getline(ss, tok, ',');
        std::getline(ss, tok, ',');
        std::getline(ss, tok, ',');
        u[id] = std::stod(tok);
        seen[id] = true;
    }
    for (int v = 0; v < s.node_count(); ++v)
        if (!seen[v]) throw std::runtime_error("read_field_csv: missing value for node " +
                                               std::to_string(v));
    return u;
}

} // namespace leastgrad
