#include "leastgrad/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace leastgrad {

namespace {

using nlohmann::json;

struct ScenarioError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

DomainSpec parse_shape(const json& j) {
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "disk") return DomainSpec::disk(j.value("radius", 1.0));
    if (kind == "annulus") return DomainSpec::annulus(j.at("inner").get<double>(),
                                                      j.at("outer").get<double>());
    if (kind == "square") return DomainSpec::square(j.value("side", 1.0));
    if (kind == "slit_disk") {
        std::vector<Segment> segs;
        for (const auto& s : j.at("slits"))
            segs.push_back({s.at(0).get<double>(), s.at(1).get<double>(),
                            s.at(2).get<double>(), s.at(3).get<double>()});
        return DomainSpec::slit_disk(std::move(segs), j.value("radius", 1.0));
    }
    if (kind == "n_slit_disk")
        return DomainSpec::n_slit_disk(j.at("count").get<int>(), j.value("radius", 1.0));
    throw ScenarioError("shape.kind: unknown shape '" + kind + "'");
}

MeasureWeights parse_weights(const json& j) {
    if (j.is_null()) return MeasureWeights::uniform();
    const std::string rule = j.value("rule", "uniform");
    if (rule == "uniform") return MeasureWeights::uniform(j.value("density", 1.0));
    if (rule == "two_phase")
        return MeasureWeights::two_phase(j.value("inside", 1.0), j.value("outside", 1.0));
    throw ScenarioError("weights.rule: unknown rule '" + rule + "'");
}

ScalarField parse_field(const json& j, const Space& s) {
    if (j.is_string()) {
        const std::string name = j.get<std::string>();
        if (name == "x") return ScalarField::from_function(s, [](double x, double) { return x; });
        if (name == "y") return ScalarField::from_function(s, [](double, double y) { return y; });
        throw ScenarioError("field: unknown named field '" + name + "'");
    }
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "affine") {
        const double a = j.value("a", 0.0), b = j.value("b", 0.0), c = j.value("c", 0.0);
        return ScalarField::from_function(s, [=](double x, double y) { return a * x + b * y + c; });
    }
    if (kind == "constant") return ScalarField::constant(s, j.value("value", 0.0));
    if (kind == "radial_ramp") {
        const double a = j.at("inner").get<double>(), b = j.at("outer").get<double>();
        return ScalarField::from_function(s, [=](double x, double y) {
            return std::clamp((std::hypot(x, y) - a) / (b - a), 0.0, 1.0);
        });
    }
    if (kind == "csv") return read_field_csv(j.at("path").get<std::string>(), s);
    throw ScenarioError("field.kind: unknown kind '" + kind + "'");
}

std::vector<bool> parse_node_set(const json& j, const Space& s, const Region& region) {
    const std::string name = j.is_string() ? j.get<std::string>() : "omega";
    const int n = s.node_count();
    std::vector<bool> set(static_cast<size_t>(n), false);
    if (name == "omega") {
        for (int v : region.omega) set[v] = true;
    } else if (name == "all") {
        set.assign(static_cast<size_t>(n), true);
    } else if (name == "open_shape") {  // omega plus null band (the open slit domain)
        for (int v : region.omega) set[v] = true;
        for (int v : region.null_set) set[v] = true;
    } else if (name == "sectors") {     // alternating sectors of the n-slit disk
        throw ScenarioError("node set 'sectors' needs the n_slit shape context");
    } else {
        throw ScenarioError("node set: unknown name '" + name + "'");
    }
    return set;
}

struct RowBuilder {
    std::string scenario;
    ScenarioReport* report;

    void info(const std::string& quantity, const std::string& parameter, double value) {
        report->rows.push_back({scenario, quantity, parameter, value, {}, {}, true});
    }
    void checked(const std::string& quantity, const std::string& parameter, double value,
                 double reference, double rel_tol) {
        ReportRow r{scenario, quantity, parameter, value, reference, {}, true};
        const double denom = std::max(std::abs(reference), 1e-300);
        r.rel_error = std::abs(value - reference) / denom;
        r.pass = *r.rel_error <= rel_tol;
        report->rows.push_back(r);
    }
    void boolean(const std::string& quantity, const std::string& parameter, bool ok) {
        report->rows.push_back({scenario, quantity, parameter, ok ? 1.0 : 0.0, 1.0,
                                ok ? 0.0 : 1.0, ok});
    }
};

std::string format_double(double v) {
    char buf[48];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

} // namespace

std::string config_hash(const std::string& canonical_json) {
    uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : canonical_json) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    char buf[20];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

void write_report_csv(const std::string& path, const ScenarioReport& report) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("write_report_csv: cannot open " + path);
    out << "scenario,quantity,parameter,value,reference,rel_error,pass\n";
    for (const auto& r : report.rows) {
        out << r.scenario << ',' << r.quantity << ',' << r.parameter << ','
            << format_double(r.value) << ','
            << (r.reference ? format_double(*r.reference) : std::string()) << ','
            << (r.rel_error ? format_double(*r.rel_error) : std::string()) << ','
            << (r.pass ? "true" : "false") << '\n';
    }
}

ScenarioReport run_scenario_text(const std::string& json_text, const std::string& out_dir) {
    json root = json::parse(json_text);
    if (root.contains("config")) root = root.at("config");  // manifest round-trip

    const std::string name = root.value("name", "scenario");
    const uint64_t seed = root.value("seed", 12345ULL);
    std::filesystem::create_directories(out_dir);

    ScenarioReport report;
    RowBuilder rows{name, &report};

    ConvexOptions copts;
    if (root.contains("tolerances")) {
        const auto& t = root.at("tolerances");
        copts.gap_tol = t.value("gap_tol", copts.gap_tol);
        copts.max_iterations = t.value("max_iterations", copts.max_iterations);
    }

    const json ops = root.value("ops", json::array());
    if (ops.empty()) {
        // Empty scenario: header-only report, success.
        write_report_csv(out_dir + "/report.csv", report);
        json manifest = {{"artifact", "leastgrad"},
                         {"version", "0.1.0"},
                         {"seed", seed},
                         {"config", root},
                         {"config_hash", config_hash(root.dump())}};
        std::ofstream(out_dir + "/manifest.json") << manifest.dump(2) << '\n';
        return report;
    }

    if (!root.contains("shape") || !root.contains("h"))
        throw ScenarioError("scenario: 'shape' and 'h' are required when ops are declared");
    const DomainSpec shape = parse_shape(root.at("shape"));
    const double h = root.at("h").get<double>();
    const MeasureWeights weights = parse_weights(root.value("weights", json()));

    // Validate all op preconditions before any solve starts.
    int op_index = 0;
    for (const auto& op : ops) {
        const std::string kind = op.at("op").get<std::string>();
        const std::string at = "ops[" + std::to_string(op_index++) + "] (" + kind + "): ";
        if (kind == "pipeline") {
            for (double w : op.at("widths").get<std::vector<double>>())
                if (w < 2.0 * h)
                    throw ScenarioError(at + "collar width " + format_double(w) +
                                        " below resolution 2h = " + format_double(2 * h));
        } else if (kind == "continue" || kind == "solve") {
            if (op.contains("p") && !(op.at("p").get<double>() > 1.0))
                throw ScenarioError(at + "p must exceed 1");
        } else if (kind == "whitney") {
            if (op.value("R", 4.0 * h) < 4.0 * h)
                throw ScenarioError(at + "R below resolution 4h");
        }
    }

    auto [space, region] = build_grid(shape, h, weights);

    std::map<std::string, double> quantities;
    std::optional<ScalarField> last_continuation;
    std::optional<ScalarField> last_dirichlet;

    op_index = 0;
    for (const auto& op : ops) {
        const std::string kind = op.at("op").get<std::string>();
        const std::string tag = kind + "#" + std::to_string(op_index++);

        if (kind == "perimeter") {
            std::vector<bool> E = op.contains("set") && op.at("set").is_string() &&
                                          op.at("set").get<std::string>() == "sectors"
                                      ? alternating_sector_set(space, region, shape.slit_count)
                                      : parse_node_set(op.value("set", json("omega")), space, region);
            auto U = parse_node_set(op.value("window", json("all")), space, region);
            std::vector<double> taus = op.contains("tau_list")
                                           ? op.at("tau_list").get<std::vector<double>>()
                                           : std::vector<double>{op.value("tau", 1e-3)};
            const auto est = perimeter_tau_sweep(space, E, U, taus, copts);
            const std::string q = op.value("quantity", std::string("P"));
            quantities[q] = est.value;
            if (op.contains("reference"))
                rows.checked(q, "tau=" + format_double(est.tau), est.value,
                             op.at("reference").get<double>(), op.value("rel_tol", 0.05));
            else
                rows.info(q, "tau=" + format_double(est.tau), est.value);
        } else if (kind == "inner_perimeter") {
            auto U = parse_node_set(op.value("window", json("all")), space, region);
            const auto est = inner_perimeter(space, region, U, op.value("tau", 1e-3), copts);
            const std::string q = op.value("quantity", std::string("P_plus"));
            quantities[q] = est.value;
            if (op.contains("reference"))
                rows.checked(q, "tau=" + format_double(est.tau), est.value,
                             op.at("reference").get<double>(), op.value("rel_tol", 0.05));
            else
                rows.info(q, "tau=" + format_double(est.tau), est.value);
        } else if (kind == "ratio") {
            const double num = quantities.at(op.at("numerator").get<std::string>());
            const double den = quantities.at(op.at("denominator").get<std::string>());
            const double val = num / den;
            quantities["ratio"] = val;
            if (op.contains("reference"))
                rows.checked("ratio", op.at("numerator").get<std::string>() + "/" +
                                          op.at("denominator").get<std::string>(),
                             val, op.at("reference").get<double>(), op.value("rel_tol", 0.1));
            else
                rows.info("ratio", "", val);
        } else if (kind == "kappa_sweep") {
            const auto kap = op.at("kappas").get<std::vector<double>>();
            const auto res = kappa_sweep(space, region, kap, op.value("tau", 1e-3), copts);
            bool monotone = true;
            for (size_t k = 0; k + 1 < res.values.size(); ++k)
                if (res.values[k + 1].second <
                    res.values[k].second - 1e-6 * std::abs(res.values[k].second))
                    monotone = false;
            for (const auto& [kp, val] : res.values)
                rows.info("P_kappa", "kappa=" + format_double(kp), val);
            rows.boolean("kappa_monotone", "", monotone);
            rows.checked("P_kappa_last_vs_P_plus", "", res.values.back().second,
                         res.inner_reference, op.value("rel_tol", 0.05));
        } else if (kind == "solve") {
            const ScalarField f = parse_field(op.at("f"), space);
            SolverConfig cfg;
            cfg.p = op.value("p", 2.0);
            cfg.seed = seed;
            auto [u, rep] = solve_p_dirichlet(space, region, f, cfg);
            rows.info("energy_p", "p=" + format_double(cfg.p), rep.energy);
            rows.info("residual", "p=" + format_double(cfg.p), rep.residual);
            write_field_csv(out_dir + "/" + tag + "_field.csv", space, u);
        } else if (kind == "continue") {
            const ScalarField f = parse_field(op.at("f"), space);
            SolverConfig cfg;
            cfg.seed = seed;
            auto sched = op.contains("p_schedule")
                             ? op.at("p_schedule").get<std::vector<double>>()
                             : default_p_schedule();
            const auto res = continuation_p_to_1(space, region, f, sched, cfg);
            if (res.aborted) throw std::runtime_error("continuation aborted: " + res.abort_reason);
            bool maxp = true;
            for (const auto& st : res.trace) maxp &= st.max_principle_ok;
            rows.boolean("max_principle", "", maxp);
            rows.info("tv_limit", "p=" + format_double(res.p_sequence.back()),
                      res.trace.back().tv);
            ContinuationResult copy = res;
            write_energy_trace_csv(out_dir + "/" + tag + "_trace.csv", copy);
            write_field_csv(out_dir + "/" + tag + "_limit.csv", space, res.limit_field);
            last_continuation = res.limit_field;
        } else if (kind == "dirichlet") {
            const ScalarField f = parse_field(op.at("f"), space);
            const std::string variant = op.value("variant", "T");
            const auto sol = variant == "B" ? solve_problem_B(space, region, f, copts)
                                            : solve_problem_T(space, region, f, copts);
            const std::string q = "energy_" + variant;
            quantities[q] = sol.report.energy;
            if (op.contains("reference"))
                rows.checked(q, "", sol.report.energy, op.at("reference").get<double>(),
                             op.value("rel_tol", 0.05));
            else
                rows.info(q, "", sol.report.energy);
            write_field_csv(out_dir + "/" + tag + "_field.csv", space, sol.field);
            last_dirichlet = sol.field;
        } else if (kind == "pipeline") {
            const ScalarField f = parse_field(op.at("f"), space);
            const std::string dir = op.value("direction", "outer");
            SolverConfig cfg;
            cfg.seed = seed;
            const auto widths = op.at("widths").get<std::vector<double>>();
            const auto psched = op.contains("p_schedule")
                                    ? op.at("p_schedule").get<std::vector<double>>()
                                    : std::vector<double>{1.2, 1.05, 1.02};
            const auto res = dir == "outer"
                                 ? outer_approximation_pipeline(space, region, f, widths, psched, cfg)
                                 : inner_approximation_pipeline(space, region, f, widths, psched, cfg);
            rows.info("pipeline_energy_" + dir, "", res.report.energy);
            const auto direct = dir == "outer" ? solve_problem_B(space, region, f, copts)
                                               : solve_problem_T(space, region, f, copts);
            rows.checked("pipeline_vs_direct", dir, res.report.energy, direct.report.energy,
                         op.value("rel_tol", default_tolerances().pipeline_tol));
            write_field_csv(out_dir + "/" + tag + "_field.csv", space, res.field);
        } else if (kind == "verify") {
            const std::string cls = op.value("class", "bvc");
            const TestClass tc = cls == "bv0" ? TestClass::ZeroTrace
                                : cls == "wkbv0" ? TestClass::WeakZeroTrace
                                                 : TestClass::CompactSupport;
            ScalarField u;
            const std::string source = op.value("u", "continuation");
            if (source == "continuation" && last_continuation) u = *last_continuation;
            else if (source == "dirichlet" && last_dirichlet) u = *last_dirichlet;
            else if (op.contains("u") && op.at("u").is_object()) u = parse_field(op.at("u"), space);
            else throw ScenarioError("verify: no field available from '" + source + "'");
            const auto rep = verify_least_gradient(space, region, u, tc,
                                                   op.value("trials", 200),
                                                   op.value("seed", seed),
                                                   op.value("adversarial", true), copts);
            rows.info("worst_delta", cls, rep.worst_delta);
            rows.info("adversarial_improvement", cls, rep.adversarial_improvement);
            rows.boolean("least_gradient_" + cls, "", rep.pass);
        } else if (kind == "whitney") {
            const double R = op.value("R", 8.0 * h);
            auto U = parse_node_set(op.value("window", json("omega")), space, region);
            const auto cover = whitney_cover(space, U, R);
            const auto pou = partition_of_unity(space, cover);
            const ScalarField f = op.contains("field") ? parse_field(op.at("field"), space)
                                                       : ScalarField::from_function(
                                                             space, [](double x, double) { return x; });
            const auto rep = verify_dc_bounds(space, f, cover, pou, U);
            rows.info("overlap_count", "", cover.overlap_count);
            rows.info("partition_defect", "", rep.partition_defect);
            rows.info("dc_lip_constant", "", rep.lip_constant);
            std::ofstream(out_dir + "/" + tag + "_cover.json") << covering_to_json(cover) << '\n';
        } else {
            throw ScenarioError("unknown op '" + kind + "'");
        }
    }

    write_report_csv(out_dir + "/report.csv", report);
    json manifest = {{"artifact", "leastgrad"},
                     {"version", "0.1.0"},
                     {"seed", seed},
                     {"config", root},
                     {"config_hash", config_hash(root.dump())}};
    std::ofstream(out_dir + "/manifest.json") << manifest.dump(2) << '\n';
    return report;
}

int run_scenario(const std::string& config_path, const std::string& out_dir) {
    std::ifstream in(config_path);
    if (!in) {
        std::fprintf(stderr, "error: cannot open config %s\n", config_path.c_str());
        return 2;
    }
    std::stringstream ss;
    ss << in.rdbuf();
    try {
        const ScenarioReport report = run_scenario_text(ss.str(), out_dir);
        return report.all_passed() ? 0 : 1;
    } catch (const ScenarioError& ex) {
        std::fprintf(stderr, "config error: %s\n", ex.what());
        return 2;
    } catch (const json::exception& ex) {
        std::fprintf(stderr, "config error: %s\n", ex.what());
        return 2;
    } catch (const std::exception& ex) {
        std::fprintf(stderr, "solver failure: %s\n", ex.what());
        return 1;
    }
}

} // namespace leastgrad
