// Command-line front end: scenario runner plus direct subcommands for the
// perimeter estimators, the p-Dirichlet solvers, the least-gradient problems,
// the verification harness and the Whitney machinery.

#include <array>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "CLI11.hpp"

#include "leastgrad/dirichlet.hpp"
#include "leastgrad/perimeter.hpp"
#include "leastgrad/scenario.hpp"
#include "leastgrad/whitney.hpp"

namespace lg = leastgrad;

namespace {

struct ShapeFlags {
    std::string shape = "disk";
    double radius = 1.0, inner = 0.5, outer = 1.0, side = 1.0;
    std::string slits;  // "x1,y1,x2,y2;..."
    int count = 0;
    double h = 1.0 / 64.0;
    double alpha = 1.0;  // two-phase outside density (1 = uniform)

    void attach(CLI::App* cmd) {
        cmd->add_option("--shape", shape, "disk|annulus|square|slit_disk|n_slit_disk");
        cmd->add_option("--radius", radius, "disk radius");
        cmd->add_option("--inner", inner, "annulus inner radius");
        cmd->add_option("--outer", outer, "annulus outer radius");
        cmd->add_option("--side", side, "square side");
        cmd->add_option("--slits", slits, "slit segments x1,y1,x2,y2;...");
        cmd->add_option("--count", count, "number of slits (n_slit_disk)");
        cmd->add_option("--h", h, "grid spacing")->required();
        cmd->add_option("--alpha", alpha, "exterior density (two-phase weights)");
    }

    lg::DomainSpec spec() const {
        if (shape == "disk") return lg::DomainSpec::disk(radius);
        if (shape == "annulus") return lg::DomainSpec::annulus(inner, outer);
        if (shape == "square") return lg::DomainSpec::square(side);
        if (shape == "slit_disk") {
            std::vector<lg::Segment> segs;
            std::stringstream ss(slits);
            std::string part;
            while (std::getline(ss, part, ';')) {
                lg::Segment s{};
                if (std::sscanf(part.c_str(), "%lf,%lf,%lf,%lf", &s.x1, &s.y1, &s.x2, &s.y2) != 4)
                    throw CLI::ValidationError("--slits", "expected x1,y1,x2,y2");
                segs.push_back(s);
            }
            if (segs.empty()) segs.push_back({-1.0, 0.0, 0.0, 0.0});
            return lg::DomainSpec::slit_disk(std::move(segs), radius);
        }
        if (shape == "n_slit_disk") return lg::DomainSpec::n_slit_disk(count, radius);
        throw CLI::ValidationError("--shape", "unknown shape " + shape);
    }

    std::pair<lg::Space, lg::Region> build() const {
        const auto w = alpha == 1.0 ? lg::MeasureWeights::uniform()
                                    : lg::MeasureWeights::two_phase(1.0, alpha);
        return lg::build_grid(spec(), h, w);
    }
};

std::vector<double> parse_list(const std::string& text) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string part;
    while (std::getline(ss, part, ',')) out.push_back(std::stod(part));
    return out;
}

lg::ScalarField named_field(const std::string& name, const lg::Space& s, double a, double b) {
    if (name == "x") return lg::ScalarField::from_function(s, [](double x, double) { return x; });
    if (name == "y") return lg::ScalarField::from_function(s, [](double, double y) { return y; });
    if (name == "radial")
        return lg::ScalarField::from_function(s, [=](double x, double y) {
            const double r = std::hypot(x, y);
            return std::clamp((r - a) / (b - a), 0.0, 1.0);
        });
    if (name.rfind("const:", 0) == 0)
        return lg::ScalarField::constant(s, std::stod(name.substr(6)));
    if (name.rfind("csv:", 0) == 0) return lg::read_field_csv(name.substr(4), s);
    throw CLI::ValidationError("--f", "unknown field " + name);
}

std::string out_dir_default() {
    const char* env = std::getenv("LEASTGRAD_OUT");
    return env != nullptr ? env : ".";
}

void write_simple_report(const std::string& path,
                         const std::vector<std::array<std::string, 6>>& rows,
                         const char* header) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path);
    out << header << '\n';
    for (const auto& r : rows)
        out << r[0] << ',' << r[1] << ',' << r[2] << ',' << r[3] << ',' << r[4] << ',' << r[5]
            << '\n';
}

std::string fmt(double v) {
    char buf[48];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"least-gradient laboratory on weighted graphs"};
    app.require_subcommand(1);
    std::string out_dir = out_dir_default();
    app.add_option("--out", out_dir, "output directory (default $LEASTGRAD_OUT or .)");

    // --- run ---------------------------------------------------------------
    auto* run = app.add_subcommand("run", "execute a scenario config (JSON)");
    std::string config_path;
    run->add_option("config", config_path, "scenario or manifest JSON")->required();

    // --- perimeter ----------------------------------------------------------
    auto* per = app.add_subcommand("perimeter", "relaxed and inner perimeter estimates");
    ShapeFlags per_shape;
    per_shape.attach(per);
    std::string tau_list = "0.1,0.01,0.001", kappa_list;
    std::string per_out = "report.csv";
    per->add_option("--tau-list", tau_list, "fidelity sweep");
    per->add_option("--kappa-list", kappa_list, "exterior reweighting sweep");
    per->add_option("--out", per_out, "report CSV path")->capture_default_str();

    // --- solve / continue ----------------------------------------------------
    auto* solve = app.add_subcommand("solve", "single p-Dirichlet solve");
    ShapeFlags solve_shape;
    solve_shape.attach(solve);
    double solve_p = 2.0;
    std::string solve_f = "x";
    solve->add_option("--p", solve_p, "exponent p > 1")->required();
    solve->add_option("--f", solve_f, "boundary data: x|y|radial|const:v|csv:path");

    auto* cont = app.add_subcommand("continue", "p -> 1 continuation");
    ShapeFlags cont_shape;
    cont_shape.attach(cont);
    std::string p_schedule = "1.5,1.25,1.1,1.05,1.02,1.01";
    std::string cont_f = "x";
    cont->add_option("--p-schedule", p_schedule, "decreasing schedule toward 1");
    cont->add_option("--f", cont_f, "boundary data");

    // --- dirichlet / pipeline -------------------------------------------------
    auto* dir = app.add_subcommand("dirichlet", "direct problem (B) or (T) solve");
    ShapeFlags dir_shape;
    dir_shape.attach(dir);
    std::string variant = "T", dir_f = "x";
    dir->add_option("--variant", variant, "B or T")->check(CLI::IsMember({"B", "T"}));
    dir->add_option("--f", dir_f, "boundary data");

    auto* pipe = app.add_subcommand("pipeline", "domain-perturbation pipeline");
    ShapeFlags pipe_shape;
    pipe_shape.attach(pipe);
    std::string direction = "outer", pipe_f = "x", widths = "", pipe_p = "1.2,1.05,1.02";
    pipe->add_option("--direction", direction, "inner or outer")
        ->check(CLI::IsMember({"inner", "outer"}));
    pipe->add_option("--f", pipe_f, "boundary data");
    pipe->add_option("--widths", widths, "collar widths, decreasing");
    pipe->add_option("--p-schedule", pipe_p, "diagonal p schedule");

    // --- verify ----------------------------------------------------------------
    auto* ver = app.add_subcommand("verify", "least-gradient verification");
    ShapeFlags ver_shape;
    ver_shape.attach(ver);
    std::string ver_class = "bvc", ver_f = "x", ver_u = "continuation";
    int trials = 200;
    uint64_t ver_seed = 12345;
    ver->add_option("--class", ver_class, "bvc|bv0|wkbv0")
        ->check(CLI::IsMember({"bvc", "bv0", "wkbv0"}));
    ver->add_option("--trials", trials, "perturbation trials");
    ver->add_option("--seed", ver_seed, "random seed");
    ver->add_option("--f", ver_f, "boundary data for the continuation candidate");
    ver->add_option("--u", ver_u, "candidate source: continuation|csv:path");

    // --- whitney -----------------------------------------------------------------
    auto* whit = app.add_subcommand("whitney", "Whitney cover and convolution bounds");
    ShapeFlags whit_shape;
    whit_shape.attach(whit);
    double R = 0.1;
    std::string whit_field = "x";
    whit->add_option("--R", R, "covering scale (>= 4h)");
    whit->add_option("--field", whit_field, "field to smooth: x|y|const:v|csv:path");

    CLI11_PARSE(app, argc, argv);
    std::filesystem::create_directories(out_dir);

    try {
        if (run->parsed()) return lg::run_scenario(config_path, out_dir);

        if (per->parsed()) {
            auto [space, region] = per_shape.build();
            std::vector<bool> E(space.node_count(), false), U(space.node_count(), true);
            for (int v : region.omega) E[v] = true;
            std::vector<std::array<std::string, 6>> rows;
            const auto est = lg::perimeter_tau_sweep(space, E, U, parse_list(tau_list));
            for (const auto& [tau, val] : est.sweep)
                rows.push_back({"P", "tau=" + fmt(tau), fmt(val), "", "", "true"});
            const auto inner = lg::inner_perimeter(space, region, U, est.tau);
            rows.push_back({"P_plus", "tau=" + fmt(inner.tau), fmt(inner.value), "", "", "true"});
            if (!kappa_list.empty()) {
                const auto sweep =
                    lg::kappa_sweep(space, region, parse_list(kappa_list), est.tau);
                for (const auto& [kp, val] : sweep.values)
                    rows.push_back({"P_kappa", "kappa=" + fmt(kp), fmt(val), "", "", "true"});
            }
            write_simple_report(out_dir + "/" + per_out, rows,
                                "quantity,parameter,value,reference,rel_error,pass");
            std::printf("wrote %s/%s\n", out_dir.c_str(), per_out.c_str());
            return 0;
        }

        if (solve->parsed()) {
            auto [space, region] = solve_shape.build();
            const auto f = named_field(solve_f, space, solve_shape.inner, solve_shape.outer);
            lg::SolverConfig cfg;
            cfg.p = solve_p;
            auto [u, rep] = lg::solve_p_dirichlet(space, region, f, cfg);
            lg::write_field_csv(out_dir + "/solution.csv", space, u);
            std::printf("p=%.6g energy=%.12g tv=%.12g residual=%.3g iters=%d\n", solve_p,
                        rep.energy, rep.tv, rep.residual, rep.iterations);
            return 0;
        }

        if (cont->parsed()) {
            auto [space, region] = cont_shape.build();
            const auto f = named_field(cont_f, space, cont_shape.inner, cont_shape.outer);
            lg::SolverConfig cfg;
            const auto res =
                lg::continuation_p_to_1(space, region, f, parse_list(p_schedule), cfg);
            lg::write_energy_trace_csv(out_dir + "/energy_trace.csv", res);
            lg::write_field_csv(out_dir + "/limit_field.csv", space, res.limit_field);
            std::printf("%s (%zu stages, tv_limit=%.12g)\n",
                        res.aborted ? "aborted" : "done", res.trace.size(),
                        res.trace.empty() ? 0.0 : res.trace.back().tv);
            return res.aborted ? 1 : 0;
        }

        if (dir->parsed()) {
            auto [space, region] = dir_shape.build();
            const auto f = named_field(dir_f, space, dir_shape.inner, dir_shape.outer);
            const auto sol = variant == "B" ? lg::solve_problem_B(space, region, f)
                                            : lg::solve_problem_T(space, region, f);
            lg::write_field_csv(out_dir + "/dirichlet_" + variant + ".csv", space, sol.field);
            std::vector<std::array<std::string, 6>> rows{
                {"direct_" + variant, dir_shape.shape, fmt(sol.report.energy), "", "", "true"}};
            write_simple_report(out_dir + "/report.csv", rows,
                                "method,instance,energy,reference,rel_error,pass");
            std::printf("energy_%s=%.12g (tv=%.12g boundary=%.12g)\n", variant.c_str(),
                        sol.report.energy, sol.report.tv, sol.report.boundary_term);
            return 0;
        }

        if (pipe->parsed()) {
            auto [space, region] = pipe_shape.build();
            const auto f = named_field(pipe_f, space, pipe_shape.inner, pipe_shape.outer);
            std::vector<double> w = widths.empty()
                                        ? std::vector<double>{8 * pipe_shape.h, 4 * pipe_shape.h,
                                                              2 * pipe_shape.h}
                                        : parse_list(widths);
            lg::SolverConfig cfg;
            const auto res = direction == "outer"
                                 ? lg::outer_approximation_pipeline(space, region, f, w,
                                                                    parse_list(pipe_p), cfg)
                                 : lg::inner_approximation_pipeline(space, region, f, w,
                                                                    parse_list(pipe_p), cfg);
            const auto direct = direction == "outer" ? lg::solve_problem_B(space, region, f)
                                                     : lg::solve_problem_T(space, region, f);
            const double rel = std::abs(res.report.energy - direct.report.energy) /
                               std::max(1e-300, std::abs(direct.report.energy));
            const bool ok = rel <= lg::default_tolerances().pipeline_tol;
            std::vector<std::array<std::string, 6>> rows{
                {"pipeline_" + direction, pipe_shape.shape, fmt(res.report.energy),
                 fmt(direct.report.energy), fmt(rel), ok ? "true" : "false"}};
            write_simple_report(out_dir + "/report.csv", rows,
                                "method,instance,energy,reference,rel_error,pass");
            lg::write_field_csv(out_dir + "/pipeline_field.csv", space, res.field);
            std::printf("pipeline=%.12g direct=%.12g rel=%.3g %s\n", res.report.energy,
                        direct.report.energy, rel, ok ? "PASS" : "FAIL");
            return ok ? 0 : 1;
        }

        if (ver->parsed()) {
            auto [space, region] = ver_shape.build();
            lg::ScalarField u;
            if (ver_u == "continuation") {
                const auto f = named_field(ver_f, space, ver_shape.inner, ver_shape.outer);
                lg::SolverConfig cfg;
                u = lg::continuation_p_to_1(space, region, f, {}, cfg).limit_field;
            } else if (ver_u.rfind("csv:", 0) == 0) {
                u = lg::read_field_csv(ver_u.substr(4), space);
            } else {
                throw CLI::ValidationError("--u", "expected continuation or csv:path");
            }
            const lg::TestClass tc = ver_class == "bv0" ? lg::TestClass::ZeroTrace
                                     : ver_class == "wkbv0" ? lg::TestClass::WeakZeroTrace
                                                            : lg::TestClass::CompactSupport;
            const auto rep =
                lg::verify_least_gradient(space, region, u, tc, trials, ver_seed, true);
            std::vector<std::array<std::string, 6>> rows{
                {"verify_" + ver_class, ver_shape.shape, fmt(rep.worst_delta), "0",
                 fmt(rep.adversarial_improvement), rep.pass ? "true" : "false"}};
            write_simple_report(out_dir + "/report.csv", rows,
                                "method,instance,energy,reference,rel_error,pass");
            std::printf("worst_delta=%.3g adversarial=%.3g %s\n", rep.worst_delta,
                        rep.adversarial_improvement, rep.pass ? "PASS" : "FAIL");
            return rep.pass ? 0 : 1;
        }

        if (whit->parsed()) {
            auto [space, region] = whit_shape.build();
            std::vector<bool> U(space.node_count(), false);
            for (int v : region.omega) U[v] = true;
            const auto cover = lg::whitney_cover(space, U, R);
            const auto pou = lg::partition_of_unity(space, cover);
            const auto f = named_field(whit_field, space, whit_shape.inner, whit_shape.outer);
            const auto rep = lg::verify_dc_bounds(space, f, cover, pou, U);
            std::ofstream(out_dir + "/cover.json") << lg::covering_to_json(cover) << '\n';
            std::vector<std::array<std::string, 6>> rows{
                {"overlap_count", "", fmt(cover.overlap_count), "", "", "true"},
                {"partition_defect", "", fmt(rep.partition_defect), "0", "",
                 rep.partition_defect <= 1e-12 ? "true" : "false"},
                {"dc_lip_constant", "", fmt(rep.lip_constant), "", "",
                 rep.pointwise_ok ? "true" : "false"},
                {"dc_integral_constant", "", fmt(rep.integral_constant), "", "", "true"}};
            write_simple_report(out_dir + "/bounds_report.csv", rows,
                                "quantity,parameter,value,reference,rel_error,pass");
            std::printf("balls=%zu overlap=%d lipC=%.3g intC=%.3g\n", cover.centers.size(),
                        cover.overlap_count, rep.lip_constant, rep.integral_constant);
            return 0;
        }
    } catch (const std::invalid_argument& ex) {
        std::fprintf(stderr, "invalid input: %s\n", ex.what());
        return 2;
    } catch (const std::exception& ex) {
        std::fprintf(stderr, "error: %s\n", ex.what());
        return 1;
    }
    return 0;
}
