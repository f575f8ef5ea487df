#pragma once

#include <optional>
#include <string>
#include <vector>

#include "leastgrad/dirichlet.hpp"
#include "leastgrad/perimeter.hpp"
#include "leastgrad/whitney.hpp"

namespace leastgrad {

struct ReportRow {
    std::string scenario;
    std::string quantity;
    std::string parameter;
    double value = 0;
    std::optional<double> reference;
    std::optional<double> rel_error;
    bool pass = true;
};

struct ScenarioReport {
    std::vector<ReportRow> rows;
    bool all_passed() const {
        for (const auto& r : rows)
            if (!r.pass) return false;
        return true;
    }
};

/// Runs a scenario given as JSON text (either a scenario object or a manifest
/// with a "config" key). Writes report.csv, field dumps and manifest.json into
/// out_dir (created if missing). Returns the report.
ScenarioReport run_scenario_text(const std::string& json_text, const std::string& out_dir);

/// File-based wrapper: parses, validates, runs, writes artifacts.
/// Exit status: 0 all rows pass, 1 failed rows or solver failure, 2 invalid config.
int run_scenario(const std::string& config_path, const std::string& out_dir);

/// Canonical 64-bit FNV-1a hash of the configuration text (manifest field).
std::string config_hash(const std::string& canonical_json);

void write_report_csv(const std::string& path, const ScenarioReport& report);

} // namespace leastgrad
