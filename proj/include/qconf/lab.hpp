#pragma once

// Experiment runner behind the command line front end.

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "qconf/q_summation.hpp"
#include "qconf/series_core.hpp"

namespace qconf::lab {

struct experiment_config {
    std::string command;
    std::vector<std::string> op_paths;
    double direction = 0.0;
    bool direction_set = false;
    std::vector<sector_point> z;
    std::vector<double> q_grid;
    q_mode mode = q_mode::discrete;
    int order = 60;
    std::string out;
    std::string plot;                // confluence: optional x/y plot data file
    std::optional<int> valuation;    // series normalisation overrides
    std::optional<cplx> leading;
    bool single_level = false;
};

struct column {
    std::string name;
    std::string unit;  // "1" for dimensionless, "rad", "abs", ...
};

struct result_table {
    std::vector<column> columns;
    std::vector<std::vector<std::string>> rows;
    nlohmann::json metadata;
    bool verdict = true;  // false turns into exit code 4

    std::string to_csv() const;
};

// Parses "re,im" or "re,im,arg"; the explicit argument selects the sheet.
sector_point parse_sector_point(const std::string& text);
std::vector<double> parse_grid(const std::string& text);
// q-grid invariant: strictly decreasing, every entry > 1.001.
void check_q_grid(const std::vector<double>& grid);

result_table cmd_polygon(const experiment_config& cfg);
result_table cmd_ladder(const experiment_config& cfg);
result_table cmd_sum(const experiment_config& cfg);
result_table cmd_qsum(const experiment_config& cfg);
result_table cmd_confluence(const experiment_config& cfg);
result_table cmd_stokes(const experiment_config& cfg);
result_table cmd_hypergeom(const experiment_config& cfg);
result_table cmd_validate(const experiment_config& cfg);

result_table run(const experiment_config& cfg);

// Full command line entry point; returns the process exit code.
int main_entry(int argc, char** argv);

std::string version_string();

}  // namespace qconf::lab
