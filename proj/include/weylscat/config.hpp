#pragma once

#include <string>
#include <vector>

#include "weylscat/scattering.hpp"

namespace weylscat {

inline constexpr const char* kToolVersion = "weylscat 1.0.0";

// A configuration document failed to parse or validate. The message names
// the offending key.
struct config_error : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Fully validated sweep description: the system, the expanded energy grid,
// and the knobs the batch tool honours.
struct sweep_config {
    scatter_system system;
    std::vector<double> grid;
    int n_series_terms = 200;
    double series_tol = 1e-3;
    int mesh_nodes = 2048;
    bool compare_series = true;
    bool diagnostics = false;
};

// Parses a JSON system description. Unknown keys are rejected everywhere.
// Throws config_error (or invalid_profile from the profile constructors);
// both are std::invalid_argument.
sweep_config parse_config(const std::string& text);

// parse_config over the contents of a file; throws config_error when the
// file cannot be read.
sweep_config load_config(const std::string& path);

// FNV-1a 64-bit digest of the raw document, hex encoded; stamped into the
// CSV headers so outputs are traceable to their configuration.
std::string config_digest(const std::string& text);

}  // namespace weylscat
