#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "weylscat/scattering.hpp"

namespace weylscat {

// One probe of the truncated series against the direct value.
struct convergence_row {
    double lambda = 0.0;
    int n_terms = 0;
    double series_error = 0.0;
    double tail_estimate = 0.0;
    bool converged = false;
};

// One partial sum of the Dirichlet-trace series that has no limit.
struct diagnostics_row {
    int n_terms = 0;
    double trace_norm = 0.0;
};

// Shortest round-trippable decimal form, 12 significant digits.
std::string format_g12(double x);

// Column order shared by the sweep table and the plotdata expansion.
const std::vector<std::string>& sweep_columns();

void write_sweep_csv(std::ostream& os, const std::vector<scatter_point>& pts,
                     const std::string& digest);
void write_eigen_csv(std::ostream& os, const std::vector<scatter_point>& pts,
                     const std::string& digest);
void write_convergence_csv(std::ostream& os,
                           const std::vector<convergence_row>& rows,
                           const std::string& digest);
void write_diagnostics_csv(std::ostream& os, double lambda,
                           const std::vector<diagnostics_row>& rows,
                           const std::string& digest);

// Raw cells of a sweep.csv document. Throws config_error when the header or
// a row does not match the fixed column layout.
struct sweep_table {
    std::vector<std::vector<std::string>> rows;
};
sweep_table read_sweep_csv(std::istream& is);

// True when at least one row is not excluded.
bool any_included(const sweep_table& table);

// Writes one two-column (lambda, value) file per quantity column into dir,
// skipping excluded rows and empty cells. Returns the paths written.
std::vector<std::string> write_plotdata(const sweep_table& table,
                                        const std::string& dir);

}  // namespace weylscat
