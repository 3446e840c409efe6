#include "weylscat/report.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "weylscat/config.hpp"

namespace weylscat {

namespace {

void provenance(std::ostream& os, const std::string& digest) {
    os << "# " << kToolVersion << "\n";
    os << "# config fnv1a64 " << digest << "\n";
}

void header(std::ostream& os, const std::string& digest,
            const std::string& columns) {
    provenance(os, digest);
    os << "# columns: " << columns << "\n";
    os << columns << "\n";
}

std::string joined_columns() {
    std::string all;
    for (const std::string& c : sweep_columns()) {
        if (!all.empty()) all += ',';
        all += c;
    }
    return all;
}

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> cells;
    std::string cell;
    for (char c : line) {
        if (c == ',') {
            cells.push_back(cell);
            cell.clear();
        } else {
            cell += c;
        }
    }
    cells.push_back(cell);
    return cells;
}

}  // namespace

std::string format_g12(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.12g", x);
    return buf;
}

const std::vector<std::string>& sweep_columns() {
    static const std::vector<std::string> cols = {
        "lambda", "channels", "exclusion", "ReS11", "ImS11", "ReS12",
        "ImS12",  "ReS21",    "ImS21",     "ReS22", "ImS22", "R11",
        "R12",    "R21",      "R22",       "T",     "series_error"};
    return cols;
}

void write_sweep_csv(std::ostream& os, const std::vector<scatter_point>& pts,
                     const std::string& digest) {
    header(os, digest, joined_columns());
    for (const scatter_point& pt : pts) {
        std::vector<std::string> cells(sweep_columns().size());
        cells[0] = format_g12(pt.lambda);
        cells[1] = std::to_string(pt.channels);
        cells[2] = pt.exclusion;
        if (pt.exclusion == "none") {
            const int d = pt.s.dim;
            for (int a = 0; a < d; ++a)
                for (int b = 0; b < d; ++b) {
                    const std::size_t base = 3 + 2 * (2 * a + b);
                    cells[base] = format_g12(pt.s.e[a][b].real());
                    cells[base + 1] = format_g12(pt.s.e[a][b].imag());
                    cells[11 + 2 * a + b] = format_g12(pt.r.e[a][b]);
                }
            cells[15] = format_g12(pt.transmission);
            if (std::isfinite(pt.series_error))
                cells[16] = format_g12(pt.series_error);
        }
        for (std::size_t i = 0; i < cells.size(); ++i)
            os << cells[i] << (i + 1 < cells.size() ? "," : "\n");
    }
}

void write_eigen_csv(std::ostream& os, const std::vector<scatter_point>& pts,
                     const std::string& digest) {
    header(os, digest, "lambda,k,frozen_lambda");
    for (const scatter_point& pt : pts) {
        if (pt.exclusion != "none") continue;
        for (std::size_t k = 0; k < pt.frozen_lambdas.size(); ++k)
            os << format_g12(pt.lambda) << ',' << k + 1 << ','
               << format_g12(pt.frozen_lambdas[k]) << "\n";
    }
}

void write_convergence_csv(std::ostream& os,
                           const std::vector<convergence_row>& rows,
                           const std::string& digest) {
    header(os, digest, "lambda,n_terms,series_error,tail_estimate,converged");
    for (const convergence_row& r : rows)
        os << format_g12(r.lambda) << ',' << r.n_terms << ','
           << format_g12(r.series_error) << ',' << format_g12(r.tail_estimate)
           << ',' << (r.converged ? 1 : 0) << "\n";
}

void write_diagnostics_csv(std::ostream& os, double lambda,
                           const std::vector<diagnostics_row>& rows,
                           const std::string& digest) {
    header(os, digest, "lambda,n_terms,trace_norm");
    for (const diagnostics_row& r : rows)
        os << format_g12(lambda) << ',' << r.n_terms << ','
           << format_g12(r.trace_norm) << "\n";
}

sweep_table read_sweep_csv(std::istream& is) {
    sweep_table table;
    std::string line;
    bool header_seen = false;
    const std::string expected = joined_columns();
    std::size_t line_no = 0;
    while (std::getline(is, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        if (!header_seen) {
            if (line != expected)
                throw config_error(
                    "sweep.csv: header does not match the sweep column "
                    "layout");
            header_seen = true;
            continue;
        }
        std::vector<std::string> cells = split_csv(line);
        if (cells.size() != sweep_columns().size())
            throw config_error("sweep.csv: line " + std::to_string(line_no) +
                               " has " + std::to_string(cells.size()) +
                               " cells, expected " +
                               std::to_string(sweep_columns().size()));
        char* end = nullptr;
        std::strtod(cells[0].c_str(), &end);
        if (end == cells[0].c_str() || *end != '\0')
            throw config_error("sweep.csv: line " + std::to_string(line_no) +
                               " has a non-numeric lambda");
        table.rows.push_back(std::move(cells));
    }
    if (!header_seen)
        throw config_error("sweep.csv: missing the column header line");
    return table;
}

bool any_included(const sweep_table& table) {
    for (const auto& row : table.rows)
        if (row[2] == "none") return true;
    return false;
}

std::vector<std::string> write_plotdata(const sweep_table& table,
                                        const std::string& dir) {
    std::vector<std::string> written;
    const auto& cols = sweep_columns();
    for (std::size_t c = 3; c < cols.size(); ++c) {
        const std::string path = dir + "/" + cols[c] + ".dat";
        std::ofstream os(path, std::ios::binary);
        if (!os)
            throw std::runtime_error("plotdata: cannot write " + path);
        os << "# " << kToolVersion << "\n";
        os << "# columns: lambda " << cols[c] << "\n";
        for (const auto& row : table.rows) {
            if (row[2] != "none" || row[c].empty()) continue;
            os << row[0] << ' ' << row[c] << "\n";
        }
        written.push_back(path);
    }
    return written;
}

}  // namespace weylscat
