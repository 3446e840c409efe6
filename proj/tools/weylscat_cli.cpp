#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "weylscat/config.hpp"
#include "weylscat/errors.hpp"
#include "weylscat/report.hpp"

namespace fs = std::filesystem;
using namespace weylscat;

namespace {

// Files created by the current invocation; unlinked when a later step fails
// so a failed run leaves no partial outputs behind.
struct output_set {
    std::vector<fs::path> written;

    void store(const fs::path& path, const std::string& content) {
        std::ofstream os(path, std::ios::binary);
        if (!os || !(os << content) || !os.flush())
            throw std::runtime_error("cannot write " + path.string());
        written.push_back(path);
    }
    void discard() {
        std::error_code ec;
        for (const fs::path& p : written) fs::remove(p, ec);
        written.clear();
    }
};

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw config_error("config: cannot read file " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

// Up to three non-excluded grid points: first, middle, last.
std::vector<const scatter_point*> pick_probes(
    const std::vector<scatter_point>& pts) {
    std::vector<const scatter_point*> included;
    for (const scatter_point& pt : pts)
        if (pt.exclusion == "none") included.push_back(&pt);
    std::vector<const scatter_point*> probes;
    if (included.empty()) return probes;
    probes.push_back(included.front());
    if (included.size() > 2) probes.push_back(included[included.size() / 2]);
    if (included.size() > 1) probes.push_back(included.back());
    return probes;
}

std::vector<convergence_row> convergence_report(const sweep_config& cfg,
                                                const sweep_options& opts,
                                                const std::vector<scatter_point>& pts) {
    std::vector<int> depths;
    for (int n : {10, 20, 50, 100, 200, 500})
        if (n <= cfg.n_series_terms) depths.push_back(n);
    if (depths.empty() || depths.back() != cfg.n_series_terms)
        depths.push_back(cfg.n_series_terms);

    std::vector<convergence_row> rows;
    for (const scatter_point* pt : pick_probes(pts)) {
        try {
            const tau_sample tau = sample_tau(cfg.system.left,
                                              cfg.system.right, pt->lambda,
                                              opts.threshold_eps);
            const frozen_robin_family fam = frozen_conditions(tau);
            eigen_scan_options eso;
            eso.k_max = cfg.n_series_terms;
            eso.want_trajectory = false;
            eso.h_max = opts.h_max;
            const auto pairs =
                eigen_scan(cfg.system.profile, fam.left, fam.right, eso);
            for (int n : depths) {
                series_options so = opts.series;
                so.n_terms = n;
                const r_series_result rs =
                    r_series(pt->lambda, pairs, tau, so);
                double err = 0.0;
                for (int a = 0; a < pt->r.dim; ++a)
                    for (int b = 0; b < pt->r.dim; ++b)
                        err = std::max(err, std::abs(rs.value.e[a][b] -
                                                     pt->r.e[a][b]));
                rows.push_back({pt->lambda, rs.n_terms, err,
                                rs.tail_estimate, rs.converged});
            }
        } catch (const numerical_error&) {
            // A probe that cannot be refined is dropped, not fatal: the sweep
            // row already carries its series error at full depth.
            continue;
        }
    }
    return rows;
}

int do_run(const std::string& config_path, const std::string& out_dir,
           int threads, bool force_series, bool no_series, bool diag_flag) {
    std::string text;
    std::optional<sweep_config> parsed;
    try {
        text = read_file(config_path);
        parsed = parse_config(text);
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    const sweep_config& cfg = *parsed;
    const std::string digest = config_digest(text);

    sweep_options opts;
    opts.compare_series = cfg.compare_series;
    if (force_series) opts.compare_series = true;
    if (no_series) opts.compare_series = false;
    opts.series.n_terms = cfg.n_series_terms;
    opts.series.series_tol = cfg.series_tol;
    opts.threads = threads;
    opts.h_max = cfg.system.profile.length() / cfg.mesh_nodes;
    const bool diagnostics = diag_flag || cfg.diagnostics;

    output_set outputs;
    try {
        const std::vector<scatter_point> pts =
            sweep(cfg.system, cfg.grid, opts);

        std::ostringstream sweep_doc;
        write_sweep_csv(sweep_doc, pts, digest);

        std::ostringstream eigen_doc, conv_doc, diag_doc;
        if (opts.compare_series) {
            write_eigen_csv(eigen_doc, pts, digest);
            write_convergence_csv(conv_doc, convergence_report(cfg, opts, pts),
                                  digest);
        }
        double lambda_div = 0.0;
        if (diagnostics) {
            lambda_div =
                std::min(0.0, cfg.system.profile.min_potential()) - 1.0;
            const std::vector<int> n_list = {1, 25, 50, 100, 200};
            const std::vector<double> norms = divergence_diagnostic(
                cfg.system.profile, lambda_div, n_list, opts.h_max);
            std::vector<diagnostics_row> rows;
            for (std::size_t i = 0; i < n_list.size(); ++i)
                rows.push_back({n_list[i], norms[i]});
            write_diagnostics_csv(diag_doc, lambda_div, rows, digest);
        }

        fs::create_directories(out_dir);
        outputs.store(fs::path(out_dir) / "sweep.csv", sweep_doc.str());
        if (opts.compare_series) {
            outputs.store(fs::path(out_dir) / "eigen.csv", eigen_doc.str());
            outputs.store(fs::path(out_dir) / "convergence.csv",
                          conv_doc.str());
        }
        if (diagnostics)
            outputs.store(fs::path(out_dir) / "diagnostics.csv",
                          diag_doc.str());
    } catch (const numerical_error& e) {
        outputs.discard();
        std::cerr << "error: numerical failure: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        outputs.discard();
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
    std::cout << "wrote " << outputs.written.size() << " files to " << out_dir
              << "\n";
    return 0;
}

int do_plotdata(const std::string& csv_path, std::string out_dir) {
    try {
        std::ifstream in(csv_path, std::ios::binary);
        if (!in) throw config_error("plotdata: cannot read " + csv_path);
        const sweep_table table = read_sweep_csv(in);
        if (out_dir.empty()) {
            const fs::path parent = fs::path(csv_path).parent_path();
            out_dir = parent.empty() ? "." : parent.string();
        }
        fs::create_directories(out_dir);
        const auto written = write_plotdata(table, out_dir);
        if (!any_included(table))
            std::cerr << "warning: every row of " << csv_path
                      << " is excluded; the .dat files are empty\n";
        std::cout << "wrote " << written.size() << " files to " << out_dir
                  << "\n";
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"scattering matrix and R-matrix energy sweeps"};
    app.require_subcommand(1);

    auto* run = app.add_subcommand("run", "sweep a grid from a JSON config");
    std::string config_path;
    std::string out_dir = "./out";
    int threads = 0;
    bool force_series = false, no_series = false, diagnostics = false;
    run->add_option("--config", config_path, "JSON system description")
        ->required();
    run->add_option("--out", out_dir, "output directory (default ./out)");
    run->add_option("--threads", threads,
                    "worker threads (0 = hardware concurrency)");
    auto* sflag =
        run->add_flag("--series", force_series, "force series comparison on");
    run->add_flag("--no-series", no_series, "disable series comparison")
        ->excludes(sflag);
    run->add_flag("--diagnostics", diagnostics,
                  "emit the divergent Dirichlet-trace partial sums");

    auto* plot = app.add_subcommand(
        "plotdata", "expand sweep.csv into per-quantity .dat files");
    std::string csv_path;
    std::string plot_out;
    plot->add_option("csv", csv_path, "sweep.csv produced by run")->required();
    plot->add_option("--out", plot_out,
                     "output directory (default: alongside the csv)");

    CLI11_PARSE(app, argc, argv);

    if (run->parsed())
        return do_run(config_path, out_dir, threads, force_series, no_series,
                      diagnostics);
    return do_plotdata(csv_path, plot_out);
}
