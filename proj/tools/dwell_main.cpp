// dwell: double-well Hartree laboratory command line.
//
// Subcommands:
//   solve   one (L, lambda, s) instance, prints the spectral summary
//   sweep   full L-sweep, writes CSV + report + plot data
//   report  re-render report and plot files from an existing sweep.csv
//
// Exit codes: 0 success (and all thresholds met), 2 computation succeeded but
// a threshold failed, 1 error.

#include <CLI11.hpp>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>

#include "dwell/harness.hpp"

namespace {

std::string default_out_dir(const std::string& flag_value) {
    if (!flag_value.empty()) return flag_value;
    if (const char* env = std::getenv("DWELL_OUT")) return std::string(env);
    return "out";
}

int run_solve(const dwell::RunConfig& cfg) {
    using namespace dwell;
    const PotentialSpec pspec(cfg.s, cfg.L);
    const InteractionSpec ispec(cfg.lambda, cfg.kernel_radius, cfg.kernel_height);
    const Grid g = build_grid(cfg.L, cfg.s, cfg.grid_h, cfg.grid_trunc_tol, cfg.grid_max_points);
    const GridField V = sample_potential(g, pspec, PotentialKind::double_well);
    ScfOptions scf;
    scf.damping = cfg.scf_damping;
    scf.tol = cfg.scf_tol;
    scf.max_iter = static_cast<int>(cfg.scf_max_iter);
    EigenOptions eig;
    eig.method = parse_eig_method(cfg.eig_method);
    eig.tol = cfg.eig_tol;

    const HartreeSolution dw = minimize(V, ispec, 1.0, scf, {-0.5 * cfg.L, 0.5 * cfg.L});
    const SpectralSummary sum = spectral_summary(V, dw.state, pspec, ispec, eig);

    std::printf("L = %s\n", num17(cfg.L).c_str());
    std::printf("lambda = %s\n", num17(cfg.lambda).c_str());
    std::printf("E_DW = %s\n", num17(dw.energy).c_str());
    std::printf("mu_plus = %s\n", num17(sum.mu_plus).c_str());
    std::printf("mu_minus = %s\n", num17(sum.mu_minus).c_str());
    std::printf("mu_ex = %s\n", num17(sum.mu_ex).c_str());
    std::printf("gap1 = %s\n", num17(sum.gap1).c_str());
    std::printf("gap2 = %s\n", num17(sum.gap2).c_str());
    std::printf("T = %s\n", num17(sum.tunneling).c_str());
    std::printf("scf_iterations = %d\n", dw.iterations);
    std::printf("scf_residual = %s\n", num17(dw.final_residual).c_str());

    if (cfg.eig_k > 3) {
        GridField rho(g);
        for (int i = 0; i < g.n; ++i) rho[i] = dw.state[i] * dw.state[i];
        const DiscreteHamiltonian H = assemble_hamiltonian(V, mean_field_term(rho, ispec));
        const auto pairs = lowest_eigenpairs(H, static_cast<int>(cfg.eig_k), eig);
        for (size_t j = 0; j < pairs.size(); ++j)
            std::printf("mu_%zu = %s (%s)\n", j + 1, num17(pairs[j].value).c_str(),
                        pairs[j].parity == Parity::even
                            ? "even"
                            : (pairs[j].parity == Parity::odd ? "odd" : "none"));
    }
    return 0;
}

int run_sweep_cmd(const dwell::RunConfig& cfg, const std::string& out_dir) {
    using namespace dwell;
    const SweepOutcome sweep = run_sweep(cfg);
    emit_report(sweep, cfg, out_dir);
    bool all_pass = sweep.failures.empty();
    for (const ThresholdResult& t : evaluate_thresholds(sweep, cfg)) {
        std::printf("%-34s %s\n", t.name.c_str(), t.pass ? "PASS" : "FAIL");
        all_pass = all_pass && t.pass;
    }
    std::printf("outputs written to %s\n", out_dir.c_str());
    return all_pass ? 0 : 2;
}

int run_report_cmd(const dwell::RunConfig& cfg, const std::string& csv_path,
                   const std::string& out_dir) {
    using namespace dwell;
    std::ifstream in(csv_path);
    if (!in) throw error(format("missing file: %s", csv_path.c_str()));
    SweepOutcome sweep;
    sweep.records = parse_sweep_csv(in);
    emit_report(sweep, cfg, out_dir);
    bool all_pass = true;
    for (const ThresholdResult& t : evaluate_thresholds(sweep, cfg))
        all_pass = all_pass && t.pass;
    std::printf("report re-rendered from %s into %s\n", csv_path.c_str(), out_dir.c_str());
    return all_pass ? 0 : 2;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"dwell: Hartree ground states and tunneling spectra in a double well"};
    app.require_subcommand(1);

    std::string config_path;
    std::vector<std::string> overrides;
    std::string out_flag;
    std::string csv_path = "out/sweep.csv";
    long jobs_flag = -1;

    app.add_option("--config", config_path, "config file (key = value lines)");
    app.add_option("--set", overrides, "override, key=value (repeatable)");
    app.add_option("--out", out_flag, "output directory (default $DWELL_OUT or ./out)");
    app.add_option("--jobs", jobs_flag, "parallel sweep workers (0 = hardware)");

    CLI::App* solve = app.add_subcommand("solve", "solve one instance, print the summary");
    CLI::App* sweep = app.add_subcommand("sweep", "run the L-sweep and write outputs");
    CLI::App* report = app.add_subcommand("report", "re-render outputs from a sweep.csv");
    report->add_option("--csv", csv_path, "input CSV (default out/sweep.csv)");
    solve->fallthrough();
    sweep->fallthrough();
    report->fallthrough();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 1;
    }

    try {
        dwell::RunConfig cfg = dwell::parse_config(config_path, overrides);
        if (jobs_flag >= 0) cfg.jobs = jobs_flag;
        const std::string out_dir = default_out_dir(out_flag);
        if (solve->parsed()) return run_solve(cfg);
        if (sweep->parsed()) return run_sweep_cmd(cfg, out_dir);
        if (report->parsed()) return run_report_cmd(cfg, csv_path, out_dir);
        return 1;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
}
