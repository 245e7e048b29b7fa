// Sweep orchestration, slope fits, report files, pairing check.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "dwell/harness.hpp"

using namespace dwell;

namespace {

RunConfig mini_config(double lambda) {
    RunConfig cfg;
    cfg.lambda = lambda;
    cfg.L_list = {4.0, 5.0, 6.0};
    cfg.grid_h = 0.05;
    cfg.jobs = 2;
    return cfg;
}

}  // namespace

TEST_CASE("fit_slope on synthetic exact data recovers slope one") {
    std::vector<SweepRecord> recs;
    for (double L : {4.0, 5.0, 6.0, 7.0}) {
        SweepRecord r;
        r.L = L;
        r.T = std::exp(-L * L / 4.0);
        r.gap1 = 3.0 * r.T;  // exactly c * T
        recs.push_back(r);
    }
    const SlopeFit f = fit_slope(recs, "gap1", 1e-300);
    CHECK(f.slope == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(f.intercept == doctest::Approx(std::log(3.0)).epsilon(1e-10));
    CHECK(f.r_squared == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(f.rows_excluded == 0);
    CHECK(f.points.size() == 4);
}

TEST_CASE("fit_slope rejects starved inputs") {
    std::vector<SweepRecord> recs(5);
    for (int i = 0; i < 5; ++i) {
        recs[static_cast<size_t>(i)].T = std::exp(-4.0 - i);
        recs[static_cast<size_t>(i)].gap1 = 1e-12;  // everything below the floor
    }
    CHECK_THROWS_WITH_AS(fit_slope(recs, "gap1", 1e-8), "insufficient points above noise floor",
                         error);
    CHECK_THROWS_AS(fit_slope(recs, "no_such_quantity", 1e-8), error);
}

TEST_CASE("run_sweep validates its instance list") {
    RunConfig cfg;
    cfg.L_list = {};
    CHECK_THROWS_WITH_AS(run_sweep(cfg), "no instances", error);
    cfg.L_list = {4.0, 4.0, 5.0};
    CHECK_THROWS_WITH_AS(run_sweep(cfg), "L_list must be strictly increasing", error);
    cfg.L_list = {5.0, 4.0};
    CHECK_THROWS_WITH_AS(run_sweep(cfg), "L_list must be strictly increasing", error);
}

TEST_CASE("mini sweep: row count, T column, failure isolation") {
    const RunConfig cfg = mini_config(0.2);
    const SweepOutcome sweep = run_sweep(cfg);
    REQUIRE(sweep.records.size() == 3);
    CHECK(sweep.failures.empty());
    for (size_t i = 0; i < 3; ++i) {
        const double L = cfg.L_list[i];
        CHECK(sweep.records[i].L == L);
        CHECK(sweep.records[i].T == doctest::Approx(std::exp(-L * L / 4.0)).epsilon(1e-12));
        CHECK(sweep.records[i].gap1 > 0.0);
        CHECK(sweep.records[i].gap2 > 0.0);
        CHECK(sweep.records[i].scf_iters > 0);
    }
    // an impossible quasi cutoff fails that instance but not the sweep
    RunConfig bad = cfg;
    bad.quasi_c = 1.4;  // 3c >= L at L = 4
    const SweepOutcome partial = run_sweep(bad);
    CHECK(partial.records.size() == 2);
    REQUIRE(partial.failures.size() == 1);
    CHECK(partial.failures[0].first == 4.0);
    CHECK(partial.failures[0].second == "cutoff bands overlap wells");
}

TEST_CASE("sweep rows are deterministic and CSV round-trips") {
    const RunConfig cfg = mini_config(0.2);
    const SweepOutcome a = run_sweep(cfg);
    const SweepOutcome b = run_sweep(cfg);
    const std::string csv_a = sweep_csv(a.records);
    const std::string csv_b = sweep_csv(b.records);
    CHECK(csv_a == csv_b);  // byte-identical re-run

    std::istringstream in(csv_a);
    const std::vector<SweepRecord> parsed = parse_sweep_csv(in);
    CHECK(sweep_csv(parsed) == csv_a);  // lossless round trip
}

TEST_CASE("tunneling terms: nonnegative, zero interaction strip term at lambda 0") {
    const SweepOutcome sweep = run_sweep(mini_config(0.0));
    for (const SweepRecord& r : sweep.records) {
        CHECK(r.overlap_ll_rr >= 0.0);
        CHECK(r.term_loc_mass_plus >= 0.0);
        CHECK(r.term_loc_mass_minus >= 0.0);
        CHECK(r.term_grad_overlap >= 0.0);
        CHECK(r.term_pot_overlap >= 0.0);
        CHECK(r.term_tail_mass >= 0.0);
        CHECK(r.term_convol_lr >= 0.0);
        CHECK(r.term_strip_pot_plus >= 0.0);
        CHECK(r.term_strip_pot_lr >= 0.0);
        CHECK(r.term_strip_mf == 0.0);
    }
}

TEST_CASE("emit_report writes the full output tree") {
    namespace fs = std::filesystem;
    const RunConfig cfg = mini_config(0.2);
    const SweepOutcome sweep = run_sweep(cfg);
    const fs::path dir = fs::temp_directory_path() / "dwell_harness_test";
    fs::remove_all(dir);
    emit_report(sweep, cfg, dir.string());

    CHECK(fs::exists(dir / "sweep.csv"));
    CHECK(fs::exists(dir / "report.txt"));
    CHECK(fs::exists(dir / "config_echo.cfg"));
    CHECK(fs::exists(dir / "plots" / "gap1_vs_L.dat"));
    CHECK(fs::exists(dir / "plots" / "gap1_loglog.dat"));

    // CSV row count = |L_list|
    std::ifstream csv(dir / "sweep.csv");
    int lines = 0;
    std::string line;
    while (std::getline(csv, line)) ++lines;
    CHECK(lines == 1 + 3);

    // the echoed config parses back to the same echo
    RunConfig round;
    std::ifstream echo(dir / "config_echo.cfg");
    apply_config_text(round, echo, "echo");
    CHECK(config_echo(round) == config_echo(cfg));

    // plot files are two-column whitespace-separated text
    std::ifstream plot(dir / "plots" / "gap1_vs_L.dat");
    double x, y;
    int rows = 0;
    while (plot >> x >> y) ++rows;
    CHECK(rows == 3);
    fs::remove_all(dir);
}

TEST_CASE("threshold report names pass/fail consistently with fits") {
    const RunConfig cfg = mini_config(0.2);
    const SweepOutcome sweep = run_sweep(cfg);
    const auto thresholds = evaluate_thresholds(sweep, cfg);
    CHECK(!thresholds.empty());
    bool found_gap1 = false;
    for (const auto& t : thresholds) {
        if (t.name == "gap1_scaling") {
            found_gap1 = true;
            const SlopeFit f = fit_slope(sweep.records, "gap1", default_noise_floor(cfg));
            const bool expect = f.slope >= 0.8 && f.slope <= 1.2 && f.r_squared >= 0.99;
            CHECK(t.pass == expect);
        }
        if (t.name == "instances") CHECK(t.pass);
        if (t.name == "ordering") CHECK(t.pass);
    }
    CHECK(found_gap1);
    // the rendered report mentions every threshold by name
    const std::string report = render_report(sweep, cfg);
    for (const auto& t : thresholds) CHECK(report.find(t.name) != std::string::npos);
}

TEST_CASE("quasi-mode sensitivity rows at c in {0.5, 1.0, 2.0}") {
    RunConfig cfg = mini_config(0.0);
    cfg.L_list = {4.0, 5.0};
    cfg.quasi_sensitivity = true;
    const SweepOutcome sweep = run_sweep(cfg);
    REQUIRE(sweep.sensitivity.size() == 6);
    int failures = 0;
    for (const auto& row : sweep.sensitivity) {
        if (!row.failure.empty()) ++failures;
        if (row.failure.empty()) CHECK(row.residual_norm > 0.0);
    }
    // c = 2.0 violates 3c < L at both L = 4 and L = 5
    CHECK(failures == 2);
}

TEST_CASE("higher pairs: grouping around single-well levels") {
    // coarse double well at lambda = 0: single-well levels 1 and 3
    const Grid g = build_grid(6.0, 2.0, 0.05, 1e-10);
    const GridField V = sample_potential(g, PotentialSpec(2.0, 6.0), PotentialKind::double_well);
    const auto pairs = lowest_eigenpairs(assemble_hamiltonian(V, GridField(g)), 4, EigenOptions{});
    std::vector<double> dw_vals;
    for (const auto& p : pairs) dw_vals.push_back(p.value);

    const GridField Vr = sample_potential(g, PotentialSpec(2.0, 6.0), PotentialKind::right);
    const auto single = lowest_eigenpairs(assemble_hamiltonian(Vr, GridField(g)), 2, EigenOptions{});
    const PairingReport rep = higher_pairs_check(dw_vals, {single[0].value, single[1].value});

    REQUIRE(rep.groups.size() == 2);
    CHECK(rep.groups[0].mu_single == doctest::Approx(1.0).epsilon(2e-2));
    CHECK(rep.groups[1].mu_single == doctest::Approx(3.0).epsilon(2e-2));
    CHECK(rep.groups[0].splitting < 1e-2);
    CHECK(rep.groups[0].max_deviation < 0.05);
    REQUIRE(rep.inter_group_gaps.size() == 1);
    CHECK(rep.inter_group_gaps[0] > 1.5);

    CHECK_THROWS_WITH_AS(higher_pairs_check({1.0, 2.0}, {1.0}), "window mismatch", error);
    CHECK_THROWS_WITH_AS(higher_pairs_check(dw_vals, {single[0].value}), "window mismatch",
                         error);
}
