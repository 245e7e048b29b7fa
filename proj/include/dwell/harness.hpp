#pragma once

#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "dwell/agmon.hpp"
#include "dwell/config.hpp"
#include "dwell/hartree.hpp"
#include "dwell/quasimodes.hpp"
#include "dwell/spectrum.hpp"

namespace dwell {

/// One row of the L-sweep. The first twenty fields are the report contract;
/// the trailing fields track the quasi-mode and tunneling-term quantities the
/// slope fits need per row.
struct SweepRecord {
    double L = 0.0, T = 0.0;
    double mu_plus = 0.0, mu_minus = 0.0, mu_ex = 0.0, mu_D = 0.0;
    double gap1 = 0.0, gap2 = 0.0, gap1_quotient = 0.0;
    double l1_diff = 0.0, l2_diff = 0.0, linf_diff = 0.0;
    double overlap_ll_rr = 0.0, overlap_psi = 0.0, residual_norm = 0.0, psi_defect = 0.0;
    double norm_chi_uplus_ur = 0.0;
    double envelope_C_upper = 0.0, envelope_c_lower = 0.0;
    long scf_iters = 0;
    // trailing tracked quantities
    double psi_norm_err = 0.0, overlap_psi_rr = 0.0;
    double psi_plus_diff = 0.0, psi_minus_diff = 0.0;
    double term_loc_mass_plus = 0.0, term_loc_mass_minus = 0.0;
    double term_grad_overlap = 0.0, term_pot_overlap = 0.0;
    double term_tail_mass = 0.0, term_convol_lr = 0.0;
    double term_strip_pot_plus = 0.0, term_strip_pot_lr = 0.0, term_strip_mf = 0.0;
};

struct QuasiSensitivityRow {
    double L = 0.0, c = 0.0;
    double overlap_psi = 0.0, residual_norm = 0.0, psi_defect = 0.0;
    std::string failure;  // empty on success
};

struct SweepOutcome {
    std::vector<SweepRecord> records;  // successful rows, ascending in L
    std::vector<std::pair<double, std::string>> failures;
    std::vector<QuasiSensitivityRow> sensitivity;
};

// ---------------------------------------------------------------------------
// Tunneling-term table. All values are nonnegative; the
// mixed-gradient overlap changes sign pointwise, so its absolute value is the
// tracked magnitude.
// ---------------------------------------------------------------------------
struct TunnelingTerms {
    double overlap_lr = 0.0;
    double loc_mass_plus = 0.0, loc_mass_minus = 0.0;
    double grad_overlap_abs = 0.0;
    double pot_overlap = 0.0;
    double tail_mass = 0.0;
    double convol_lr = 0.0;
    double strip_pot_plus = 0.0, strip_pot_lr = 0.0;
    double strip_mf = 0.0;
};

inline TunnelingTerms tunneling_terms(const GridField& u_l, const GridField& u_r,
                                    const SpectralSummary& sum, const GridField& V_dw,
                                    const PotentialSpec& pspec, const InteractionSpec& ispec,
                                    double R) {
    const Grid& g = u_l.grid;
    const GridField V_r = sample_potential(g, pspec, PotentialKind::right);
    TunnelingTerms a;
    a.overlap_lr = inner(u_l, u_r);

    double grad = 0.0;
    const double inv_h = 1.0 / g.h;
    for (int i = 0; i + 1 < g.n; ++i)
        grad += (u_l[i + 1] - u_l[i]) * (u_r[i + 1] - u_r[i]) * inv_h;
    a.grad_overlap_abs = std::fabs(grad);

    GridField rho_plus(g), rho_l(g), rho_r(g);
    for (int i = 0; i < g.n; ++i) {
        rho_plus[i] = sum.u_plus[i] * sum.u_plus[i];
        rho_l[i] = u_l[i] * u_l[i];
        rho_r[i] = u_r[i] * u_r[i];
    }
    const GridField w_rho_plus = convolve_density(rho_plus, ispec);
    const GridField w_rho_l = convolve_density(rho_l, ispec);
    a.convol_lr = inner(w_rho_l, rho_r);

    for (int i = 0; i < g.n; ++i) {
        const double x = g.x(i);
        const double h = g.h;
        a.pot_overlap += h * V_dw[i] * u_l[i] * u_r[i];
        if (x >= -R) {
            a.tail_mass += h * rho_l[i];
            a.strip_pot_lr += h * V_r[i] * rho_l[i];
        }
        if (std::fabs(x) <= R) {
            a.loc_mass_plus += h * rho_plus[i];
            a.loc_mass_minus += h * sum.u_minus[i] * sum.u_minus[i];
            a.strip_pot_plus += h * rho_plus[i] * (V_r[i] - V_dw[i]);
            a.strip_mf += h * ispec.lambda * rho_plus[i] * w_rho_plus[i];
        }
    }
    return a;
}

// ---------------------------------------------------------------------------
// Pairing structure of the higher spectrum: double-well eigenvalues grouped
// in pairs around single-well levels.
// ---------------------------------------------------------------------------
struct PairGroup {
    double mu_single = 0.0;
    double lower = 0.0, upper = 0.0;
    double max_deviation = 0.0;
    double splitting = 0.0;
};

struct PairingReport {
    std::vector<PairGroup> groups;
    std::vector<double> inter_group_gaps;  // gap between consecutive pair groups
};

inline PairingReport higher_pairs_check(const std::vector<double>& dw_values,
                                        const std::vector<double>& single_values) {
    if (dw_values.size() < 4 || dw_values.size() % 2 != 0 ||
        single_values.size() < dw_values.size() / 2)
        throw error("window mismatch");
    PairingReport rep;
    const size_t n_pairs = dw_values.size() / 2;
    for (size_t j = 0; j < n_pairs; ++j) {
        PairGroup gr;
        gr.mu_single = single_values[j];
        gr.lower = dw_values[2 * j];
        gr.upper = dw_values[2 * j + 1];
        gr.splitting = gr.upper - gr.lower;
        gr.max_deviation = std::max(std::fabs(gr.lower - gr.mu_single),
                                    std::fabs(gr.upper - gr.mu_single));
        rep.groups.push_back(gr);
        if (j + 1 < n_pairs)
            rep.inter_group_gaps.push_back(dw_values[2 * j + 2] - dw_values[2 * j + 1]);
    }
    return rep;
}

// ---------------------------------------------------------------------------
// Single-instance pipeline
// ---------------------------------------------------------------------------
inline SweepRecord run_instance(const RunConfig& cfg, double L,
                                std::vector<QuasiSensitivityRow>* sens = nullptr) {
    const PotentialSpec pspec(cfg.s, L);
    const InteractionSpec ispec(cfg.lambda, cfg.kernel_radius, cfg.kernel_height);
    const AgmonGeometry geom(pspec);
    const Grid g = build_grid(L, cfg.s, cfg.grid_h, cfg.grid_trunc_tol, cfg.grid_max_points);
    const GridField V = sample_potential(g, pspec, PotentialKind::double_well);

    ScfOptions scf;
    scf.damping = cfg.scf_damping;
    scf.tol = cfg.scf_tol;
    scf.max_iter = static_cast<int>(cfg.scf_max_iter);
    EigenOptions eig;
    eig.method = parse_eig_method(cfg.eig_method);
    eig.tol = cfg.eig_tol;

    const HartreeSolution dw = minimize(V, ispec, 1.0, scf, {-0.5 * L, 0.5 * L});
    const SpectralSummary sum = spectral_summary(V, dw.state, pspec, ispec, eig);

    auto [lw, rw] = solve_single_wells(g, pspec, ispec, scf);

    GridField rho(g);
    for (int i = 0; i < g.n; ++i) rho[i] = dw.state[i] * dw.state[i];
    const GridField mf = mean_field_term(rho, ispec);
    const DiscreteHamiltonian H = assemble_hamiltonian(V, mf);

    const EigenPair dir_r = dirichlet_ground(V, mf, pspec, cfg.dirichlet_c, Side::right, eig);
    const EigenPair dir_l = dirichlet_ground(V, mf, pspec, cfg.dirichlet_c, Side::left, eig);

    SweepRecord r;
    r.L = L;
    r.T = geom.tunneling();
    r.mu_plus = sum.mu_plus;
    r.mu_minus = sum.mu_minus;
    r.mu_ex = sum.mu_ex;
    r.mu_D = dir_r.value;
    r.gap1 = sum.gap1;
    r.gap2 = sum.gap2;
    r.gap1_quotient = gap_via_quotient(sum.u_plus, sum.u_minus).value;
    const EigenvectorDistances dist = eigenvector_distance_norms(sum);
    r.l1_diff = dist.l1;
    r.l2_diff = dist.l2;
    r.linf_diff = dist.linf;
    r.overlap_ll_rr = inner(lw.state, rw.state);
    r.norm_chi_uplus_ur = half_space_norm(sum.u_plus - rw.state, true);
    r.envelope_C_upper =
        check_upper_envelope(sum.u_plus, geom, cfg.agmon_epsilon, cfg.agmon_R).fitted_C_upper;
    r.envelope_c_lower =
        check_lower_envelope(sum.u_plus, geom, sum.mu_plus, cfg.agmon_epsilon, cfg.agmon_R)
            .fitted_c_lower;
    r.scf_iters = dw.iterations;

    // quasi-modes; re-solve the Dirichlet problem if quasi.c differs
    auto quasi_at = [&](double c) {
        const EigenPair* pr = &dir_r;
        const EigenPair* pl = &dir_l;
        EigenPair qr, ql;
        if (c != cfg.dirichlet_c) {
            qr = dirichlet_ground(V, mf, pspec, c, Side::right, eig);
            ql = dirichlet_ground(V, mf, pspec, c, Side::left, eig);
            pr = &qr;
            pl = &ql;
        }
        auto [chi_r, chi_l] = build_cutoffs(g, L, c);
        return build_quasimodes(H, *pr, *pl, pr->value, chi_r, chi_l, c);
    };

    const QuasiModeSet qm = quasi_at(cfg.quasi_c);
    r.overlap_psi = qm.overlap_psi_rl;
    r.residual_norm = qm.residual_norm;
    r.psi_defect = projection_defect(qm, sum);
    r.psi_norm_err = std::fabs(qm.psi_norm_defect);
    r.overlap_psi_rr = std::fabs(qm.overlap_psi_res);
    {
        GridField dplus = qm.psi_plus - sum.u_plus;
        GridField dminus = inner(qm.psi_minus, sum.u_minus) >= 0.0
                               ? qm.psi_minus - sum.u_minus
                               : (-1.0 * qm.psi_minus) - sum.u_minus;
        r.psi_plus_diff = norm(dplus);
        r.psi_minus_diff = norm(dminus);
    }

    const TunnelingTerms app =
        tunneling_terms(lw.state, rw.state, sum, V, pspec, ispec, cfg.terms_R);
    r.term_loc_mass_plus = app.loc_mass_plus;
    r.term_loc_mass_minus = app.loc_mass_minus;
    r.term_grad_overlap = app.grad_overlap_abs;
    r.term_pot_overlap = app.pot_overlap;
    r.term_tail_mass = app.tail_mass;
    r.term_convol_lr = app.convol_lr;
    r.term_strip_pot_plus = app.strip_pot_plus;
    r.term_strip_pot_lr = app.strip_pot_lr;
    r.term_strip_mf = app.strip_mf;

    if (sens && cfg.quasi_sensitivity) {
        for (double c : {0.5, 1.0, 2.0}) {
            QuasiSensitivityRow row;
            row.L = L;
            row.c = c;
            try {
                const QuasiModeSet q = quasi_at(c);
                row.overlap_psi = q.overlap_psi_rl;
                row.residual_norm = q.residual_norm;
                row.psi_defect = projection_defect(q, sum);
            } catch (const std::exception& e) {
                row.failure = e.what();
            }
            sens->push_back(row);
        }
    }
    return r;
}

/// Runs one record per L in parallel worker threads; failed instances are
/// recorded with their message, never dropped silently.
inline SweepOutcome run_sweep(const RunConfig& cfg) {
    const std::vector<double>& Ls = cfg.L_list;
    if (Ls.empty()) throw error("no instances");
    for (size_t i = 0; i + 1 < Ls.size(); ++i)
        if (!(Ls[i] < Ls[i + 1])) throw error("L_list must be strictly increasing");

    struct Slot {
        std::optional<SweepRecord> record;
        std::string failure;
        std::vector<QuasiSensitivityRow> sens;
    };
    std::vector<Slot> slots(Ls.size());
    std::atomic<size_t> next{0};
    auto worker = [&]() {
        while (true) {
            const size_t i = next.fetch_add(1);
            if (i >= Ls.size()) break;
            try {
                slots[i].record = run_instance(cfg, Ls[i], &slots[i].sens);
            } catch (const std::exception& e) {
                slots[i].failure = e.what();
            }
        }
    };
    size_t jobs = cfg.jobs > 0 ? static_cast<size_t>(cfg.jobs)
                               : std::max(1u, std::thread::hardware_concurrency());
    jobs = std::min(jobs, Ls.size());
    std::vector<std::thread> pool;
    for (size_t t = 0; t + 1 < jobs; ++t) pool.emplace_back(worker);
    worker();
    for (auto& th : pool) th.join();

    SweepOutcome out;
    for (size_t i = 0; i < Ls.size(); ++i) {
        if (slots[i].record)
            out.records.push_back(*slots[i].record);
        else
            out.failures.emplace_back(Ls[i], slots[i].failure);
        for (auto& s : slots[i].sens) out.sensitivity.push_back(s);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Column registry: CSV layout and fit accessors.
// ---------------------------------------------------------------------------
struct Column {
    std::string name;
    std::function<double(const SweepRecord&)> get;
};

inline const std::vector<Column>& sweep_columns() {
    static const std::vector<Column> cols = {
        {"L", [](const SweepRecord& r) { return r.L; }},
        {"T", [](const SweepRecord& r) { return r.T; }},
        {"mu_plus", [](const SweepRecord& r) { return r.mu_plus; }},
        {"mu_minus", [](const SweepRecord& r) { return r.mu_minus; }},
        {"mu_ex", [](const SweepRecord& r) { return r.mu_ex; }},
        {"mu_D", [](const SweepRecord& r) { return r.mu_D; }},
        {"gap1", [](const SweepRecord& r) { return r.gap1; }},
        {"gap2", [](const SweepRecord& r) { return r.gap2; }},
        {"gap1_quotient", [](const SweepRecord& r) { return r.gap1_quotient; }},
        {"l1_diff", [](const SweepRecord& r) { return r.l1_diff; }},
        {"l2_diff", [](const SweepRecord& r) { return r.l2_diff; }},
        {"linf_diff", [](const SweepRecord& r) { return r.linf_diff; }},
        {"overlap_ll_rr", [](const SweepRecord& r) { return r.overlap_ll_rr; }},
        {"overlap_psi", [](const SweepRecord& r) { return r.overlap_psi; }},
        {"residual_norm", [](const SweepRecord& r) { return r.residual_norm; }},
        {"psi_defect", [](const SweepRecord& r) { return r.psi_defect; }},
        {"norm_chi_uplus_ur", [](const SweepRecord& r) { return r.norm_chi_uplus_ur; }},
        {"envelope_C_upper", [](const SweepRecord& r) { return r.envelope_C_upper; }},
        {"envelope_c_lower", [](const SweepRecord& r) { return r.envelope_c_lower; }},
        {"scf_iters", [](const SweepRecord& r) { return static_cast<double>(r.scf_iters); }},
        {"psi_norm_err", [](const SweepRecord& r) { return r.psi_norm_err; }},
        {"overlap_psi_rr", [](const SweepRecord& r) { return r.overlap_psi_rr; }},
        {"psi_plus_diff", [](const SweepRecord& r) { return r.psi_plus_diff; }},
        {"psi_minus_diff", [](const SweepRecord& r) { return r.psi_minus_diff; }},
        {"term_loc_mass_plus", [](const SweepRecord& r) { return r.term_loc_mass_plus; }},
        {"term_loc_mass_minus", [](const SweepRecord& r) { return r.term_loc_mass_minus; }},
        {"term_grad_overlap", [](const SweepRecord& r) { return r.term_grad_overlap; }},
        {"term_pot_overlap", [](const SweepRecord& r) { return r.term_pot_overlap; }},
        {"term_tail_mass", [](const SweepRecord& r) { return r.term_tail_mass; }},
        {"term_convol_lr", [](const SweepRecord& r) { return r.term_convol_lr; }},
        {"term_strip_pot_plus", [](const SweepRecord& r) { return r.term_strip_pot_plus; }},
        {"term_strip_pot_lr", [](const SweepRecord& r) { return r.term_strip_pot_lr; }},
        {"term_strip_mf", [](const SweepRecord& r) { return r.term_strip_mf; }},
    };
    return cols;
}

/// Fit quantities: every sweep column plus composites derived from several
/// columns (the Dirichlet eigenvalue proximity).
inline std::function<double(const SweepRecord&)> quantity_accessor(const std::string& name) {
    if (name == "dirichlet_gap")
        return [](const SweepRecord& r) { return std::fabs(r.mu_plus - r.mu_D); };
    for (const Column& c : sweep_columns())
        if (c.name == name) return c.get;
    throw error(format("unknown quantity '%s'", name.c_str()));
}

// ---------------------------------------------------------------------------
// Slope fits in (ln T, ln value) coordinates
// ---------------------------------------------------------------------------
struct SlopeFit {
    std::string quantity;
    std::vector<std::pair<double, double>> points;  // (ln T, ln value)
    double slope = 0.0, intercept = 0.0, r_squared = 0.0;
    int rows_excluded = 0;
};

inline double default_noise_floor(const RunConfig& cfg) { return 100.0 * cfg.eig_tol; }

inline SlopeFit fit_slope(const std::vector<SweepRecord>& records, const std::string& quantity,
                          double noise_floor) {
    const auto get = quantity_accessor(quantity);
    SlopeFit fit;
    fit.quantity = quantity;
    for (const SweepRecord& r : records) {
        const double v = get(r);
        if (!(v > noise_floor)) {
            ++fit.rows_excluded;
            continue;
        }
        fit.points.emplace_back(std::log(r.T), std::log(v));
    }
    if (fit.points.size() < 3) throw error("insufficient points above noise floor");

    double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
    const double n = static_cast<double>(fit.points.size());
    for (const auto& [x, y] : fit.points) {
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
        syy += y * y;
    }
    const double denom = n * sxx - sx * sx;
    if (denom == 0.0) throw error("degenerate abscissa in slope fit");
    fit.slope = (n * sxy - sx * sy) / denom;
    fit.intercept = (sy - fit.slope * sx) / n;
    double ss_res = 0.0, ss_tot = 0.0;
    const double mean_y = sy / n;
    for (const auto& [x, y] : fit.points) {
        const double pred = fit.slope * x + fit.intercept;
        ss_res += (y - pred) * (y - pred);
        ss_tot += (y - mean_y) * (y - mean_y);
    }
    fit.r_squared = ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : 1.0;
    return fit;
}

// ---------------------------------------------------------------------------
// Acceptance thresholds over one sweep. Shared by the CLI exit code and the
// acceptance suite.
// ---------------------------------------------------------------------------
struct ThresholdResult {
    std::string name;
    bool pass = false;
    std::string detail;
};

namespace detail {

inline void push(std::vector<ThresholdResult>& out, const std::string& name, bool pass,
                 const std::string& detail) {
    out.push_back(ThresholdResult{name, pass, detail});
}

inline void slope_threshold(std::vector<ThresholdResult>& out,
                            const std::vector<SweepRecord>& recs, double floor,
                            const std::string& quantity, double slope_min, double slope_max,
                            double r2_min, const std::string& name) {
    try {
        const SlopeFit f = fit_slope(recs, quantity, floor);
        const bool pass = f.slope >= slope_min && f.slope <= slope_max &&
                          f.r_squared >= r2_min;
        push(out, name, pass,
             format("slope=%.4f (want [%.2f, %.2f]) r2=%.5f (want >= %.2f) points=%zu", f.slope,
                    slope_min, slope_max, f.r_squared, r2_min, f.points.size()));
    } catch (const std::exception& e) {
        push(out, name, false, e.what());
    }
}

}  // namespace detail

inline std::vector<ThresholdResult> evaluate_thresholds(const SweepOutcome& sweep,
                                                        const RunConfig& cfg) {
    using detail::push;
    using detail::slope_threshold;
    std::vector<ThresholdResult> out;
    const std::vector<SweepRecord>& recs = sweep.records;
    const double floor = default_noise_floor(cfg);
    const double huge_slope = 1e9;

    push(out, "instances", sweep.failures.empty(),
         format("%zu of %zu instances succeeded", recs.size(),
                recs.size() + sweep.failures.size()));

    bool ordered = true;
    bool gaps_positive = true;
    for (size_t i = 0; i < recs.size(); ++i) {
        if (i + 1 < recs.size() && !(recs[i + 1].T < recs[i].T)) ordered = false;
        if (!(recs[i].gap1 > 0.0 && recs[i].gap2 > 0.0)) gaps_positive = false;
    }
    push(out, "ordering", ordered && gaps_positive,
         "T strictly decreasing, gap1 and gap2 positive on every row");

    slope_threshold(out, recs, floor, "gap1", 0.8, 1.2, 0.99, "gap1_scaling");

    double min_gap2 = std::numeric_limits<double>::max();
    for (const auto& r : recs) min_gap2 = std::min(min_gap2, r.gap2);
    push(out, "gap2_floor", !recs.empty() && min_gap2 >= cfg.sweep_gap2_floor,
         format("min gap2 = %.4f (floor %.4f)", min_gap2, cfg.sweep_gap2_floor));

    slope_threshold(out, recs, floor, "l1_diff", 0.8, huge_slope, 0.95, "l1_diff_rate");
    slope_threshold(out, recs, floor, "l2_diff", 0.35, 0.65, 0.95, "l2_diff_rate");
    slope_threshold(out, recs, floor, "linf_diff", 0.35, huge_slope, 0.95, "linf_diff_rate");

    slope_threshold(out, recs, floor, "norm_chi_uplus_ur", 0.4, huge_slope, 0.0,
                    "two_mode_rate");

    slope_threshold(out, recs, floor, "residual_norm", 0.8, huge_slope, 0.0,
                    "quasi_residual_rate");
    slope_threshold(out, recs, floor, "overlap_psi", 0.8, huge_slope, 0.0,
                    "quasi_overlap_rate");
    slope_threshold(out, recs, floor, "psi_norm_err", 1.5, huge_slope, 0.0,
                    "quasi_norm_defect_rate");
    slope_threshold(out, recs, floor, "overlap_psi_rr", 1.5, huge_slope, 0.0,
                    "quasi_residual_overlap_rate");
    {
        bool nonneg = true;
        for (const auto& r : recs) nonneg = nonneg && r.overlap_psi >= 0.0;
        push(out, "quasi_overlap_sign", nonneg, "<psi_r, psi_l> >= 0 on every row");
    }

    slope_threshold(out, recs, floor, "psi_defect", 0.8, huge_slope, 0.0,
                    "projection_defect_rate");
    slope_threshold(out, recs, floor, "psi_plus_diff", 0.8, huge_slope, 0.0,
                    "psi_plus_approx_rate");
    slope_threshold(out, recs, floor, "psi_minus_diff", 0.8, huge_slope, 0.0,
                    "psi_minus_approx_rate");

    slope_threshold(out, recs, floor, "dirichlet_gap", 0.8, huge_slope, 0.0,
                    "dirichlet_proximity_rate");

    auto envelope_ratio = [&](auto get, const char* name) {
        double lo = std::numeric_limits<double>::max(), hi = 0.0;
        for (const auto& r : recs) {
            lo = std::min(lo, get(r));
            hi = std::max(hi, get(r));
        }
        const bool pass = !recs.empty() && lo > 0.0 && hi / lo < 10.0;
        push(out, name, pass, format("ratio max/min = %.3f (want < 10)", lo > 0 ? hi / lo : -1.0));
    };
    envelope_ratio([](const SweepRecord& r) { return r.envelope_C_upper; },
                   "envelope_upper_stability");
    envelope_ratio([](const SweepRecord& r) { return r.envelope_c_lower; },
                   "envelope_lower_stability");

    // tunneling-term table: nonnegative everywhere, each term decaying at rate >= 0.8
    const std::vector<std::string> term_cols = {
        "overlap_ll_rr",      "term_loc_mass_plus", "term_loc_mass_minus",
        "term_grad_overlap",   "term_pot_overlap",   "term_tail_mass",
        "term_convol_lr",      "term_strip_pot_plus", "term_strip_pot_lr",
        "term_strip_mf"};
    {
        bool nonneg = true;
        for (const auto& c : term_cols) {
            const auto get = quantity_accessor(c);
            for (const auto& r : recs) nonneg = nonneg && get(r) >= 0.0;
        }
        push(out, "tunneling_terms_nonnegative", nonneg, "all tunneling terms >= 0");
    }
    for (const auto& c : term_cols) {
        const auto get = quantity_accessor(c);
        bool all_zero = !recs.empty();
        for (const auto& r : recs) all_zero = all_zero && get(r) == 0.0;
        if (all_zero) {
            push(out, "tunneling_rate:" + c, true, "identically zero (no interaction)");
            continue;
        }
        slope_threshold(out, recs, floor, c, 0.8, huge_slope, 0.0, "tunneling_rate:" + c);
    }

    {
        bool ok = true;
        int used = 0;
        for (const auto& r : recs) {
            if (r.gap1 <= floor) continue;
            ++used;
            if (std::fabs(r.gap1_quotient - r.gap1) > 0.10 * r.gap1) ok = false;
        }
        push(out, "gap1_quotient_agreement", ok && used > 0,
             format("quotient formula within 10%% on %d usable rows", used));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Report emission: CSV, nested key-value report, plot-ready data files.
// ---------------------------------------------------------------------------
inline std::string sweep_csv(const std::vector<SweepRecord>& records) {
    const auto& cols = sweep_columns();
    std::string out;
    for (size_t c = 0; c < cols.size(); ++c) {
        if (c) out += ",";
        out += cols[c].name;
    }
    out += "\n";
    for (const SweepRecord& r : records) {
        for (size_t c = 0; c < cols.size(); ++c) {
            if (c) out += ",";
            if (cols[c].name == "scf_iters")
                out += std::to_string(r.scf_iters);
            else
                out += num17(cols[c].get(r));
        }
        out += "\n";
    }
    return out;
}

inline std::vector<SweepRecord> parse_sweep_csv(std::istream& in) {
    const auto& cols = sweep_columns();
    std::string header;
    if (!std::getline(in, header)) throw error("csv is empty");
    {
        std::string expected;
        for (size_t c = 0; c < cols.size(); ++c) {
            if (c) expected += ",";
            expected += cols[c].name;
        }
        if (header != expected) throw error("csv header mismatch");
    }
    std::vector<SweepRecord> records;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<double> vals;
        std::stringstream ss(line);
        std::string item;
        while (std::getline(ss, item, ',')) vals.push_back(std::stod(item));
        if (vals.size() != cols.size()) throw error("csv row width mismatch");
        SweepRecord r;
        size_t c = 0;
        auto take = [&]() { return vals[c++]; };
        r.L = take();
        r.T = take();
        r.mu_plus = take();
        r.mu_minus = take();
        r.mu_ex = take();
        r.mu_D = take();
        r.gap1 = take();
        r.gap2 = take();
        r.gap1_quotient = take();
        r.l1_diff = take();
        r.l2_diff = take();
        r.linf_diff = take();
        r.overlap_ll_rr = take();
        r.overlap_psi = take();
        r.residual_norm = take();
        r.psi_defect = take();
        r.norm_chi_uplus_ur = take();
        r.envelope_C_upper = take();
        r.envelope_c_lower = take();
        r.scf_iters = static_cast<long>(take());
        r.psi_norm_err = take();
        r.overlap_psi_rr = take();
        r.psi_plus_diff = take();
        r.psi_minus_diff = take();
        r.term_loc_mass_plus = take();
        r.term_loc_mass_minus = take();
        r.term_grad_overlap = take();
        r.term_pot_overlap = take();
        r.term_tail_mass = take();
        r.term_convol_lr = take();
        r.term_strip_pot_plus = take();
        r.term_strip_pot_lr = take();
        r.term_strip_mf = take();
        records.push_back(r);
    }
    return records;
}

inline const std::vector<std::string>& tracked_fit_quantities() {
    static const std::vector<std::string> q = {
        "gap1",          "l1_diff",        "l2_diff",        "linf_diff",
        "overlap_ll_rr", "overlap_psi",    "residual_norm",  "psi_defect",
        "psi_norm_err",  "overlap_psi_rr", "psi_plus_diff",  "psi_minus_diff",
        "norm_chi_uplus_ur", "dirichlet_gap"};
    return q;
}

/// Rendered key-value report: config echo, per-quantity fits, thresholds.
inline std::string render_report(const SweepOutcome& sweep, const RunConfig& cfg) {
    const double floor = default_noise_floor(cfg);
    std::string out = "dwell sweep report\n";
    out += "config\n";
    {
        std::istringstream echo(config_echo(cfg));
        std::string line;
        while (std::getline(echo, line)) out += "  " + line + "\n";
    }
    out += "instances\n";
    out += format("  rows %zu\n  failures %zu\n", sweep.records.size(), sweep.failures.size());
    for (const auto& [L, msg] : sweep.failures)
        out += format("  failed L=%s: %s\n", num17(L).c_str(), msg.c_str());
    out += "fits\n";
    for (const std::string& q : tracked_fit_quantities()) {
        out += "  " + q + "\n";
        try {
            const SlopeFit f = fit_slope(sweep.records, q, floor);
            out += format("    slope %s\n    intercept %s\n    r_squared %s\n    points %zu\n"
                          "    rows_excluded %d\n",
                          num17(f.slope).c_str(), num17(f.intercept).c_str(),
                          num17(f.r_squared).c_str(), f.points.size(), f.rows_excluded);
        } catch (const std::exception& e) {
            out += format("    unavailable %s\n", e.what());
        }
    }
    out += "thresholds\n";
    for (const ThresholdResult& t : evaluate_thresholds(sweep, cfg))
        out += format("  %s %s\n    %s\n", t.name.c_str(), t.pass ? "PASS" : "FAIL",
                      t.detail.c_str());
    if (!sweep.sensitivity.empty()) {
        out += "quasi_sensitivity\n";
        for (const auto& s : sweep.sensitivity) {
            if (s.failure.empty())
                out += format("  L=%s c=%s overlap_psi=%s residual_norm=%s psi_defect=%s\n",
                              num17(s.L).c_str(), num17(s.c).c_str(),
                              num17(s.overlap_psi).c_str(), num17(s.residual_norm).c_str(),
                              num17(s.psi_defect).c_str());
            else
                out += format("  L=%s c=%s failed: %s\n", num17(s.L).c_str(),
                              num17(s.c).c_str(), s.failure.c_str());
        }
    }
    return out;
}

/// Writes sweep.csv, report.txt, config_echo.cfg and two plot files per
/// tracked quantity under out_dir.
inline void emit_report(const SweepOutcome& sweep, const RunConfig& cfg,
                        const std::string& out_dir) {
    namespace fs = std::filesystem;
    std::error_code ec;
    fs::create_directories(fs::path(out_dir) / "plots", ec);
    if (ec) throw error(format("cannot create output directory %s: %s", out_dir.c_str(),
                               ec.message().c_str()));

    auto write_file = [&](const fs::path& p, const std::string& content) {
        std::ofstream f(p, std::ios::binary);
        if (!f) throw error(format("cannot write %s", p.string().c_str()));
        f << content;
        if (!f) throw error(format("write failed for %s", p.string().c_str()));
    };

    write_file(fs::path(out_dir) / "sweep.csv", sweep_csv(sweep.records));
    write_file(fs::path(out_dir) / "report.txt", render_report(sweep, cfg));
    write_file(fs::path(out_dir) / "config_echo.cfg", config_echo(cfg));

    for (const std::string& q : tracked_fit_quantities()) {
        const auto get = quantity_accessor(q);
        std::string vs_L, loglog;
        for (const SweepRecord& r : sweep.records) {
            const double v = get(r);
            vs_L += num17(r.L) + " " + num17(v) + "\n";
            if (v > 0.0) loglog += num17(std::log(r.T)) + " " + num17(std::log(v)) + "\n";
        }
        write_file(fs::path(out_dir) / "plots" / (q + "_vs_L.dat"), vs_L);
        write_file(fs::path(out_dir) / "plots" / (q + "_loglog.dat"), loglog);
    }
}

}  // namespace dwell
