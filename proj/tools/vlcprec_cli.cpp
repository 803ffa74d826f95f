// vlcprec: calibrate, design, sweep and verify from a JSON run configuration.
//
// Precedence: built-in defaults < config file < command-line flags.
// Exit codes: 0 completed (an infeasible design is a valid answer),
// 1 I/O failure, 2 configuration or input error, 3 numerical failure.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "vlcprec/config.hpp"
#include "vlcprec/experiments.hpp"
#include "vlcprec/metrics.hpp"
#include "vlcprec/precoder.hpp"
#include "vlcprec/verify.hpp"

namespace fs = std::filesystem;
using namespace vlcprec;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitIo = 1;
constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;

struct Overrides {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out;
    std::optional<int> trials;
    std::vector<int> k;
    std::vector<int> bits;
    std::optional<int> workers;
};

void add_common(CLI::App* cmd, Overrides& o) {
    cmd->add_option("-c,--config", o.config_path, "JSON run configuration (defaults when omitted)");
    cmd->add_option("--seed", o.seed, "master seed");
    cmd->add_option("--out", o.out, "output directory");
}

RunConfig resolve(const Overrides& o) {
    RunConfig c = o.config_path.empty() ? RunConfig{} : load_config(o.config_path);
    if (o.seed) c.seed = *o.seed;
    if (o.out) c.output_dir = *o.out;
    if (o.trials) c.sweep.trials = *o.trials;
    if (o.workers) c.sweep.workers = *o.workers;
    if (!o.k.empty()) {
        c.sweep.k_values = o.k;
        c.single.users = o.k.front();
    }
    if (!o.bits.empty()) {
        c.sweep.b_values = o.bits;
        c.single.bits = o.bits.front();
        c.quantizer.bits = o.bits.front();
    }
    c.validate();
    return c;
}

/// Frozen copy of the resolved configuration, with the range actually used.
void freeze_config(RunConfig c, const QuantizerConfig* q) {
    if (q) {
        c.quantizer.min_db = q->min_db;
        c.quantizer.max_db = q->max_db;
    }
    const fs::path dir(c.output_dir);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw fs::filesystem_error("cannot create output directory", dir, ec);
    detail::atomic_write(dir / "config.resolved.json", [&](std::ostream& os) { os << to_json(c).dump(2) << '\n'; });
}

std::string db(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4f", v);
    return buf;
}

json outcome_json(const DesignOutcome& o, const std::optional<EvaluationReport>& ev) {
    json j;
    j["status"] = to_string(o.status);
    j["solver_status"] = socp::to_string(o.stats.solver_status);
    j["iterations"] = o.stats.iterations;
    j["residuals"] = {{"primal", o.stats.residuals.primal}, {"dual", o.stats.residuals.dual}, {"gap", o.stats.residuals.gap}};
    j["solve_seconds"] = o.stats.solve_seconds;
    if (o.optimal()) {
        j["headroom_v"] = o.headroom_v;
        json w = json::array();
        for (Eigen::Index l = 0; l < o.precoders.rows(); ++l) {
            json row = json::array();
            for (Eigen::Index k = 0; k < o.precoders.cols(); ++k) row.push_back(o.precoders(l, k));
            w.push_back(row);
        }
        j["precoders_W"] = w;
    }
    if (ev) {
        json e;
        e["per_user_snir_db"] = std::vector<double>(ev->per_user_snir_db.data(),
                                                    ev->per_user_snir_db.data() + ev->per_user_snir_db.size());
        e["worst_user_snir_db"] = ev->worst_user_snir_db;
        e["worst_corner_snir_db"] = ev->worst_corner_snir_db;
        e["per_led_peak_power_W"] = std::vector<double>(ev->per_led_peak_power_W.data(),
                                                        ev->per_led_peak_power_W.data() + ev->per_led_peak_power_W.size());
        e["meets_target_on_actual_channel"] = ev->feasible;
        j["evaluation"] = e;
    }
    return j;
}

void print_outcome(const char* label, const DesignOutcome& o, const std::optional<EvaluationReport>& ev) {
    std::cout << label << ": " << to_string(o.status) << " (solver " << socp::to_string(o.stats.solver_status) << ", "
              << o.stats.iterations << " iterations, residuals " << o.stats.residuals.primal << " / "
              << o.stats.residuals.dual << " / " << o.stats.residuals.gap << ")\n";
    if (!o.optimal()) return;
    std::cout << "  headroom v = " << o.headroom_v << " W\n";
    if (ev) {
        std::cout << "  actual SNIR per user (dB):";
        for (Eigen::Index k = 0; k < ev->per_user_snir_db.size(); ++k) std::cout << ' ' << db(ev->per_user_snir_db[k]);
        std::cout << "\n  worst user " << db(ev->worst_user_snir_db) << " dB, worst corner "
                  << db(ev->worst_corner_snir_db) << " dB, peak LED power " << ev->per_led_peak_power_W.maxCoeff()
                  << " W\n";
    }
}

int cmd_calibrate(const Overrides& o) {
    RunConfig c = resolve(o);
    if (o.seed) c.calibration.seed = *o.seed;
    c.quantizer.min_db.reset();
    c.quantizer.max_db.reset();
    const auto t0 = std::chrono::steady_clock::now();
    const CalibrationLookup cal = calibrate_cached(c);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const QuantizerConfig q = cal.result.to_config(c.quantizer.bits, c.quantizer.db_factor);
    freeze_config(c, &q);
    const fs::path out = fs::path(c.output_dir) / "calibration.json";
    detail::atomic_write(out, [&](std::ostream& os) {
        json j = calibration_to_json(cal.result, calibration_key(c));
        j["seed"] = c.calibration.seed;
        os << j.dump(2) << '\n';
    });
    std::cout << "min_db " << cal.result.min_db << "\nmax_db " << cal.result.max_db << "\ndraws " << cal.result.draws
              << " (zero gains " << cal.result.zero_samples << ")\nseed " << c.calibration.seed << "\n"
              << (cal.from_cache ? "loaded from cache " + cal.cache_file.string() : "computed in " + db(secs) + " s")
              << "\nwrote " << out.string() << "\n";
    return kExitOk;
}

int cmd_design(const Overrides& o, const std::string& channel_file) {
    const RunConfig c = resolve(o);
    const QuantizerConfig range = resolve_quantizer(c);
    QuantizerConfig q = range;
    q.bits = c.single.bits;
    q.validate();

    ChannelMatrix actual;
    json source;
    if (!channel_file.empty()) {
        std::ifstream is(channel_file);
        if (!is) throw ConfigError("cannot read channel file " + channel_file);
        actual = read_channel_csv(is, channel_file);
        if (actual.leds() > kMaxEnumerableDim) throw ConfigError("channel file has too many columns");
        source = {{"channel_file", channel_file}};
    } else {
        const std::uint64_t seed = trial_seed(c.seed, c.single.users, c.single.bits, c.single.trial);
        const Scenario sc = make_scenario(c.room, c.leds(), c.single.users, seed);
        actual = channel_matrix(sc, c.optics);
        json users = json::array();
        for (const auto& p : sc.user_positions) users.push_back({p.x(), p.y(), p.z()});
        source = {{"scenario_seed", seed}, {"user_positions", users}};
    }
    const int k = actual.users();
    const DesignSpec spec = c.design.for_users(k, c.optics.responsivity_A_per_W);
    const QuantizedChannel qc = quantize(actual, q);
    const auto boxes = boxes_from_quantized(qc, q, c.sweep.zero_floor);
    std::vector<VertexSet> regions;
    for (const auto& b : boxes) regions.push_back(enumerate_vertices(b));

    const DesignOutcome robust = design(spec, regions, c.design_settings());
    const DesignOutcome nonrobust = design_nonrobust(spec, centroids(qc, q), c.design_settings());
    std::optional<EvaluationReport> er, en;
    if (robust.optimal()) er = evaluate(actual, regions, robust.precoders, spec);
    if (nonrobust.optimal()) en = evaluate(actual, regions, nonrobust.precoders, spec);

    std::cout << "users " << k << ", LEDs " << actual.leds() << ", bits " << q.bits << ", target "
              << c.design.target_snir_db << " dB\n";
    print_outcome("robust", robust, er);
    print_outcome("non-robust", nonrobust, en);

    freeze_config(c, &range);
    json report;
    report["source"] = source;
    report["users"] = k;
    report["leds"] = actual.leds();
    report["bits"] = q.bits;
    report["robust"] = outcome_json(robust, er);
    report["nonrobust"] = outcome_json(nonrobust, en);
    const fs::path out = fs::path(c.output_dir) / "design_report.json";
    detail::atomic_write(out, [&](std::ostream& os) { os << report.dump(2) << '\n'; });
    std::cout << "wrote " << out.string() << "\n";

    const bool failed = robust.status == DesignStatus::NumericalFailure ||
                        nonrobust.status == DesignStatus::NumericalFailure;
    return failed ? kExitNumerical : kExitOk;
}

void print_cells(const SweepResult& r) {
    std::printf("%3s %3s %6s %9s %9s %11s %11s %10s %10s %5s\n", "K", "B", "trials", "rob_feas%", "nr_feas%",
                "rob_wc_dB", "nr_wc_dB", "rob_act_dB", "nr_act_dB", "fail");
    for (const auto& c : r.cells) {
        std::printf("%3d %3d %6d %9.1f %9.1f %11.4f %11.4f %10.4f %10.4f %5d\n", c.k, c.b, c.trials,
                    c.robust_feasible_pct, c.nonrobust_feasible_pct, c.robust_worst_corner_db,
                    c.nonrobust_worst_corner_db, c.robust_actual_db, c.nonrobust_actual_db,
                    c.robust_failures + c.nonrobust_failures);
    }
    std::printf("\nworst-user actual SNIR (dB), pooled over K, feasible trials:\n%4s %12s %12s\n", "B", "non-robust",
                "robust");
    for (const auto& t : r.table) std::printf("%4d %12.4f %12.4f\n", t.b, t.nonrobust_actual_db, t.robust_actual_db);
}

int cmd_sweep(const Overrides& o, bool quiet) {
    const RunConfig c = resolve(o);
    const QuantizerConfig q = resolve_quantizer(c);
    freeze_config(c, &q);
    const SweepConfig sc = make_sweep_config(c, q);
    std::size_t last_pct = 0;
    const auto t0 = std::chrono::steady_clock::now();
    const SweepResult r = run_sweep(sc, [&](std::size_t done, std::size_t total) {
        const std::size_t pct = done * 100 / total;
        if (!quiet && pct >= last_pct + 5) {
            last_pct = pct;
            std::fprintf(stderr, "\r%3zu%% (%zu/%zu trials)", pct, done, total);
            if (done == total) std::fputc('\n', stderr);
        }
    });
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    emit_outputs(r, c.output_dir, EmitOptions{c.sweep.svg});
    print_cells(r);
    std::printf("\n%zu trials in %.1f s; outputs in %s\n", r.records.size(), secs, c.output_dir.c_str());
    return kExitOk;
}

int cmd_verify(const Overrides& o) {
    RunConfig c = resolve(o);
    if (!o.trials) c.sweep.trials = 20;
    if (o.k.empty()) c.sweep.k_values = {2, 3, 4};
    const QuantizerConfig q = resolve_quantizer(c);
    const SweepConfig sc = make_sweep_config(c, q);

    std::vector<CheckResult> checks;
    const auto so = run_solver_oracle(20, 5, c.seed);
    checks.push_back({"solver oracle", so.planted_ok == so.planted && so.infeasible_ok == so.infeasible,
                      detail::fmtn("%d/%d planted optima (worst rel err %.2e), %d/%d infeasible certified", so.planted_ok,
                                   so.planted, so.worst_rel_error, so.infeasible_ok, so.infeasible)});

    InvariantAccumulator acc(1000, 2000);
    const SweepResult r = run_sweep(sc, {}, [&](const TrialDetail& t) { acc.observe(t); });
    const double tol = 1e-6;
    checks.push_back({"robust guarantee", acc.min_vertex_ratio() >= 1 - tol && acc.min_interior_ratio() >= 1 - tol,
                      detail::fmtn("%d robust designs; min SNIR/target at vertices %.9f, interior %.9f",
                                   acc.robust_feasible(), acc.min_vertex_ratio(), acc.min_interior_ratio())});
    checks.push_back({"worst-corner binding", acc.max_binding_gap_db() <= 1e-3,
                      detail::fmtn("max |worst corner - target| = %.2e dB", acc.max_binding_gap_db())});
    checks.push_back({"sign invariance", acc.sign_violations() == 0,
                      detail::fmtn("%d sign changes over region vertices", acc.sign_violations())});
    checks.push_back({"power envelope", acc.power_violations() == 0,
                      detail::fmtn("%d designs, power range [%.4f, %.4f] W", acc.power_checked(), acc.power_min_W(),
                                   acc.power_max_W())});
    bool subset = true;
    for (const auto& cell : r.cells) subset = subset && cell.robust_feasible <= cell.nonrobust_feasible;
    checks.push_back({"robust feasible set within non-robust", subset, "per (K, B) cell"});
    const auto si = run_scaling_invariance(sc, 4);
    checks.push_back({"scaling invariance", si.worst_rel <= 1e-6,
                      detail::fmtn("%d comparisons, worst relative change in v %.2e", si.compared, si.worst_rel)});

    bool ok = true;
    for (const auto& ch : checks) {
        std::cout << (ch.passed ? "PASS " : "FAIL ") << ch.name << ": " << ch.detail << "\n";
        ok = ok && ch.passed;
    }
    return ok ? kExitOk : kExitNumerical;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Robust multi-user precoding for quantized VLC channels"};
    app.require_subcommand(1);
    Overrides o;
    std::string channel_file;
    bool quiet = false;

    auto* cal = app.add_subcommand("calibrate", "estimate the quantizer dynamic range");
    add_common(cal, o);

    auto* des = app.add_subcommand("design", "design robust and non-robust precoders for one scenario");
    add_common(des, o);
    des->add_option("--channel-file", channel_file, "K x L CSV of nonnegative gains instead of a random scenario");
    des->add_option("--k", o.k, "number of users")->delimiter(',')->expected(1);
    des->add_option("--bits", o.bits, "bits per channel component")->delimiter(',')->expected(1);

    auto* sw = app.add_subcommand("sweep", "Monte Carlo sweep over users and bits");
    add_common(sw, o);
    sw->add_option("--trials", o.trials, "trials per (K, B) cell");
    sw->add_option("--k", o.k, "comma-separated user counts")->delimiter(',');
    sw->add_option("--bits", o.bits, "comma-separated bit counts")->delimiter(',');
    sw->add_option("--workers", o.workers, "worker threads (0 = all cores)");
    sw->add_flag("-q,--quiet", quiet, "no progress output");

    auto* ver = app.add_subcommand("verify", "run the invariant suites");
    add_common(ver, o);
    ver->add_option("--trials", o.trials, "trials per cell (default 20)");
    ver->add_option("--k", o.k, "comma-separated user counts (default 2,3,4)")->delimiter(',');
    ver->add_option("--bits", o.bits, "comma-separated bit counts")->delimiter(',');

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kExitOk : kExitConfig;
    }

    try {
        if (*cal) return cmd_calibrate(o);
        if (*des) return cmd_design(o, channel_file);
        if (*sw) return cmd_sweep(o, quiet);
        if (*ver) return cmd_verify(o);
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const std::domain_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const fs::filesystem_error& e) {
        std::cerr << "I/O error: " << e.what() << "\n";
        return kExitIo;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitIo;
    }
    return kExitOk;
}
