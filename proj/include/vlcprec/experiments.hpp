#pragma once

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <functional>
#include <istream>
#include <limits>
#include <map>
#include <mutex>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include "vlcprec/channel.hpp"
#include "vlcprec/metrics.hpp"
#include "vlcprec/precoder.hpp"
#include "vlcprec/quantizer.hpp"
#include "vlcprec/region.hpp"
#include "vlcprec/scenario.hpp"

namespace vlcprec {

inline constexpr int kCsvSchemaVersion = 1;

/// Per-user design parameters shared by every user of a trial.
struct DesignParams {
    double target_snir_db = 15.0;
    double noise_variance = 1e-13;
    double amplitude = 1.0;
    double beta_W = 10.0;
    double p_max_W = 20.0;

    DesignSpec for_users(int k, double rho) const {
        return DesignSpec::uniform(k, db_to_linear(target_snir_db), noise_variance, rho, amplitude, beta_W, p_max_W);
    }
};

struct SweepConfig {
    std::vector<int> k_values{2, 3, 4, 5, 6, 7};
    std::vector<int> b_values{4, 8, 16};
    int trials = 500;
    std::uint64_t seed = 1;
    DesignParams design;
    RoomConfig room;
    OpticalParams optics;
    std::vector<Vec3> leds = place_leds(RoomConfig{}, 6);
    /// Range and dB convention; bits are replaced per sweep cell.
    QuantizerConfig quantizer;
    /// Widen cell 0 down to zero so out-of-view links stay inside their box.
    bool zero_floor = true;
    DesignSettings solver;
    /// 0 picks std::thread::hardware_concurrency().
    int workers = 0;

    void validate() const {
        if (k_values.empty() || b_values.empty()) throw std::invalid_argument("SweepConfig: empty sweep");
        if (trials < 1) throw std::invalid_argument("SweepConfig: trials must be >= 1");
        if (leds.empty()) throw std::invalid_argument("SweepConfig: no LEDs");
        if (leds.size() > static_cast<std::size_t>(kMaxEnumerableDim)) {
            throw std::invalid_argument("SweepConfig: too many LEDs for vertex enumeration");
        }
        for (int k : k_values) {
            if (k < 1) throw std::invalid_argument("SweepConfig: k values must be >= 1");
        }
        for (int b : b_values) {
            QuantizerConfig q = quantizer;
            q.bits = b;
            q.validate();
        }
        if (workers < 0) throw std::invalid_argument("SweepConfig: workers must be >= 0");
        room.validate();
        optics.validate();
        for (const auto& p : leds) {
            if (p.z() <= room.pd_height_max_m) {
                throw std::invalid_argument("SweepConfig: LEDs must sit above the highest PD");
            }
        }
        (void)design.for_users(1, optics.responsivity_A_per_W);
    }
};

inline constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

/// Outcome of one design inside a trial. dB fields are NaN unless feasible.
struct DesignSummary {
    DesignStatus status = DesignStatus::NumericalFailure;
    double headroom_v = kNaN;
    double worst_corner_snir_db = kNaN;
    double actual_worst_user_snir_db = kNaN;
    bool actual_meets_target = false;
    int iterations = 0;

    bool feasible() const { return status == DesignStatus::Optimal; }
};

struct TrialRecord {
    int k = 0;
    int b = 0;
    int trial = 0;
    std::uint64_t seed = 0;
    bool actual_in_region = false;
    DesignSummary robust;
    DesignSummary nonrobust;
};

inline std::uint64_t trial_seed(std::uint64_t master, int k, int b, int trial) {
    return derive_seed({master, static_cast<std::uint64_t>(k), static_cast<std::uint64_t>(b),
                        static_cast<std::uint64_t>(trial)});
}

namespace detail {

inline DesignSummary summarize(const DesignOutcome& out, const ChannelMatrix& actual,
                               const std::vector<VertexSet>& regions, const DesignSpec& spec) {
    DesignSummary s;
    s.status = out.status;
    s.iterations = out.stats.iterations;
    if (!out.optimal()) return s;
    const EvaluationReport ev = evaluate(actual, regions, out.precoders, spec);
    s.headroom_v = out.headroom_v;
    s.worst_corner_snir_db = ev.worst_corner_snir_db;
    s.actual_worst_user_snir_db = ev.worst_user_snir_db;
    s.actual_meets_target = ev.feasible;
    return s;
}

}  // namespace detail

/// Everything a trial produces, for callers that need more than the record.
struct TrialDetail {
    TrialRecord record;
    Scenario scenario;
    ChannelMatrix actual;
    QuantizerConfig quantizer;
    std::vector<UncertaintyBox> boxes;
    std::vector<VertexSet> regions;
    Eigen::MatrixXd nonrobust_centroids;  // K x L
    DesignSpec spec;
    DesignOutcome robust;
    DesignOutcome nonrobust;
};

inline TrialDetail run_trial_detail(const SweepConfig& cfg, int k, int b, int trial) {
    TrialDetail d;
    d.record.k = k;
    d.record.b = b;
    d.record.trial = trial;
    d.record.seed = trial_seed(cfg.seed, k, b, trial);

    d.scenario = make_scenario(cfg.room, cfg.leds, k, d.record.seed);
    d.actual = channel_matrix(d.scenario, cfg.optics);
    d.quantizer = cfg.quantizer;
    d.quantizer.bits = b;
    const QuantizedChannel qc = quantize(d.actual, d.quantizer);
    d.boxes = boxes_from_quantized(qc, d.quantizer, cfg.zero_floor);
    d.regions.reserve(d.boxes.size());
    bool inside = true;
    for (int u = 0; u < k; ++u) {
        d.regions.push_back(enumerate_vertices(d.boxes[static_cast<std::size_t>(u)]));
        inside = inside && d.boxes[static_cast<std::size_t>(u)].contains(d.actual.user(u));
    }
    d.record.actual_in_region = inside;

    d.spec = cfg.design.for_users(k, cfg.optics.responsivity_A_per_W);
    d.robust = design(d.spec, d.regions, cfg.solver);
    d.nonrobust_centroids = centroids(qc, d.quantizer);
    d.nonrobust = design_nonrobust(d.spec, d.nonrobust_centroids, cfg.solver);
    d.record.robust = detail::summarize(d.robust, d.actual, d.regions, d.spec);
    d.record.nonrobust = detail::summarize(d.nonrobust, d.actual, d.regions, d.spec);
    return d;
}

inline TrialRecord run_trial(const SweepConfig& cfg, int k, int b, int trial) {
    return run_trial_detail(cfg, k, b, trial).record;
}

/// Per (k, b) cell summary. Means run over feasible trials only.
struct CellAggregate {
    int k = 0;
    int b = 0;
    int trials = 0;
    int robust_feasible = 0;
    int nonrobust_feasible = 0;
    int robust_failures = 0;
    int nonrobust_failures = 0;
    double robust_feasible_pct = 0.0;
    double nonrobust_feasible_pct = 0.0;
    double robust_worst_corner_db = kNaN;
    double nonrobust_worst_corner_db = kNaN;
    double robust_actual_db = kNaN;
    double nonrobust_actual_db = kNaN;
};

/// Per-B summary pooled over every k of the sweep (feasible trials only).
struct BitsSummary {
    int b = 0;
    int robust_feasible = 0;
    int nonrobust_feasible = 0;
    double robust_actual_db = kNaN;
    double nonrobust_actual_db = kNaN;
    double robust_worst_corner_db = kNaN;
    double nonrobust_worst_corner_db = kNaN;
};

struct SweepResult {
    std::vector<TrialRecord> records;
    std::vector<CellAggregate> cells;
    std::vector<BitsSummary> table;
};

namespace detail {

struct Mean {
    double sum = 0.0;
    int n = 0;
    void add(double v) {
        sum += v;
        ++n;
    }
    double value() const { return n > 0 ? sum / n : kNaN; }
};

}  // namespace detail

/// Deterministic reduction in record order; cells follow first appearance.
inline void aggregate(SweepResult& r) {
    struct Acc {
        CellAggregate cell;
        detail::Mean rw, nw, ra, na;
    };
    std::vector<Acc> cells;
    std::map<std::pair<int, int>, std::size_t> cell_index;
    struct BAcc {
        BitsSummary s;
        detail::Mean ra, na, rw, nw;
    };
    std::vector<BAcc> bits;
    std::map<int, std::size_t> bit_index;

    for (const auto& t : r.records) {
        auto [it, fresh] = cell_index.try_emplace({t.k, t.b}, cells.size());
        if (fresh) {
            cells.emplace_back();
            cells.back().cell.k = t.k;
            cells.back().cell.b = t.b;
        }
        auto [bt, bfresh] = bit_index.try_emplace(t.b, bits.size());
        if (bfresh) {
            bits.emplace_back();
            bits.back().s.b = t.b;
        }
        Acc& a = cells[it->second];
        BAcc& ba = bits[bt->second];
        ++a.cell.trials;
        if (t.robust.feasible()) {
            ++a.cell.robust_feasible;
            ++ba.s.robust_feasible;
            a.rw.add(t.robust.worst_corner_snir_db);
            a.ra.add(t.robust.actual_worst_user_snir_db);
            ba.rw.add(t.robust.worst_corner_snir_db);
            ba.ra.add(t.robust.actual_worst_user_snir_db);
        }
        if (t.nonrobust.feasible()) {
            ++a.cell.nonrobust_feasible;
            ++ba.s.nonrobust_feasible;
            a.nw.add(t.nonrobust.worst_corner_snir_db);
            a.na.add(t.nonrobust.actual_worst_user_snir_db);
            ba.nw.add(t.nonrobust.worst_corner_snir_db);
            ba.na.add(t.nonrobust.actual_worst_user_snir_db);
        }
        if (t.robust.status == DesignStatus::NumericalFailure) ++a.cell.robust_failures;
        if (t.nonrobust.status == DesignStatus::NumericalFailure) ++a.cell.nonrobust_failures;
    }

    r.cells.clear();
    for (auto& a : cells) {
        a.cell.robust_feasible_pct = 100.0 * a.cell.robust_feasible / a.cell.trials;
        a.cell.nonrobust_feasible_pct = 100.0 * a.cell.nonrobust_feasible / a.cell.trials;
        a.cell.robust_worst_corner_db = a.rw.value();
        a.cell.nonrobust_worst_corner_db = a.nw.value();
        a.cell.robust_actual_db = a.ra.value();
        a.cell.nonrobust_actual_db = a.na.value();
        r.cells.push_back(a.cell);
    }
    r.table.clear();
    for (auto& ba : bits) {
        ba.s.robust_actual_db = ba.ra.value();
        ba.s.nonrobust_actual_db = ba.na.value();
        ba.s.robust_worst_corner_db = ba.rw.value();
        ba.s.nonrobust_worst_corner_db = ba.nw.value();
        r.table.push_back(ba.s);
    }
}

using ProgressFn = std::function<void(std::size_t done, std::size_t total)>;
/// Called once per trial with the full detail, serialized under a lock.
using TrialVisitor = std::function<void(const TrialDetail&)>;

/// Runs every (k, b, trial) on a worker pool. Records come back ordered by
/// k, then b, then trial regardless of completion order.
inline SweepResult run_sweep(const SweepConfig& cfg, const ProgressFn& progress = {},
                             const TrialVisitor& visit = {}) {
    cfg.validate();
    struct Task {
        int k, b, trial;
    };
    std::vector<Task> tasks;
    for (int k : cfg.k_values) {
        for (int b : cfg.b_values) {
            for (int t = 0; t < cfg.trials; ++t) tasks.push_back({k, b, t});
        }
    }
    SweepResult result;
    result.records.resize(tasks.size());

    unsigned workers = cfg.workers > 0 ? static_cast<unsigned>(cfg.workers) : std::thread::hardware_concurrency();
    workers = std::clamp<unsigned>(workers, 1u, static_cast<unsigned>(std::max<std::size_t>(tasks.size(), 1)));

    std::atomic<std::size_t> next{0};
    std::atomic<std::size_t> done{0};
    std::mutex mu;
    std::exception_ptr error;
    const auto work = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= tasks.size()) return;
            try {
                if (visit) {
                    TrialDetail d = run_trial_detail(cfg, tasks[i].k, tasks[i].b, tasks[i].trial);
                    result.records[i] = d.record;
                    std::lock_guard lock(mu);
                    visit(d);
                } else {
                    result.records[i] = run_trial(cfg, tasks[i].k, tasks[i].b, tasks[i].trial);
                }
            } catch (...) {
                std::lock_guard lock(mu);
                if (!error) error = std::current_exception();
                next = tasks.size();
                return;
            }
            const std::size_t n = done.fetch_add(1) + 1;
            if (progress) {
                std::lock_guard lock(mu);
                progress(n, tasks.size());
            }
        }
    };
    if (workers == 1) {
        work();
    } else {
        std::vector<std::jthread> pool;
        pool.reserve(workers);
        for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work);
    }
    if (error) std::rethrow_exception(error);
    aggregate(result);
    return result;
}

namespace csv {

/// Shortest round-trip representation; NaN becomes an empty field.
inline std::string num(double v) {
    if (std::isnan(v)) return {};
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

template <class Int>
std::string num_int(Int v) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

inline double parse_double(std::string_view s) {
    if (s.empty()) return kNaN;
    double v = 0.0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc{} || res.ptr != s.data() + s.size()) {
        throw std::runtime_error("csv: bad number '" + std::string(s) + "'");
    }
    return v;
}

template <class Int>
Int parse_int(std::string_view s) {
    Int v{};
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc{} || res.ptr != s.data() + s.size()) {
        throw std::runtime_error("csv: bad integer '" + std::string(s) + "'");
    }
    return v;
}

inline std::vector<std::string_view> split(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    for (;;) {
        const std::size_t pos = line.find(',', start);
        if (pos == std::string_view::npos) {
            out.push_back(line.substr(start));
            return out;
        }
        out.push_back(line.substr(start, pos - start));
        start = pos + 1;
    }
}

inline DesignStatus parse_status(std::string_view s) {
    if (s == "Optimal") return DesignStatus::Optimal;
    if (s == "Infeasible") return DesignStatus::Infeasible;
    if (s == "NumericalFailure") return DesignStatus::NumericalFailure;
    throw std::runtime_error("csv: unknown status '" + std::string(s) + "'");
}

}  // namespace csv

inline constexpr const char* kTrialsHeader =
    "k,b,trial,seed,actual_in_region,"
    "robust_status,robust_v,robust_worst_corner_db,robust_actual_db,robust_actual_meets_target,robust_iterations,"
    "nonrobust_status,nonrobust_v,nonrobust_worst_corner_db,nonrobust_actual_db,nonrobust_actual_meets_target,"
    "nonrobust_iterations";

inline void write_trials_csv(std::ostream& os, const std::vector<TrialRecord>& records) {
    os << kTrialsHeader << '\n';
    const auto design_fields = [&](const DesignSummary& d) {
        os << to_string(d.status) << ',' << csv::num(d.headroom_v) << ',' << csv::num(d.worst_corner_snir_db) << ','
           << csv::num(d.actual_worst_user_snir_db) << ',' << (d.actual_meets_target ? 1 : 0) << ',' << d.iterations;
    };
    for (const auto& r : records) {
        os << r.k << ',' << r.b << ',' << r.trial << ',' << csv::num_int(r.seed) << ','
           << (r.actual_in_region ? 1 : 0) << ',';
        design_fields(r.robust);
        os << ',';
        design_fields(r.nonrobust);
        os << '\n';
    }
}

inline std::vector<TrialRecord> read_trials_csv(std::istream& is) {
    std::string line;
    if (!std::getline(is, line) || line != kTrialsHeader) {
        throw std::runtime_error("trials.csv: missing or unexpected header");
    }
    std::vector<TrialRecord> out;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        const auto f = csv::split(line);
        if (f.size() != 17) throw std::runtime_error("trials.csv: expected 17 fields, got " + std::to_string(f.size()));
        TrialRecord r;
        r.k = csv::parse_int<int>(f[0]);
        r.b = csv::parse_int<int>(f[1]);
        r.trial = csv::parse_int<int>(f[2]);
        r.seed = csv::parse_int<std::uint64_t>(f[3]);
        r.actual_in_region = csv::parse_int<int>(f[4]) != 0;
        const auto design_fields = [&](std::size_t o, DesignSummary& d) {
            d.status = csv::parse_status(f[o]);
            d.headroom_v = csv::parse_double(f[o + 1]);
            d.worst_corner_snir_db = csv::parse_double(f[o + 2]);
            d.actual_worst_user_snir_db = csv::parse_double(f[o + 3]);
            d.actual_meets_target = csv::parse_int<int>(f[o + 4]) != 0;
            d.iterations = csv::parse_int<int>(f[o + 5]);
        };
        design_fields(5, r.robust);
        design_fields(11, r.nonrobust);
        out.push_back(r);
    }
    return out;
}

namespace detail {

inline bool same(double a, double b) { return (std::isnan(a) && std::isnan(b)) || a == b; }

}  // namespace detail

inline bool operator==(const DesignSummary& a, const DesignSummary& b) {
    return a.status == b.status && detail::same(a.headroom_v, b.headroom_v) &&
           detail::same(a.worst_corner_snir_db, b.worst_corner_snir_db) &&
           detail::same(a.actual_worst_user_snir_db, b.actual_worst_user_snir_db) &&
           a.actual_meets_target == b.actual_meets_target && a.iterations == b.iterations;
}

inline bool operator==(const TrialRecord& a, const TrialRecord& b) {
    return a.k == b.k && a.b == b.b && a.trial == b.trial && a.seed == b.seed &&
           a.actual_in_region == b.actual_in_region && a.robust == b.robust && a.nonrobust == b.nonrobust;
}

inline void write_aggregates_csv(std::ostream& os, const std::vector<CellAggregate>& cells) {
    os << "k,b,trials,robust_feasible,nonrobust_feasible,robust_failures,nonrobust_failures,"
          "robust_feasible_pct,nonrobust_feasible_pct,robust_worst_corner_db,nonrobust_worst_corner_db,"
          "robust_actual_db,nonrobust_actual_db\n";
    for (const auto& c : cells) {
        os << c.k << ',' << c.b << ',' << c.trials << ',' << c.robust_feasible << ',' << c.nonrobust_feasible << ','
           << c.robust_failures << ',' << c.nonrobust_failures << ',' << csv::num(c.robust_feasible_pct) << ','
           << csv::num(c.nonrobust_feasible_pct) << ',' << csv::num(c.robust_worst_corner_db) << ','
           << csv::num(c.nonrobust_worst_corner_db) << ',' << csv::num(c.robust_actual_db) << ','
           << csv::num(c.nonrobust_actual_db) << '\n';
    }
}

namespace detail {

template <class Field>
void write_figure_csv(std::ostream& os, const std::vector<CellAggregate>& cells, const char* robust_col,
                      const char* nonrobust_col, Field robust, Field nonrobust) {
    os << "k,b," << robust_col << ',' << nonrobust_col << '\n';
    for (const auto& c : cells) {
        os << c.k << ',' << c.b << ',' << csv::num(robust(c)) << ',' << csv::num(nonrobust(c)) << '\n';
    }
}

/// Writes through a temporary file in the same directory, then renames.
inline void atomic_write(const std::filesystem::path& path, const std::function<void(std::ostream&)>& body) {
    std::filesystem::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
        if (!os) throw std::runtime_error("cannot open " + tmp.string() + " for writing");
        body(os);
        os.flush();
        if (!os) throw std::runtime_error("write failed: " + tmp.string());
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) throw std::runtime_error("cannot rename " + tmp.string() + " -> " + path.string() + ": " + ec.message());
}

// Minimal line chart: one polyline per (design, b) series over k.
inline void write_svg(std::ostream& os, const std::string& title, const std::string& y_label,
                      const std::vector<CellAggregate>& cells, double (*robust)(const CellAggregate&),
                      double (*nonrobust)(const CellAggregate&)) {
    constexpr double W = 640, H = 420, ml = 60, mr = 150, mt = 40, mb = 50;
    std::vector<int> ks, bs;
    double ylo = std::numeric_limits<double>::infinity(), yhi = -ylo;
    for (const auto& c : cells) {
        if (std::find(ks.begin(), ks.end(), c.k) == ks.end()) ks.push_back(c.k);
        if (std::find(bs.begin(), bs.end(), c.b) == bs.end()) bs.push_back(c.b);
        for (double v : {robust(c), nonrobust(c)}) {
            if (std::isfinite(v)) {
                ylo = std::min(ylo, v);
                yhi = std::max(yhi, v);
            }
        }
    }
    std::sort(ks.begin(), ks.end());
    if (!std::isfinite(ylo)) {
        ylo = 0;
        yhi = 1;
    }
    if (yhi - ylo < 1e-9) {
        ylo -= 1;
        yhi += 1;
    }
    const double kmin = ks.empty() ? 0 : ks.front(), kmax = ks.empty() ? 1 : std::max<double>(ks.back(), kmin + 1);
    const auto px = [&](double k) { return ml + (k - kmin) / (kmax - kmin) * (W - ml - mr); };
    const auto py = [&](double y) { return H - mb - (y - ylo) / (yhi - ylo) * (H - mt - mb); };
    static const char* colors[] = {"#1b9e77", "#d95f02", "#7570b3", "#e7298a", "#66a61e", "#e6ab02"};

    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
    os << "<text x=\"" << W / 2 << "\" y=\"20\" text-anchor=\"middle\" font-size=\"14\">" << title << "</text>\n";
    os << "<line x1=\"" << ml << "\" y1=\"" << H - mb << "\" x2=\"" << W - mr << "\" y2=\"" << H - mb << "\" stroke=\"black\"/>\n";
    os << "<line x1=\"" << ml << "\" y1=\"" << mt << "\" x2=\"" << ml << "\" y2=\"" << H - mb << "\" stroke=\"black\"/>\n";
    for (int k : ks) {
        os << "<text x=\"" << px(k) << "\" y=\"" << H - mb + 16 << "\" text-anchor=\"middle\">" << k << "</text>\n";
    }
    for (int i = 0; i <= 4; ++i) {
        const double y = ylo + (yhi - ylo) * i / 4.0;
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.1f", y);
        os << "<text x=\"" << ml - 6 << "\" y=\"" << py(y) + 4 << "\" text-anchor=\"end\">" << buf << "</text>\n";
    }
    os << "<text x=\"" << (ml + W - mr) / 2 << "\" y=\"" << H - 12 << "\" text-anchor=\"middle\">users K</text>\n";
    os << "<text x=\"16\" y=\"" << (mt + H - mb) / 2 << "\" transform=\"rotate(-90 16 " << (mt + H - mb) / 2
       << ")\" text-anchor=\"middle\">" << y_label << "</text>\n";

    int series = 0;
    for (int b : bs) {
        for (int pass = 0; pass < 2; ++pass) {
            const char* color = colors[static_cast<std::size_t>(series) % 6];
            std::string pts;
            for (int k : ks) {
                for (const auto& c : cells) {
                    if (c.k != k || c.b != b) continue;
                    const double v = pass == 0 ? robust(c) : nonrobust(c);
                    if (!std::isfinite(v)) continue;
                    std::ostringstream p;
                    p << px(k) << ',' << py(v) << ' ';
                    pts += p.str();
                }
            }
            os << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"2\""
               << (pass == 1 ? " stroke-dasharray=\"6 4\"" : "") << " points=\"" << pts << "\"/>\n";
            const double ly = mt + 18.0 * series;
            os << "<line x1=\"" << W - mr + 10 << "\" y1=\"" << ly << "\" x2=\"" << W - mr + 34 << "\" y2=\"" << ly
               << "\" stroke=\"" << color << "\" stroke-width=\"2\"" << (pass == 1 ? " stroke-dasharray=\"6 4\"" : "")
               << "/>\n";
            os << "<text x=\"" << W - mr + 40 << "\" y=\"" << ly + 4 << "\">" << (pass == 0 ? "robust" : "non-robust")
               << " B=" << b << "</text>\n";
            ++series;
        }
    }
    os << "</svg>\n";
}

}  // namespace detail

struct EmitOptions {
    bool svg = true;
};

/// Writes trials.csv, aggregates.csv, the per-figure tables and optional SVG
/// charts into out_dir. Each file appears only once complete.
inline std::vector<std::filesystem::path> emit_outputs(const SweepResult& r, const std::filesystem::path& out_dir,
                                                       const EmitOptions& opts = {}) {
    namespace fs = std::filesystem;
    std::error_code ec;
    fs::create_directories(out_dir, ec);
    if (ec) throw std::runtime_error("cannot create " + out_dir.string() + ": " + ec.message());

    std::vector<fs::path> written;
    const auto put = [&](const char* name, const std::function<void(std::ostream&)>& body) {
        const fs::path p = out_dir / name;
        detail::atomic_write(p, body);
        written.push_back(p);
    };
    using C = CellAggregate;
    put("trials.csv", [&](std::ostream& os) { write_trials_csv(os, r.records); });
    put("fig2_feasibility.csv", [&](std::ostream& os) {
        detail::write_figure_csv(os, r.cells, "robust_feasible_pct", "nonrobust_feasible_pct",
                                 +[](const C& c) { return c.robust_feasible_pct; },
                                 +[](const C& c) { return c.nonrobust_feasible_pct; });
    });
    put("fig3_worst_corner.csv", [&](std::ostream& os) {
        detail::write_figure_csv(os, r.cells, "robust_worst_corner_db", "nonrobust_worst_corner_db",
                                 +[](const C& c) { return c.robust_worst_corner_db; },
                                 +[](const C& c) { return c.nonrobust_worst_corner_db; });
    });
    put("fig4_actual_snir.csv", [&](std::ostream& os) {
        detail::write_figure_csv(os, r.cells, "robust_actual_db", "nonrobust_actual_db",
                                 +[](const C& c) { return c.robust_actual_db; },
                                 +[](const C& c) { return c.nonrobust_actual_db; });
    });
    put("table1_summary.csv", [&](std::ostream& os) {
        os << "b,robust_feasible,nonrobust_feasible,robust_actual_db,nonrobust_actual_db,robust_worst_corner_db,"
              "nonrobust_worst_corner_db\n";
        for (const auto& t : r.table) {
            os << t.b << ',' << t.robust_feasible << ',' << t.nonrobust_feasible << ',' << csv::num(t.robust_actual_db)
               << ',' << csv::num(t.nonrobust_actual_db) << ',' << csv::num(t.robust_worst_corner_db) << ','
               << csv::num(t.nonrobust_worst_corner_db) << '\n';
        }
    });
    if (opts.svg) {
        put("fig2_feasibility.svg", [&](std::ostream& os) {
            detail::write_svg(os, "Successful designs", "feasible (%)", r.cells,
                              +[](const C& c) { return c.robust_feasible_pct; },
                              +[](const C& c) { return c.nonrobust_feasible_pct; });
        });
        put("fig3_worst_corner.svg", [&](std::ostream& os) {
            detail::write_svg(os, "SNIR at the worst corner", "SNIR (dB)", r.cells,
                              +[](const C& c) { return c.robust_worst_corner_db; },
                              +[](const C& c) { return c.nonrobust_worst_corner_db; });
        });
        put("fig4_actual_snir.svg", [&](std::ostream& os) {
            detail::write_svg(os, "Actual SNIR of the worst user", "SNIR (dB)", r.cells,
                              +[](const C& c) { return c.robust_actual_db; },
                              +[](const C& c) { return c.nonrobust_actual_db; });
        });
    }
    // Aggregates last: its presence marks a finished run.
    put("aggregates.csv", [&](std::ostream& os) { write_aggregates_csv(os, r.cells); });
    return written;
}

}  // namespace vlcprec
