#pragma once

// Run configuration as JSON. Every field has a default, so `{}` is the
// reference setup: 6 LEDs at 2.4 m, PDs in [0.5, 1] m, 15 dB target, 20 W cap.

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <numbers>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "vlcprec/experiments.hpp"
#include "vlcprec/quantizer.hpp"

namespace vlcprec {

using json = nlohmann::ordered_json;

/// Bad or inconsistent configuration input (as opposed to I/O trouble).
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct QuantizerSettings {
    int bits = 8;
    double db_factor = 10.0;
    /// When both are set the range is used as is and calibration is skipped.
    std::optional<double> min_db;
    std::optional<double> max_db;
};

struct CalibrationSettings {
    long long draws = 1'000'000;
    std::uint64_t seed = 1;
    /// Empty disables the cache.
    std::string cache_dir = ".vlcprec-cache";
};

struct SweepSettings {
    std::vector<int> k_values{2, 3, 4, 5, 6, 7};
    std::vector<int> b_values{4, 8, 16};
    int trials = 500;
    int workers = 0;
    bool zero_floor = true;
    bool svg = true;
};

/// The single scenario run by `design`.
struct SingleCase {
    int users = 2;
    int bits = 8;
    int trial = 0;
};

struct SolverConfig {
    double tol = 1e-8;
    int max_iter = 100;
    double verify_tol = 1e-6;
};

struct RunConfig {
    RoomConfig room;
    OpticalParams optics;
    int led_count = 6;
    /// Explicit coordinates; empty means the centered grid of led_count.
    std::vector<Vec3> led_positions;
    DesignParams design;
    QuantizerSettings quantizer;
    CalibrationSettings calibration;
    SweepSettings sweep;
    SingleCase single;
    SolverConfig solver;
    std::uint64_t seed = 1;
    std::string output_dir = "results";

    std::vector<Vec3> leds() const { return led_positions.empty() ? place_leds(room, led_count) : led_positions; }

    DesignSettings design_settings() const {
        DesignSettings s;
        s.solver.tol = solver.tol;
        s.solver.max_iter = solver.max_iter;
        s.verify_tol = solver.verify_tol;
        return s;
    }

    void validate() const {
        const auto wrap = [](auto&& f) {
            try {
                f();
            } catch (const std::invalid_argument& e) {
                throw ConfigError(e.what());
            }
        };
        wrap([&] { room.validate(); });
        wrap([&] { optics.validate(); });
        wrap([&] { (void)design.for_users(1, optics.responsivity_A_per_W); });
        if (led_positions.empty() && led_count < 1) throw ConfigError("leds.count must be >= 1");
        const auto l = leds();
        if (l.size() > static_cast<std::size_t>(kMaxEnumerableDim)) throw ConfigError("too many LEDs");
        for (const auto& p : l) {
            if (!p.allFinite() || p.z() <= room.pd_height_max_m) {
                throw ConfigError("every LED must sit above the highest photodiode");
            }
        }
        if (quantizer.min_db.has_value() != quantizer.max_db.has_value()) {
            throw ConfigError("quantizer.min_db and quantizer.max_db must be given together");
        }
        if (quantizer.min_db) {
            wrap([&] { QuantizerConfig{quantizer.bits, *quantizer.min_db, *quantizer.max_db, quantizer.db_factor}.validate(); });
        }
        if (!(quantizer.db_factor > 0.0)) throw ConfigError("quantizer.db_factor must be positive");
        if (quantizer.bits < 1 || quantizer.bits > QuantizerConfig::kMaxBits) throw ConfigError("quantizer.bits out of range");
        if (calibration.draws < 1) throw ConfigError("calibration.draws must be >= 1");
        if (sweep.k_values.empty() || sweep.b_values.empty()) throw ConfigError("sweep needs k_values and b_values");
        for (int k : sweep.k_values) {
            if (k < 1) throw ConfigError("sweep.k_values must be >= 1");
        }
        for (int b : sweep.b_values) {
            if (b < 1 || b > QuantizerConfig::kMaxBits) throw ConfigError("sweep.b_values out of range");
        }
        if (sweep.trials < 1) throw ConfigError("sweep.trials must be >= 1");
        if (sweep.workers < 0) throw ConfigError("sweep.workers must be >= 0");
        if (single.users < 1 || single.trial < 0) throw ConfigError("design_case needs users >= 1 and trial >= 0");
        if (single.bits < 1 || single.bits > QuantizerConfig::kMaxBits) throw ConfigError("design_case.bits out of range");
        if (!(solver.tol > 0.0) || solver.max_iter < 1 || !(solver.verify_tol > 0.0)) {
            throw ConfigError("solver settings must be positive");
        }
        if (output_dir.empty()) throw ConfigError("output_dir must not be empty");
    }
};

namespace detail {

inline void check_keys(const json& j, const std::string& section, std::initializer_list<const char*> allowed) {
    if (!j.is_object()) throw ConfigError(section + ": expected an object");
    for (const auto& [key, _] : j.items()) {
        bool ok = false;
        for (const char* a : allowed) ok = ok || key == a;
        if (!ok) throw ConfigError(section + ": unknown key '" + key + "'");
    }
}

template <class T>
void read(const json& j, const char* key, T& out, const std::string& section) {
    const auto it = j.find(key);
    if (it == j.end()) return;
    try {
        out = it->template get<T>();
    } catch (const json::exception& e) {
        throw ConfigError(section + "." + key + ": " + e.what());
    }
}

inline Vec3 vec3_from(const json& j, const std::string& where) {
    if (!j.is_array() || j.size() != 3) throw ConfigError(where + ": expected [x, y, z]");
    try {
        return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
    } catch (const json::exception& e) {
        throw ConfigError(where + ": " + e.what());
    }
}

inline double rad_to_deg(double r) { return r * 180.0 / std::numbers::pi; }
inline double deg_to_rad(double d) { return d * std::numbers::pi / 180.0; }

}  // namespace detail

inline json to_json(const RunConfig& c) {
    json j;
    j["seed"] = c.seed;
    j["output_dir"] = c.output_dir;
    j["room"] = {{"width_m", c.room.width_m},
                 {"depth_m", c.room.depth_m},
                 {"led_height_m", c.room.led_height_m},
                 {"pd_height_min_m", c.room.pd_height_min_m},
                 {"pd_height_max_m", c.room.pd_height_max_m}};
    j["optics"] = {{"lambertian_order_m", c.optics.lambertian_order_m},
                   {"pd_area_m2", c.optics.pd_area_m2},
                   {"fov_semi_angle_deg", detail::rad_to_deg(c.optics.fov_semi_angle_rad)},
                   {"filter_gain", c.optics.filter_gain},
                   {"concentrator_index", c.optics.concentrator_index},
                   {"responsivity_A_per_W", c.optics.responsivity_A_per_W}};
    json pos = json::array();
    for (const auto& p : c.led_positions) pos.push_back({p.x(), p.y(), p.z()});
    j["leds"] = {{"count", c.led_count}, {"positions", pos}};
    j["design"] = {{"target_snir_db", c.design.target_snir_db},
                   {"noise_variance", c.design.noise_variance},
                   {"amplitude", c.design.amplitude},
                   {"beta_W", c.design.beta_W},
                   {"p_max_W", c.design.p_max_W}};
    json q = {{"bits", c.quantizer.bits}, {"db_factor", c.quantizer.db_factor}};
    q["min_db"] = c.quantizer.min_db ? json(*c.quantizer.min_db) : json(nullptr);
    q["max_db"] = c.quantizer.max_db ? json(*c.quantizer.max_db) : json(nullptr);
    j["quantizer"] = q;
    j["calibration"] = {{"draws", c.calibration.draws},
                        {"seed", c.calibration.seed},
                        {"cache_dir", c.calibration.cache_dir}};
    j["sweep"] = {{"k_values", c.sweep.k_values}, {"b_values", c.sweep.b_values}, {"trials", c.sweep.trials},
                  {"workers", c.sweep.workers},   {"zero_floor", c.sweep.zero_floor}, {"svg", c.sweep.svg}};
    j["design_case"] = {{"users", c.single.users}, {"bits", c.single.bits}, {"trial", c.single.trial}};
    j["solver"] = {{"tol", c.solver.tol}, {"max_iter", c.solver.max_iter}, {"verify_tol", c.solver.verify_tol}};
    return j;
}

/// Missing keys keep their defaults; unknown keys are rejected.
inline RunConfig from_json(const json& j) {
    using detail::read;
    RunConfig c;
    detail::check_keys(j, "config",
                       {"seed", "output_dir", "room", "optics", "leds", "design", "quantizer", "calibration", "sweep",
                        "design_case", "solver"});
    read(j, "seed", c.seed, "config");
    read(j, "output_dir", c.output_dir, "config");
    if (auto it = j.find("room"); it != j.end()) {
        detail::check_keys(*it, "room", {"width_m", "depth_m", "led_height_m", "pd_height_min_m", "pd_height_max_m"});
        read(*it, "width_m", c.room.width_m, "room");
        read(*it, "depth_m", c.room.depth_m, "room");
        read(*it, "led_height_m", c.room.led_height_m, "room");
        read(*it, "pd_height_min_m", c.room.pd_height_min_m, "room");
        read(*it, "pd_height_max_m", c.room.pd_height_max_m, "room");
    }
    if (auto it = j.find("optics"); it != j.end()) {
        detail::check_keys(*it, "optics",
                           {"lambertian_order_m", "pd_area_m2", "fov_semi_angle_deg", "filter_gain",
                            "concentrator_index", "responsivity_A_per_W"});
        read(*it, "lambertian_order_m", c.optics.lambertian_order_m, "optics");
        read(*it, "pd_area_m2", c.optics.pd_area_m2, "optics");
        double fov = detail::rad_to_deg(c.optics.fov_semi_angle_rad);
        read(*it, "fov_semi_angle_deg", fov, "optics");
        c.optics.fov_semi_angle_rad = detail::deg_to_rad(fov);
        read(*it, "filter_gain", c.optics.filter_gain, "optics");
        read(*it, "concentrator_index", c.optics.concentrator_index, "optics");
        read(*it, "responsivity_A_per_W", c.optics.responsivity_A_per_W, "optics");
    }
    if (auto it = j.find("leds"); it != j.end()) {
        detail::check_keys(*it, "leds", {"count", "positions"});
        read(*it, "count", c.led_count, "leds");
        if (auto p = it->find("positions"); p != it->end()) {
            if (!p->is_array()) throw ConfigError("leds.positions: expected an array");
            for (std::size_t i = 0; i < p->size(); ++i) {
                c.led_positions.push_back(detail::vec3_from((*p)[i], "leds.positions[" + std::to_string(i) + "]"));
            }
        }
    }
    if (auto it = j.find("design"); it != j.end()) {
        detail::check_keys(*it, "design", {"target_snir_db", "noise_variance", "amplitude", "beta_W", "p_max_W"});
        read(*it, "target_snir_db", c.design.target_snir_db, "design");
        read(*it, "noise_variance", c.design.noise_variance, "design");
        read(*it, "amplitude", c.design.amplitude, "design");
        read(*it, "beta_W", c.design.beta_W, "design");
        read(*it, "p_max_W", c.design.p_max_W, "design");
    }
    if (auto it = j.find("quantizer"); it != j.end()) {
        detail::check_keys(*it, "quantizer", {"bits", "db_factor", "min_db", "max_db"});
        read(*it, "bits", c.quantizer.bits, "quantizer");
        read(*it, "db_factor", c.quantizer.db_factor, "quantizer");
        for (const char* key : {"min_db", "max_db"}) {
            auto& slot = std::string(key) == "min_db" ? c.quantizer.min_db : c.quantizer.max_db;
            if (auto v = it->find(key); v != it->end() && !v->is_null()) {
                double d = 0.0;
                read(*it, key, d, "quantizer");
                slot = d;
            }
        }
    }
    if (auto it = j.find("calibration"); it != j.end()) {
        detail::check_keys(*it, "calibration", {"draws", "seed", "cache_dir"});
        read(*it, "draws", c.calibration.draws, "calibration");
        read(*it, "seed", c.calibration.seed, "calibration");
        read(*it, "cache_dir", c.calibration.cache_dir, "calibration");
    }
    if (auto it = j.find("sweep"); it != j.end()) {
        detail::check_keys(*it, "sweep", {"k_values", "b_values", "trials", "workers", "zero_floor", "svg"});
        read(*it, "k_values", c.sweep.k_values, "sweep");
        read(*it, "b_values", c.sweep.b_values, "sweep");
        read(*it, "trials", c.sweep.trials, "sweep");
        read(*it, "workers", c.sweep.workers, "sweep");
        read(*it, "zero_floor", c.sweep.zero_floor, "sweep");
        read(*it, "svg", c.sweep.svg, "sweep");
    }
    if (auto it = j.find("design_case"); it != j.end()) {
        detail::check_keys(*it, "design_case", {"users", "bits", "trial"});
        read(*it, "users", c.single.users, "design_case");
        read(*it, "bits", c.single.bits, "design_case");
        read(*it, "trial", c.single.trial, "design_case");
    }
    if (auto it = j.find("solver"); it != j.end()) {
        detail::check_keys(*it, "solver", {"tol", "max_iter", "verify_tol"});
        read(*it, "tol", c.solver.tol, "solver");
        read(*it, "max_iter", c.solver.max_iter, "solver");
        read(*it, "verify_tol", c.solver.verify_tol, "solver");
    }
    return c;
}

inline RunConfig load_config(const std::filesystem::path& path) {
    std::ifstream is(path);
    if (!is) throw ConfigError("cannot read config file " + path.string());
    json j;
    try {
        j = json::parse(is, nullptr, true, true);
    } catch (const json::parse_error& e) {
        throw ConfigError(path.string() + ": " + e.what());
    }
    RunConfig c = from_json(j);
    c.validate();
    return c;
}

// ---- calibration cache

/// FNV-1a, stable across platforms and standard libraries.
inline std::uint64_t fnv1a(const std::string& s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char ch : s) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    return h;
}

/// Everything the calibrated range depends on.
inline json calibration_key(const RunConfig& c) {
    json key = to_json(c);
    json out;
    out["room"] = key["room"];
    out["optics"] = key["optics"];
    json leds = json::array();
    for (const auto& p : c.leds()) leds.push_back({p.x(), p.y(), p.z()});
    out["leds"] = leds;
    out["draws"] = c.calibration.draws;
    out["seed"] = c.calibration.seed;
    out["db_factor"] = c.quantizer.db_factor;
    return out;
}

inline json calibration_to_json(const CalibrationResult& r, const json& key) {
    return {{"min_db", r.min_db},
            {"max_db", r.max_db},
            {"draws", r.draws},
            {"positive_samples", r.positive_samples},
            {"zero_samples", r.zero_samples},
            {"key", key}};
}

inline CalibrationResult calibration_from_json(const json& j) {
    CalibrationResult r;
    r.min_db = j.at("min_db").get<double>();
    r.max_db = j.at("max_db").get<double>();
    r.draws = j.at("draws").get<long long>();
    r.positive_samples = j.at("positive_samples").get<long long>();
    r.zero_samples = j.at("zero_samples").get<long long>();
    return r;
}

inline std::string hex64(std::uint64_t v) {
    static const char* digits = "0123456789abcdef";
    std::string s(16, '0');
    for (int i = 15; i >= 0; --i, v >>= 4) s[static_cast<std::size_t>(i)] = digits[v & 0xF];
    return s;
}

struct CalibrationLookup {
    CalibrationResult result;
    bool from_cache = false;
    std::filesystem::path cache_file;
};

/// Runs the calibration or loads a cached result with the same key.
inline CalibrationLookup calibrate_cached(const RunConfig& c) {
    namespace fs = std::filesystem;
    const json key = calibration_key(c);
    CalibrationLookup out;
    if (!c.calibration.cache_dir.empty()) {
        out.cache_file = fs::path(c.calibration.cache_dir) / ("calibration-" + hex64(fnv1a(key.dump())) + ".json");
        std::ifstream is(out.cache_file);
        if (is) {
            try {
                const json j = json::parse(is);
                if (j.at("key") == key) {
                    out.result = calibration_from_json(j);
                    out.from_cache = true;
                    return out;
                }
            } catch (const json::exception&) {
                // Unreadable cache entries are recomputed and overwritten.
            }
        }
    }
    Rng rng(c.calibration.seed);
    out.result = calibrate(c.room, c.leds(), c.optics, c.calibration.draws, rng, c.quantizer.db_factor);
    if (!out.cache_file.empty()) {
        std::error_code ec;
        fs::create_directories(out.cache_file.parent_path(), ec);
        if (!ec) {
            detail::atomic_write(out.cache_file, [&](std::ostream& os) {
                os << calibration_to_json(out.result, key).dump(2) << '\n';
            });
        }
    }
    return out;
}

/// Quantizer range from the config, calibrating when no range is given.
inline QuantizerConfig resolve_quantizer(const RunConfig& c, CalibrationLookup* lookup = nullptr) {
    if (c.quantizer.min_db) {
        return QuantizerConfig{c.quantizer.bits, *c.quantizer.min_db, *c.quantizer.max_db, c.quantizer.db_factor};
    }
    CalibrationLookup cal = calibrate_cached(c);
    if (lookup) *lookup = cal;
    return cal.result.to_config(c.quantizer.bits, c.quantizer.db_factor);
}

inline SweepConfig make_sweep_config(const RunConfig& c, const QuantizerConfig& q) {
    SweepConfig s;
    s.k_values = c.sweep.k_values;
    s.b_values = c.sweep.b_values;
    s.trials = c.sweep.trials;
    s.seed = c.seed;
    s.design = c.design;
    s.room = c.room;
    s.optics = c.optics;
    s.leds = c.leds();
    s.quantizer = q;
    s.zero_floor = c.sweep.zero_floor;
    s.solver = c.design_settings();
    s.workers = c.sweep.workers;
    return s;
}

// ---- channel CSV

/// K rows x L columns of nonnegative reals; blank lines and '#' comments skipped.
inline ChannelMatrix read_channel_csv(std::istream& is, const std::string& name = "channel file") {
    std::vector<std::vector<double>> rows;
    std::string line;
    int line_no = 0;
    while (std::getline(is, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        const auto first = line.find_first_not_of(" \t");
        if (first == std::string::npos || line[first] == '#') continue;
        std::vector<double> row;
        for (auto field : csv::split(line)) {
            while (!field.empty() && (field.front() == ' ' || field.front() == '\t')) field.remove_prefix(1);
            while (!field.empty() && (field.back() == ' ' || field.back() == '\t')) field.remove_suffix(1);
            if (field.empty()) throw ConfigError(name + ":" + std::to_string(line_no) + ": empty field");
            try {
                row.push_back(csv::parse_double(field));
            } catch (const std::runtime_error&) {
                throw ConfigError(name + ":" + std::to_string(line_no) + ": not a number '" + std::string(field) + "'");
            }
        }
        if (!rows.empty() && row.size() != rows.front().size()) {
            throw ConfigError(name + ":" + std::to_string(line_no) + ": ragged row");
        }
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw ConfigError(name + ": no rows");
    Eigen::MatrixXd g(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.front().size()));
    for (std::size_t k = 0; k < rows.size(); ++k) {
        for (std::size_t l = 0; l < rows[k].size(); ++l) g(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(l)) = rows[k][l];
    }
    try {
        return ChannelMatrix(std::move(g));
    } catch (const std::invalid_argument& e) {
        throw ConfigError(name + ": " + e.what());
    }
}

inline void write_channel_csv(std::ostream& os, const ChannelMatrix& h) {
    for (int k = 0; k < h.users(); ++k) {
        for (int l = 0; l < h.leds(); ++l) {
            if (l) os << ',';
            os << csv::num(h(k, l));
        }
        os << '\n';
    }
}

}  // namespace vlcprec
