#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <vector>

#include <Eigen/Core>

#include "vlcprec/channel.hpp"
#include "vlcprec/rng.hpp"
#include "vlcprec/scenario.hpp"

namespace vlcprec {

/// Uniform quantizer of the gain expressed in dB.
///
/// Cells are half-open [edge_i, edge_{i+1}) except the last, which is closed
/// at max_db. Gains outside the range clamp to the first or last cell.
struct QuantizerConfig {
    int bits = 8;
    double min_db = -70.0;
    double max_db = -40.0;
    /// 10 for power-style dB of the gain, 20 for amplitude-style dB.
    double db_factor = 10.0;

    static constexpr int kMaxBits = 30;

    void validate() const {
        if (bits < 1 || bits > kMaxBits) {
            throw std::invalid_argument("QuantizerConfig: bits must lie in [1, 30]");
        }
        if (!std::isfinite(min_db) || !std::isfinite(max_db) || !(min_db < max_db)) {
            throw std::invalid_argument("QuantizerConfig: need finite min_db < max_db");
        }
        if (!(db_factor > 0.0)) {
            throw std::invalid_argument("QuantizerConfig: db_factor must be positive");
        }
    }

    std::int64_t levels() const { return std::int64_t{1} << bits; }
    double step_db() const { return (max_db - min_db) / static_cast<double>(levels()); }

    double to_db(double h) const { return db_factor * std::log10(h); }
    double from_db(double db) const { return std::pow(10.0, db / db_factor); }

    /// Lower dB edge of cell i; edge(levels()) == max_db exactly.
    double edge_db(std::int64_t i) const {
        if (i >= levels()) return max_db;
        return min_db + static_cast<double>(i) * step_db();
    }
};

struct CellBounds {
    double lo = 0.0;
    double hi = 0.0;
};

namespace detail {
inline void check_index(std::int64_t index, const QuantizerConfig& q) {
    if (index < 0 || index >= q.levels()) {
        throw std::out_of_range("quantizer: cell index out of range");
    }
}
}  // namespace detail

inline CellBounds cell_bounds_linear(std::int64_t index, const QuantizerConfig& q) {
    detail::check_index(index, q);
    return {q.from_db(q.edge_db(index)), q.from_db(q.edge_db(index + 1))};
}

/// Linear value of the cell's dB midpoint.
inline double centroid_linear(std::int64_t index, const QuantizerConfig& q) {
    detail::check_index(index, q);
    const double mid = 0.5 * (q.edge_db(index) + q.edge_db(index + 1));
    return q.from_db(mid);
}

inline std::int64_t quantize(double h, const QuantizerConfig& q) {
    const std::int64_t top = q.levels() - 1;
    if (!(h > 0.0)) return 0;
    const double h_db = q.to_db(h);
    if (h_db <= q.min_db) return 0;
    if (h_db >= q.max_db) return top;
    auto i = static_cast<std::int64_t>(std::floor((h_db - q.min_db) / q.step_db()));
    i = std::clamp<std::int64_t>(i, 0, top);
    // The floor above works in dB; settle the index against the linear edges
    // actually reported by cell_bounds_linear so containment is exact.
    while (i > 0 && h < q.from_db(q.edge_db(i))) --i;
    while (i < top && h >= q.from_db(q.edge_db(i + 1))) ++i;
    return i;
}

/// Clamp a gain into the linear span covered by the quantizer.
inline double clamp_to_range(double h, const QuantizerConfig& q) {
    return std::clamp(h, q.from_db(q.min_db), q.from_db(q.max_db));
}

/// Per-user feedback indices, K x L.
struct QuantizedChannel {
    Eigen::Matrix<std::int64_t, Eigen::Dynamic, Eigen::Dynamic> indices;

    int users() const { return static_cast<int>(indices.rows()); }
    int leds() const { return static_cast<int>(indices.cols()); }
};

inline QuantizedChannel quantize(const ChannelMatrix& h, const QuantizerConfig& q) {
    q.validate();
    QuantizedChannel out;
    out.indices.resize(h.users(), h.leds());
    for (int k = 0; k < h.users(); ++k) {
        for (int l = 0; l < h.leds(); ++l) {
            out.indices(k, l) = quantize(h(k, l), q);
        }
    }
    return out;
}

/// K x L matrix of cell centroids, the channel a non-robust design trusts.
inline Eigen::MatrixXd centroids(const QuantizedChannel& qc, const QuantizerConfig& q) {
    Eigen::MatrixXd out(qc.users(), qc.leds());
    for (int k = 0; k < qc.users(); ++k) {
        for (int l = 0; l < qc.leds(); ++l) {
            out(k, l) = centroid_linear(qc.indices(k, l), q);
        }
    }
    return out;
}

struct CalibrationResult {
    double min_db = 0.0;
    double max_db = 0.0;
    long long draws = 0;
    long long positive_samples = 0;
    long long zero_samples = 0;

    QuantizerConfig to_config(int bits, double db_factor = 10.0) const {
        QuantizerConfig q{bits, min_db, max_db, db_factor};
        q.validate();
        return q;
    }
};

/// Dynamic-range calibration over `draws` realizations. `sample(rng, out)`
/// appends the gains of one realization to `out`. Zero gains are counted but
/// excluded from the range.
template <class Sampler>
CalibrationResult calibrate_range(Sampler&& sample, long long draws, Rng& rng, double db_factor = 10.0) {
    if (draws < 1) {
        throw std::invalid_argument("calibrate: draws must be >= 1");
    }
    CalibrationResult r;
    r.draws = draws;
    double lo = std::numeric_limits<double>::infinity();
    double hi = 0.0;
    std::vector<double> buf;
    for (long long d = 0; d < draws; ++d) {
        buf.clear();
        sample(rng, buf);
        for (double g : buf) {
            if (g > 0.0) {
                ++r.positive_samples;
                lo = std::min(lo, g);
                hi = std::max(hi, g);
            } else {
                ++r.zero_samples;
            }
        }
    }
    if (r.positive_samples == 0) {
        throw std::domain_error("calibrate: every sampled gain was zero");
    }
    r.min_db = db_factor * std::log10(lo);
    r.max_db = db_factor * std::log10(hi);
    if (!(r.min_db < r.max_db)) {
        throw std::domain_error("calibrate: degenerate dynamic range (min_db == max_db)");
    }
    return r;
}

/// Calibration from random user placements against a fixed LED layout.
inline CalibrationResult calibrate(const RoomConfig& room, const std::vector<Vec3>& leds,
                                   const OpticalParams& params, long long draws, Rng& rng,
                                   double db_factor = 10.0) {
    room.validate();
    params.validate();
    if (leds.empty()) {
        throw std::invalid_argument("calibrate: no LEDs");
    }
    return calibrate_range(
        [&](Rng& g, std::vector<double>& out) {
            const Vec3 pd = sample_users(room, 1, g).front();
            for (const auto& led : leds) out.push_back(gain(led, pd, params));
        },
        draws, rng, db_factor);
}

}  // namespace vlcprec
