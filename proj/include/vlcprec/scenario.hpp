#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "vlcprec/rng.hpp"

namespace vlcprec {

using Vec3 = Eigen::Vector3d;

/// Room box. The origin is a floor corner; z points up.
struct RoomConfig {
    double width_m = 5.0;
    double depth_m = 5.0;
    double led_height_m = 2.4;
    double pd_height_min_m = 0.5;
    double pd_height_max_m = 1.0;

    void validate() const {
        if (!(width_m > 0.0) || !(depth_m > 0.0) || !(led_height_m > 0.0) || !(pd_height_min_m > 0.0) ||
            !(pd_height_max_m > 0.0)) {
            throw std::invalid_argument("RoomConfig: all dimensions must be positive");
        }
        if (pd_height_min_m > pd_height_max_m) {
            throw std::invalid_argument("RoomConfig: pd_height_min_m exceeds pd_height_max_m");
        }
        if (!(pd_height_max_m < led_height_m)) {
            throw std::invalid_argument("RoomConfig: photodiodes must sit below the LED plane");
        }
    }

    bool contains(const Vec3& p) const {
        return p.x() >= 0.0 && p.x() <= width_m && p.y() >= 0.0 && p.y() <= depth_m && p.z() >= 0.0 &&
               p.z() <= led_height_m;
    }
};

/// LED layout and user placement for one realization. Immutable once built.
struct Scenario {
    std::vector<Vec3> led_positions;
    std::vector<Vec3> user_positions;
    std::uint64_t seed = 0;

    int num_leds() const { return static_cast<int>(led_positions.size()); }
    int num_users() const { return static_cast<int>(user_positions.size()); }

    void validate(const RoomConfig& room) const {
        if (led_positions.empty() || user_positions.empty()) {
            throw std::invalid_argument("Scenario: needs at least one LED and one user");
        }
        for (const auto& p : led_positions) {
            if (p.z() != room.led_height_m) {
                throw std::invalid_argument("Scenario: LED not at the configured ceiling height");
            }
        }
        for (const auto& p : user_positions) {
            if (!room.contains(p)) {
                throw std::invalid_argument("Scenario: user position outside the room");
            }
        }
    }
};

/// Centered rows x cols grid, rows <= cols and as close to square as the
/// factorization of `count` allows. Row-major order (y outer, x inner).
inline std::vector<Vec3> place_leds(const RoomConfig& room, int count) {
    if (count < 1) {
        throw std::invalid_argument("place_leds: count must be >= 1");
    }
    int rows = 1;
    for (int r = 1; r * r <= count; ++r) {
        if (count % r == 0) rows = r;
    }
    const int cols = count / rows;
    std::vector<Vec3> out;
    out.reserve(static_cast<std::size_t>(count));
    for (int r = 0; r < rows; ++r) {
        const double y = room.depth_m * (2.0 * r + 1.0) / (2.0 * rows);
        for (int c = 0; c < cols; ++c) {
            const double x = room.width_m * (2.0 * c + 1.0) / (2.0 * cols);
            out.emplace_back(x, y, room.led_height_m);
        }
    }
    return out;
}

/// k i.i.d. user positions, uniform over the floor area and the PD height band.
inline std::vector<Vec3> sample_users(const RoomConfig& room, int k, Rng& rng) {
    if (k < 1) {
        throw std::invalid_argument("sample_users: k must be >= 1");
    }
    std::vector<Vec3> out;
    out.reserve(static_cast<std::size_t>(k));
    for (int i = 0; i < k; ++i) {
        const double x = rng.uniform(0.0, room.width_m);
        const double y = rng.uniform(0.0, room.depth_m);
        const double z = rng.uniform(room.pd_height_min_m, room.pd_height_max_m);
        out.emplace_back(x, y, z);
    }
    return out;
}

inline Scenario make_scenario(const RoomConfig& room, std::vector<Vec3> leds, int k, std::uint64_t seed) {
    room.validate();
    Rng rng(seed);
    Scenario sc{std::move(leds), sample_users(room, k, rng), seed};
    sc.validate(room);
    return sc;
}

}  // namespace vlcprec
