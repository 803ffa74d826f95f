#include <catch2/catch_amalgamated.hpp>

#include <numbers>

#include "support/oracles.hpp"
#include "vlcprec/channel.hpp"
#include "vlcprec/rng.hpp"

using namespace vlcprec;
using Catch::Approx;

namespace {

// FOV of 90 degrees with n = 1 makes the concentrator gain exactly 1.
OpticalParams unit_gain_optics() {
    OpticalParams p;
    p.fov_semi_angle_rad = std::numbers::pi / 2.0;
    p.concentrator_index = 1.0;
    return p;
}

}  // namespace

TEST_CASE("directly below the LED at 2 m") {
    const double h = gain({0, 0, 3}, {0, 0, 1}, unit_gain_optics());
    CHECK(h == Approx(7.9577e-6).epsilon(1e-4));
    CHECK(h == Approx(2e-4 / (2 * std::numbers::pi * 4)).epsilon(1e-12));
}

TEST_CASE("outside the field of view the gain is zero") {
    OpticalParams p;
    p.fov_semi_angle_rad = 30.0 * std::numbers::pi / 180.0;
    CHECK(gain({0, 0, 2}, {2, 0, 1}, p) == 0.0);
    CHECK(gain({0, 0, 2}, {0.5, 0, 1}, p) > 0.0);
}

TEST_CASE("doubling the distance on axis quarters the gain") {
    const auto p = unit_gain_optics();
    const double near = gain({1, 1, 3}, {1, 1, 2}, p);
    const double far = gain({1, 1, 3}, {1, 1, 1}, p);
    CHECK(far == Approx(near / 4.0).epsilon(1e-12));
}

TEST_CASE("degenerate geometry is rejected") {
    OpticalParams p;
    CHECK_THROWS_AS(gain({0, 0, 1}, {0, 0, 1}, p), std::invalid_argument);
    CHECK_THROWS_AS(gain({0, 0, 1}, {0, 0, 2}, p), std::invalid_argument);
}

TEST_CASE("gain matches the angle-based oracle on random links") {
    OpticalParams p;
    p.lambertian_order_m = 1.7;
    Rng rng(5);
    for (int i = 0; i < 2000; ++i) {
        const Vec3 led(rng.uniform(0, 5), rng.uniform(0, 5), 2.4);
        const Vec3 pd(rng.uniform(0, 5), rng.uniform(0, 5), rng.uniform(0.5, 1.0));
        const double ref = oracle::lambertian(led, pd, p.lambertian_order_m, p.pd_area_m2, p.fov_semi_angle_rad,
                                              p.filter_gain, p.concentrator_index);
        const double g = gain(led, pd, p);
        CHECK(g >= 0.0);
        if (ref == 0.0) {
            CHECK(g == 0.0);
        } else {
            CHECK(g == Approx(ref).epsilon(1e-10));
        }
    }
}

TEST_CASE("gain does not increase along a ray away from the LED") {
    OpticalParams p;
    const Vec3 led(2.5, 2.5, 2.4);
    Rng rng(11);
    for (int i = 0; i < 200; ++i) {
        Vec3 dir(rng.uniform(-1, 1), rng.uniform(-1, 1), -1.0);
        dir.normalize();
        double prev = gain(led, led + 0.3 * dir, p);
        for (double t = 0.5; t < 3.0; t += 0.25) {
            const double g = gain(led, led + t * dir, p);
            CHECK(g <= prev);
            prev = g;
        }
    }
}

TEST_CASE("channel matrix dimensions, single link and row permutation") {
    RoomConfig room;
    OpticalParams p;
    const Scenario one{{Vec3(2.5, 2.5, 2.4)}, {Vec3(2.0, 2.0, 0.8)}, 0};
    const ChannelMatrix h1 = channel_matrix(one, p);
    REQUIRE(h1.users() == 1);
    REQUIRE(h1.leds() == 1);
    CHECK(h1(0, 0) == gain(one.led_positions[0], one.user_positions[0], p));

    const Scenario s = make_scenario(room, place_leds(room, 6), 3, 3);
    const ChannelMatrix h = channel_matrix(s, p);
    REQUIRE(h.users() == 3);
    REQUIRE(h.leds() == 6);
    Scenario swapped = s;
    std::swap(swapped.user_positions[0], swapped.user_positions[2]);
    const ChannelMatrix hs = channel_matrix(swapped, p);
    CHECK(hs.gains().row(0) == h.gains().row(2));
    CHECK(hs.gains().row(2) == h.gains().row(0));
    CHECK(hs.gains().row(1) == h.gains().row(1));
}

TEST_CASE("strongest LED is the horizontally nearest one") {
    RoomConfig room;
    OpticalParams p;
    const auto leds = place_leds(room, 6);
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        const Scenario s = make_scenario(room, leds, 2, seed);
        const ChannelMatrix h = channel_matrix(s, p);
        for (int k = 0; k < 2; ++k) {
            int nearest = 0;
            double best = 1e9;
            for (int l = 0; l < 6; ++l) {
                const double d = (leds[static_cast<std::size_t>(l)].head<2>() -
                                  s.user_positions[static_cast<std::size_t>(k)].head<2>())
                                     .norm();
                if (d < best) {
                    best = d;
                    nearest = l;
                }
            }
            Eigen::Index arg = 0;
            h.gains().row(k).maxCoeff(&arg);
            CHECK(arg == nearest);
        }
    }
}

TEST_CASE("channel matrix rejects negative or non-finite gains") {
    Eigen::MatrixXd g(1, 2);
    g << 1e-6, -1e-7;
    CHECK_THROWS_AS(ChannelMatrix(g), std::invalid_argument);
    g << 1e-6, std::numeric_limits<double>::infinity();
    CHECK_THROWS_AS(ChannelMatrix(g), std::invalid_argument);
}

TEST_CASE("optical parameter validation") {
    OpticalParams p;
    p.fov_semi_angle_rad = 2.0;
    CHECK_THROWS_AS(p.validate(), std::invalid_argument);
    p = OpticalParams{};
    p.concentrator_index = 0.5;
    CHECK_THROWS_AS(p.validate(), std::invalid_argument);
    p = OpticalParams{};
    p.pd_area_m2 = 0.0;
    CHECK_THROWS_AS(p.validate(), std::invalid_argument);
}
