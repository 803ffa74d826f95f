#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>

#include "vlcprec/quantizer.hpp"
#include "vlcprec/rng.hpp"

using namespace vlcprec;
using Catch::Approx;

namespace {
QuantizerConfig range(int bits, double lo = -60.0, double hi = -20.0) { return QuantizerConfig{bits, lo, hi, 10.0}; }
}  // namespace

TEST_CASE("boundary cells") {
    const auto q = range(3);
    CHECK(quantize(std::pow(10.0, -6.0), q) == 0);
    CHECK(quantize(std::pow(10.0, (-20.0 - 1e-9) / 10.0), q) == 7);
    CHECK(quantize(std::pow(10.0, -2.0), q) == 7);
    CHECK(quantize(1.0, q) == 7);
    CHECK(quantize(1e-12, q) == 0);
    CHECK(quantize(0.0, q) == 0);
    CHECK(quantize(-1.0, q) == 0);
}

TEST_CASE("two-bit partition of [-60, -20] dB") {
    const auto q = range(2);
    CHECK(quantize(1e-4, q) == 2);
    CHECK(quantize(std::pow(10.0, -5.5), q) == 0);
    CHECK(quantize(std::pow(10.0, -4.5), q) == 1);
    CHECK(quantize(std::pow(10.0, -2.5), q) == 3);
}

TEST_CASE("linear cell bounds") {
    const auto b0 = cell_bounds_linear(0, range(1));
    CHECK(b0.lo == Approx(1e-6).epsilon(1e-12));
    CHECK(b0.hi == Approx(1e-4).epsilon(1e-12));
    const auto b3 = cell_bounds_linear(3, range(2));
    CHECK(b3.lo == Approx(1e-3).epsilon(1e-12));
    CHECK(b3.hi == Approx(1e-2).epsilon(1e-12));
    CHECK_THROWS_AS(cell_bounds_linear(4, range(2)), std::out_of_range);
    CHECK_THROWS_AS(cell_bounds_linear(-1, range(2)), std::out_of_range);
}

TEST_CASE("centroids are dB midpoints strictly inside the cell") {
    CHECK(centroid_linear(0, range(1)) == Approx(1e-5).epsilon(1e-12));
    CHECK(centroid_linear(2, range(2)) == Approx(std::pow(10.0, -3.5)).epsilon(1e-12));
    const auto q = range(6);
    for (std::int64_t i = 0; i < q.levels(); ++i) {
        const auto b = cell_bounds_linear(i, q);
        const double c = centroid_linear(i, q);
        CHECK(c > b.lo);
        CHECK(c < b.hi);
    }
}

TEST_CASE("round trip brackets the clamped gain") {
    Rng rng(3);
    for (int bits : {1, 2, 4, 8, 16, 24}) {
        const auto q = range(bits);
        for (int i = 0; i < 5000; ++i) {
            const double h = std::pow(10.0, rng.uniform(-8.0, -1.0));
            const auto idx = quantize(h, q);
            REQUIRE(idx >= 0);
            REQUIRE(idx < q.levels());
            const auto b = cell_bounds_linear(idx, q);
            const double hc = clamp_to_range(h, q);
            CHECK(b.lo <= hc);
            CHECK(hc <= b.hi);
        }
    }
}

TEST_CASE("cells tile the range and quantize is monotone") {
    const auto q = range(5);
    for (std::int64_t i = 0; i + 1 < q.levels(); ++i) {
        CHECK(cell_bounds_linear(i, q).hi == cell_bounds_linear(i + 1, q).lo);
        CHECK(cell_bounds_linear(i, q).lo < cell_bounds_linear(i, q).hi);
        // Shared endpoint belongs to the upper cell (half-open intervals).
        CHECK(quantize(cell_bounds_linear(i + 1, q).lo, q) == i + 1);
    }
    CHECK(cell_bounds_linear(0, q).lo == Approx(1e-6).epsilon(1e-12));
    CHECK(cell_bounds_linear(q.levels() - 1, q).hi == Approx(1e-2).epsilon(1e-12));

    Rng rng(8);
    std::vector<double> hs(3000);
    for (auto& h : hs) h = std::pow(10.0, rng.uniform(-7.0, -1.5));
    std::sort(hs.begin(), hs.end());
    for (std::size_t i = 1; i < hs.size(); ++i) CHECK(quantize(hs[i - 1], q) <= quantize(hs[i], q));
}

TEST_CASE("config validation") {
    CHECK_THROWS_AS(range(0).validate(), std::invalid_argument);
    CHECK_THROWS_AS(range(31).validate(), std::invalid_argument);
    CHECK_THROWS_AS(range(4, -20, -20).validate(), std::invalid_argument);
    CHECK_THROWS_AS(range(4, -10, -20).validate(), std::invalid_argument);
    CHECK(range(1).levels() == 2);
}

TEST_CASE("amplitude-style dB factor") {
    const QuantizerConfig q{2, -120.0, -40.0, 20.0};
    CHECK(quantize(1e-4, q) == 2);  // -80 dB in 20 log10 units
    CHECK(cell_bounds_linear(0, q).lo == Approx(1e-6).epsilon(1e-12));
}

TEST_CASE("calibration on a synthetic uniform gain distribution") {
    const auto sampler = [](Rng& g, std::vector<double>& out) { out.push_back(g.uniform(1e-6, 1e-5)); };
    Rng rng(17);
    const auto r = calibrate_range(sampler, 100000, rng);
    CHECK(r.min_db >= -60.0);
    CHECK(r.min_db <= -59.9);
    CHECK(r.max_db >= -50.1);
    CHECK(r.max_db <= -50.0);

    // Oracle: replay the stream and take the extremes directly.
    Rng replay(17);
    double lo = 1.0, hi = 0.0;
    for (int i = 0; i < 100000; ++i) {
        const double g = replay.uniform(1e-6, 1e-5);
        lo = std::min(lo, g);
        hi = std::max(hi, g);
    }
    CHECK(r.min_db == 10.0 * std::log10(lo));
    CHECK(r.max_db == 10.0 * std::log10(hi));
    CHECK(r.positive_samples == 100000);
}

TEST_CASE("calibration degenerate and empty cases") {
    Rng rng(1);
    const auto one = [](Rng& g, std::vector<double>& out) { out.push_back(g.uniform(1e-6, 1e-5)); };
    CHECK_THROWS_AS(calibrate_range(one, 1, rng), std::domain_error);
    const auto zeros = [](Rng&, std::vector<double>& out) { out.push_back(0.0); };
    CHECK_THROWS_AS(calibrate_range(zeros, 100, rng), std::domain_error);
    CHECK_THROWS_AS(calibrate_range(one, 0, rng), std::invalid_argument);
}

TEST_CASE("room calibration is deterministic and skips zero gains") {
    RoomConfig room;
    OpticalParams p;
    const auto leds = place_leds(room, 6);
    Rng a(5), b(5);
    const auto r1 = calibrate(room, leds, p, 20000, a);
    const auto r2 = calibrate(room, leds, p, 20000, b);
    CHECK(r1.min_db == r2.min_db);
    CHECK(r1.max_db == r2.max_db);
    CHECK(r1.positive_samples + r1.zero_samples == 20000 * 6);
    CHECK(r1.zero_samples > 0);
    CHECK(r1.min_db < r1.max_db);
    const auto q = r1.to_config(8);
    CHECK(q.bits == 8);
    CHECK(q.min_db == r1.min_db);
}

TEST_CASE("quantizing a channel matrix") {
    Eigen::MatrixXd g(2, 3);
    g << 1e-4, 0.0, 1e-3, 1e-5, 2e-5, 1.0;
    const auto q = range(2);
    const auto qc = quantize(ChannelMatrix(g), q);
    REQUIRE(qc.users() == 2);
    REQUIRE(qc.leds() == 3);
    CHECK(qc.indices(0, 0) == 2);
    CHECK(qc.indices(0, 1) == 0);
    CHECK(qc.indices(1, 2) == 3);
    const Eigen::MatrixXd c = centroids(qc, q);
    CHECK(c(0, 0) == Approx(std::pow(10.0, -3.5)));
    CHECK((c.array() > 0.0).all());
}
