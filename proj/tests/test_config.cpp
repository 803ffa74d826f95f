#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "vlcprec/config.hpp"

using namespace vlcprec;
using Catch::Approx;

namespace {
std::filesystem::path scratch(const std::string& name) {
    auto p = std::filesystem::temp_directory_path() / ("vlcprec-config-" + name);
    std::filesystem::remove_all(p);
    std::filesystem::create_directories(p);
    return p;
}
}  // namespace

TEST_CASE("defaults survive a JSON round trip") {
    const RunConfig c;
    const json j = to_json(c);
    const RunConfig back = from_json(j);
    CHECK(to_json(back) == j);
    CHECK(back.optics.fov_semi_angle_rad == Approx(c.optics.fov_semi_angle_rad).epsilon(1e-15));
    CHECK(j["optics"]["fov_semi_angle_deg"].get<double>() == Approx(70.0));
    CHECK_NOTHROW(back.validate());
    CHECK(back.leds().size() == 6);
}

TEST_CASE("partial configs keep defaults") {
    const auto c = from_json(json::parse(R"({"seed": 7, "sweep": {"trials": 3}, "quantizer": {"min_db": -60, "max_db": -40}})"));
    CHECK(c.seed == 7);
    CHECK(c.sweep.trials == 3);
    CHECK(c.sweep.k_values == std::vector<int>{2, 3, 4, 5, 6, 7});
    REQUIRE(c.quantizer.min_db);
    CHECK(*c.quantizer.min_db == -60.0);
    const auto q = resolve_quantizer(c);
    CHECK(q.min_db == -60.0);
    CHECK(q.max_db == -40.0);
    CHECK(q.bits == 8);
}

TEST_CASE("unknown keys and bad values are config errors") {
    CHECK_THROWS_AS(from_json(json::parse(R"({"sede": 1})")), ConfigError);
    CHECK_THROWS_AS(from_json(json::parse(R"({"room": {"height": 3}})")), ConfigError);
    CHECK_THROWS_AS(from_json(json::parse(R"({"seed": "one"})")), ConfigError);
    auto c = from_json(json::parse(R"({"sweep": {"trials": 0}})"));
    CHECK_THROWS_AS(c.validate(), ConfigError);
    c = from_json(json::parse(R"({"quantizer": {"min_db": -60}})"));
    CHECK_THROWS_AS(c.validate(), ConfigError);
    c = from_json(json::parse(R"({"design": {"beta_W": 30}})"));
    CHECK_THROWS_AS(c.validate(), ConfigError);
    c = from_json(json::parse(R"({"leds": {"positions": [[1, 1, 0.5]]}})"));
    CHECK_THROWS_AS(c.validate(), ConfigError);
}

TEST_CASE("loading from disk") {
    const auto dir = scratch("load");
    CHECK_THROWS(load_config(dir / "missing.json"));
    {
        std::ofstream os(dir / "bad.json");
        os << "{ not json";
    }
    CHECK_THROWS_AS(load_config(dir / "bad.json"), ConfigError);
    {
        std::ofstream os(dir / "ok.json");
        os << R"({"output_dir": "out", "leds": {"count": 4}})";
    }
    const auto c = load_config(dir / "ok.json");
    CHECK(c.output_dir == "out");
    CHECK(c.leds().size() == 4);
    std::filesystem::remove_all(dir);
}

TEST_CASE("channel CSV parsing") {
    std::stringstream ok("# gains\n1e-6, 2e-6\n\n3e-6,0\n");
    const auto h = read_channel_csv(ok);
    CHECK(h.users() == 2);
    CHECK(h.leds() == 2);
    CHECK(h(1, 0) == 3e-6);
    std::stringstream out;
    write_channel_csv(out, h);
    const auto back = read_channel_csv(out);
    CHECK(back.gains() == h.gains());

    std::stringstream neg("1e-6,-2e-6\n");
    CHECK_THROWS_AS(read_channel_csv(neg), ConfigError);
    std::stringstream ragged("1,2\n3\n");
    CHECK_THROWS_AS(read_channel_csv(ragged), ConfigError);
    std::stringstream text("1,abc\n");
    CHECK_THROWS_AS(read_channel_csv(text), ConfigError);
    std::stringstream empty("# nothing\n");
    CHECK_THROWS_AS(read_channel_csv(empty), ConfigError);
}

TEST_CASE("calibration results are cached by key") {
    const auto dir = scratch("cache");
    RunConfig c;
    c.calibration.draws = 2000;
    c.calibration.cache_dir = (dir / "cache").string();
    const auto first = calibrate_cached(c);
    CHECK_FALSE(first.from_cache);
    CHECK(std::filesystem::exists(first.cache_file));
    const auto second = calibrate_cached(c);
    CHECK(second.from_cache);
    CHECK(second.result.min_db == first.result.min_db);
    CHECK(second.result.max_db == first.result.max_db);
    CHECK(second.cache_file == first.cache_file);

    // A different seed is a different key.
    c.calibration.seed = 2;
    const auto third = calibrate_cached(c);
    CHECK_FALSE(third.from_cache);
    CHECK(third.cache_file != first.cache_file);

    // Corrupt entries are recomputed.
    {
        std::ofstream os(first.cache_file);
        os << "garbage";
    }
    c.calibration.seed = 1;
    const auto again = calibrate_cached(c);
    CHECK_FALSE(again.from_cache);
    CHECK(again.result.min_db == first.result.min_db);

    // Cache disabled.
    c.calibration.cache_dir.clear();
    const auto none = calibrate_cached(c);
    CHECK_FALSE(none.from_cache);
    CHECK(none.cache_file.empty());
    std::filesystem::remove_all(dir);
}

TEST_CASE("sweep config mirrors the run config") {
    RunConfig c;
    c.seed = 42;
    c.sweep.trials = 3;
    c.sweep.zero_floor = false;
    const QuantizerConfig q{8, -60.0, -40.0, 10.0};
    const auto s = make_sweep_config(c, q);
    CHECK(s.seed == 42);
    CHECK(s.trials == 3);
    CHECK_FALSE(s.zero_floor);
    CHECK(s.quantizer.min_db == -60.0);
    CHECK(s.leds.size() == 6);
    CHECK_NOTHROW(s.validate());
}
