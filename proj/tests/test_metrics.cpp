#include <catch2/catch_amalgamated.hpp>

#include "support/oracles.hpp"
#include "vlcprec/metrics.hpp"

using namespace vlcprec;
using Catch::Approx;

TEST_CASE("unit SNIR for a single user at h'w = sigma / rho") {
    Eigen::VectorXd h(2);
    h << 0.5, 0.5;
    Eigen::MatrixXd w(2, 1);
    const double sigma = 0.3, rho = 0.4;
    w << sigma / rho, sigma / rho;
    CHECK(snir(h, w, 0, sigma * sigma, rho) == Approx(1.0));
}

TEST_CASE("orthogonal precoder gives zero SNIR") {
    Eigen::VectorXd h(2);
    h << 1.0, 0.0;
    Eigen::MatrixXd w(2, 1);
    w << 0.0, 3.0;
    CHECK(snir(h, w, 0, 1.0, 1.0) == 0.0);
}

TEST_CASE("two-user hand example") {
    Eigen::VectorXd h(2);
    h << 1.0, 0.0;
    Eigen::MatrixXd w(2, 2);
    w << 2.0, 0.0, 0.0, 5.0;
    CHECK(snir(h, w, 0, 1.0, 1.0) == Approx(4.0));
    CHECK_THROWS_AS(snir(h, w, 2, 1.0, 1.0), std::invalid_argument);
}

TEST_CASE("SNIR agrees with the summation oracle") {
    Rng rng(2);
    for (int t = 0; t < 200; ++t) {
        Eigen::VectorXd h(4);
        Eigen::MatrixXd w(4, 3);
        for (Eigen::Index i = 0; i < h.size(); ++i) h[i] = rng.uniform(0, 1);
        for (Eigen::Index i = 0; i < w.size(); ++i) w.data()[i] = rng.uniform(-1, 1);
        for (int k = 0; k < 3; ++k) CHECK(snir(h, w, k, 0.1, 0.7) == Approx(oracle::snir(h, w, k, 0.1, 0.7)));
    }
}

TEST_CASE("peak power per LED") {
    const auto spec = DesignSpec::uniform(2, 1.0, 1.0, 1.0, 1.0, 10.0, 20.0);
    Eigen::MatrixXd w = Eigen::MatrixXd::Zero(3, 2);
    CHECK((peak_power_per_led(w, spec).array() == 10.0).all());
    w(0, 0) = 0.5;
    w(0, 1) = -0.25;
    CHECK(peak_power_per_led(w, spec)[0] == Approx(10.75));
}

TEST_CASE("worst corner of degenerate regions equals the centroid SNIR") {
    const auto spec = DesignSpec::uniform(2, 1.0, 1e-2, 0.5, 1.0, 10.0, 20.0);
    Eigen::MatrixXd w(2, 2);
    w << 1.0, 0.2, 0.1, 1.0;
    Eigen::VectorXd c0(2), c1(2);
    c0 << 1.0, 0.3;
    c1 << 0.2, 1.0;
    std::vector<VertexSet> regions{VertexSet::single(c0), VertexSet::single(c1)};
    const double expect = std::min(snir(c0, w, 0, 1e-2, 0.5), snir(c1, w, 1, 1e-2, 0.5));
    CHECK(worst_corner_snir(regions, w, spec) == expect);
}

TEST_CASE("worst corner bounds interior samples when w_k'h keeps its sign") {
    const auto spec = DesignSpec::uniform(2, 1.0, 1e-2, 0.5, 1.0, 10.0, 20.0);
    Eigen::MatrixXd w(3, 2);
    w << 1.0, 0.3, 0.2, 1.0, 0.1, 0.4;
    Eigen::VectorXd lo(3), hi(3);
    lo << 0.8, 0.1, 0.2;
    hi << 1.2, 0.3, 0.4;
    const UncertaintyBox b0(lo, hi), b1(lo * 0.5, hi * 0.7);
    std::vector<VertexSet> regions{enumerate_vertices(b0), enumerate_vertices(b1)};
    const double wc = worst_corner_snir(regions, w, spec);
    Rng rng(9);
    const UncertaintyBox* boxes[] = {&b0, &b1};
    for (int k = 0; k < 2; ++k) {
        const Eigen::MatrixXd s = sample_in_box(*boxes[k], 10000, rng);
        for (Eigen::Index j = 0; j < s.cols(); ++j) CHECK(snir(s.col(j), w, k, 1e-2, 0.5) >= wc * (1 - 1e-12));
    }
}

TEST_CASE("evaluation report") {
    const auto spec = DesignSpec::uniform(2, db_to_linear(10.0), 1e-2, 1.0, 1.0, 10.0, 20.0);
    Eigen::MatrixXd g(2, 2);
    g << 1.0, 0.1, 0.1, 1.0;
    Eigen::MatrixXd w(2, 2);
    w << 1.0, 0.0, 0.0, 1.0;
    std::vector<VertexSet> regions{VertexSet::single(g.row(0).transpose()), VertexSet::single(g.row(1).transpose())};
    const auto r = evaluate(ChannelMatrix(g), regions, w, spec);
    REQUIRE(r.per_user_snir_db.size() == 2);
    CHECK(r.worst_user_snir_db == r.per_user_snir_db.minCoeff());
    CHECK(r.per_user_snir_db[0] == Approx(10.0 * std::log10(1.0 / (0.01 + 0.01))));
    CHECK(r.worst_corner_snir_db == Approx(r.worst_user_snir_db));
    CHECK(r.feasible);
    CHECK((r.per_led_peak_power_W.array() >= 0.0).all());

    // A low SNIR must be reported as is.
    w(1, 0) = 1.0;
    const auto bad = evaluate(ChannelMatrix(g), regions, w, spec);
    CHECK_FALSE(bad.feasible);
    CHECK(bad.worst_user_snir_db < 10.0);
}

TEST_CASE("dB conversion is power style") {
    CHECK(linear_to_db(100.0) == Approx(20.0));
    CHECK(db_to_linear(15.0) == Approx(31.6227766));
    CHECK(linear_to_db(db_to_linear(-3.5459)) == Approx(-3.5459));
}
