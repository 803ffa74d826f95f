#include <catch2/catch_amalgamated.hpp>

#include <sstream>

#include "vlcprec/planted.hpp"
#include "vlcprec/socp.hpp"

using namespace vlcprec::socp;
using Catch::Approx;

TEST_CASE("one-dimensional LP: minimize x subject to x >= 1") {
    ProgramBuilder pb(1);
    pb.set_objective(0, 1.0);
    pb.add_nonneg(AffineExpr(-1.0).add(0, 1.0));
    const auto r = solve(pb.build());
    REQUIRE(r.status == SolveStatus::Optimal);
    CHECK(r.x[0] == Approx(1.0).epsilon(1e-7));
    CHECK(r.objective_value == Approx(1.0).epsilon(1e-7));
}

TEST_CASE("norm of a fixed vector") {
    ProgramBuilder pb(1);
    pb.set_objective(0, 1.0);
    pb.add_soc({AffineExpr().add(0, 1.0), AffineExpr(3.0), AffineExpr(4.0)});
    const auto r = solve(pb.build());
    REQUIRE(r.status == SolveStatus::Optimal);
    CHECK(r.x[0] == Approx(5.0).epsilon(1e-7));
}

TEST_CASE("equalities as paired inequalities") {
    // variables t, x, y
    ProgramBuilder pb(3);
    pb.set_objective(0, 1.0);
    pb.add_soc({AffineExpr().add(0, 1.0), AffineExpr().add(1, 1.0), AffineExpr().add(2, 1.0)});
    pb.add_nonneg(AffineExpr(-3.0).add(1, 1.0));
    pb.add_nonneg(AffineExpr(3.0).add(1, -1.0));
    pb.add_nonneg(AffineExpr(-4.0).add(2, 1.0));
    pb.add_nonneg(AffineExpr(4.0).add(2, -1.0));
    const auto p = pb.build();
    CHECK(p.num_soc() == 1);
    CHECK(p.num_nonneg_rows() == 4);
    const auto r = solve(p);
    REQUIRE(r.status == SolveStatus::Optimal);
    CHECK(r.x[0] == Approx(5.0).epsilon(1e-6));
    CHECK(r.x[1] == Approx(3.0).epsilon(1e-6));
    CHECK(r.x[2] == Approx(4.0).epsilon(1e-6));
}

TEST_CASE("contradictory bounds are primal infeasible with a certificate") {
    ProgramBuilder pb(1);
    pb.set_objective(0, 1.0);
    pb.add_nonneg(AffineExpr(-1.0).add(0, 1.0));  // x >= 1
    pb.add_nonneg(AffineExpr().add(0, -1.0));     // -x >= 0
    const auto p = pb.build();
    const auto r = solve(p);
    REQUIRE(r.status == SolveStatus::PrimalInfeasible);
    REQUIRE(r.certificate.size() == 2);
    CHECK((r.certificate.array() >= -1e-9).all());
    CHECK((Eigen::MatrixXd(p.A).transpose() * r.certificate).norm() <= 1e-8);
    CHECK(p.b.dot(r.certificate) == Approx(-1.0).epsilon(1e-8));
}

TEST_CASE("unbounded objective is dual infeasible") {
    ProgramBuilder pb(2);
    pb.set_objective(0, -1.0);
    pb.add_nonneg(AffineExpr().add(0, 1.0));
    pb.add_nonneg(AffineExpr(1.0).add(1, 1.0));
    const auto r = solve(pb.build());
    CHECK(r.status == SolveStatus::DualInfeasible);
    CHECK(r.certificate_residual <= 1e-8);
}

TEST_CASE("zero row with negative rhs is caught in presolve") {
    ProgramBuilder pb(1);
    pb.set_objective(0, 1.0);
    pb.add_nonneg(AffineExpr(-2.0));
    pb.add_nonneg(AffineExpr().add(0, 1.0));
    const auto r = solve(pb.build());
    CHECK(r.status == SolveStatus::PrimalInfeasible);
    CHECK(r.certificate_residual == 0.0);
}

TEST_CASE("presolve drops zero and duplicate rows") {
    ProgramBuilder pb(2);
    pb.set_objective(0, 1.0);
    pb.set_objective(1, 1.0);
    pb.add_nonneg(AffineExpr(-1.0).add(0, 1.0));
    pb.add_nonneg(AffineExpr(-1.0).add(0, 1.0));
    pb.add_nonneg(AffineExpr(5.0));
    pb.add_nonneg(AffineExpr(-2.0).add(1, 1.0));
    const auto r = solve(pb.build());
    REQUIRE(r.status == SolveStatus::Optimal);
    CHECK(r.diagnostics.rows_dropped == 2);
    CHECK(r.objective_value == Approx(3.0).epsilon(1e-7));
    CHECK(r.s.size() == 4);
    SolveSettings off;
    off.presolve = false;
    const auto r2 = solve(pb.build(), off);
    REQUIRE(r2.status == SolveStatus::Optimal);
    CHECK(r2.diagnostics.rows_dropped == 0);
    CHECK(r2.objective_value == Approx(3.0).epsilon(1e-7));
}

TEST_CASE("planted optima are recovered") {
    for (int i = 0; i < 20; ++i) {
        const auto p = make_planted(4 + 2 * i, 3 + 3 * (i % 7), 1 + i % 6, 2 + i % 7, 900 + i);
        const auto r = solve(p.program);
        INFO("instance " << i);
        REQUIRE(r.status == SolveStatus::Optimal);
        CHECK(std::abs(r.objective_value - p.objective) <= 1e-6 * std::max(1.0, std::abs(p.objective)));
        CHECK(r.residuals.primal <= 1e-8);
        CHECK(r.residuals.dual <= 1e-8);
        CHECK(r.residuals.gap <= 1e-8);
        // Weak duality.
        CHECK(r.objective_value >= r.dual_objective - 1e-8 * std::max(1.0, std::abs(r.objective_value)));
    }
}

TEST_CASE("planted infeasible programs return certificates") {
    for (int i = 0; i < 10; ++i) {
        const auto p = make_infeasible(4 + i, 5 + 2 * i, 1 + i % 4, 3 + i % 5, 300 + i);
        const auto r = solve(p.program);
        INFO("instance " << i);
        REQUIRE(r.status == SolveStatus::PrimalInfeasible);
        const Eigen::VectorXd& y = r.certificate;
        CHECK(p.program.b.dot(y) == Approx(-1.0).epsilon(1e-8));
        CHECK((Eigen::MatrixXd(p.program.A).transpose() * y).norm() <= 1e-7);
        CHECK(r.certificate_residual <= 1e-8);
    }
}

TEST_CASE("scaling the rows of a block leaves the optimum unchanged") {
    for (int i = 0; i < 5; ++i) {
        const auto p = make_planted(8, 10, 3, 5, 40 + i);
        auto q = p.program;
        // Scale every row of each block by its own positive factor.
        Eigen::VectorXd f(q.b.size());
        Eigen::Index off = 0;
        double scale = 0.01;
        for (const auto& blk : q.cones) {
            f.segment(off, blk.dim).setConstant(scale);
            scale *= 17.0;
            off += blk.dim;
        }
        q.A = f.asDiagonal() * q.A;
        q.b = f.asDiagonal() * q.b;
        const auto r0 = solve(p.program);
        const auto r1 = solve(q);
        REQUIRE(r0.status == SolveStatus::Optimal);
        REQUIRE(r1.status == SolveStatus::Optimal);
        CHECK(std::abs(r1.objective_value - r0.objective_value) <= 1e-6 * std::max(1.0, std::abs(r0.objective_value)));
    }
}

TEST_CASE("text format round trip") {
    const auto p = make_planted(5, 4, 2, 4, 7).program;
    std::stringstream ss;
    write_text(ss, p);
    const auto q = read_text(ss);
    CHECK(q.cones == p.cones);
    CHECK(q.c == p.c);
    CHECK(q.b == p.b);
    CHECK(Eigen::MatrixXd(q.A) == Eigen::MatrixXd(p.A));
    std::stringstream bad("not-a-program 1");
    CHECK_THROWS(read_text(bad));
}

TEST_CASE("program validation") {
    ConeProgram p;
    p.c = Eigen::VectorXd::Ones(1);
    p.A.resize(2, 1);
    p.b = Eigen::VectorXd::Zero(2);
    p.cones = {{ConeKind::Soc, 1}, {ConeKind::Nonneg, 1}};
    CHECK_THROWS_AS(p.validate(), std::invalid_argument);
    p.cones = {{ConeKind::Nonneg, 1}};
    CHECK_THROWS_AS(p.validate(), std::invalid_argument);
    p.cones = {{ConeKind::Nonneg, 2}};
    CHECK_NOTHROW(p.validate());
    SolveSettings s;
    s.tol = 0.0;
    CHECK_THROWS_AS(solve(p, s), std::invalid_argument);
}

TEST_CASE("iteration limit reports MaxIterations") {
    const auto p = make_planted(20, 20, 5, 6, 1).program;
    SolveSettings s;
    s.max_iter = 2;
    const auto r = solve(p, s);
    CHECK(r.status == SolveStatus::MaxIterations);
    CHECK(r.iterations <= 2);
}
