#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "vlcprec/region.hpp"
#include "vlcprec/socp.hpp"

namespace vlcprec {

/// Per-user SNIR targets and the power model shared by all LEDs.
struct DesignSpec {
    Eigen::VectorXd gamma;      // linear SNIR targets
    Eigen::VectorXd sigma2;     // noise variances
    double rho = 0.4;           // PD responsivity
    Eigen::VectorXd amplitude;  // symbol bounds A_k, |s_k| <= A_k
    double beta = 10.0;         // DC optical power per LED
    double p_max = 20.0;

    int users() const { return static_cast<int>(gamma.size()); }

    /// Largest admissible swing around the DC bias.
    double headroom_cap() const { return std::min(beta, p_max - beta); }

    void validate() const {
        const auto k = gamma.size();
        if (k < 1) throw std::invalid_argument("DesignSpec: need at least one user");
        if (sigma2.size() != k || amplitude.size() != k) {
            throw std::invalid_argument("DesignSpec: per-user vectors differ in length");
        }
        if (!(gamma.array() > 0.0).all() || !(sigma2.array() > 0.0).all() || !(amplitude.array() > 0.0).all() ||
            !gamma.allFinite() || !sigma2.allFinite() || !amplitude.allFinite()) {
            throw std::invalid_argument("DesignSpec: gamma, sigma2 and amplitude must be positive and finite");
        }
        if (!(rho > 0.0) || !(p_max > 0.0) || !(beta > 0.0) || !(beta < p_max)) {
            throw std::invalid_argument("DesignSpec: need rho > 0 and 0 < beta < p_max");
        }
    }

    /// Same target, noise and amplitude for every user.
    static DesignSpec uniform(int k, double gamma_linear, double sigma2, double rho, double amplitude, double beta,
                              double p_max) {
        DesignSpec s;
        s.gamma = Eigen::VectorXd::Constant(k, gamma_linear);
        s.sigma2 = Eigen::VectorXd::Constant(k, sigma2);
        s.rho = rho;
        s.amplitude = Eigen::VectorXd::Constant(k, amplitude);
        s.beta = beta;
        s.p_max = p_max;
        s.validate();
        return s;
    }
};

inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
inline double linear_to_db(double x) { return 10.0 * std::log10(x); }

/// Column layout of the design variables: vec(W) (column k is w_k), then the
/// |W| epigraph variables t in the same order, then the headroom v.
struct VariableLayout {
    int users = 0;
    int leds = 0;

    int w(int l, int k) const { return k * leds + l; }
    int t(int l, int k) const { return users * leds + k * leds + l; }
    int v() const { return 2 * users * leds; }
    int count() const { return 2 * users * leds + 1; }
};

struct ProblemSize {
    int variables = 0;
    int soc_constraints = 0;
    int soc_dim = 0;
    int linear_rows = 0;
};

/// Size of the robust program for K users, L LEDs and `vertices` corners per user.
inline ProblemSize robust_problem_size(int users, int leds, long long vertices_per_user) {
    ProblemSize p;
    p.variables = 2 * users * leds + 1;
    p.soc_constraints = static_cast<int>(users * vertices_per_user);
    p.soc_dim = users + 1;
    p.linear_rows = 2 * users * leds + leds + 2 + p.soc_constraints;
    return p;
}

namespace detail {
inline void check_regions(const DesignSpec& spec, const std::vector<VertexSet>& regions) {
    spec.validate();
    if (static_cast<int>(regions.size()) != spec.users()) {
        throw std::invalid_argument("precoder: one vertex set per user is required");
    }
    const int leds = regions.front().dim();
    if (leds < 1) throw std::invalid_argument("precoder: empty channel vectors");
    for (const auto& r : regions) {
        if (r.dim() != leds) throw std::invalid_argument("precoder: vertex sets disagree on the LED count");
        if (r.count() < 1) throw std::invalid_argument("precoder: empty vertex set");
        if (!r.vertices.allFinite() || (r.vertices.array() < 0.0).any()) {
            throw std::invalid_argument("precoder: vertices must be finite and nonnegative");
        }
    }
}
}  // namespace detail

/// Robust min-headroom program over the region vertices.
///
/// For every user k and (deduplicated) vertex h:
///     || (sigma_k, rho w_i'h for i != k) || <= rho / sqrt(gamma_k) * w_k'h
///     w_k'h >= 0
/// plus |W_lk| <= t_lk, sum_k A_k t_lk <= v, 0 <= v <= min(beta, Pmax - beta).
inline socp::ConeProgram build_robust(const DesignSpec& spec, const std::vector<VertexSet>& regions) {
    detail::check_regions(spec, regions);
    const VariableLayout lay{spec.users(), regions.front().dim()};
    const int users = lay.users;
    const int leds = lay.leds;

    std::vector<VertexSet> unique;
    unique.reserve(regions.size());
    for (const auto& r : regions) unique.push_back(dedupe_vertices(r));

    socp::ProgramBuilder pb(lay.count());
    pb.set_objective(lay.v(), 1.0);

    const auto inner = [&](int user_col, const Eigen::VectorXd& h, double scale) {
        socp::AffineExpr e;
        for (int l = 0; l < leds; ++l) e.add(lay.w(l, user_col), scale * h[l]);
        return e;
    };

    for (int k = 0; k < users; ++k) {
        const double lead = spec.rho / std::sqrt(spec.gamma[k]);
        const double sigma = std::sqrt(spec.sigma2[k]);
        for (int j = 0; j < unique[static_cast<std::size_t>(k)].count(); ++j) {
            const Eigen::VectorXd h = unique[static_cast<std::size_t>(k)].vertex(j);
            std::vector<socp::AffineExpr> cone;
            cone.reserve(static_cast<std::size_t>(users) + 1);
            cone.push_back(inner(k, h, lead));
            cone.emplace_back(sigma);
            for (int i = 0; i < users; ++i) {
                if (i != k) cone.push_back(inner(i, h, spec.rho));
            }
            pb.add_soc(cone);
        }
    }

    for (int k = 0; k < users; ++k) {
        for (int l = 0; l < leds; ++l) {
            socp::AffineExpr up;  // t - W >= 0
            up.add(lay.t(l, k), 1.0).add(lay.w(l, k), -1.0);
            pb.add_nonneg(up);
            socp::AffineExpr down;  // t + W >= 0
            down.add(lay.t(l, k), 1.0).add(lay.w(l, k), 1.0);
            pb.add_nonneg(down);
        }
    }
    for (int l = 0; l < leds; ++l) {
        socp::AffineExpr led;  // v - sum_k A_k t_lk >= 0
        led.add(lay.v(), 1.0);
        for (int k = 0; k < users; ++k) led.add(lay.t(l, k), -spec.amplitude[k]);
        pb.add_nonneg(led);
    }
    {
        socp::AffineExpr lower;
        lower.add(lay.v(), 1.0);
        pb.add_nonneg(lower);
        socp::AffineExpr upper(spec.headroom_cap());
        upper.add(lay.v(), -1.0);
        pb.add_nonneg(upper);
    }
    for (int k = 0; k < users; ++k) {
        for (int j = 0; j < unique[static_cast<std::size_t>(k)].count(); ++j) {
            pb.add_nonneg(inner(k, unique[static_cast<std::size_t>(k)].vertex(j), 1.0));
        }
    }
    return pb.build();
}

/// Non-robust program: each user's region collapses to its centroid (K x L).
inline socp::ConeProgram build_nonrobust(const DesignSpec& spec, const Eigen::MatrixXd& centroids) {
    if (!(centroids.array() > 0.0).all()) {
        throw std::invalid_argument("build_nonrobust: centroids must be strictly positive");
    }
    std::vector<VertexSet> regions;
    for (Eigen::Index k = 0; k < centroids.rows(); ++k) {
        regions.push_back(VertexSet::single(centroids.row(k).transpose()));
    }
    return build_robust(spec, regions);
}

enum class DesignStatus { Optimal, Infeasible, NumericalFailure };

inline const char* to_string(DesignStatus s) {
    switch (s) {
        case DesignStatus::Optimal: return "Optimal";
        case DesignStatus::Infeasible: return "Infeasible";
        case DesignStatus::NumericalFailure: return "NumericalFailure";
    }
    return "Unknown";
}

struct SolverStats {
    socp::SolveStatus solver_status = socp::SolveStatus::MaxIterations;
    int iterations = 0;
    socp::Residuals residuals;
    double solve_seconds = 0.0;
    double channel_scale = 1.0;
    double max_violation = 0.0;
    int variables = 0;
    int rows = 0;
    int soc_constraints = 0;
};

struct DesignOutcome {
    DesignStatus status = DesignStatus::NumericalFailure;
    Eigen::MatrixXd precoders;  // L x K, column k is w_k
    double headroom_v = std::numeric_limits<double>::quiet_NaN();
    SolverStats stats;

    bool optimal() const { return status == DesignStatus::Optimal; }
};

struct DesignSettings {
    socp::SolveSettings solver;
    /// Post-solve relative tolerance; outcomes that miss it become NumericalFailure.
    double verify_tol = 1e-6;
    /// Rescale channels and noise so the noise terms are unity before solving.
    bool rescale = true;
};

/// Largest relative violation of the robust constraints by (W, v).
inline double max_constraint_violation(const DesignSpec& spec, const std::vector<VertexSet>& regions,
                                       const Eigen::MatrixXd& w, double v) {
    double worst = 0.0;
    const int users = spec.users();
    for (int k = 0; k < users; ++k) {
        const double sigma = std::sqrt(spec.sigma2[k]);
        const double lead = spec.rho / std::sqrt(spec.gamma[k]);
        const auto& verts = regions[static_cast<std::size_t>(k)].vertices;
        for (Eigen::Index j = 0; j < verts.cols(); ++j) {
            const Eigen::VectorXd proj = w.transpose() * verts.col(j);  // w_i'h for all i
            double interf = sigma * sigma;
            for (int i = 0; i < users; ++i) {
                if (i != k) interf += spec.rho * spec.rho * proj[i] * proj[i];
            }
            const double lhs = std::sqrt(interf);
            const double rhs = lead * proj[k];
            worst = std::max(worst, (lhs - rhs) / lhs);
            const double hw_scale = std::max(w.col(k).norm() * verts.col(j).norm(), std::numeric_limits<double>::min());
            worst = std::max(worst, -proj[k] / hw_scale);
        }
    }
    const double vscale = std::max(1.0, std::abs(v));
    for (Eigen::Index l = 0; l < w.rows(); ++l) {
        const double row = (w.row(l).cwiseAbs().transpose().array() * spec.amplitude.array()).sum();
        worst = std::max(worst, (row - v) / vscale);
    }
    worst = std::max(worst, -v / vscale);
    worst = std::max(worst, (v - spec.headroom_cap()) / std::max(1.0, spec.headroom_cap()));
    return worst;
}

/// Flip each w_k whose inner product with the first vertex of region k is negative.
inline DesignOutcome normalize_sign(DesignOutcome outcome, const std::vector<VertexSet>& regions) {
    if (!outcome.optimal()) {
        throw std::invalid_argument("normalize_sign: outcome is not optimal");
    }
    for (Eigen::Index k = 0; k < outcome.precoders.cols(); ++k) {
        const auto& verts = regions[static_cast<std::size_t>(k)].vertices;
        if (outcome.precoders.col(k).dot(verts.col(0)) < 0.0) outcome.precoders.col(k) *= -1.0;
    }
    return outcome;
}

/// Solves the robust design over the given vertex sets.
inline DesignOutcome design(const DesignSpec& spec, const std::vector<VertexSet>& regions,
                            const DesignSettings& settings = {}) {
    detail::check_regions(spec, regions);
    DesignOutcome out;

    // Scaling h -> c h and sigma -> c sigma leaves (W, v) unchanged.
    double scale = 1.0;
    if (settings.rescale) scale = 1.0 / std::sqrt(spec.sigma2.maxCoeff());
    DesignSpec scaled_spec = spec;
    scaled_spec.sigma2 *= scale * scale;
    std::vector<VertexSet> scaled_regions = regions;
    for (auto& r : scaled_regions) r.vertices *= scale;

    const socp::ConeProgram program = build_robust(scaled_spec, scaled_regions);
    const VariableLayout lay{spec.users(), regions.front().dim()};

    const auto t0 = std::chrono::steady_clock::now();
    const socp::SolveResult sol = socp::solve(program, settings.solver);
    const auto t1 = std::chrono::steady_clock::now();

    out.stats.solver_status = sol.status;
    out.stats.iterations = sol.iterations;
    out.stats.residuals = sol.residuals;
    out.stats.solve_seconds = std::chrono::duration<double>(t1 - t0).count();
    out.stats.channel_scale = scale;
    out.stats.variables = program.num_vars();
    out.stats.rows = program.num_rows();
    out.stats.soc_constraints = program.num_soc();

    if (sol.status == socp::SolveStatus::PrimalInfeasible) {
        out.status = DesignStatus::Infeasible;
        return out;
    }
    if (sol.status != socp::SolveStatus::Optimal) {
        out.status = DesignStatus::NumericalFailure;
        return out;
    }

    Eigen::MatrixXd w(lay.leds, lay.users);
    for (int k = 0; k < lay.users; ++k) {
        for (int l = 0; l < lay.leds; ++l) w(l, k) = sol.x[lay.w(l, k)];
    }
    // Pull the per-LED swing back inside the cap if the solver overshot it by
    // its residual, so the optical power envelope holds exactly.
    const double cap = spec.headroom_cap();
    const Eigen::VectorXd swing = w.cwiseAbs() * spec.amplitude;
    const double peak = swing.size() > 0 ? swing.maxCoeff() : 0.0;
    if (peak > cap) w *= cap / peak;
    const Eigen::VectorXd swing_after = w.cwiseAbs() * spec.amplitude;

    out.precoders = std::move(w);
    out.headroom_v = std::clamp(swing_after.maxCoeff(), 0.0, cap);
    out.status = DesignStatus::Optimal;
    out = normalize_sign(std::move(out), regions);

    out.stats.max_violation = max_constraint_violation(spec, regions, out.precoders, out.headroom_v);
    if (!(out.stats.max_violation <= settings.verify_tol)) {
        out.status = DesignStatus::NumericalFailure;
    }
    return out;
}

/// Robust design from boxes; vertices are enumerated here.
inline DesignOutcome design(const DesignSpec& spec, const std::vector<UncertaintyBox>& boxes,
                            const DesignSettings& settings = {}) {
    std::vector<VertexSet> regions;
    regions.reserve(boxes.size());
    for (const auto& b : boxes) regions.push_back(enumerate_vertices(b));
    return design(spec, regions, settings);
}

/// Non-robust design trusting the K x L centroid matrix.
inline DesignOutcome design_nonrobust(const DesignSpec& spec, const Eigen::MatrixXd& centroids,
                                      const DesignSettings& settings = {}) {
    if (!(centroids.array() > 0.0).all()) {
        throw std::invalid_argument("design_nonrobust: centroids must be strictly positive");
    }
    std::vector<VertexSet> regions;
    for (Eigen::Index k = 0; k < centroids.rows(); ++k) {
        regions.push_back(VertexSet::single(centroids.row(k).transpose()));
    }
    return design(spec, regions, settings);
}

}  // namespace vlcprec
