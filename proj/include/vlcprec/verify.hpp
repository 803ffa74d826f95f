#pragma once

// Invariant suites over designed precoders, shared by `vlcprec verify` and
// the acceptance harness.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <limits>
#include <string>
#include <vector>

#include "vlcprec/experiments.hpp"
#include "vlcprec/metrics.hpp"
#include "vlcprec/planted.hpp"
#include "vlcprec/precoder.hpp"
#include "vlcprec/region.hpp"
#include "vlcprec/socp.hpp"

namespace vlcprec {

struct CheckResult {
    std::string name;
    bool passed = false;
    std::string detail;
};

namespace detail {

inline std::string fmt(const char* f, double a) {
    char buf[128];
    std::snprintf(buf, sizeof buf, f, a);
    return buf;
}

template <class... Args>
std::string fmtn(const char* f, Args... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

}  // namespace detail

struct SolverOracleStats {
    int planted = 0;
    int planted_ok = 0;
    double worst_rel_error = 0.0;
    int infeasible = 0;
    int infeasible_ok = 0;
    double worst_certificate = 0.0;
    double seconds = 0.0;
};

/// Planted-optimum and planted-infeasible programs of mixed cone structure.
inline SolverOracleStats run_solver_oracle(int planted, int infeasible, std::uint64_t seed) {
    SolverOracleStats s;
    const auto t0 = std::chrono::steady_clock::now();
    for (int i = 0; i < planted; ++i) {
        const auto p = socp::make_planted(6 + 3 * (i % 8), 4 + 5 * (i % 6), 1 + i % 7, 2 + i % 6,
                                          derive_seed({seed, 1, static_cast<std::uint64_t>(i)}));
        const auto r = socp::solve(p.program);
        const double rel = std::abs(r.objective_value - p.objective) / std::max(1.0, std::abs(p.objective));
        ++s.planted;
        if (r.status == socp::SolveStatus::Optimal && rel <= 1e-6) ++s.planted_ok;
        s.worst_rel_error = std::max(s.worst_rel_error, r.status == socp::SolveStatus::Optimal ? rel : 1.0);
    }
    for (int i = 0; i < infeasible; ++i) {
        const auto p = socp::make_infeasible(5 + 2 * i, 6 + 3 * i, 1 + i % 4, 3 + i % 4,
                                             derive_seed({seed, 2, static_cast<std::uint64_t>(i)}));
        const auto r = socp::solve(p.program);
        ++s.infeasible;
        if (r.status == socp::SolveStatus::PrimalInfeasible && r.certificate.size() == p.program.b.size() &&
            r.certificate_residual <= socp::SolveSettings{}.tol) {
            ++s.infeasible_ok;
        }
        s.worst_certificate = std::max(s.worst_certificate, r.certificate_residual);
    }
    s.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return s;
}

/// Accumulates invariant evidence over trials. All statistics are
/// order-independent, so results do not depend on worker scheduling.
class InvariantAccumulator {
public:
    explicit InvariantAccumulator(int interior_samples = 1000, int symbol_vectors = 10000)
        : interior_samples_(interior_samples), symbol_vectors_(symbol_vectors) {}

    void observe(const TrialDetail& t) {
        const DesignSpec& spec = t.spec;
        const double gamma = spec.gamma.minCoeff();
        const double target_db = linear_to_db(gamma);
        for (int pass = 0; pass < 2; ++pass) {
            const DesignOutcome& out = pass == 0 ? t.robust : t.nonrobust;
            if (!out.optimal()) continue;
            const Eigen::MatrixXd& w = out.precoders;
            ++feasible_designs_;
            check_power(w, spec, t.record.seed + static_cast<std::uint64_t>(pass));
            if (pass == 1) {
                for (int k = 0; k < w.cols(); ++k) {
                    const double proj = w.col(k).dot(Eigen::VectorXd(t.nonrobust_centroids.row(k).transpose()));
                    if (!(proj > 0.0)) ++sign_violations_;
                }
                continue;
            }
            ++robust_feasible_;
            // Sign of w_k'h must be constant over the vertices of region k.
            for (int k = 0; k < w.cols(); ++k) {
                const Eigen::VectorXd proj = t.regions[static_cast<std::size_t>(k)].vertices.transpose() * w.col(k);
                if (!((proj.array() > 0.0).all() || (proj.array() < 0.0).all())) ++sign_violations_;
            }
            // Vertex and interior SNIR relative to target.
            for (int k = 0; k < w.cols(); ++k) {
                const auto& verts = t.regions[static_cast<std::size_t>(k)].vertices;
                for (Eigen::Index j = 0; j < verts.cols(); ++j) {
                    const double s = snir(verts.col(j), w, k, spec.sigma2[k], spec.rho) / spec.gamma[k];
                    min_vertex_ratio_ = std::min(min_vertex_ratio_, s);
                }
                Rng rng(derive_seed({t.record.seed, 0x5A, static_cast<std::uint64_t>(k)}));
                const Eigen::MatrixXd samples = sample_in_box(t.boxes[static_cast<std::size_t>(k)], interior_samples_, rng);
                for (Eigen::Index j = 0; j < samples.cols(); ++j) {
                    const double s = snir(samples.col(j), w, k, spec.sigma2[k], spec.rho) / spec.gamma[k];
                    min_interior_ratio_ = std::min(min_interior_ratio_, s);
                }
            }
            const double wc = t.record.robust.worst_corner_snir_db;
            max_binding_gap_db_ = std::max(max_binding_gap_db_, std::abs(wc - target_db));
            if (t.record.actual_in_region) {
                min_actual_margin_db_ = std::min(min_actual_margin_db_, t.record.robust.actual_worst_user_snir_db - target_db);
            } else {
                ++actual_outside_;
            }
        }
    }

    int robust_feasible() const { return robust_feasible_; }
    int feasible_designs() const { return feasible_designs_; }
    int power_checked() const { return power_checked_; }
    double min_vertex_ratio() const { return min_vertex_ratio_; }
    double min_interior_ratio() const { return min_interior_ratio_; }
    double max_binding_gap_db() const { return max_binding_gap_db_; }
    double min_actual_margin_db() const { return min_actual_margin_db_; }
    int actual_outside() const { return actual_outside_; }
    int sign_violations() const { return sign_violations_; }
    int power_violations() const { return power_violations_; }
    double power_min_W() const { return power_min_; }
    double power_max_W() const { return power_max_; }

private:
    void check_power(const Eigen::MatrixXd& w, const DesignSpec& spec, std::uint64_t seed) {
        Rng rng(derive_seed({seed, 0xC2}));
        Eigen::VectorXd s(w.cols());
        for (int n = 0; n < symbol_vectors_; ++n) {
            for (Eigen::Index k = 0; k < s.size(); ++k) s[k] = rng.uniform(-spec.amplitude[k], spec.amplitude[k]);
            const Eigen::VectorXd x = transmit_power(w, s, spec.beta);
            power_min_ = std::min(power_min_, x.minCoeff());
            power_max_ = std::max(power_max_, x.maxCoeff());
            if (x.minCoeff() < 0.0 || x.maxCoeff() > spec.p_max) ++power_violations_;
        }
        ++power_checked_;
    }

    int interior_samples_;
    int symbol_vectors_;
    int robust_feasible_ = 0;
    int feasible_designs_ = 0;
    int power_checked_ = 0;
    double min_vertex_ratio_ = std::numeric_limits<double>::infinity();
    double min_interior_ratio_ = std::numeric_limits<double>::infinity();
    double max_binding_gap_db_ = 0.0;
    double min_actual_margin_db_ = std::numeric_limits<double>::infinity();
    int actual_outside_ = 0;
    int sign_violations_ = 0;
    int power_violations_ = 0;
    double power_min_ = std::numeric_limits<double>::infinity();
    double power_max_ = -std::numeric_limits<double>::infinity();
};

struct ScalingStats {
    int instances = 0;
    int compared = 0;
    double worst_rel = 0.0;
};

/// Optimal v under h -> c h, sigma -> c sigma on instances drawn from cfg.
/// Rescaling inside design() is disabled so the solver sees the raw scale.
inline ScalingStats run_scaling_invariance(const SweepConfig& cfg, int instances) {
    ScalingStats s;
    const double factors[] = {1e-3, 0.37, 8.0, 1e4};
    DesignSettings raw = cfg.solver;
    raw.rescale = false;
    for (int i = 0; i < instances; ++i) {
        const int k = 2 + i % 3;
        const int b = (i % 2 == 0) ? 8 : 16;
        TrialDetail t = run_trial_detail(cfg, k, b, 10'000 + i);
        ++s.instances;
        // Base: noise normalized to 1, the well-conditioned reference scale.
        const double c0 = 1.0 / std::sqrt(t.spec.sigma2.maxCoeff());
        const auto scaled = [&](double c) {
            DesignSpec sp = t.spec;
            sp.sigma2 *= c * c;
            std::vector<VertexSet> regs = t.regions;
            for (auto& r : regs) r.vertices *= c;
            return design(sp, regs, raw);
        };
        const DesignOutcome base = scaled(c0);
        if (!base.optimal()) continue;
        for (double f : factors) {
            const DesignOutcome o = scaled(c0 * f);
            ++s.compared;
            const double rel = o.optimal() ? std::abs(o.headroom_v - base.headroom_v) / std::max(1e-12, base.headroom_v) : 1.0;
            s.worst_rel = std::max(s.worst_rel, rel);
        }
    }
    return s;
}

}  // namespace vlcprec
