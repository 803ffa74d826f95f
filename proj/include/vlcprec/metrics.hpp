#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include <Eigen/Core>

#include "vlcprec/channel.hpp"
#include "vlcprec/precoder.hpp"
#include "vlcprec/region.hpp"

namespace vlcprec {

/// Electrical SNIR of user k after DC removal, linear scale.
inline double snir(const Eigen::VectorXd& h_k, const Eigen::MatrixXd& w, int k, double sigma2_k, double rho) {
    if (h_k.size() != w.rows() || k < 0 || k >= w.cols()) {
        throw std::invalid_argument("snir: dimension mismatch");
    }
    const Eigen::VectorXd proj = w.transpose() * h_k;
    const double r2 = rho * rho;
    double denom = sigma2_k;
    for (Eigen::Index i = 0; i < proj.size(); ++i) {
        if (i != k) denom += r2 * proj[i] * proj[i];
    }
    return r2 * proj[k] * proj[k] / denom;
}

/// Minimum SNIR over all users and all region vertices (linear).
inline double worst_corner_snir(const std::vector<VertexSet>& regions, const Eigen::MatrixXd& w,
                                const DesignSpec& spec) {
    if (static_cast<int>(regions.size()) != w.cols()) {
        throw std::invalid_argument("worst_corner_snir: one region per user is required");
    }
    double worst = std::numeric_limits<double>::infinity();
    for (int k = 0; k < w.cols(); ++k) {
        const auto& verts = regions[static_cast<std::size_t>(k)].vertices;
        for (Eigen::Index j = 0; j < verts.cols(); ++j) {
            worst = std::min(worst, snir(verts.col(j), w, k, spec.sigma2[k], spec.rho));
        }
    }
    return worst;
}

/// Worst-case instantaneous optical power per LED: beta + sum_k A_k |W_lk|.
inline Eigen::VectorXd peak_power_per_led(const Eigen::MatrixXd& w, const DesignSpec& spec) {
    if (w.cols() != spec.amplitude.size()) {
        throw std::invalid_argument("peak_power_per_led: amplitude vector does not match W");
    }
    return (w.cwiseAbs() * spec.amplitude).array() + spec.beta;
}

/// Per-LED transmitted optical power for one symbol vector, x = W s + beta.
inline Eigen::VectorXd transmit_power(const Eigen::MatrixXd& w, const Eigen::VectorXd& symbols, double beta) {
    return (w * symbols).array() + beta;
}

struct EvaluationReport {
    Eigen::VectorXd per_user_snir_db;
    double worst_user_snir_db = std::numeric_limits<double>::quiet_NaN();
    double worst_corner_snir_db = std::numeric_limits<double>::quiet_NaN();
    Eigen::VectorXd per_led_peak_power_W;
    /// Every user meets its target on the evaluated channel and the peak
    /// power stays inside [0, P_max].
    bool feasible = false;
};

/// Evaluates W on the actual channel (K x L) and at the region corners.
inline EvaluationReport evaluate(const ChannelMatrix& actual, const std::vector<VertexSet>& regions,
                                 const Eigen::MatrixXd& w, const DesignSpec& spec, double rel_tol = 1e-6) {
    const int users = actual.users();
    if (users != w.cols() || actual.leds() != w.rows()) {
        throw std::invalid_argument("evaluate: channel and precoder dimensions differ");
    }
    EvaluationReport r;
    r.per_user_snir_db.resize(users);
    bool meets = true;
    for (int k = 0; k < users; ++k) {
        const double s = snir(actual.user(k), w, k, spec.sigma2[k], spec.rho);
        r.per_user_snir_db[k] = linear_to_db(s);
        meets = meets && s >= spec.gamma[k] * (1.0 - rel_tol);
    }
    r.worst_user_snir_db = r.per_user_snir_db.minCoeff();
    r.worst_corner_snir_db = linear_to_db(worst_corner_snir(regions, w, spec));
    r.per_led_peak_power_W = peak_power_per_led(w, spec);
    const double lowest = spec.beta - (r.per_led_peak_power_W.array() - spec.beta).maxCoeff();
    r.feasible = meets && r.per_led_peak_power_W.maxCoeff() <= spec.p_max && lowest >= 0.0;
    return r;
}

}  // namespace vlcprec
