#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include <Eigen/Core>

#include "vlcprec/scenario.hpp"

namespace vlcprec {

/// Line-of-sight Lambertian link parameters. LEDs face straight down and
/// photodiodes straight up.
struct OpticalParams {
    double lambertian_order_m = 1.0;
    double pd_area_m2 = 1e-4;
    double fov_semi_angle_rad = 70.0 * std::numbers::pi / 180.0;
    double filter_gain = 1.0;
    double concentrator_index = 1.5;
    double responsivity_A_per_W = 0.4;

    void validate() const {
        if (!(lambertian_order_m > 0.0) || !(pd_area_m2 > 0.0) || !(filter_gain > 0.0) ||
            !(responsivity_A_per_W > 0.0)) {
            throw std::invalid_argument("OpticalParams: parameters must be positive");
        }
        if (!(fov_semi_angle_rad > 0.0) || fov_semi_angle_rad > std::numbers::pi / 2.0) {
            throw std::invalid_argument("OpticalParams: fov_semi_angle_rad must lie in (0, pi/2]");
        }
        if (!(concentrator_index >= 1.0)) {
            throw std::invalid_argument("OpticalParams: concentrator_index must be >= 1");
        }
    }

    /// Optical concentrator gain n^2 / sin^2(FOV).
    double concentrator_gain() const {
        const double s = std::sin(fov_semi_angle_rad);
        return concentrator_index * concentrator_index / (s * s);
    }
};

/// DC gain of one LED -> PD link.
inline double gain(const Vec3& led_pos, const Vec3& pd_pos, const OpticalParams& params) {
    if (!(led_pos.z() > pd_pos.z())) {
        throw std::invalid_argument("gain: LED must be above the photodiode");
    }
    const Vec3 delta = led_pos - pd_pos;
    const double d2 = delta.squaredNorm();
    if (!(d2 > 0.0)) {
        throw std::invalid_argument("gain: zero LED-PD distance");
    }
    const double d = std::sqrt(d2);
    // Both normals are vertical, so irradiance and incidence angles coincide.
    const double cos_angle = delta.z() / d;
    const double incidence = std::acos(std::min(1.0, cos_angle));
    if (incidence > params.fov_semi_angle_rad) {
        return 0.0;
    }
    const double m = params.lambertian_order_m;
    return (m + 1.0) * params.pd_area_m2 / (2.0 * std::numbers::pi * d2) * std::pow(cos_angle, m) *
           params.filter_gain * params.concentrator_gain() * cos_angle;
}

/// K x L nonnegative gain matrix (rows are users, columns LEDs).
class ChannelMatrix {
public:
    ChannelMatrix() = default;

    explicit ChannelMatrix(Eigen::MatrixXd gains) : gains_(std::move(gains)) {
        if (gains_.rows() < 1 || gains_.cols() < 1) {
            throw std::invalid_argument("ChannelMatrix: empty matrix");
        }
        for (Eigen::Index i = 0; i < gains_.size(); ++i) {
            const double g = gains_.data()[i];
            if (!std::isfinite(g) || g < 0.0) {
                throw std::invalid_argument("ChannelMatrix: entries must be finite and nonnegative");
            }
        }
    }

    const Eigen::MatrixXd& gains() const { return gains_; }
    int users() const { return static_cast<int>(gains_.rows()); }
    int leds() const { return static_cast<int>(gains_.cols()); }
    Eigen::VectorXd user(int k) const { return gains_.row(k).transpose(); }
    double operator()(int k, int l) const { return gains_(k, l); }

private:
    Eigen::MatrixXd gains_;
};

inline ChannelMatrix channel_matrix(const Scenario& scenario, const OpticalParams& params) {
    params.validate();
    const int k_users = scenario.num_users();
    const int n_leds = scenario.num_leds();
    Eigen::MatrixXd g(k_users, n_leds);
    for (int k = 0; k < k_users; ++k) {
        for (int l = 0; l < n_leds; ++l) {
            g(k, l) = gain(scenario.led_positions[static_cast<std::size_t>(l)],
                           scenario.user_positions[static_cast<std::size_t>(k)], params);
        }
    }
    return ChannelMatrix(std::move(g));
}

}  // namespace vlcprec
