#pragma once

// Reference computations written independently of the library code paths.

#include <cmath>
#include <numbers>
#include <vector>

#include <Eigen/Core>

namespace oracle {

/// Lambertian LOS gain from explicit angles (atan2 based), vertical normals.
inline double lambertian(const Eigen::Vector3d& led, const Eigen::Vector3d& pd, double m, double area, double fov,
                         double tf, double n) {
    const double dx = led.x() - pd.x(), dy = led.y() - pd.y(), dz = led.z() - pd.z();
    const double horiz = std::hypot(dx, dy);
    const double angle = std::atan2(horiz, dz);
    if (angle > fov) return 0.0;
    const double d2 = horiz * horiz + dz * dz;
    const double conc = (n * n) / std::pow(std::sin(fov), 2);
    return (m + 1.0) * area / (2.0 * std::numbers::pi * d2) * std::pow(std::cos(angle), m) * tf * conc *
           std::cos(angle);
}

/// Corners of a box by recursion over components.
inline void corners(const Eigen::VectorXd& lo, const Eigen::VectorXd& hi, Eigen::Index l, Eigen::VectorXd& cur,
                    std::vector<Eigen::VectorXd>& out) {
    if (l == lo.size()) {
        out.push_back(cur);
        return;
    }
    cur[l] = lo[l];
    corners(lo, hi, l + 1, cur, out);
    cur[l] = hi[l];
    corners(lo, hi, l + 1, cur, out);
}

inline std::vector<Eigen::VectorXd> corners(const Eigen::VectorXd& lo, const Eigen::VectorXd& hi) {
    std::vector<Eigen::VectorXd> out;
    Eigen::VectorXd cur(lo.size());
    corners(lo, hi, 0, cur, out);
    return out;
}

/// SNIR written out as sums, no matrix products.
inline double snir(const Eigen::VectorXd& h, const Eigen::MatrixXd& w, int k, double sigma2, double rho) {
    auto dot = [&](int col) {
        double s = 0.0;
        for (Eigen::Index l = 0; l < h.size(); ++l) s += h[l] * w(l, col);
        return s;
    };
    const double sig = rho * rho * dot(k) * dot(k);
    double den = sigma2;
    for (int i = 0; i < w.cols(); ++i) {
        if (i != k) den += rho * rho * dot(i) * dot(i);
    }
    return sig / den;
}

/// Single user, single LED: smallest |w| with rho h w / sigma >= sqrt(gamma), times A.
inline double single_link_headroom(double h, double sigma2, double rho, double gamma, double amplitude) {
    return amplitude * std::sqrt(gamma) * std::sqrt(sigma2) / (rho * h);
}

}  // namespace oracle
