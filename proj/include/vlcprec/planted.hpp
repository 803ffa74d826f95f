#pragma once

// Random cone programs with a known answer, used as a solver oracle.

#include <cstdint>
#include <vector>

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include "vlcprec/rng.hpp"
#include "vlcprec/socp.hpp"

namespace vlcprec::socp {

struct PlantedProgram {
    ConeProgram program;
    Eigen::VectorXd x_star;
    Eigen::VectorXd s_star;
    Eigen::VectorXd z_star;
    double objective = 0.0;
};

struct InfeasibleProgram {
    ConeProgram program;
    Eigen::VectorXd farkas;  // z in K with A'z = 0, b'z = -1
};

namespace detail {

inline double gaussian(Rng& rng) {
    // Box-Muller; portable across standard libraries unlike <random> distributions.
    const double u1 = 1.0 - rng.uniform01();
    const double u2 = rng.uniform01();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
}

inline Eigen::VectorXd gaussian_vector(Eigen::Index n, Rng& rng) {
    Eigen::VectorXd v(n);
    for (Eigen::Index i = 0; i < n; ++i) v[i] = gaussian(rng);
    return v;
}

inline std::vector<ConeBlock> random_cones(int nonneg, int soc_count, int soc_dim_max, Rng& rng) {
    std::vector<ConeBlock> cones;
    if (nonneg > 0) cones.push_back({ConeKind::Nonneg, nonneg});
    for (int i = 0; i < soc_count; ++i) {
        const int dim = 2 + static_cast<int>(rng.uniform01() * (soc_dim_max - 1));
        cones.push_back({ConeKind::Soc, std::min(dim, soc_dim_max)});
    }
    return cones;
}

inline Eigen::SparseMatrix<double> to_sparse(const Eigen::MatrixXd& a) { return a.sparseView(); }

}  // namespace detail

/// Complementary (s*, z*) pairs are drawn per block, half on the boundary of
/// both cones, then b = A x* + s* and c = -A'z* make x* optimal.
inline PlantedProgram make_planted(int vars, int nonneg, int soc_count, int soc_dim_max, std::uint64_t seed) {
    Rng rng(seed);
    const auto cones = detail::random_cones(nonneg, soc_count, soc_dim_max, rng);
    int m = 0;
    for (const auto& b : cones) m += b.dim;

    Eigen::VectorXd s = Eigen::VectorXd::Zero(m);
    Eigen::VectorXd z = Eigen::VectorXd::Zero(m);
    int off = 0;
    for (const auto& b : cones) {
        if (b.kind == ConeKind::Nonneg) {
            for (int i = 0; i < b.dim; ++i) {
                if (rng.uniform01() < 0.5) {
                    s[off + i] = rng.uniform(0.1, 2.0);
                } else {
                    z[off + i] = rng.uniform(0.1, 2.0);
                }
            }
        } else {
            const Eigen::VectorXd u = detail::gaussian_vector(b.dim - 1, rng);
            const double r = u.norm();
            const double mode = rng.uniform01();
            if (mode < 0.5) {
                const double a = rng.uniform(0.2, 2.0);
                s[off] = r;
                s.segment(off + 1, b.dim - 1) = u;
                z[off] = a * r;
                z.segment(off + 1, b.dim - 1) = -a * u;
            } else if (mode < 0.75) {
                s[off] = r + rng.uniform(0.2, 1.0);
                s.segment(off + 1, b.dim - 1) = u;
            } else {
                z[off] = r + rng.uniform(0.2, 1.0);
                z.segment(off + 1, b.dim - 1) = u;
            }
        }
        off += b.dim;
    }

    Eigen::MatrixXd a(m, vars);
    for (Eigen::Index i = 0; i < a.size(); ++i) a.data()[i] = detail::gaussian(rng);
    const Eigen::VectorXd x = detail::gaussian_vector(vars, rng);

    PlantedProgram p;
    p.program.A = detail::to_sparse(a);
    p.program.b = a * x + s;
    p.program.c = -a.transpose() * z;
    p.program.cones = cones;
    p.program.validate();
    p.x_star = x;
    p.s_star = s;
    p.z_star = z;
    p.objective = p.program.c.dot(x);
    return p;
}

/// A program with a planted Farkas ray: z in int K, A'z = 0, b'z = -1.
inline InfeasibleProgram make_infeasible(int vars, int nonneg, int soc_count, int soc_dim_max, std::uint64_t seed) {
    Rng rng(seed);
    const auto cones = detail::random_cones(nonneg, soc_count, soc_dim_max, rng);
    int m = 0;
    for (const auto& b : cones) m += b.dim;

    Eigen::VectorXd z(m);
    int off = 0;
    for (const auto& b : cones) {
        if (b.kind == ConeKind::Nonneg) {
            for (int i = 0; i < b.dim; ++i) z[off + i] = rng.uniform(0.5, 2.0);
        } else {
            const Eigen::VectorXd u = detail::gaussian_vector(b.dim - 1, rng);
            z[off] = u.norm() + rng.uniform(0.5, 1.5);
            z.segment(off + 1, b.dim - 1) = u;
        }
        off += b.dim;
    }
    Eigen::MatrixXd a(m, vars);
    for (Eigen::Index i = 0; i < a.size(); ++i) a.data()[i] = detail::gaussian(rng);
    const double zz = z.squaredNorm();
    a -= z * (z.transpose() * a) / zz;
    Eigen::VectorXd b = detail::gaussian_vector(m, rng);
    b -= z * ((b.dot(z) + 1.0) / zz);

    InfeasibleProgram p;
    p.program.A = detail::to_sparse(a);
    p.program.b = b;
    p.program.c = detail::gaussian_vector(vars, rng);
    p.program.cones = cones;
    p.program.validate();
    p.farkas = z;
    return p;
}

}  // namespace vlcprec::socp
