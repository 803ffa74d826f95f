#pragma once

// Dense primal-dual interior point solver for second-order cone programs in
// inequality form
//
//     minimize    c'x
//     subject to  A x + s = b,   s in K,
//
// where K is a product of nonnegative orthants and second-order cones
// { (t, u) : ||u||_2 <= t }. The iteration runs on the homogeneous self-dual
// embedding with Nesterov-Todd scaling and a Mehrotra predictor-corrector, so
// infeasible and unbounded problems terminate with certificates.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <istream>
#include <limits>
#include <map>
#include <ostream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/QR>
#include <Eigen/Core>
#include <Eigen/SparseCore>

namespace vlcprec::socp {

enum class ConeKind { Nonneg, Soc };

struct ConeBlock {
    ConeKind kind = ConeKind::Nonneg;
    int dim = 0;

    friend bool operator==(const ConeBlock&, const ConeBlock&) = default;
};

struct ConeProgram {
    Eigen::VectorXd c;
    Eigen::SparseMatrix<double> A;
    Eigen::VectorXd b;
    std::vector<ConeBlock> cones;

    int num_vars() const { return static_cast<int>(c.size()); }
    int num_rows() const { return static_cast<int>(b.size()); }

    int num_soc() const {
        return static_cast<int>(std::count_if(cones.begin(), cones.end(),
                                              [](const ConeBlock& k) { return k.kind == ConeKind::Soc; }));
    }

    int num_nonneg_rows() const {
        int n = 0;
        for (const auto& k : cones) {
            if (k.kind == ConeKind::Nonneg) n += k.dim;
        }
        return n;
    }

    void validate() const {
        if (c.size() < 1) throw std::invalid_argument("ConeProgram: no variables");
        if (A.rows() != b.size() || A.cols() != c.size()) {
            throw std::invalid_argument("ConeProgram: A/b/c dimensions disagree");
        }
        long long total = 0;
        for (const auto& k : cones) {
            if (k.kind == ConeKind::Soc && k.dim < 2) {
                throw std::invalid_argument("ConeProgram: second-order cone blocks need dimension >= 2");
            }
            if (k.dim < 0) throw std::invalid_argument("ConeProgram: negative block dimension");
            total += k.dim;
        }
        if (total != b.size()) {
            throw std::invalid_argument("ConeProgram: cone blocks do not cover all rows");
        }
        if (!c.allFinite() || !b.allFinite()) {
            throw std::invalid_argument("ConeProgram: non-finite data");
        }
    }
};

/// Affine expression constant + sum coef * x[var].
struct AffineExpr {
    std::vector<std::pair<int, double>> terms;
    double constant = 0.0;

    AffineExpr() = default;
    explicit AffineExpr(double k) : constant(k) {}

    AffineExpr& add(int var, double coef) {
        if (coef != 0.0) terms.emplace_back(var, coef);
        return *this;
    }
};

/// Assembles a ConeProgram row by row. Consecutive nonnegative rows share a block.
class ProgramBuilder {
public:
    explicit ProgramBuilder(int num_vars) : c_(Eigen::VectorXd::Zero(num_vars)) {
        if (num_vars < 1) throw std::invalid_argument("ProgramBuilder: need at least one variable");
    }

    void set_objective(int var, double coef) {
        if (var < 0 || var >= c_.size()) throw std::out_of_range("ProgramBuilder: variable index");
        c_[var] = coef;
    }

    /// expr(x) >= 0
    void add_nonneg(const AffineExpr& expr) {
        push_row(expr);
        if (!cones_.empty() && cones_.back().kind == ConeKind::Nonneg) {
            ++cones_.back().dim;
        } else {
            cones_.push_back({ConeKind::Nonneg, 1});
        }
    }

    /// (e0(x), e1(x), ...) in the second-order cone, i.e. ||(e1, ...)|| <= e0.
    void add_soc(const std::vector<AffineExpr>& exprs) {
        if (exprs.size() < 2) throw std::invalid_argument("add_soc: dimension must be >= 2");
        for (const auto& e : exprs) push_row(e);
        cones_.push_back({ConeKind::Soc, static_cast<int>(exprs.size())});
    }

    int num_rows() const { return static_cast<int>(rhs_.size()); }

    ConeProgram build() const {
        ConeProgram p;
        p.c = c_;
        p.A.resize(num_rows(), c_.size());
        p.A.setFromTriplets(triplets_.begin(), triplets_.end());
        p.b = Eigen::Map<const Eigen::VectorXd>(rhs_.data(), static_cast<Eigen::Index>(rhs_.size()));
        p.cones = cones_;
        p.validate();
        return p;
    }

private:
    // s = b - A x, so the expression constant goes to b and its terms to -A.
    void push_row(const AffineExpr& e) {
        const int row = num_rows();
        for (const auto& [var, coef] : e.terms) {
            if (var < 0 || var >= c_.size()) throw std::out_of_range("ProgramBuilder: variable index");
            triplets_.emplace_back(row, var, -coef);
        }
        rhs_.push_back(e.constant);
    }

    Eigen::VectorXd c_;
    std::vector<Eigen::Triplet<double>> triplets_;
    std::vector<double> rhs_;
    std::vector<ConeBlock> cones_;
};

enum class SolveStatus { Optimal, PrimalInfeasible, DualInfeasible, MaxIterations };

inline const char* to_string(SolveStatus s) {
    switch (s) {
        case SolveStatus::Optimal: return "Optimal";
        case SolveStatus::PrimalInfeasible: return "PrimalInfeasible";
        case SolveStatus::DualInfeasible: return "DualInfeasible";
        case SolveStatus::MaxIterations: return "MaxIterations";
    }
    return "Unknown";
}

struct SolveSettings {
    double tol = 1e-8;
    int max_iter = 100;
    bool presolve = true;
    double step_fraction = 0.99;
};

struct Residuals {
    double primal = std::numeric_limits<double>::infinity();
    double dual = std::numeric_limits<double>::infinity();
    double gap = std::numeric_limits<double>::infinity();
};

struct Diagnostics {
    int rows_dropped = 0;
    double row_norm_ratio = 1.0;
    double col_norm_ratio = 1.0;
};

struct SolveResult {
    SolveStatus status = SolveStatus::MaxIterations;
    Eigen::VectorXd x;
    Eigen::VectorXd s;
    Eigen::VectorXd z;
    double objective_value = std::numeric_limits<double>::quiet_NaN();
    double dual_objective = std::numeric_limits<double>::quiet_NaN();
    Residuals residuals;
    int iterations = 0;
    /// Farkas ray: y >= 0 in K with A'y = 0, b'y = -1 (PrimalInfeasible), or
    /// a direction x with c'x = -1 and -Ax in K (DualInfeasible).
    Eigen::VectorXd certificate;
    double certificate_residual = std::numeric_limits<double>::quiet_NaN();
    Diagnostics diagnostics;
};

namespace detail {

struct Block {
    ConeKind kind;
    Eigen::Index offset;
    Eigen::Index dim;
};

class Cones {
public:
    explicit Cones(const std::vector<ConeBlock>& spec) {
        Eigen::Index off = 0;
        for (const auto& k : spec) {
            if (k.dim == 0) continue;
            blocks_.push_back({k.kind, off, k.dim});
            off += k.dim;
            degree_ += k.kind == ConeKind::Nonneg ? k.dim : 1;
        }
        size_ = off;
    }

    const std::vector<Block>& blocks() const { return blocks_; }
    Eigen::Index size() const { return size_; }
    double degree() const { return static_cast<double>(degree_); }

    Eigen::VectorXd identity() const {
        Eigen::VectorXd e = Eigen::VectorXd::Zero(size_);
        for (const auto& b : blocks_) {
            if (b.kind == ConeKind::Nonneg) {
                e.segment(b.offset, b.dim).setOnes();
            } else {
                e[b.offset] = 1.0;
            }
        }
        return e;
    }

    /// Smallest eigenvalue in the Jordan-algebra sense.
    double min_eig(const Eigen::VectorXd& u) const {
        double m = std::numeric_limits<double>::infinity();
        for (const auto& b : blocks_) {
            if (b.kind == ConeKind::Nonneg) {
                m = std::min(m, u.segment(b.offset, b.dim).minCoeff());
            } else {
                m = std::min(m, u[b.offset] - u.segment(b.offset + 1, b.dim - 1).norm());
            }
        }
        return m;
    }

    Eigen::VectorXd jprod(const Eigen::VectorXd& u, const Eigen::VectorXd& v) const {
        Eigen::VectorXd w(size_);
        for (const auto& b : blocks_) {
            if (b.kind == ConeKind::Nonneg) {
                w.segment(b.offset, b.dim) = u.segment(b.offset, b.dim).cwiseProduct(v.segment(b.offset, b.dim));
            } else {
                const double u0 = u[b.offset];
                const double v0 = v[b.offset];
                const auto u1 = u.segment(b.offset + 1, b.dim - 1);
                const auto v1 = v.segment(b.offset + 1, b.dim - 1);
                w[b.offset] = u.segment(b.offset, b.dim).dot(v.segment(b.offset, b.dim));
                w.segment(b.offset + 1, b.dim - 1) = u0 * v1 + v0 * u1;
            }
        }
        return w;
    }

    /// Solves lambda o x = d for x.
    Eigen::VectorXd jdiv(const Eigen::VectorXd& lambda, const Eigen::VectorXd& d) const {
        Eigen::VectorXd x(size_);
        for (const auto& b : blocks_) {
            if (b.kind == ConeKind::Nonneg) {
                x.segment(b.offset, b.dim) = d.segment(b.offset, b.dim).cwiseQuotient(lambda.segment(b.offset, b.dim));
            } else {
                const double l0 = lambda[b.offset];
                const auto l1 = lambda.segment(b.offset + 1, b.dim - 1);
                const double d0 = d[b.offset];
                const auto d1 = d.segment(b.offset + 1, b.dim - 1);
                const double det = (l0 - l1.norm()) * (l0 + l1.norm());
                const double x0 = (l0 * d0 - l1.dot(d1)) / det;
                x[b.offset] = x0;
                x.segment(b.offset + 1, b.dim - 1) = (d1 - x0 * l1) / l0;
            }
        }
        return x;
    }

    /// Largest alpha with u + alpha du in K, for u in the interior. +inf if unbounded.
    double max_step(const Eigen::VectorXd& u, const Eigen::VectorXd& du) const {
        double alpha = std::numeric_limits<double>::infinity();
        for (const auto& b : blocks_) {
            if (b.kind == ConeKind::Nonneg) {
                for (Eigen::Index i = b.offset; i < b.offset + b.dim; ++i) {
                    if (du[i] < 0.0) alpha = std::min(alpha, -u[i] / du[i]);
                }
            } else {
                alpha = std::min(alpha, soc_step(u.segment(b.offset, b.dim), du.segment(b.offset, b.dim)));
            }
        }
        return alpha;
    }

private:
    static double soc_step(const Eigen::Ref<const Eigen::VectorXd>& u, const Eigen::Ref<const Eigen::VectorXd>& du) {
        // f(a) = (u0 + a du0)^2 - ||u1 + a du1||^2 = qa a^2 + 2 qb a + qc with qc > 0.
        // The ray leaves the cone at the smallest positive root of f.
        const auto n = u.size() - 1;
        const double un = u.tail(n).norm();
        const double qc = (u[0] - un) * (u[0] + un);
        const double qb = u[0] * du[0] - u.tail(n).dot(du.tail(n));
        const double qa = du[0] * du[0] - du.tail(n).squaredNorm();
        const double inf = std::numeric_limits<double>::infinity();
        if (!(qc > 0.0) || !(u[0] > 0.0)) return 0.0;
        if (qa == 0.0) return qb < 0.0 ? -qc / (2.0 * qb) : inf;
        const double disc = qb * qb - qa * qc;
        if (disc < 0.0) return inf;
        const double t = -(qb + std::copysign(std::sqrt(disc), qb));
        double best = inf;
        if (t != 0.0) {
            for (double r : {t / qa, qc / t}) {
                if (r > 0.0) best = std::min(best, r);
            }
        }
        return best;
    }

    std::vector<Block> blocks_;
    Eigen::Index size_ = 0;
    long long degree_ = 0;
};

/// Nesterov-Todd scaling W with W z = W^{-1} s = lambda. W is symmetric.
struct NtScaling {
    struct SocPart {
        Eigen::MatrixXd w;
        Eigen::MatrixXd winv;
    };

    const Cones* cones = nullptr;
    Eigen::VectorXd d;  // nonneg rows: sqrt(s/z); SOC rows unused
    std::vector<SocPart> soc;
    Eigen::VectorXd lambda;

    static NtScaling compute(const Cones& k, const Eigen::VectorXd& s, const Eigen::VectorXd& z) {
        NtScaling sc;
        sc.cones = &k;
        sc.d = Eigen::VectorXd::Ones(k.size());
        for (const auto& b : k.blocks()) {
            if (b.kind == ConeKind::Nonneg) {
                const auto sb = s.segment(b.offset, b.dim);
                const auto zb = z.segment(b.offset, b.dim);
                sc.d.segment(b.offset, b.dim) = sb.cwiseQuotient(zb).cwiseSqrt();
            } else {
                const Eigen::Index n = b.dim - 1;
                const auto sb = s.segment(b.offset, b.dim);
                const auto zb = z.segment(b.offset, b.dim);
                const double s1n = sb.tail(n).norm();
                const double z1n = zb.tail(n).norm();
                const double sn = std::sqrt((sb[0] - s1n) * (sb[0] + s1n));
                const double zn = std::sqrt((zb[0] - z1n) * (zb[0] + z1n));
                const Eigen::VectorXd sbar = sb / sn;
                const Eigen::VectorXd zbar = zb / zn;
                const double gamma = std::sqrt(0.5 * (1.0 + sbar.dot(zbar)));
                const double w0 = (sbar[0] + zbar[0]) / (2.0 * gamma);
                const Eigen::VectorXd w1 = (sbar.tail(n) - zbar.tail(n)) / (2.0 * gamma);
                const double eta = std::sqrt(sn / zn);
                SocPart part;
                part.w.resize(b.dim, b.dim);
                part.w(0, 0) = w0;
                part.w.block(0, 1, 1, n) = w1.transpose();
                part.w.block(1, 0, n, 1) = w1;
                part.w.block(1, 1, n, n) =
                    Eigen::MatrixXd::Identity(n, n) + w1 * w1.transpose() / (1.0 + w0);
                part.winv = part.w;
                part.winv.block(0, 1, 1, n) *= -1.0;
                part.winv.block(1, 0, n, 1) *= -1.0;
                part.w *= eta;
                part.winv /= eta;
                sc.soc.push_back(std::move(part));
            }
        }
        sc.lambda = sc.apply_w(z);
        return sc;
    }

    template <bool Inverse, class Mat>
    Mat apply(const Mat& v) const {
        Mat out(v.rows(), v.cols());
        std::size_t si = 0;
        for (const auto& b : cones->blocks()) {
            if (b.kind == ConeKind::Nonneg) {
                const auto db = d.segment(b.offset, b.dim);
                if constexpr (Inverse) {
                    out.middleRows(b.offset, b.dim) = db.cwiseInverse().asDiagonal() * v.middleRows(b.offset, b.dim);
                } else {
                    out.middleRows(b.offset, b.dim) = db.asDiagonal() * v.middleRows(b.offset, b.dim);
                }
            } else {
                const auto& m = Inverse ? soc[si].winv : soc[si].w;
                out.middleRows(b.offset, b.dim).noalias() = m * v.middleRows(b.offset, b.dim);
                ++si;
            }
        }
        return out;
    }

    Eigen::VectorXd apply_w(const Eigen::VectorXd& v) const { return apply<false>(v); }
    Eigen::VectorXd apply_winv(const Eigen::VectorXd& v) const { return apply<true>(v); }
    Eigen::MatrixXd apply_winv(const Eigen::MatrixXd& v) const { return apply<true>(v); }
};

/// Factorization of the reduced KKT system
///     [ 0  G' ] [dx]   [bx]
///     [ G -W2 ] [dz] = [bz]
/// through the normal matrix (W^-1 G)'(W^-1 G).
class KktSolver {
public:
    KktSolver(const Eigen::MatrixXd& g, const NtScaling& scaling) : g_(g), scaling_(scaling) {
        y_ = scaling.apply_winv(g);
        // R from a QR of W^-1 G gives the normal matrix R'R without squaring
        // the condition number.
        const Eigen::Index n = g.cols();
        Eigen::MatrixXd stacked(y_.rows() + n, n);
        stacked.topRows(y_.rows()) = y_;
        const double scale = std::max(1.0, y_.colwise().norm().maxCoeff());
        stacked.bottomRows(n) = Eigen::MatrixXd::Identity(n, n) * (1e-10 * scale);
        qr_.compute(stacked);
        r_ = qr_.matrixQR().topRows(n).triangularView<Eigen::Upper>();
        ok_ = r_.diagonal().allFinite() && (r_.diagonal().array() != 0.0).all();
    }

    bool ok() const { return ok_; }

    void solve(const Eigen::VectorXd& bx, const Eigen::VectorXd& bz, Eigen::VectorXd& dx, Eigen::VectorXd& dz) const {
        // Work with u = W dz so that the system reads Y'u = bx, Y dx - u = W^-1 bz
        // and residuals never touch W^2.
        const Eigen::VectorXd r = scaling_.apply_winv(bz);
        Eigen::VectorXd u;
        solve_scaled(bx, r, dx, u);
        const double ref = 1.0 + std::max(bx.lpNorm<Eigen::Infinity>(), r.lpNorm<Eigen::Infinity>());
        for (int refine = 0; refine < 3; ++refine) {
            const Eigen::VectorXd ex = bx - y_.transpose() * u;
            const Eigen::VectorXd eu = r - (y_ * dx - u);
            const double err = std::max(ex.lpNorm<Eigen::Infinity>(), eu.lpNorm<Eigen::Infinity>());
            if (!(err > 1e-14 * ref)) break;
            Eigen::VectorXd cx, cu;
            solve_scaled(ex, eu, cx, cu);
            dx += cx;
            u += cu;
        }
        dz = scaling_.apply_winv(u);
    }

private:
    void solve_scaled(const Eigen::VectorXd& bx, const Eigen::VectorXd& r, Eigen::VectorXd& dx,
                      Eigen::VectorXd& u) const {
        Eigen::VectorXd rhs = bx + y_.transpose() * r;
        r_.triangularView<Eigen::Upper>().transpose().solveInPlace(rhs);
        r_.triangularView<Eigen::Upper>().solveInPlace(rhs);
        dx = std::move(rhs);
        u = y_ * dx - r;
    }

    const Eigen::MatrixXd& g_;
    const NtScaling& scaling_;
    Eigen::MatrixXd y_;
    Eigen::HouseholderQR<Eigen::MatrixXd> qr_;
    Eigen::MatrixXd r_;
    bool ok_ = false;
};

struct Presolved {
    Eigen::MatrixXd g;
    Eigen::VectorXd h;
    std::vector<ConeBlock> cones;
    std::vector<Eigen::Index> kept_rows;  // reduced row -> original row
    Eigen::Index infeasible_row = -1;
    int dropped = 0;
};

/// Removes zero rows and exact duplicate rows from nonnegative blocks.
inline Presolved presolve(const ConeProgram& p, bool enabled) {
    const Eigen::MatrixXd dense = Eigen::MatrixXd(p.A);
    Presolved out;
    std::map<std::vector<double>, int> seen;
    std::vector<Eigen::Index> rows;
    Eigen::Index offset = 0;
    for (const auto& blk : p.cones) {
        if (blk.kind == ConeKind::Soc || !enabled) {
            for (int i = 0; i < blk.dim; ++i) rows.push_back(offset + i);
            if (blk.dim > 0) out.cones.push_back(blk);
            offset += blk.dim;
            continue;
        }
        int kept = 0;
        for (int i = 0; i < blk.dim; ++i) {
            const Eigen::Index r = offset + i;
            const auto row = dense.row(r);
            if (row.cwiseAbs().maxCoeff() == 0.0) {
                if (p.b[r] < 0.0 && out.infeasible_row < 0) out.infeasible_row = r;
                ++out.dropped;
                continue;
            }
            std::vector<double> key(static_cast<std::size_t>(row.size()) + 1);
            for (Eigen::Index j = 0; j < row.size(); ++j) key[static_cast<std::size_t>(j)] = row[j];
            key.back() = p.b[r];
            if (!seen.emplace(std::move(key), 1).second) {
                ++out.dropped;
                continue;
            }
            rows.push_back(r);
            ++kept;
        }
        if (kept > 0) {
            if (!out.cones.empty() && out.cones.back().kind == ConeKind::Nonneg) {
                out.cones.back().dim += kept;
            } else {
                out.cones.push_back({ConeKind::Nonneg, kept});
            }
        }
        offset += blk.dim;
    }
    out.g.resize(static_cast<Eigen::Index>(rows.size()), dense.cols());
    out.h.resize(static_cast<Eigen::Index>(rows.size()));
    for (std::size_t i = 0; i < rows.size(); ++i) {
        out.g.row(static_cast<Eigen::Index>(i)) = dense.row(rows[i]);
        out.h[static_cast<Eigen::Index>(i)] = p.b[rows[i]];
    }
    out.kept_rows = std::move(rows);
    return out;
}

inline double norm_ratio(const Eigen::VectorXd& norms) {
    double lo = std::numeric_limits<double>::infinity();
    double hi = 0.0;
    for (Eigen::Index i = 0; i < norms.size(); ++i) {
        if (norms[i] > 0.0) {
            lo = std::min(lo, norms[i]);
            hi = std::max(hi, norms[i]);
        }
    }
    return hi > 0.0 ? hi / lo : 1.0;
}

/// Shift u into the cone interior so its smallest eigenvalue is at least 1.
inline void shift_interior(const Cones& k, Eigen::VectorXd& u) {
    const double t = -k.min_eig(u);
    if (t >= -1e-8 * std::max(1.0, u.norm())) u += (1.0 + t) * k.identity();
}

}  // namespace detail

inline SolveResult solve(const ConeProgram& program, const SolveSettings& settings = {}) {
    program.validate();
    if (!(settings.tol > 0.0) || settings.max_iter < 1) {
        throw std::invalid_argument("solve: tol must be positive and max_iter >= 1");
    }
    const auto n = static_cast<Eigen::Index>(program.num_vars());
    const auto m_full = static_cast<Eigen::Index>(program.num_rows());

    SolveResult res;
    detail::Presolved pre = detail::presolve(program, settings.presolve);
    res.diagnostics.rows_dropped = pre.dropped;

    const auto expand = [&](const Eigen::VectorXd& reduced) {
        Eigen::VectorXd full = Eigen::VectorXd::Zero(m_full);
        for (std::size_t i = 0; i < pre.kept_rows.size(); ++i) {
            full[pre.kept_rows[i]] = reduced[static_cast<Eigen::Index>(i)];
        }
        return full;
    };

    if (pre.infeasible_row >= 0) {
        // A zero row with negative right-hand side: e_i / (-b_i) is a Farkas ray.
        res.status = SolveStatus::PrimalInfeasible;
        res.certificate = Eigen::VectorXd::Zero(m_full);
        res.certificate[pre.infeasible_row] = -1.0 / program.b[pre.infeasible_row];
        res.certificate_residual = 0.0;
        res.x = Eigen::VectorXd::Zero(n);
        return res;
    }

    const Eigen::MatrixXd& g = pre.g;
    const Eigen::VectorXd& h = pre.h;
    const Eigen::VectorXd& c = program.c;
    const detail::Cones cones(pre.cones);
    const Eigen::Index m = g.rows();

    res.diagnostics.row_norm_ratio = detail::norm_ratio(g.rowwise().norm());
    res.diagnostics.col_norm_ratio = detail::norm_ratio(g.colwise().norm().transpose());

    const double hnorm = std::max(1.0, h.norm());
    const double cnorm = std::max(1.0, c.norm());

    // Initial point from two least-squares problems with W = I.
    Eigen::VectorXd x, s, z;
    {
        detail::NtScaling ident;
        ident.cones = &cones;
        ident.d = Eigen::VectorXd::Ones(m);
        for (const auto& b : cones.blocks()) {
            if (b.kind == ConeKind::Soc) {
                ident.soc.push_back({Eigen::MatrixXd::Identity(b.dim, b.dim), Eigen::MatrixXd::Identity(b.dim, b.dim)});
            }
        }
        detail::KktSolver kkt(g, ident);
        Eigen::VectorXd dz;
        kkt.solve(Eigen::VectorXd::Zero(n), h, x, dz);
        s = -dz;
        Eigen::VectorXd xd;
        kkt.solve(-c, Eigen::VectorXd::Zero(m), xd, z);
        detail::shift_interior(cones, s);
        detail::shift_interior(cones, z);
    }
    double tau = 1.0;
    double kappa = 1.0;

    const Eigen::VectorXd e = cones.identity();
    const double degree = cones.degree();

    for (int iter = 0;; ++iter) {
        res.iterations = iter;

        const Eigen::VectorXd rx = g.transpose() * z + c * tau;
        const Eigen::VectorXd rz = g * x + s - h * tau;
        const double cx = c.dot(x);
        const double hz = h.dot(z);
        const double rt = kappa + cx + hz;

        const double pres = rz.norm() / (tau * hnorm);
        const double dres = rx.norm() / (tau * cnorm);
        const double pcost = cx / tau;
        const double dcost = -hz / tau;
        const double gap = s.dot(z) / (tau * tau);
        const double relgap = gap / std::max(1.0, std::abs(pcost));

        if (!std::isfinite(pres) || !std::isfinite(dres) || !std::isfinite(gap)) break;

        res.residuals = {pres, dres, relgap};
        res.x = x / tau;
        res.s = expand(s / tau);
        res.z = expand(z / tau);
        res.objective_value = pcost;
        res.dual_objective = dcost;

        if (pres <= settings.tol && dres <= settings.tol && relgap <= settings.tol) {
            res.status = SolveStatus::Optimal;
            return res;
        }
        if (hz < 0.0) {
            const double pinf = (g.transpose() * z).norm() / (-hz);
            if (pinf <= settings.tol) {
                res.status = SolveStatus::PrimalInfeasible;
                res.certificate = expand(z / (-hz));
                res.certificate_residual = pinf;
                return res;
            }
        }
        if (cx < 0.0) {
            const double dinf = (g * x + s).norm() / (-cx);
            if (dinf <= settings.tol) {
                res.status = SolveStatus::DualInfeasible;
                res.certificate = x / (-cx);
                res.certificate_residual = dinf;
                return res;
            }
        }
        if (iter >= settings.max_iter) break;

        const detail::NtScaling scaling = detail::NtScaling::compute(cones, s, z);
        const detail::KktSolver kkt(g, scaling);
        if (!kkt.ok()) break;
        const Eigen::VectorXd& lambda = scaling.lambda;

        Eigen::VectorXd x1, z1;
        kkt.solve(-c, h, x1, z1);
        const double denom = c.dot(x1) + h.dot(z1) - kappa / tau;

        struct Direction {
            Eigen::VectorXd dx, ds, dz;
            double dtau = 0.0;
            double dkappa = 0.0;
        };
        const auto direction = [&](double eta_res, const Eigen::VectorXd& rhs_s, double rhs_k) {
            Direction d;
            const Eigen::VectorXd xi = cones.jdiv(lambda, rhs_s);
            const Eigen::VectorXd wxi = scaling.apply_w(xi);
            Eigen::VectorXd x0, z0;
            kkt.solve(-eta_res * rx, -eta_res * rz - wxi, x0, z0);
            d.dtau = (-eta_res * rt - rhs_k / tau - c.dot(x0) - h.dot(z0)) / denom;
            d.dx = x0 + d.dtau * x1;
            d.dz = z0 + d.dtau * z1;
            // From the linearized primal equation rather than W(xi - W dz):
            // W is badly conditioned near the optimum and would inflate rz.
            d.ds = -eta_res * rz - g * d.dx + h * d.dtau;
            d.dkappa = (rhs_k - kappa * d.dtau) / tau;
            return d;
        };
        const auto step_to_boundary = [&](const Direction& d) {
            double a = std::min(cones.max_step(s, d.ds), cones.max_step(z, d.dz));
            if (d.dtau < 0.0) a = std::min(a, -tau / d.dtau);
            if (d.dkappa < 0.0) a = std::min(a, -kappa / d.dkappa);
            return a;
        };

        const double mu = (s.dot(z) + tau * kappa) / (degree + 1.0);

        // Predictor.
        const Eigen::VectorXd ll = cones.jprod(lambda, lambda);
        const Direction aff = direction(1.0, -ll, -tau * kappa);
        const double alpha_aff = std::min(1.0, step_to_boundary(aff));
        const double sigma = std::clamp(std::pow(1.0 - alpha_aff, 3), 0.0, 1.0);

        // Corrector with the second-order term.
        const Eigen::VectorXd ds_scaled = scaling.apply_winv(aff.ds);
        const Eigen::VectorXd dz_scaled = scaling.apply_w(aff.dz);
        const Eigen::VectorXd rhs_s = -ll - cones.jprod(ds_scaled, dz_scaled) + sigma * mu * e;
        const double rhs_k = -tau * kappa - aff.dtau * aff.dkappa + sigma * mu;
        const Direction cmb = direction(1.0 - sigma, rhs_s, rhs_k);

        const double alpha = std::min(1.0, settings.step_fraction * step_to_boundary(cmb));
        if (!(alpha > 1e-12)) break;

        x += alpha * cmb.dx;
        s += alpha * cmb.ds;
        z += alpha * cmb.dz;
        tau += alpha * cmb.dtau;
        kappa += alpha * cmb.dkappa;
    }
    res.status = SolveStatus::MaxIterations;
    return res;
}

/// Plain-text program dump: dimensions, cone list, c, b, then A as triplets.
inline void write_text(std::ostream& os, const ConeProgram& p) {
    os.precision(17);
    os << "vlcprec-coneprog 1\n";
    os << "vars " << p.num_vars() << "\nrows " << p.num_rows() << "\ncones " << p.cones.size() << "\n";
    for (const auto& k : p.cones) {
        os << (k.kind == ConeKind::Nonneg ? "nonneg " : "soc ") << k.dim << "\n";
    }
    os << "c";
    for (Eigen::Index i = 0; i < p.c.size(); ++i) os << ' ' << p.c[i];
    os << "\nb";
    for (Eigen::Index i = 0; i < p.b.size(); ++i) os << ' ' << p.b[i];
    os << "\nA " << p.A.nonZeros() << "\n";
    for (int col = 0; col < p.A.outerSize(); ++col) {
        for (Eigen::SparseMatrix<double>::InnerIterator it(p.A, col); it; ++it) {
            os << it.row() << ' ' << it.col() << ' ' << it.value() << "\n";
        }
    }
}

inline ConeProgram read_text(std::istream& is) {
    const auto fail = [](const std::string& what) {
        return std::runtime_error("read_text: malformed cone program (" + what + ")");
    };
    std::string tag;
    int version = 0;
    if (!(is >> tag >> version) || tag != "vlcprec-coneprog" || version != 1) throw fail("header");
    long long n = 0, m = 0;
    std::size_t ncones = 0;
    if (!(is >> tag >> n) || tag != "vars") throw fail("vars");
    if (!(is >> tag >> m) || tag != "rows") throw fail("rows");
    if (!(is >> tag >> ncones) || tag != "cones") throw fail("cones");
    ConeProgram p;
    for (std::size_t i = 0; i < ncones; ++i) {
        int dim = 0;
        if (!(is >> tag >> dim)) throw fail("cone entry");
        if (tag == "nonneg") {
            p.cones.push_back({ConeKind::Nonneg, dim});
        } else if (tag == "soc") {
            p.cones.push_back({ConeKind::Soc, dim});
        } else {
            throw fail("cone kind '" + tag + "'");
        }
    }
    p.c.resize(n);
    if (!(is >> tag) || tag != "c") throw fail("c");
    for (long long i = 0; i < n; ++i) {
        if (!(is >> p.c[i])) throw fail("c value");
    }
    p.b.resize(m);
    if (!(is >> tag) || tag != "b") throw fail("b");
    for (long long i = 0; i < m; ++i) {
        if (!(is >> p.b[i])) throw fail("b value");
    }
    long long nnz = 0;
    if (!(is >> tag >> nnz) || tag != "A") throw fail("A");
    std::vector<Eigen::Triplet<double>> trips;
    trips.reserve(static_cast<std::size_t>(nnz));
    for (long long k = 0; k < nnz; ++k) {
        long long i = 0, j = 0;
        double v = 0.0;
        if (!(is >> i >> j >> v) || i < 0 || i >= m || j < 0 || j >= n) throw fail("triplet");
        trips.emplace_back(static_cast<int>(i), static_cast<int>(j), v);
    }
    p.A.resize(m, n);
    p.A.setFromTriplets(trips.begin(), trips.end());
    p.validate();
    return p;
}

}  // namespace vlcprec::socp
